#pragma once

#include "qnet/network.hpp"
#include "qnet/skr.hpp"
#include "qnet/channel.hpp"
#include "qnet/topology.hpp"
#include "qnet/scheduler.hpp"
#include "qnet/rate_region.hpp"
#include "qnet/io.hpp"
#include "qnet/scenarios.hpp"
#include "qnet/experiment.hpp"
