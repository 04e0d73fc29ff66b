#pragma once

#include "antnet.hpp"
#include "baselines.hpp"
#include "engine.hpp"
#include "experiment.hpp"
#include "metrics.hpp"
#include "network.hpp"
#include "packet.hpp"
#include "routing.hpp"
#include "topology.hpp"
#include "traffic.hpp"
