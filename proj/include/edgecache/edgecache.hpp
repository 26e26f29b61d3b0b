#pragma once

#include "edgecache/baselines.hpp"
#include "edgecache/cache.hpp"
#include "edgecache/catalog.hpp"
#include "edgecache/client.hpp"
#include "edgecache/coop.hpp"
#include "edgecache/lp.hpp"
#include "edgecache/proposed.hpp"
#include "edgecache/rng.hpp"
#include "edgecache/scenario.hpp"
#include "edgecache/sim.hpp"
#include "edgecache/solver.hpp"
#include "edgecache/sweep.hpp"
#include "edgecache/topology.hpp"
#include "edgecache/types.hpp"
