#pragma once

#include "storesim/config.hpp"
#include "storesim/core.hpp"
#include "storesim/critical.hpp"
#include "storesim/csv.hpp"
#include "storesim/ctmc.hpp"
#include "storesim/decay.hpp"
#include "storesim/fluid.hpp"
#include "storesim/parallel.hpp"
#include "storesim/rng.hpp"
#include "storesim/skorokhod.hpp"
#include "storesim/stats.hpp"
#include "storesim/verify.hpp"
