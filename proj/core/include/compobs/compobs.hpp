#pragma once

// Umbrella header pulling in the whole public surface of the library.

#include "compobs/concentration.hpp"
#include "compobs/errors.hpp"
#include "compobs/experiments.hpp"
#include "compobs/grid.hpp"
#include "compobs/measure.hpp"
#include "compobs/parallel.hpp"
#include "compobs/recovery.hpp"
#include "compobs/report.hpp"
#include "compobs/rng.hpp"
#include "compobs/system.hpp"
