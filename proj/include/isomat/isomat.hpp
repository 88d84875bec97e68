#pragma once

#include <isomat/csv.hpp>
#include <isomat/grid.hpp>
#include <isomat/harness.hpp>
#include <isomat/lower_sets.hpp>
#include <isomat/lowerbound.hpp>
#include <isomat/matrix_lse.hpp>
#include <isomat/partition.hpp>
#include <isomat/pava.hpp>
#include <isomat/rng.hpp>
#include <isomat/signals.hpp>
