#pragma once

#include "ergolab/core.hpp"
#include "ergolab/measure_spaces.hpp"
#include "ergolab/sequences.hpp"
#include "ergolab/exponential_sums.hpp"
#include "ergolab/ergodic_averages.hpp"
#include "ergolab/seminorms.hpp"
#include "ergolab/flows.hpp"
#include "ergolab/random_families.hpp"
#include "ergolab/lab.hpp"
