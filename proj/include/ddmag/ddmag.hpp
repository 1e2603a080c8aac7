#pragma once

#include "ddmag/core.hpp"
#include "ddmag/phase.hpp"
#include "ddmag/signal.hpp"
#include "ddmag/density_matrix.hpp"
#include "ddmag/monte_carlo.hpp"
#include "ddmag/fit.hpp"
#include "ddmag/config.hpp"
#include "ddmag/scenario.hpp"
