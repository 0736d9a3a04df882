#pragma once

#include "assembly.hpp"
#include "branches.hpp"
#include "coefficients.hpp"
#include "error.hpp"
#include "grid.hpp"
#include "interpolation.hpp"
#include "solver.hpp"
