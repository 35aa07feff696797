#pragma once

#include "mobius_like/characters.hpp"
#include "mobius_like/core_arith.hpp"
#include "mobius_like/dirichlet_series.hpp"
#include "mobius_like/errors.hpp"
#include "mobius_like/growth.hpp"
#include "mobius_like/hyperbola.hpp"
#include "mobius_like/mult_functions.hpp"
#include "mobius_like/partial_sums.hpp"
#include "mobius_like/perturbation.hpp"
#include "mobius_like/random_model.hpp"
#include "mobius_like/segmented_sieve.hpp"
