#pragma once

#include "latbound/errors.hpp"
#include "latbound/norms.hpp"
#include "latbound/lattice.hpp"
#include "latbound/enumerate.hpp"
#include "latbound/generators.hpp"
#include "latbound/random.hpp"
#include "latbound/transform_table.hpp"
#include "latbound/test_functions.hpp"
#include "latbound/hypotheses.hpp"
#include "latbound/optimize.hpp"
#include "latbound/bounds.hpp"
#include "latbound/lattice_sum.hpp"
#include "latbound/verify.hpp"
#include "latbound/io.hpp"
#include "latbound/manifest.hpp"
