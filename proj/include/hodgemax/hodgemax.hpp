#pragma once

// Umbrella header.

#include "hodgemax/error.hpp"
#include "hodgemax/simplicial_complex.hpp"
#include "hodgemax/dec.hpp"
#include "hodgemax/spectral.hpp"
#include "hodgemax/nonlinearity.hpp"
#include "hodgemax/inner_minimizer.hpp"
#include "hodgemax/reduced_functional.hpp"
#include "hodgemax/saddle_search.hpp"
#include "hodgemax/continuation.hpp"
#include "hodgemax/config.hpp"
#include "hodgemax/pipeline.hpp"
