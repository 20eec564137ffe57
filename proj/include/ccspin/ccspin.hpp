// ccspin.hpp: Umbrella header.

#pragma once

#include "ccspin/errors.hpp"
#include "ccspin/hilbert.hpp"
#include "ccspin/params.hpp"
#include "ccspin/hamiltonians.hpp"
#include "ccspin/evolve.hpp"
#include "ccspin/analysis.hpp"
#include "ccspin/design.hpp"
#include "ccspin/config.hpp"
#include "ccspin/io.hpp"
