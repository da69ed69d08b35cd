#pragma once
// Umbrella header.

#include "priorshift/correction.hpp"
#include "priorshift/error.hpp"
#include "priorshift/estimation.hpp"
#include "priorshift/evaluation.hpp"
#include "priorshift/io.hpp"
#include "priorshift/online.hpp"
#include "priorshift/random.hpp"
#include "priorshift/simplex.hpp"
#include "priorshift/synthesis.hpp"
#include "priorshift/types.hpp"
