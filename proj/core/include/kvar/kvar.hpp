#pragma once

#include "kvar/analytic.hpp"
#include "kvar/empirical_measure.hpp"
#include "kvar/error.hpp"
#include "kvar/experiments.hpp"
#include "kvar/kvariance.hpp"
#include "kvar/measures.hpp"
#include "kvar/random.hpp"
#include "kvar/transport.hpp"
