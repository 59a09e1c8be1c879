#pragma once

#include "approx_likelihood.hpp"
#include "bounds.hpp"
#include "channel.hpp"
#include "constellation.hpp"
#include "detector.hpp"
#include "embedding.hpp"
#include "errors.hpp"
#include "hardness.hpp"
#include "likelihood.hpp"
#include "quadrature.hpp"
#include "rng.hpp"
#include "scenario.hpp"
#include "sphere_decoder.hpp"
#include "statistics.hpp"
#include "types.hpp"
#include "wiener.hpp"
#include "sim/config.hpp"
#include "sim/csv.hpp"
#include "sim/experiment.hpp"
#include "sim/presets.hpp"
