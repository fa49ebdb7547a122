#pragma once

#include "flagquer/body.hpp"
#include "flagquer/estimate.hpp"
#include "flagquer/functional.hpp"
#include "flagquer/geometry.hpp"
#include "flagquer/harness.hpp"
#include "flagquer/indices.hpp"
#include "flagquer/json_io.hpp"
#include "flagquer/parallel.hpp"
#include "flagquer/quermass.hpp"
#include "flagquer/rng.hpp"
#include "flagquer/sampler.hpp"
