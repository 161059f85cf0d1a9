#pragma once

#include "ergodic/catalog.hpp"
#include "ergodic/config.hpp"
#include "ergodic/empirical.hpp"
#include "ergodic/errors.hpp"
#include "ergodic/linalg.hpp"
#include "ergodic/model.hpp"
#include "ergodic/oracles.hpp"
#include "ergodic/quadrature.hpp"
#include "ergodic/rng.hpp"
#include "ergodic/runner.hpp"
#include "ergodic/schedules.hpp"
#include "ergodic/schemes.hpp"
#include "ergodic/summation.hpp"
#include "ergodic/verify.hpp"
