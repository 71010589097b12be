// sdl/sdl.hpp

#pragma once

#include "sdl/classifier.hpp"
#include "sdl/constraints.hpp"
#include "sdl/csv.hpp"
#include "sdl/dense_matrix.hpp"
#include "sdl/generative.hpp"
#include "sdl/hessian.hpp"
#include "sdl/loss.hpp"
#include "sdl/metrics.hpp"
#include "sdl/problem.hpp"
#include "sdl/rng.hpp"
#include "sdl/solvers.hpp"
#include "sdl/svd.hpp"
