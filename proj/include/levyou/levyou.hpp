#pragma once

// Umbrella header for the Levy-driven Ornstein-Uhlenbeck toolkit.

#include "levyou/common.hpp"
#include "levyou/rng.hpp"
#include "levyou/quadrature.hpp"
#include "levyou/matrix.hpp"
#include "levyou/levy.hpp"
#include "levyou/gridded.hpp"
#include "levyou/model.hpp"
#include "levyou/spectral.hpp"
#include "levyou/conditions.hpp"
#include "levyou/ou.hpp"
#include "levyou/lab.hpp"
#include "levyou/config.hpp"
#include "levyou/io.hpp"
