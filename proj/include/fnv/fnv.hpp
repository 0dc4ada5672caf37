#pragma once
// Umbrella header: the whole library in one include.

#include "fnv/core.hpp"
#include "fnv/wirtinger.hpp"
#include "fnv/quadrature.hpp"
#include "fnv/base_space.hpp"
#include "fnv/hermitian.hpp"
#include "fnv/finsler.hpp"
#include "fnv/holomorphic.hpp"
#include "fnv/growth.hpp"
#include "fnv/checks.hpp"
