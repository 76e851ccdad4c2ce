#pragma once

#include "kglab/arith.hpp"
#include "kglab/montecarlo.hpp"
#include "kglab/qia.hpp"
#include "kglab/rational.hpp"
#include "kglab/sequence.hpp"
#include "kglab/torus.hpp"
#include "kglab/transfer.hpp"

namespace kglab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace kglab
