#pragma once

#include <algorithm>
#include <cmath>

namespace testing {

inline double glaser_omega(double z) { return 2.0 * 16.0 / (16.0 + (z - 15.0) * (z - 15.0)); }

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testing
