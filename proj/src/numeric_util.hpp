#pragma once

#include <cmath>

namespace seampack::detail {

// ceil() that treats values within a few ulps of an integer as that integer,
// so products like 10 * 0.3 * 1000 do not round up to 3001.
inline double snapped_ceil(double x) {
    const double nearest = std::round(x);
    if (std::fabs(x - nearest) <= 1e-9 * std::fmax(1.0, std::fabs(x))) return nearest;
    return std::ceil(x);
}

}  // namespace seampack::detail
