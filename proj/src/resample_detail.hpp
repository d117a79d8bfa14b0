#pragma once

#include <cstddef>
#include <vector>

namespace qsr::detail {

/// Half-sample symmetric reflection of index i into [0, n).
std::size_t reflect_index(long long i, std::size_t n);

/// Keys cubic convolution kernel with a = -0.5.
double keys_weight(double x);

/// Four clamped source indices and weights for one output coordinate.
struct CubicTaps {
    std::size_t index[4];
    double weight[4];
    std::size_t nearest;
};

std::vector<CubicTaps> cubic_taps(std::size_t in, std::size_t out);

}  // namespace qsr::detail
