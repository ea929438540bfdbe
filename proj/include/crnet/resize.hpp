#pragma once

#include <cstddef>
#include <vector>

#include "crnet/tensor.hpp"

namespace crnet {

/// Positive rational resampling factor num/den.
struct Ratio {
    std::size_t num = 1;
    std::size_t den = 1;

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    static Ratio up(std::size_t s) { return {s, 1}; }
    static Ratio down(std::size_t s) { return {1, s}; }
};

/// How taps that fall outside the image are resolved.
enum class Boundary {
    replicate,  ///< clamp to the nearest edge sample
    symmetric,  ///< mirror including the edge sample (MATLAB imresize)
};

struct ResizeOptions {
    bool antialias = true;
    Boundary boundary = Boundary::replicate;
};

/// Keys cubic kernel with a = -0.5.
double cubic_kernel(double x);

/// Sparse 1-D resampling operator: output sample i is sum_t weight[i][t] * in[index[i][t]].
struct ResampleWeights {
    std::size_t in_len = 0;
    std::size_t out_len = 0;
    std::size_t taps = 0;
    std::vector<std::size_t> index;  // out_len * taps, 0-based, already boundary-resolved
    std::vector<double> weight;      // out_len * taps, rows sum to 1
};

ResampleWeights bicubic_weights(std::size_t in_len, std::size_t out_len, double scale, const ResizeOptions& opts);

/// Output extent round(len * scale); throws ConfigError when that is 0.
std::size_t scaled_extent(std::size_t len, Ratio scale);

/// Bicubic resampling of every plane by `scale`. Height is resampled first, then width.
Tensor4 bicubic_resize(const Tensor4& x, Ratio scale, const ResizeOptions& opts = {});

}  // namespace crnet
