#include "crnet/resize.hpp"

#include <cmath>
#include <string>

#include "crnet/errors.hpp"

namespace crnet {

double cubic_kernel(double x) {
    const double a = std::abs(x);
    const double a2 = a * a;
    const double a3 = a2 * a;
    if (a <= 1.0) return 1.5 * a3 - 2.5 * a2 + 1.0;
    if (a <= 2.0) return -0.5 * a3 + 2.5 * a2 - 4.0 * a + 2.0;
    return 0.0;
}

namespace {

std::size_t resolve_index(std::ptrdiff_t idx, std::size_t len, Boundary boundary) {
    const auto n = static_cast<std::ptrdiff_t>(len);
    if (boundary == Boundary::replicate) {
        if (idx < 0) return 0;
        if (idx >= n) return len - 1;
        return static_cast<std::size_t>(idx);
    }
    // Period 2n sequence 0..n-1, n-1..0.
    const std::ptrdiff_t period = 2 * n;
    std::ptrdiff_t m = idx % period;
    if (m < 0) m += period;
    return static_cast<std::size_t>(m < n ? m : period - 1 - m);
}

}  // namespace

ResampleWeights bicubic_weights(std::size_t in_len, std::size_t out_len, double scale, const ResizeOptions& opts) {
    if (in_len == 0 || out_len == 0) throw ConfigError("bicubic_weights: lengths must be >= 1");
    if (!(scale > 0.0)) throw ConfigError("bicubic_weights: scale must be positive");
    const bool widen = opts.antialias && scale < 1.0;
    const double kernel_width = widen ? 4.0 / scale : 4.0;

    ResampleWeights rw;
    rw.in_len = in_len;
    rw.out_len = out_len;
    rw.taps = static_cast<std::size_t>(std::ceil(kernel_width)) + 2;
    rw.index.resize(out_len * rw.taps);
    rw.weight.resize(out_len * rw.taps);

    for (std::size_t i = 0; i < out_len; ++i) {
        // 1-based coordinates, matching the usual imresize derivation.
        const double x = static_cast<double>(i + 1);
        const double u = x / scale + 0.5 * (1.0 - 1.0 / scale);
        const auto left = static_cast<std::ptrdiff_t>(std::floor(u - kernel_width / 2.0));
        double total = 0.0;
        for (std::size_t t = 0; t < rw.taps; ++t) {
            const std::ptrdiff_t idx1 = left + static_cast<std::ptrdiff_t>(t);
            const double d = u - static_cast<double>(idx1);
            const double wgt = widen ? scale * cubic_kernel(scale * d) : cubic_kernel(d);
            rw.weight[i * rw.taps + t] = wgt;
            rw.index[i * rw.taps + t] = resolve_index(idx1 - 1, in_len, opts.boundary);
            total += wgt;
        }
        for (std::size_t t = 0; t < rw.taps; ++t) rw.weight[i * rw.taps + t] /= total;
    }
    return rw;
}

std::size_t scaled_extent(std::size_t len, Ratio scale) {
    if (scale.num == 0 || scale.den == 0) throw ConfigError("resize scale must be a positive ratio");
    const auto out = static_cast<std::size_t>(std::llround(static_cast<double>(len) * scale.value()));
    if (out == 0) {
        throw ConfigError("resize of extent " + std::to_string(len) + " by " + std::to_string(scale.num) + "/" +
                          std::to_string(scale.den) + " is empty");
    }
    return out;
}

Tensor4 bicubic_resize(const Tensor4& x, Ratio scale, const ResizeOptions& opts) {
    const bool integral = scale.num == 1 || scale.den == 1;
    if (!integral || scale.num > 4 || scale.den > 4 || scale.num == 0 || scale.den == 0) {
        throw ConfigError("bicubic_resize supports the factors 1/4..4 with integer ratio, got " +
                          std::to_string(scale.num) + "/" + std::to_string(scale.den));
    }
    const Shape& s = x.shape();
    const std::size_t oh = scaled_extent(s.h, scale);
    const std::size_t ow = scaled_extent(s.w, scale);
    if (scale.num == scale.den) return x;

    const ResampleWeights rows = bicubic_weights(s.h, oh, scale.value(), opts);
    const ResampleWeights cols = bicubic_weights(s.w, ow, scale.value(), opts);

    Tensor4 mid(Shape{s.n, s.c, oh, s.w});
    for (std::size_t n = 0; n < s.n; ++n)
        for (std::size_t c = 0; c < s.c; ++c) {
            const double* src = x.plane(n, c);
            double* dst = mid.plane(n, c);
            for (std::size_t i = 0; i < oh; ++i) {
                double* drow = dst + i * s.w;
                for (std::size_t t = 0; t < rows.taps; ++t) {
                    const double wgt = rows.weight[i * rows.taps + t];
                    const double* srow = src + rows.index[i * rows.taps + t] * s.w;
                    for (std::size_t j = 0; j < s.w; ++j) drow[j] += wgt * srow[j];
                }
            }
        }

    Tensor4 out(Shape{s.n, s.c, oh, ow});
    for (std::size_t n = 0; n < s.n; ++n)
        for (std::size_t c = 0; c < s.c; ++c) {
            const double* src = mid.plane(n, c);
            double* dst = out.plane(n, c);
            for (std::size_t i = 0; i < oh; ++i)
                for (std::size_t j = 0; j < ow; ++j) {
                    double acc = 0.0;
                    for (std::size_t t = 0; t < cols.taps; ++t)
                        acc += cols.weight[j * cols.taps + t] * src[i * s.w + cols.index[j * cols.taps + t]];
                    dst[i * ow + j] = acc;
                }
        }
    return out;
}

}  // namespace crnet
