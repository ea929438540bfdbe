#include "crnet/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "crnet/errors.hpp"

namespace crnet {

namespace {

using Index = std::ptrdiff_t;

// Valid output range [lo, hi) along one axis of length len for tap offset d.
inline void tap_range(Index len, Index d, Index& lo, Index& hi) {
    lo = std::max<Index>(0, -d);
    hi = std::min<Index>(len, len - d);
}

}  // namespace

Tensor4 conv2d_same(const Tensor4& x, const FilterBank& f) { return conv2d_same(x, f.weights()); }

Tensor4 conv2d_same(const Tensor4& x, const Tensor4& weights) {
    check_filter_layout(weights);
    const Shape& xs = x.shape();
    const Shape& ws = weights.shape();
    if (xs.c != ws.c) {
        throw ShapeError("conv2d_same: input has " + std::to_string(xs.c) + " channels, filters expect " +
                         std::to_string(ws.c));
    }
    const Index k = static_cast<Index>(ws.h);
    const Index p = (k - 1) / 2;
    const Index H = static_cast<Index>(xs.h);
    const Index W = static_cast<Index>(xs.w);
    Tensor4 out(Shape{xs.n, ws.n, xs.h, xs.w});

    for (std::size_t n = 0; n < xs.n; ++n) {
        for (std::size_t o = 0; o < ws.n; ++o) {
            double* dst = out.plane(n, o);
            for (std::size_t c = 0; c < xs.c; ++c) {
                const double* src = x.plane(n, c);
                for (Index u = 0; u < k; ++u) {
                    const Index di = u - p;
                    Index i0, i1;
                    tap_range(H, di, i0, i1);
                    for (Index v = 0; v < k; ++v) {
                        const Index dj = v - p;
                        Index j0, j1;
                        tap_range(W, dj, j0, j1);
                        const double wt = weights(o, c, static_cast<std::size_t>(u), static_cast<std::size_t>(v));
                        for (Index i = i0; i < i1; ++i) {
                            double* drow = dst + i * W;
                            const double* srow = src + (i + di) * W + dj;
                            for (Index j = j0; j < j1; ++j) drow[j] += wt * srow[j];
                        }
                    }
                }
            }
        }
    }
    return out;
}

Tensor4 conv2d_adjoint(const Tensor4& y, const FilterBank& f) { return conv2d_adjoint(y, f.weights()); }

Tensor4 conv2d_adjoint(const Tensor4& y, const Tensor4& weights) {
    check_filter_layout(weights);
    if (y.channels() != weights.shape().n) {
        throw ShapeError("conv2d_adjoint: input has " + std::to_string(y.channels()) +
                         " channels, filters produce " + std::to_string(weights.shape().n));
    }
    return conv2d_same(y, adjoint_bank(weights));
}

Tensor4 conv2d_weight_grad(const Tensor4& x, const Tensor4& dy, std::size_t k) {
    const Shape& xs = x.shape();
    const Shape& gs = dy.shape();
    if (xs.n != gs.n || xs.h != gs.h || xs.w != gs.w) {
        throw ShapeError("conv2d_weight_grad: input " + xs.str() + " vs upstream " + gs.str());
    }
    if (k % 2 == 0) throw ConfigError("conv2d_weight_grad: kernel size must be odd");
    const Index K = static_cast<Index>(k);
    const Index p = (K - 1) / 2;
    const Index H = static_cast<Index>(xs.h);
    const Index W = static_cast<Index>(xs.w);
    Tensor4 grad(Shape{gs.c, xs.c, k, k});

    for (std::size_t o = 0; o < gs.c; ++o) {
        for (std::size_t c = 0; c < xs.c; ++c) {
            for (Index u = 0; u < K; ++u) {
                const Index di = u - p;
                Index i0, i1;
                tap_range(H, di, i0, i1);
                for (Index v = 0; v < K; ++v) {
                    const Index dj = v - p;
                    Index j0, j1;
                    tap_range(W, dj, j0, j1);
                    double acc = 0.0;
                    for (std::size_t n = 0; n < xs.n; ++n) {
                        const double* g = dy.plane(n, o);
                        const double* src = x.plane(n, c);
                        for (Index i = i0; i < i1; ++i) {
                            const double* grow = g + i * W;
                            const double* srow = src + (i + di) * W + dj;
                            for (Index j = j0; j < j1; ++j) acc += grow[j] * srow[j];
                        }
                    }
                    grad(o, c, static_cast<std::size_t>(u), static_cast<std::size_t>(v)) = acc;
                }
            }
        }
    }
    return grad;
}

Tensor4 flip_kernels(const Tensor4& weights) {
    const Shape& s = weights.shape();
    Tensor4 out(s);
    for (std::size_t o = 0; o < s.n; ++o)
        for (std::size_t c = 0; c < s.c; ++c)
            for (std::size_t u = 0; u < s.h; ++u)
                for (std::size_t v = 0; v < s.w; ++v) out(o, c, u, v) = weights(o, c, s.h - 1 - u, s.w - 1 - v);
    return out;
}

FilterBank flip_kernels(const FilterBank& f) { return FilterBank(flip_kernels(f.weights())); }

Tensor4 adjoint_bank(const Tensor4& weights) {
    const Shape& s = weights.shape();
    Tensor4 out(Shape{s.c, s.n, s.h, s.w});
    for (std::size_t o = 0; o < s.n; ++o)
        for (std::size_t c = 0; c < s.c; ++c)
            for (std::size_t u = 0; u < s.h; ++u)
                for (std::size_t v = 0; v < s.w; ++v) out(c, o, u, v) = weights(o, c, s.h - 1 - u, s.w - 1 - v);
    return out;
}

FilterBank adjoint_bank(const FilterBank& f) { return FilterBank(adjoint_bank(f.weights())); }

Tensor4 compose_filters(const Tensor4& outer, const Tensor4& inner) {
    check_filter_layout(outer);
    check_filter_layout(inner);
    const Shape& b = outer.shape();
    const Shape& a = inner.shape();
    if (b.c != a.n) {
        throw ShapeError("compose_filters: outer expects " + std::to_string(b.c) + " channels, inner produces " +
                         std::to_string(a.n));
    }
    const std::size_t k = a.h + b.h - 1;
    Tensor4 out(Shape{b.n, a.c, k, k});
    for (std::size_t o = 0; o < b.n; ++o)
        for (std::size_t i = 0; i < a.c; ++i)
            for (std::size_t c = 0; c < b.c; ++c)
                for (std::size_t bu = 0; bu < b.h; ++bu)
                    for (std::size_t bv = 0; bv < b.w; ++bv) {
                        const double wb = outer(o, c, bu, bv);
                        for (std::size_t au = 0; au < a.h; ++au)
                            for (std::size_t av = 0; av < a.w; ++av) out(o, i, bu + au, bv + av) += wb * inner(c, i, au, av);
                    }
    return out;
}

Tensor4 pixel_shuffle(const Tensor4& x, std::size_t r) {
    const Shape& s = x.shape();
    if (r == 0) throw ConfigError("pixel_shuffle: factor must be >= 1");
    if (s.c % (r * r) != 0) {
        throw ShapeError("pixel_shuffle: " + std::to_string(s.c) + " channels not divisible by " +
                         std::to_string(r * r));
    }
    const std::size_t oc = s.c / (r * r);
    Tensor4 out(Shape{s.n, oc, s.h * r, s.w * r});
    for (std::size_t n = 0; n < s.n; ++n)
        for (std::size_t c = 0; c < oc; ++c)
            for (std::size_t a = 0; a < r; ++a)
                for (std::size_t b = 0; b < r; ++b) {
                    const std::size_t src_c = c * r * r + a * r + b;
                    for (std::size_t i = 0; i < s.h; ++i)
                        for (std::size_t j = 0; j < s.w; ++j) out(n, c, i * r + a, j * r + b) = x(n, src_c, i, j);
                }
    return out;
}

Tensor4 pixel_unshuffle(const Tensor4& x, std::size_t r) {
    const Shape& s = x.shape();
    if (r == 0) throw ConfigError("pixel_unshuffle: factor must be >= 1");
    if (s.h % r != 0 || s.w % r != 0) {
        throw ShapeError("pixel_unshuffle: spatial dims of " + s.str() + " not divisible by " + std::to_string(r));
    }
    const std::size_t h = s.h / r;
    const std::size_t w = s.w / r;
    Tensor4 out(Shape{s.n, s.c * r * r, h, w});
    for (std::size_t n = 0; n < s.n; ++n)
        for (std::size_t c = 0; c < s.c; ++c)
            for (std::size_t a = 0; a < r; ++a)
                for (std::size_t b = 0; b < r; ++b) {
                    const std::size_t dst_c = c * r * r + a * r + b;
                    for (std::size_t i = 0; i < h; ++i)
                        for (std::size_t j = 0; j < w; ++j) out(n, dst_c, i, j) = x(n, c, i * r + a, j * r + b);
                }
    return out;
}

Tensor4 relu(const Tensor4& x) {
    Tensor4 out = x;
    for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
    return out;
}

Tensor4 soft_threshold(const Tensor4& x, double theta) {
    Tensor4 out = x;
    for (double& v : out.data()) {
        const double mag = std::abs(v) - theta;
        v = mag > 0.0 ? std::copysign(mag, v) : 0.0;
    }
    return out;
}

Tensor4 nonneg_soft_threshold(const Tensor4& x, double theta) {
    Tensor4 out = x;
    for (double& v : out.data()) {
        const double a = v - theta;
        v = a > 0.0 ? a : 0.0;
    }
    return out;
}

Tensor4 flip_horizontal(const Tensor4& x) {
    const Shape& s = x.shape();
    Tensor4 out(s);
    for (std::size_t n = 0; n < s.n; ++n)
        for (std::size_t c = 0; c < s.c; ++c)
            for (std::size_t i = 0; i < s.h; ++i)
                for (std::size_t j = 0; j < s.w; ++j) out(n, c, i, j) = x(n, c, i, s.w - 1 - j);
    return out;
}

Tensor4 rotate90(const Tensor4& x, int quarter_turns) {
    const int q = ((quarter_turns % 4) + 4) % 4;
    if (q == 0) return x;
    const Shape& s = x.shape();
    const bool swap = (q % 2) == 1;
    Tensor4 out(Shape{s.n, s.c, swap ? s.w : s.h, swap ? s.h : s.w});
    for (std::size_t n = 0; n < s.n; ++n)
        for (std::size_t c = 0; c < s.c; ++c)
            for (std::size_t i = 0; i < s.h; ++i)
                for (std::size_t j = 0; j < s.w; ++j) {
                    const double v = x(n, c, i, j);
                    switch (q) {
                        case 1: out(n, c, s.w - 1 - j, i) = v; break;
                        case 2: out(n, c, s.h - 1 - i, s.w - 1 - j) = v; break;
                        default: out(n, c, j, s.h - 1 - i) = v; break;
                    }
                }
    return out;
}

Tensor4 apply_dihedral(const Tensor4& x, Dihedral t) {
    return rotate90(t.flip ? flip_horizontal(x) : x, t.quarter_turns);
}

Tensor4 invert_dihedral(const Tensor4& x, Dihedral t) {
    Tensor4 back = rotate90(x, -t.quarter_turns);
    return t.flip ? flip_horizontal(back) : back;
}

Tensor4 crop(const Tensor4& x, std::size_t top, std::size_t left, std::size_t h, std::size_t w) {
    const Shape& s = x.shape();
    if (h == 0 || w == 0 || top + h > s.h || left + w > s.w) {
        throw ShapeError("crop window out of range for shape " + s.str());
    }
    Tensor4 out(Shape{s.n, s.c, h, w});
    for (std::size_t n = 0; n < s.n; ++n)
        for (std::size_t c = 0; c < s.c; ++c)
            for (std::size_t i = 0; i < h; ++i)
                for (std::size_t j = 0; j < w; ++j) out(n, c, i, j) = x(n, c, top + i, left + j);
    return out;
}

Tensor4 shave(const Tensor4& x, std::size_t border) {
    if (border == 0) return x;
    const Shape& s = x.shape();
    if (2 * border >= s.h || 2 * border >= s.w) {
        throw ShapeError("shave of " + std::to_string(border) + " leaves nothing of " + s.str());
    }
    return crop(x, border, border, s.h - 2 * border, s.w - 2 * border);
}

Tensor4 modcrop(const Tensor4& x, std::size_t m) {
    const Shape& s = x.shape();
    if (m == 0) throw ConfigError("modcrop: modulus must be >= 1");
    const std::size_t h = s.h - s.h % m;
    const std::size_t w = s.w - s.w % m;
    if (h == 0 || w == 0) throw ShapeError("modcrop: image " + s.str() + " smaller than " + std::to_string(m));
    return crop(x, 0, 0, h, w);
}

Tensor4 quantize_u8(const Tensor4& x) {
    Tensor4 out = x;
    for (double& v : out.data()) v = std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
    return out;
}

}  // namespace crnet
