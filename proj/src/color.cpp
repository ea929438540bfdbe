#include "crnet/color.hpp"

#include <array>

#include "crnet/errors.hpp"

namespace crnet {

namespace {

using Mat3 = std::array<std::array<double, 3>, 3>;

constexpr Mat3 kForward{{
    {65.481, 128.553, 24.966},
    {-37.797, -74.203, 112.0},
    {112.0, -93.786, -18.214},
}};
constexpr std::array<double, 3> kOffset{16.0, 128.0, 128.0};

Mat3 inverse(const Mat3& m) {
    Mat3 inv{};
    const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                       m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                       m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            const int r1 = (c + 1) % 3, r2 = (c + 2) % 3;
            const int c1 = (r + 1) % 3, c2 = (r + 2) % 3;
            inv[r][c] = (m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1]) / det;
        }
    return inv;
}

void require_channels(const Tensor4& x, std::size_t c, const char* op) {
    if (x.channels() != c) {
        throw ShapeError(std::string(op) + ": expected " + std::to_string(c) + " channels, got " +
                         std::to_string(x.channels()));
    }
}

}  // namespace

Tensor4 rgb_to_ycbcr_y(const Tensor4& rgb) {
    require_channels(rgb, 3, "rgb_to_ycbcr_y");
    const Shape& s = rgb.shape();
    Tensor4 y(Shape{s.n, 1, s.h, s.w});
    const auto& k = kForward[0];
    for (std::size_t n = 0; n < s.n; ++n) {
        const double* r = rgb.plane(n, 0);
        const double* g = rgb.plane(n, 1);
        const double* b = rgb.plane(n, 2);
        double* dst = y.plane(n, 0);
        for (std::size_t p = 0; p < s.plane(); ++p) {
            dst[p] = (kOffset[0] + k[0] * r[p] + k[1] * g[p] + k[2] * b[p]) / 255.0;
        }
    }
    return y;
}

Tensor4 rgb_to_ycbcr(const Tensor4& rgb) {
    require_channels(rgb, 3, "rgb_to_ycbcr");
    const Shape& s = rgb.shape();
    Tensor4 out(s);
    for (std::size_t n = 0; n < s.n; ++n)
        for (std::size_t ch = 0; ch < 3; ++ch) {
            const auto& k = kForward[ch];
            double* dst = out.plane(n, ch);
            for (std::size_t p = 0; p < s.plane(); ++p) {
                dst[p] = (kOffset[ch] + k[0] * rgb.plane(n, 0)[p] + k[1] * rgb.plane(n, 1)[p] +
                          k[2] * rgb.plane(n, 2)[p]) /
                         255.0;
            }
        }
    return out;
}

Tensor4 ycbcr_to_rgb(const Tensor4& ycbcr) {
    require_channels(ycbcr, 3, "ycbcr_to_rgb");
    static const Mat3 inv = inverse(kForward);
    const Shape& s = ycbcr.shape();
    Tensor4 out(s);
    for (std::size_t n = 0; n < s.n; ++n)
        for (std::size_t p = 0; p < s.plane(); ++p) {
            std::array<double, 3> centered{};
            for (std::size_t ch = 0; ch < 3; ++ch) centered[ch] = ycbcr.plane(n, ch)[p] * 255.0 - kOffset[ch];
            for (std::size_t ch = 0; ch < 3; ++ch) {
                out.plane(n, ch)[p] = inv[ch][0] * centered[0] + inv[ch][1] * centered[1] + inv[ch][2] * centered[2];
            }
        }
    return out;
}

Tensor4 luminance(const Tensor4& image) {
    if (image.channels() == 1) return image;
    return rgb_to_ycbcr_y(image);
}

}  // namespace crnet
