#include "crnet/metrics.hpp"

#include <cmath>
#include <limits>

#include "crnet/color.hpp"
#include "crnet/errors.hpp"
#include "crnet/ops.hpp"

namespace crnet {

namespace {

void check_pair(const Tensor4& a, const Tensor4& b, const char* who) {
    if (!(a.shape() == b.shape())) {
        throw ShapeError(std::string(who) + ": shapes differ " + a.shape().str() + " vs " + b.shape().str());
    }
}

std::vector<double> gaussian_window(std::size_t size, double sigma) {
    std::vector<double> w(size * size);
    const double c = (static_cast<double>(size) - 1.0) / 2.0;
    double total = 0.0;
    for (std::size_t i = 0; i < size; ++i)
        for (std::size_t j = 0; j < size; ++j) {
            const double di = static_cast<double>(i) - c, dj = static_cast<double>(j) - c;
            total += w[i * size + j] = std::exp(-(di * di + dj * dj) / (2.0 * sigma * sigma));
        }
    for (double& v : w) v /= total;
    return w;
}

}  // namespace

double psnr(const Tensor4& a, const Tensor4& b, std::size_t shave_border) {
    check_pair(a, b, "psnr");
    const Tensor4 x = shave(a, shave_border);
    const Tensor4 y = shave(b, shave_border);
    const double mse = norm2_squared(x - y) / static_cast<double>(x.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

double ssim(const Tensor4& a, const Tensor4& b, std::size_t shave_border) {
    check_pair(a, b, "ssim");
    if (a.batch() != 1 || a.channels() != 1) throw ShapeError("ssim expects a single-channel image");
    const Tensor4 x = shave(a, shave_border);
    const Tensor4 y = shave(b, shave_border);
    constexpr std::size_t win = 11;
    if (x.height() < win || x.width() < win) {
        throw ShapeError("ssim: image " + x.shape().str() + " is smaller than the 11x11 window");
    }
    const std::vector<double> w = gaussian_window(win, 1.5);
    const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
    const std::size_t rows = x.height() - win + 1, cols = x.width() - win + 1;
    const std::size_t W = x.width();
    const double* px = x.plane(0, 0);
    const double* py = y.plane(0, 0);
    double total = 0.0;
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
            for (std::size_t u = 0; u < win; ++u)
                for (std::size_t v = 0; v < win; ++v) {
                    const double g = w[u * win + v];
                    const double xv = px[(i + u) * W + j + v], yv = py[(i + u) * W + j + v];
                    mx += g * xv;
                    my += g * yv;
                    sxx += g * xv * xv;
                    syy += g * yv * yv;
                    sxy += g * xv * yv;
                }
            const double vx = sxx - mx * mx, vy = syy - my * my, cxy = sxy - mx * my;
            total += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
        }
    return total / static_cast<double>(rows * cols);
}

double psnr_y(const Tensor4& sr, const Tensor4& hr, std::size_t shave_border) {
    return psnr(luminance(sr), luminance(hr), shave_border);
}

double ssim_y(const Tensor4& sr, const Tensor4& hr, std::size_t shave_border) {
    return ssim(luminance(sr), luminance(hr), shave_border);
}

Tensor4 self_ensemble(const std::function<Tensor4(const Tensor4&)>& f, const Tensor4& x) {
    Tensor4 acc;
    bool first = true;
    for (int flip = 0; flip < 2; ++flip)
        for (int turns = 0; turns < 4; ++turns) {
            const Dihedral t{turns, flip == 1};
            Tensor4 y = invert_dihedral(f(apply_dihedral(x, t)), t);
            if (first) {
                acc = std::move(y);
                first = false;
            } else {
                acc += y;
            }
        }
    acc *= 1.0 / 8.0;
    return acc;
}

double MetricsReport::mean_psnr() const {
    if (images.empty()) return 0.0;
    double s = 0.0;
    for (const auto& i : images) s += i.psnr;
    return s / static_cast<double>(images.size());
}

double MetricsReport::mean_ssim() const {
    if (images.empty()) return 0.0;
    double s = 0.0;
    for (const auto& i : images) s += i.ssim;
    return s / static_cast<double>(images.size());
}

ImageScore bicubic_baseline(const Tensor4& hr, std::size_t scale, const BaselineOptions& opts) {
    Tensor4 y = luminance(hr);
    if (opts.quantize) y = quantize_u8(y);
    y = modcrop(y, scale);
    const Tensor4 lr = bicubic_resize(y, Ratio::down(scale), opts.resize);
    const Tensor4 up = bicubic_resize(lr, Ratio::up(scale), opts.resize);
    ImageScore s;
    s.psnr = psnr(up, y, scale);
    s.ssim = ssim(up, y, scale);
    return s;
}

}  // namespace crnet
