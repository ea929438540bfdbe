#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "crnet/resize.hpp"
#include "crnet/tensor.hpp"

namespace crnet {

/// PSNR in dB for data in [0,1] after removing `shave` pixels from every border.
/// Multi-channel inputs are averaged over all channels. Identical images give +inf.
double psnr(const Tensor4& a, const Tensor4& b, std::size_t shave_border = 0);

/// Mean SSIM over valid window positions: 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03, range 1.
/// Single-channel images only.
double ssim(const Tensor4& a, const Tensor4& b, std::size_t shave_border = 0);

/// Metrics on luminance: RGB inputs are converted to Y first, single-channel inputs are used as given.
double psnr_y(const Tensor4& sr, const Tensor4& hr, std::size_t shave_border);
double ssim_y(const Tensor4& sr, const Tensor4& hr, std::size_t shave_border);

/// Averages f over the eight dihedral transforms of x, each output mapped back before averaging.
Tensor4 self_ensemble(const std::function<Tensor4(const Tensor4&)>& f, const Tensor4& x);

struct ImageScore {
    std::string name;
    double psnr = 0.0;
    double ssim = 0.0;
};

struct MetricsReport {
    std::size_t scale = 0;
    std::vector<ImageScore> images;
    double mean_psnr() const;
    double mean_ssim() const;
};

struct BaselineOptions {
    ResizeOptions resize;
    /// Quantise the HR luminance to 8 bits before degrading.
    bool quantize = true;
};

/// Bicubic reference: Y of HR, modcrop, downscale, upscale, PSNR/SSIM with shave = scale.
ImageScore bicubic_baseline(const Tensor4& hr, std::size_t scale, const BaselineOptions& opts = {});

}  // namespace crnet
