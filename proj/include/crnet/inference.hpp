#pragma once

#include <cstddef>

#include "crnet/autodiff.hpp"
#include "crnet/models.hpp"
#include "crnet/resize.hpp"
#include "crnet/tensor.hpp"

namespace crnet {

struct Degraded {
    Tensor4 hr;   // modcropped to a multiple of the scale
    Tensor4 lr;   // bicubic downscale of hr
    Tensor4 ilr;  // bicubic upscale of lr, same size as hr
};

Degraded degrade(const Tensor4& hr, std::size_t scale, const ResizeOptions& opts = {});

struct SrOptions {
    bool ensemble = false;
    ResizeOptions resize;
};

/// Upscales an LR image (1 x {1,3} x h x w) by `scale` and clamps the result to [0,1].
/// CRNet-A consumes the bicubic ILR; CRNet-B consumes the LR image. When an RGB image meets a
/// single-channel model, the model runs on Y and Cb/Cr are bicubic-upscaled.
Tensor4 super_resolve(const Model& model, const Tensor4& lr, std::size_t scale, const SrOptions& opts = {});

Tensor4 clamp01(const Tensor4& x);

/// Tiny networks for gradient verification with a random input/target pair and an MSE loss.
struct TinyGradProblem {
    Model model;
    Graph graph;
    TensorMap inputs;
};

/// CRNet-A: n0 = 2, m0 = 3, K = 2, 1 x 1 x 8 x 8 input.
/// CRNet-B: n0 = 4, m0 = 6, K = 2, scale 2, 1 x 3 x 4 x 4 input.
void make_tiny_grad_problem(TinyGradProblem& out, ModelKind kind, std::uint64_t seed);

}  // namespace crnet
