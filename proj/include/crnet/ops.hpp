#pragma once

#include <cstddef>

#include "crnet/tensor.hpp"

namespace crnet {

// Orientation: the primitive is zero-padded cross-correlation,
//   out[n,o,i,j] = sum_{c,u,v} w[o,c,u,v] * x[n,c,i+u-p,j+v-p],  p = (k-1)/2.
// True convolution with f is cross-correlation with flip_kernels(f).

/// Zero-padded "same" cross-correlation. Output is x.batch x out_channels x x.h x x.w.
Tensor4 conv2d_same(const Tensor4& x, const FilterBank& f);
Tensor4 conv2d_same(const Tensor4& x, const Tensor4& weights);

/// Transpose of conv2d_same with respect to its input: maps out_channels back to in_channels.
Tensor4 conv2d_adjoint(const Tensor4& y, const FilterBank& f);
Tensor4 conv2d_adjoint(const Tensor4& y, const Tensor4& weights);

/// Gradient of <conv2d_same(x, w), dy> with respect to w; shape out x in x k x k.
Tensor4 conv2d_weight_grad(const Tensor4& x, const Tensor4& dy, std::size_t k);

/// Reverse every k x k kernel along both spatial axes (flipud(fliplr(.))).
FilterBank flip_kernels(const FilterBank& f);
Tensor4 flip_kernels(const Tensor4& weights);

/// flip_kernels with in/out channel roles swapped; conv2d_same with it equals conv2d_adjoint.
FilterBank adjoint_bank(const FilterBank& f);
Tensor4 adjoint_bank(const Tensor4& weights);

/// Single kernel equal to applying `inner` then `outer` (away from the zero-padded border).
/// Result is outer.out x inner.in with spatial size k_outer + k_inner - 1.
Tensor4 compose_filters(const Tensor4& outer, const Tensor4& inner);

/// Depth-to-space: (n, c*r*r, h, w) -> (n, c, h*r, w*r),
/// out[n,c,i*r+a,j*r+b] = in[n,c*r*r+a*r+b,i,j].
Tensor4 pixel_shuffle(const Tensor4& x, std::size_t r);
/// Space-to-depth, the inverse of pixel_shuffle.
Tensor4 pixel_unshuffle(const Tensor4& x, std::size_t r);

Tensor4 relu(const Tensor4& x);

/// Element-wise signed soft threshold sign(a) * max(|a| - theta, 0).
Tensor4 soft_threshold(const Tensor4& x, double theta);
/// Element-wise max(a - theta, 0).
Tensor4 nonneg_soft_threshold(const Tensor4& x, double theta);

/// Mirror columns (left/right).
Tensor4 flip_horizontal(const Tensor4& x);
/// Rotate each plane by quarter_turns * 90 degrees counter-clockwise.
Tensor4 rotate90(const Tensor4& x, int quarter_turns);

/// One of the 8 symmetries of the square: optional horizontal flip followed by a rotation.
struct Dihedral {
    int quarter_turns = 0;
    bool flip = false;
};
Tensor4 apply_dihedral(const Tensor4& x, Dihedral t);
Tensor4 invert_dihedral(const Tensor4& x, Dihedral t);

/// Crop `border` pixels from every side.
Tensor4 shave(const Tensor4& x, std::size_t border);
/// Crop height and width down to multiples of `m`.
Tensor4 modcrop(const Tensor4& x, std::size_t m);
/// Spatial crop [top, top+h) x [left, left+w).
Tensor4 crop(const Tensor4& x, std::size_t top, std::size_t left, std::size_t h, std::size_t w);

/// Round to the nearest 8-bit level and clamp to [0,1].
Tensor4 quantize_u8(const Tensor4& x);

}  // namespace crnet
