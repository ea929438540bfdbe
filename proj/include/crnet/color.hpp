#pragma once

#include "crnet/tensor.hpp"

namespace crnet {

// ITU-R BT.601 studio-swing YCbCr on [0,1] data:
//   Y  = (16  +  65.481 R + 128.553 G +  24.966 B) / 255
//   Cb = (128 -  37.797 R -  74.203 G + 112.0   B) / 255
//   Cr = (128 + 112.0   R -  93.786 G -  18.214 B) / 255

/// Luminance plane of an RGB tensor (3 channels in, 1 out).
Tensor4 rgb_to_ycbcr_y(const Tensor4& rgb);
/// Full 3-channel conversion, channel order Y, Cb, Cr.
Tensor4 rgb_to_ycbcr(const Tensor4& rgb);
Tensor4 ycbcr_to_rgb(const Tensor4& ycbcr);

/// Y plane for metric computation: converts 3-channel input, passes 1-channel input through.
Tensor4 luminance(const Tensor4& image);

}  // namespace crnet
