#pragma once

#include <filesystem>
#include <vector>

#include "crnet/tensor.hpp"

namespace crnet {

/// Reads an 8-bit PNG or a binary PGM/PPM (P5/P6) into a 1 x c x h x w tensor with values v/255.
/// Grayscale files give c = 1, colour files c = 3 (alpha is dropped).
Tensor4 read_image(const std::filesystem::path& path);

/// Writes a 1 x {1,3} x h x w tensor, rounding to 8 bits. Format follows the extension
/// (.png, .pgm, .ppm).
void write_image(const std::filesystem::path& path, const Tensor4& image);

/// Image files (png/pgm/ppm) directly inside `dir`, sorted by name.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

}  // namespace crnet
