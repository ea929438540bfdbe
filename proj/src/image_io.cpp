#include "crnet/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <string>

#include "crnet/errors.hpp"

namespace crnet {

namespace fs = std::filesystem;

namespace {

std::string lower_extension(const fs::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

Tensor4 from_interleaved(const std::vector<unsigned char>& px, std::size_t h, std::size_t w, std::size_t c) {
    Tensor4 out(Shape{1, c, h, w});
    for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < w; ++j)
            for (std::size_t ch = 0; ch < c; ++ch) out(0, ch, i, j) = px[(i * w + j) * c + ch] / 255.0;
    return out;
}

std::vector<unsigned char> to_interleaved(const Tensor4& image) {
    const Shape& s = image.shape();
    std::vector<unsigned char> px(s.h * s.w * s.c);
    for (std::size_t i = 0; i < s.h; ++i)
        for (std::size_t j = 0; j < s.w; ++j)
            for (std::size_t ch = 0; ch < s.c; ++ch) {
                const double v = std::clamp(image(0, ch, i, j), 0.0, 1.0);
                px[(i * s.w + j) * s.c + ch] = static_cast<unsigned char>(std::lround(v * 255.0));
            }
    return px;
}

// --- PNG -------------------------------------------------------------------

Tensor4 read_png(const fs::path& path) {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&img, path.c_str())) {
        throw IoError(path.string() + ": " + img.message);
    }
    if (img.format & PNG_FORMAT_FLAG_LINEAR) {
        png_image_free(&img);
        throw IoError(path.string() + ": only 8-bit PNG is supported");
    }
    const bool colour = (img.format & PNG_FORMAT_FLAG_COLOR) != 0;
    img.format = colour ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    std::vector<unsigned char> px(PNG_IMAGE_SIZE(img));
    if (!png_image_finish_read(&img, nullptr, px.data(), 0, nullptr)) {
        png_image_free(&img);
        throw IoError(path.string() + ": " + img.message);
    }
    return from_interleaved(px, img.height, img.width, colour ? 3 : 1);
}

void write_png(const fs::path& path, const Tensor4& image) {
    const Shape& s = image.shape();
    std::vector<unsigned char> px = to_interleaved(image);
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(s.w);
    img.height = static_cast<png_uint_32>(s.h);
    img.format = s.c == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&img, path.c_str(), 0, px.data(), 0, nullptr)) {
        throw IoError(path.string() + ": " + img.message);
    }
}

// --- PNM -------------------------------------------------------------------

std::size_t read_pnm_field(std::istream& in, const fs::path& path) {
    int ch = in.get();
    while (in) {
        if (ch == '#') {
            while (in && ch != '\n') ch = in.get();
        } else if (!std::isspace(ch)) {
            break;
        }
        ch = in.get();
    }
    if (!in || !std::isdigit(ch)) throw IoError(path.string() + ": malformed PNM header");
    std::size_t v = 0;
    while (in && std::isdigit(ch)) {
        v = v * 10 + static_cast<std::size_t>(ch - '0');
        ch = in.get();
    }
    return v;  // the single whitespace after the field is consumed
}

Tensor4 read_pnm(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6')) {
        throw IoError(path.string() + ": only binary P5/P6 files are supported");
    }
    const std::size_t c = magic[1] == '5' ? 1 : 3;
    const std::size_t w = read_pnm_field(in, path);
    const std::size_t h = read_pnm_field(in, path);
    const std::size_t maxval = read_pnm_field(in, path);
    if (w == 0 || h == 0) throw IoError(path.string() + ": empty image");
    if (maxval == 0 || maxval > 255) throw IoError(path.string() + ": only 8-bit PNM is supported");
    std::vector<unsigned char> px(h * w * c);
    in.read(reinterpret_cast<char*>(px.data()), static_cast<std::streamsize>(px.size()));
    if (in.gcount() != static_cast<std::streamsize>(px.size())) throw IoError(path.string() + ": truncated");
    if (maxval != 255) {
        for (auto& v : px) v = static_cast<unsigned char>(std::lround(v * 255.0 / static_cast<double>(maxval)));
    }
    return from_interleaved(px, h, w, c);
}

void write_pnm(const fs::path& path, const Tensor4& image, bool colour) {
    const Shape& s = image.shape();
    if (colour != (s.c == 3)) {
        throw ShapeError(path.string() + ": extension does not match " + std::to_string(s.c) + "-channel image");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string());
    out << (colour ? "P6" : "P5") << "\n" << s.w << " " << s.h << "\n255\n";
    std::vector<unsigned char> px = to_interleaved(image);
    out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

bool is_image_extension(const std::string& ext) { return ext == ".png" || ext == ".pgm" || ext == ".ppm"; }

}  // namespace

Tensor4 read_image(const fs::path& path) {
    const std::string ext = lower_extension(path);
    if (ext == ".png") return read_png(path);
    if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") return read_pnm(path);
    throw IoError("unsupported image format: " + path.string());
}

void write_image(const fs::path& path, const Tensor4& image) {
    const Shape& s = image.shape();
    if (s.n != 1 || (s.c != 1 && s.c != 3)) {
        throw ShapeError("write_image expects a 1x1xHxW or 1x3xHxW tensor, got " + s.str());
    }
    const std::string ext = lower_extension(path);
    if (ext == ".png") return write_png(path, image);
    if (ext == ".pgm") return write_pnm(path, image, false);
    if (ext == ".ppm") return write_pnm(path, image, true);
    throw IoError("unsupported image format: " + path.string());
}

std::vector<fs::path> list_images(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError(dir.string() + " is not a directory");
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && is_image_extension(lower_extension(entry.path()))) out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace crnet
