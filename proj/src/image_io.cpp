// Copyright Contributors to the Splatcolor Project
// SPDX-License-Identifier: Apache-2.0

#include "splatcolor/image_io.hpp"

#include "splatcolor/errors.hpp"
#include "splatcolor/ply.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>

namespace splatcolor {

namespace {

constexpr char kMagic[8] = {'S', 'P', 'L', 'T', 'F', 'I', 'M', 'G'};
constexpr std::size_t kHeaderSize = 8 + 5 * 4;

void put_u32(std::vector<std::uint8_t> &out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

std::uint32_t get_u32(const std::uint8_t *p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::string lower_extension(const std::filesystem::path &path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

struct FileCloser {
    void operator()(std::FILE *f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// libpng reports errors by longjmp. The functions below only hold plain
// pointers across setjmp and report failure through the return value.
struct PngError {
    char message[256] = "libpng error";
};

void png_error_handler(png_structp png, png_const_charp msg) {
    auto *err = static_cast<PngError *>(png_get_error_ptr(png));
    std::snprintf(err->message, sizeof err->message, "%s", msg);
    png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

struct PngInfo {
    png_uint_32 width = 0;
    png_uint_32 height = 0;
    int channels = 0;
    int bit_depth = 0;
    std::size_t row_bytes = 0;
};

bool png_read_header(png_structp png, png_infop info, std::FILE *file, PngInfo *out) {
    if (setjmp(png_jmpbuf(png))) {
        return false;
    }
    png_init_io(png, file);
    png_read_info(png, info);
    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE) {
        png_set_palette_to_rgb(png);
    }
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) {
        png_set_expand_gray_1_2_4_to_8(png);
    }
    if (png_get_valid(png, info, PNG_INFO_tRNS)) {
        png_set_tRNS_to_alpha(png);
    }
    png_read_update_info(png, info);
    out->width = png_get_image_width(png, info);
    out->height = png_get_image_height(png, info);
    out->channels = png_get_channels(png, info);
    out->bit_depth = png_get_bit_depth(png, info);
    out->row_bytes = png_get_rowbytes(png, info);
    return true;
}

bool png_read_pixels(png_structp png, png_infop info, png_bytepp rows) {
    if (setjmp(png_jmpbuf(png))) {
        return false;
    }
    png_read_image(png, rows);
    png_read_end(png, info);
    return true;
}

bool png_write_all(png_structp png, png_infop info, std::FILE *file, png_uint_32 width,
                   png_uint_32 height, int bit_depth, int color_type, png_bytepp rows) {
    if (setjmp(png_jmpbuf(png))) {
        return false;
    }
    png_init_io(png, file);
    png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows);
    png_write_end(png, info);
    return true;
}

} // namespace

std::vector<std::uint8_t> encode_float_image(const ChannelImage &image, FloatSampleType type) {
    if (image.data.size() != image.pixel_count() * image.channels || image.channels < 1) {
        throw InputError("encode_float_image: data length does not match dimensions");
    }
    std::vector<std::uint8_t> out(kMagic, kMagic + 8);
    put_u32(out, 1);
    put_u32(out, static_cast<std::uint32_t>(image.width));
    put_u32(out, static_cast<std::uint32_t>(image.height));
    put_u32(out, static_cast<std::uint32_t>(image.channels));
    put_u32(out, static_cast<std::uint32_t>(type));
    const std::size_t sample = type == FloatSampleType::Float32 ? 4 : 8;
    out.reserve(out.size() + image.data.size() * sample);
    for (const double v : image.data) {
        std::uint8_t b[8];
        if (type == FloatSampleType::Float32) {
            const auto f = static_cast<float>(v);
            std::memcpy(b, &f, 4);
        } else {
            std::memcpy(b, &v, 8);
        }
        out.insert(out.end(), b, b + sample);
    }
    return out;
}

ChannelImage decode_float_image(std::span<const std::uint8_t> bytes) {
    static_assert(std::endian::native == std::endian::little);
    if (bytes.size() < kHeaderSize || std::memcmp(bytes.data(), kMagic, 8) != 0) {
        throw InputError("float image: bad magic or short header");
    }
    const std::uint8_t *p = bytes.data() + 8;
    if (get_u32(p) != 1) {
        throw InputError("float image: unsupported version " + std::to_string(get_u32(p)));
    }
    const std::uint32_t width = get_u32(p + 4);
    const std::uint32_t height = get_u32(p + 8);
    const std::uint32_t channels = get_u32(p + 12);
    const std::uint32_t type = get_u32(p + 16);
    if (type != 1 && type != 2) {
        throw InputError("float image: unsupported sample type " + std::to_string(type));
    }
    if (width == 0 || height == 0 || channels == 0) {
        throw InputError("float image: zero dimension");
    }
    const std::size_t sample = type == 1 ? 4 : 8;
    const std::size_t count = static_cast<std::size_t>(width) * height * channels;
    if (bytes.size() != kHeaderSize + count * sample) {
        throw InputError("float image: payload holds " + std::to_string(bytes.size() - kHeaderSize) +
                         " bytes, dimensions need " + std::to_string(count * sample));
    }
    ChannelImage image(static_cast<int>(width), static_cast<int>(height), static_cast<int>(channels));
    const std::uint8_t *data = bytes.data() + kHeaderSize;
    for (std::size_t i = 0; i < count; ++i) {
        if (type == 1) {
            float f;
            std::memcpy(&f, data + i * 4, 4);
            image.data[i] = f;
        } else {
            std::memcpy(&image.data[i], data + i * 8, 8);
        }
    }
    return image;
}

ChannelImage read_png(const std::filesystem::path &path) {
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) {
        throw InputError("cannot open " + path.string());
    }
    PngError err;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_error_handler,
                                             png_warning_handler);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw InputError("libpng initialization failed");
    }
    PngInfo header;
    if (!png_read_header(png, info, file.get(), &header)) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw InputError(path.string() + ": " + err.message);
    }
    std::vector<png_byte> pixels(header.row_bytes * header.height);
    std::vector<png_bytep> rows(header.height);
    for (png_uint_32 y = 0; y < header.height; ++y) {
        rows[y] = pixels.data() + y * header.row_bytes;
    }
    const bool ok = png_read_pixels(png, info, rows.data());
    png_destroy_read_struct(&png, &info, nullptr);
    if (!ok) {
        throw InputError(path.string() + ": " + err.message);
    }
    if (header.bit_depth != 8 && header.bit_depth != 16) {
        throw InputError(path.string() + ": unsupported bit depth " + std::to_string(header.bit_depth));
    }

    ChannelImage image(static_cast<int>(header.width), static_cast<int>(header.height), header.channels);
    const double scale = header.bit_depth == 8 ? 1.0 / 255.0 : 1.0 / 65535.0;
    for (png_uint_32 y = 0; y < header.height; ++y) {
        const png_byte *row = rows[y];
        for (std::size_t s = 0; s < static_cast<std::size_t>(header.width) * header.channels; ++s) {
            const unsigned v = header.bit_depth == 8 ? row[s] : (unsigned(row[2 * s]) << 8) | row[2 * s + 1];
            image.data[y * header.width * header.channels + s] = v * scale;
        }
    }
    return image;
}

void write_png(const ChannelImage &image, const std::filesystem::path &path, bool clamp, int bit_depth) {
    if (bit_depth != 8 && bit_depth != 16) {
        throw InputError("write_png: bit depth must be 8 or 16");
    }
    if (image.channels < 1 || image.channels > 4) {
        throw InputError("write_png: PNG holds 1-4 channels, image has " +
                         std::to_string(image.channels) + "; use a .fimg container");
    }
    if (image.width < 1 || image.height < 1 || image.data.size() != image.pixel_count() * image.channels) {
        throw InputError("write_png: data length does not match dimensions");
    }
    const double peak = bit_depth == 8 ? 255.0 : 65535.0;
    const std::size_t samples = static_cast<std::size_t>(image.width) * image.channels;
    const std::size_t row_bytes = samples * (bit_depth / 8);
    std::vector<png_byte> pixels(row_bytes * image.height);
    for (std::size_t i = 0; i < image.data.size(); ++i) {
        double v = image.data[i];
        if (clamp) {
            v = std::clamp(v, 0.0, 1.0);
        } else if (!(v >= 0.0 && v <= 1.0)) {
            throw InputError("write_png: value " + std::to_string(v) +
                             " outside [0, 1]; pass clamp or use a .fimg container");
        }
        const auto q = static_cast<unsigned>(std::lround(v * peak));
        if (bit_depth == 8) {
            pixels[i] = static_cast<png_byte>(q);
        } else {
            pixels[2 * i] = static_cast<png_byte>(q >> 8);
            pixels[2 * i + 1] = static_cast<png_byte>(q & 0xff);
        }
    }
    std::vector<png_bytep> rows(image.height);
    for (int y = 0; y < image.height; ++y) {
        rows[y] = pixels.data() + y * row_bytes;
    }
    static constexpr int kColorTypes[] = {PNG_COLOR_TYPE_GRAY, PNG_COLOR_TYPE_GRAY_ALPHA,
                                          PNG_COLOR_TYPE_RGB, PNG_COLOR_TYPE_RGB_ALPHA};

    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) {
        throw InputError("cannot open " + path.string() + " for writing");
    }
    PngError err;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_error_handler,
                                              png_warning_handler);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw InputError("libpng initialization failed");
    }
    const bool ok = png_write_all(png, info, file.get(), static_cast<png_uint_32>(image.width),
                                  static_cast<png_uint_32>(image.height), bit_depth,
                                  kColorTypes[image.channels - 1], rows.data());
    png_destroy_write_struct(&png, &info);
    if (!ok) {
        throw InputError(path.string() + ": " + err.message);
    }
}

ChannelImage read_image(const std::filesystem::path &path) {
    const std::string ext = lower_extension(path);
    if (ext == ".png") {
        return read_png(path);
    }
    if (ext == ".fimg") {
        try {
            return decode_float_image(read_file_bytes(path));
        } catch (const InputError &e) {
            throw InputError(path.string() + ": " + e.what());
        }
    }
    throw InputError(path.string() + ": unsupported image format '" + ext + "'");
}

void write_image(const ChannelImage &image, const std::filesystem::path &path, bool clamp) {
    const std::string ext = lower_extension(path);
    if (ext == ".png") {
        write_png(image, path, clamp);
        return;
    }
    if (ext == ".fimg") {
        if (clamp) {
            ChannelImage clipped = image;
            for (double &v : clipped.data) {
                v = std::clamp(v, 0.0, 1.0);
            }
            write_file_bytes(path, encode_float_image(clipped));
        } else {
            write_file_bytes(path, encode_float_image(image));
        }
        return;
    }
    throw InputError(path.string() + ": unsupported image format '" + ext + "'");
}

} // namespace splatcolor
