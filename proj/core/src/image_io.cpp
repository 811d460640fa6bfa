#include "ffcvsr/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include <png.h>

#include "ffcvsr/error.hpp"
#include "ffcvsr/resample.hpp"

namespace ffcvsr {

namespace {

std::string lower_ext(const std::string& path) {
    const size_t dot = path.rfind('.');
    if (dot == std::string::npos)
        return "";
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return ext;
}

uint8_t to_byte(float v) {
    v = std::clamp(v, 0.0f, 1.0f);
    return static_cast<uint8_t>(v * 255.0f + 0.5f); // half away from zero (v >= 0 here)
}

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f)
            std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

Tensor planes_to_frame(const std::vector<uint8_t>& pixels, int64_t h, int64_t w, int channels,
                       bool luma_convert, const std::string& path) {
    if (channels == 1) {
        Tensor frame = Tensor::zeros(Shape{1, 1, h, w});
        float* d = frame.data();
        for (int64_t i = 0; i < h * w; ++i)
            d[i] = pixels[static_cast<size_t>(i)] / 255.0f;
        return frame;
    }
    check(luma_convert, "read_frame: '", path,
          "' is a color image; pass the luma conversion flag to convert it");
    Tensor r = Tensor::zeros(Shape{1, 1, h, w});
    Tensor g = Tensor::zeros(Shape{1, 1, h, w});
    Tensor b = Tensor::zeros(Shape{1, 1, h, w});
    for (int64_t i = 0; i < h * w; ++i) {
        r.data()[i] = pixels[static_cast<size_t>(i * channels + 0)] / 255.0f;
        g.data()[i] = pixels[static_cast<size_t>(i * channels + 1)] / 255.0f;
        b.data()[i] = pixels[static_cast<size_t>(i * channels + 2)] / 255.0f;
    }
    return rgb_to_luma(r, g, b);
}

Tensor read_png(const std::string& path, bool luma_convert) {
    FilePtr file(std::fopen(path.c_str(), "rb"));
    check(file != nullptr, "read_frame: cannot open '", path, "'");

    // Buffers live before setjmp so the error path unwinds them cleanly.
    std::vector<uint8_t> pixels;
    std::vector<png_bytep> rows;

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    check(png != nullptr, "read_frame: libpng initialization failed");
    png_infop info = png_create_info_struct(png);
    if (info == nullptr) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        fail("read_frame: libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail("read_frame: '", path, "' is not a valid PNG file");
    }

    png_init_io(png, file.get());
    png_read_info(png, info);

    const int bit_depth = png_get_bit_depth(png, info);
    const int color_type = png_get_color_type(png, info);
    if (bit_depth != 8) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail("read_frame: '", path, "' has unsupported bit depth ", bit_depth,
             " (only 8-bit is supported)");
    }
    if (color_type == PNG_COLOR_TYPE_PALETTE)
        png_set_palette_to_rgb(png);
    if (color_type & PNG_COLOR_MASK_ALPHA)
        png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const int64_t w = png_get_image_width(png, info);
    const int64_t h = png_get_image_height(png, info);
    const int channels = png_get_channels(png, info);
    if (channels != 1 && channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail("read_frame: '", path, "' has unsupported channel count ", channels);
    }

    pixels.resize(static_cast<size_t>(h * w * channels));
    rows.resize(static_cast<size_t>(h));
    for (int64_t y = 0; y < h; ++y)
        rows[static_cast<size_t>(y)] = pixels.data() + y * w * channels;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    return planes_to_frame(pixels, h, w, channels, luma_convert, path);
}

void write_png(const Tensor& frame, const std::string& path) {
    const Shape& s = frame.shape();
    FilePtr file(std::fopen(path.c_str(), "wb"));
    check(file != nullptr, "write_frame: cannot open '", path, "' for writing");

    std::vector<uint8_t> row(static_cast<size_t>(s.w));

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    check(png != nullptr, "write_frame: libpng initialization failed");
    png_infop info = png_create_info_struct(png);
    if (info == nullptr) {
        png_destroy_write_struct(&png, nullptr);
        fail("write_frame: libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail("write_frame: PNG encode of '", path, "' failed");
    }

    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(s.w), static_cast<png_uint_32>(s.h), 8,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    const float* d = frame.data();
    for (int64_t y = 0; y < s.h; ++y) {
        for (int64_t x = 0; x < s.w; ++x)
            row[static_cast<size_t>(x)] = to_byte(d[y * s.w + x]);
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

// Binary PGM, maxval 255.
Tensor read_pgm(const std::string& path) {
    FilePtr file(std::fopen(path.c_str(), "rb"));
    check(file != nullptr, "read_frame: cannot open '", path, "'");

    auto next_token = [&]() -> long {
        int c = std::fgetc(file.get());
        while (c != EOF && (std::isspace(c) || c == '#')) {
            if (c == '#')
                while (c != EOF && c != '\n')
                    c = std::fgetc(file.get());
            c = std::fgetc(file.get());
        }
        check(c != EOF, "read_frame: '", path, "' has a truncated PGM header");
        long value = 0;
        while (c != EOF && std::isdigit(c)) {
            value = value * 10 + (c - '0');
            c = std::fgetc(file.get());
        }
        return value;
    };

    char magic[2];
    check(std::fread(magic, 1, 2, file.get()) == 2 && magic[0] == 'P' && magic[1] == '5',
          "read_frame: '", path, "' is not a binary PGM (P5) file");
    const long w = next_token();
    const long h = next_token();
    const long maxval = next_token();
    check(w > 0 && h > 0, "read_frame: '", path, "' has invalid extents ", w, "x", h);
    check(maxval == 255, "read_frame: '", path, "' has unsupported bit depth (maxval ", maxval,
          ", only 255 is supported)");

    std::vector<uint8_t> pixels(static_cast<size_t>(w * h));
    check(std::fread(pixels.data(), 1, pixels.size(), file.get()) == pixels.size(),
          "read_frame: '", path, "' has truncated pixel data");
    return planes_to_frame(pixels, h, w, 1, false, path);
}

void write_pgm(const Tensor& frame, const std::string& path) {
    const Shape& s = frame.shape();
    FilePtr file(std::fopen(path.c_str(), "wb"));
    check(file != nullptr, "write_frame: cannot open '", path, "' for writing");
    std::fprintf(file.get(), "P5\n%lld %lld\n255\n", static_cast<long long>(s.w),
                 static_cast<long long>(s.h));
    std::vector<uint8_t> row(static_cast<size_t>(s.w));
    const float* d = frame.data();
    for (int64_t y = 0; y < s.h; ++y) {
        for (int64_t x = 0; x < s.w; ++x)
            row[static_cast<size_t>(x)] = to_byte(d[y * s.w + x]);
        check(std::fwrite(row.data(), 1, row.size(), file.get()) == row.size(),
              "write_frame: write to '", path, "' failed");
    }
}

} // namespace

Tensor read_frame(const std::string& path, bool luma_convert) {
    const std::string ext = lower_ext(path);
    if (ext == "png")
        return read_png(path, luma_convert);
    if (ext == "pgm")
        return read_pgm(path);
    fail("read_frame: unsupported image format '.", ext, "' for '", path, "'");
}

void write_frame(const Tensor& frame, const std::string& path) {
    check(frame.defined() && frame.numel() > 0, "write_frame: empty frame");
    check(frame.shape().n == 1 && frame.shape().c == 1,
          "write_frame: expected a single-channel frame, got ", frame.shape().str());
    const std::string ext = lower_ext(path);
    if (ext == "png")
        write_png(frame, path);
    else if (ext == "pgm")
        write_pgm(frame, path);
    else
        fail("write_frame: unsupported image format '.", ext, "' for '", path, "'");
}

Tensor quantize_8bit(const Tensor& frame) {
    Tensor out = Tensor::zeros(frame.shape());
    const float* s = frame.data();
    float* d = out.data();
    const int64_t count = frame.numel();
    for (int64_t i = 0; i < count; ++i)
        d[i] = to_byte(s[i]) / 255.0f;
    return out;
}

} // namespace ffcvsr
