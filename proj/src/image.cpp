#include "groundkit/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

#include <png.h>

#include "groundkit/error.hpp"

namespace groundkit::img {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

bool has_png_signature(std::FILE* f) {
    unsigned char sig[8];
    if (std::fread(sig, 1, 8, f) != 8) return false;
    return png_sig_cmp(sig, 0, 8) == 0;
}

Image load_png(const std::filesystem::path& path) {
    FilePtr f(std::fopen(path.string().c_str(), "rb"));
    require(f != nullptr, ErrorCode::Io, "cannot open " + path.string());
    require(has_png_signature(f.get()), ErrorCode::Parse, path.string() + ": not a PNG file");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    require(png != nullptr, ErrorCode::Internal, "png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        fail(ErrorCode::Internal, "png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(ErrorCode::Parse, path.string() + ": PNG decode error");
    }
    png_init_io(png, f.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_packing(png);
    const int color_type = png_get_color_type(png, info);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    png_read_update_info(png, info);

    Image out;
    out.width = static_cast<int>(png_get_image_width(png, info));
    out.height = static_cast<int>(png_get_image_height(png, info));
    out.channels = static_cast<int>(png_get_channels(png, info));
    if (out.channels != 1 && out.channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(ErrorCode::Unsupported,
             path.string() + ": unsupported channel count after normalization");
    }
    out.pixels.resize(static_cast<std::size_t>(out.width) * out.height * out.channels);
    std::vector<png_bytep> rows(out.height);
    const std::size_t stride = static_cast<std::size_t>(out.width) * out.channels;
    for (int y = 0; y < out.height; ++y) rows[y] = out.pixels.data() + y * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

int pnm_next_value(std::istream& in, const std::string& where) {
    // Skips whitespace and '#' comments between header tokens.
    while (true) {
        int c = in.peek();
        if (c == '#') {
            std::string dummy;
            std::getline(in, dummy);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            break;
        }
    }
    int v;
    in >> v;
    require(static_cast<bool>(in), ErrorCode::Parse, where + ": bad PNM header");
    return v;
}

Image load_pnm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrorCode::Io, "cannot open " + path.string());
    const std::string where = path.string();
    char p, kind;
    in.get(p).get(kind);
    require(p == 'P' && (kind == '2' || kind == '3' || kind == '5' || kind == '6'),
            ErrorCode::Unsupported, where + ": unsupported image format");
    const bool binary = kind == '5' || kind == '6';
    const int channels = (kind == '3' || kind == '6') ? 3 : 1;
    Image out;
    out.width = pnm_next_value(in, where);
    out.height = pnm_next_value(in, where);
    const int maxval = pnm_next_value(in, where);
    require(out.width >= 1 && out.height >= 1, ErrorCode::Parse, where + ": bad PNM size");
    require(maxval > 0 && maxval <= 255, ErrorCode::Unsupported,
            where + ": only 8-bit PNM supported");
    out.channels = channels;
    const std::size_t n = static_cast<std::size_t>(out.width) * out.height * channels;
    out.pixels.resize(n);
    if (binary) {
        in.get(); // single whitespace after maxval
        in.read(reinterpret_cast<char*>(out.pixels.data()), static_cast<std::streamsize>(n));
        require(static_cast<std::size_t>(in.gcount()) == n, ErrorCode::Parse,
                where + ": truncated PNM data");
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            int v;
            in >> v;
            require(static_cast<bool>(in), ErrorCode::Parse, where + ": truncated PNM data");
            out.pixels[i] = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
        }
    }
    return out;
}

} // namespace

Image load_image(const std::filesystem::path& path) {
    std::ifstream probe(path, std::ios::binary);
    require(probe.good(), ErrorCode::Io, "cannot open " + path.string());
    char magic[2] = {0, 0};
    probe.read(magic, 2);
    probe.close();
    if (magic[0] == 'P') return load_pnm(path);
    return load_png(path);
}

std::pair<int, int> read_image_size(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrorCode::Io, "cannot open " + path.string());
    unsigned char head[8];
    in.read(reinterpret_cast<char*>(head), 8);
    require(in.gcount() >= 2, ErrorCode::Parse, path.string() + ": truncated image");
    if (head[0] == 'P') {
        in.seekg(2);
        const std::string where = path.string();
        int w = pnm_next_value(in, where);
        int h = pnm_next_value(in, where);
        return {w, h};
    }
    static const unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    require(in.gcount() == 8 && std::memcmp(head, png_sig, 8) == 0, ErrorCode::Unsupported,
            path.string() + ": unsupported image format");
    unsigned char ihdr[17];
    in.read(reinterpret_cast<char*>(ihdr), 17); // length(4) type(4) w(4) h(4) + 1
    require(in.gcount() == 17 && std::memcmp(ihdr + 4, "IHDR", 4) == 0, ErrorCode::Parse,
            path.string() + ": missing IHDR");
    auto be32 = [](const unsigned char* p) {
        return (static_cast<int>(p[0]) << 24) | (p[1] << 16) | (p[2] << 8) | p[3];
    };
    return {be32(ihdr + 8), be32(ihdr + 12)};
}

void save_pnm(const std::filesystem::path& path, const Image& image) {
    require(image.channels == 1 || image.channels == 3, ErrorCode::InvalidArgument,
            "save_pnm: gray or RGB only");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(out.good(), ErrorCode::Io, "cannot write " + path.string());
    out << (image.channels == 1 ? "P5" : "P6") << '\n'
        << image.width << ' ' << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.pixels.data()),
              static_cast<std::streamsize>(image.pixels.size()));
    require(out.good(), ErrorCode::Io, "write failed: " + path.string());
}

void save_png(const std::filesystem::path& path, const Image& image) {
    require(image.channels == 1 || image.channels == 3, ErrorCode::InvalidArgument,
            "save_png: gray or RGB only");
    FilePtr f(std::fopen(path.string().c_str(), "wb"));
    require(f != nullptr, ErrorCode::Io, "cannot write " + path.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    require(png != nullptr, ErrorCode::Internal, "png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        fail(ErrorCode::Internal, "png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail(ErrorCode::Io, path.string() + ": PNG encode error");
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width),
                 static_cast<png_uint_32>(image.height), 8,
                 image.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const std::size_t stride = static_cast<std::size_t>(image.width) * image.channels;
    for (int y = 0; y < image.height; ++y) {
        png_write_row(png, const_cast<png_bytep>(image.pixels.data() + y * stride));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

Image to_rgb(const Image& image) {
    if (image.channels == 3) return image;
    Image out;
    out.width = image.width;
    out.height = image.height;
    out.channels = 3;
    out.pixels.resize(static_cast<std::size_t>(out.width) * out.height * 3);
    for (std::size_t i = 0; i < image.pixels.size(); ++i) {
        out.pixels[i * 3] = out.pixels[i * 3 + 1] = out.pixels[i * 3 + 2] = image.pixels[i];
    }
    return out;
}

void draw_box(Image& image, int x1, int y1, int x2, int y2, std::uint8_t r, std::uint8_t g,
              std::uint8_t b, int thickness) {
    require(image.channels == 3, ErrorCode::InvalidArgument, "draw_box needs an RGB image");
    auto put = [&](int x, int y) {
        if (x < 0 || y < 0 || x >= image.width || y >= image.height) return;
        image.at(x, y, 0) = r;
        image.at(x, y, 1) = g;
        image.at(x, y, 2) = b;
    };
    for (int t = 0; t < thickness; ++t) {
        for (int x = x1 - t; x <= x2 + t; ++x) {
            put(x, y1 - t);
            put(x, y2 + t);
        }
        for (int y = y1 - t; y <= y2 + t; ++y) {
            put(x1 - t, y);
            put(x2 + t, y);
        }
    }
}

Image to_gray(const Image& image) {
    if (image.channels == 1) return image;
    Image g;
    g.width = image.width;
    g.height = image.height;
    g.channels = 1;
    g.pixels.resize(static_cast<std::size_t>(g.width) * g.height);
    const std::uint8_t* src = image.pixels.data();
    for (std::size_t i = 0; i < g.pixels.size(); ++i, src += 3) {
        const double luma = 0.299 * src[0] + 0.587 * src[1] + 0.114 * src[2];
        g.pixels[i] = static_cast<std::uint8_t>(std::lround(luma));
    }
    return g;
}

Image crop(const Image& image, int x, int y, int w, int h) {
    require(w >= 1 && h >= 1, ErrorCode::InvalidArgument, "crop: zero-area rectangle");
    require(x >= 0 && y >= 0 && x + w <= image.width && y + h <= image.height,
            ErrorCode::InvalidArgument, "crop: rectangle outside image");
    Image out;
    out.width = w;
    out.height = h;
    out.channels = image.channels;
    out.pixels.resize(static_cast<std::size_t>(w) * h * image.channels);
    const std::size_t row_bytes = static_cast<std::size_t>(w) * image.channels;
    for (int r = 0; r < h; ++r) {
        const std::uint8_t* src =
            image.pixels.data() +
            ((static_cast<std::size_t>(y + r) * image.width + x) * image.channels);
        std::memcpy(out.pixels.data() + r * row_bytes, src, row_bytes);
    }
    return out;
}

Image pad_to_min(const Image& image, int min_size) {
    if (image.width >= min_size && image.height >= min_size) return image;
    Image out;
    out.width = std::max(image.width, min_size);
    out.height = std::max(image.height, min_size);
    out.channels = image.channels;
    out.pixels.resize(static_cast<std::size_t>(out.width) * out.height * out.channels);
    for (int y = 0; y < out.height; ++y) {
        const int sy = std::min(y, image.height - 1);
        for (int x = 0; x < out.width; ++x) {
            const int sx = std::min(x, image.width - 1);
            for (int c = 0; c < out.channels; ++c) out.at(x, y, c) = image.at(sx, sy, c);
        }
    }
    return out;
}

std::vector<double> resize_bilinear_gray(const Image& gray, int size) {
    require(gray.channels == 1, ErrorCode::InvalidArgument, "resize expects gray input");
    require(gray.width >= 1 && gray.height >= 1, ErrorCode::InvalidArgument, "empty image");
    std::vector<double> out(static_cast<std::size_t>(size) * size);
    const double sx = static_cast<double>(gray.width) / size;
    const double sy = static_cast<double>(gray.height) / size;
    for (int oy = 0; oy < size; ++oy) {
        const double fy = (oy + 0.5) * sy - 0.5;
        const double cy = std::clamp(fy, 0.0, static_cast<double>(gray.height - 1));
        const int y0 = static_cast<int>(std::floor(cy));
        const int y1 = std::min(y0 + 1, gray.height - 1);
        const double wy = cy - y0;
        for (int ox = 0; ox < size; ++ox) {
            const double fx = (ox + 0.5) * sx - 0.5;
            const double cx = std::clamp(fx, 0.0, static_cast<double>(gray.width - 1));
            const int x0 = static_cast<int>(std::floor(cx));
            const int x1 = std::min(x0 + 1, gray.width - 1);
            const double wx = cx - x0;
            const double top = gray.at(x0, y0) * (1.0 - wx) + gray.at(x1, y0) * wx;
            const double bot = gray.at(x0, y1) * (1.0 - wx) + gray.at(x1, y1) * wx;
            out[static_cast<std::size_t>(oy) * size + ox] = top * (1.0 - wy) + bot * wy;
        }
    }
    return out;
}

} // namespace groundkit::img
