#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

namespace groundkit::img {

// 8-bit raster, row-major, interleaved. channels is 1 (gray) or 3 (RGB).
struct Image {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<std::uint8_t> pixels;

    std::uint8_t at(int x, int y, int c = 0) const {
        return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    std::uint8_t& at(int x, int y, int c = 0) {
        return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
};

// PNG (via libpng; alpha stripped, 16-bit narrowed) or PNM (P2/P3/P5/P6,
// maxval <= 255). Throws Io / Parse / Unsupported.
Image load_image(const std::filesystem::path& path);

// Width/height without decoding pixel data.
std::pair<int, int> read_image_size(const std::filesystem::path& path);

// P5 for gray, P6 for RGB.
void save_pnm(const std::filesystem::path& path, const Image& image);

// 8-bit gray or RGB PNG.
void save_png(const std::filesystem::path& path, const Image& image);

// Stroke an axis-aligned rectangle (RGB image, pixel coordinates).
void draw_box(Image& image, int x1, int y1, int x2, int y2, std::uint8_t r, std::uint8_t g,
              std::uint8_t b, int thickness = 2);

// RGB view of a gray or RGB image.
Image to_rgb(const Image& image);

// Rec.601 luma (0.299 R + 0.587 G + 0.114 B), rounded half away from zero.
Image to_gray(const Image& image);

// [x, x+w) x [y, y+h); the rectangle must lie inside the image.
Image crop(const Image& image, int x, int y, int w, int h);

// Replicates the last column/row until both dimensions reach min_size.
Image pad_to_min(const Image& image, int min_size);

// Bilinear resampling with half-pixel centers; gray input, double output
// in [0,255], row-major size*size.
std::vector<double> resize_bilinear_gray(const Image& gray, int size);

} // namespace groundkit::img
