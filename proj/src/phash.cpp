#include "groundkit/phash.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>

#include "groundkit/error.hpp"

namespace groundkit::dedup {

namespace {

constexpr int kN = 32;

// Orthonormal DCT-II basis: T[k][n] = a(k) cos(pi (2n+1) k / (2N)).
const std::array<std::array<double, kN>, kN>& dct_table() {
    static const auto table = [] {
        std::array<std::array<double, kN>, kN> t{};
        const double pi = std::acos(-1.0);
        for (int k = 0; k < kN; ++k) {
            const double a = k == 0 ? std::sqrt(1.0 / kN) : std::sqrt(2.0 / kN);
            for (int n = 0; n < kN; ++n) {
                t[k][n] = a * std::cos(pi * (2.0 * n + 1.0) * k / (2.0 * kN));
            }
        }
        return t;
    }();
    return table;
}

double quantize(double v) {
    return static_cast<double>(std::llround(v * 1000.0)) / 1000.0;
}

} // namespace

PerceptualHash phash32(const double* plane) {
    const auto& t = dct_table();

    // Separable DCT: rows, then columns.
    std::array<double, kN * kN> rows{};
    for (int y = 0; y < kN; ++y) {
        for (int k = 0; k < kN; ++k) {
            double acc = 0.0;
            for (int x = 0; x < kN; ++x) acc += plane[y * kN + x] * t[k][x];
            rows[y * kN + k] = acc;
        }
    }
    // Only the first 9 rows of coefficients are ever selected.
    std::array<double, 9 * kN> cols{};
    for (int x = 0; x < kN; ++x) {
        for (int k = 0; k < 9; ++k) {
            double acc = 0.0;
            for (int y = 0; y < kN; ++y) acc += rows[y * kN + x] * t[k][y];
            cols[k * kN + x] = acc;
        }
    }

    std::array<double, 64> coeffs{};
    for (int i = 0; i < 64; ++i) {
        const int r = (i + 1) / 8;
        const int c = (i + 1) % 8;
        coeffs[i] = quantize(cols[r * kN + c]);
    }

    std::array<double, 64> sorted = coeffs;
    std::sort(sorted.begin(), sorted.end());
    const double median = 0.5 * (sorted[31] + sorted[32]);

    PerceptualHash h;
    for (int i = 0; i < 64; ++i) {
        if (coeffs[i] > median) h.bits |= 1ULL << i;
    }
    return h;
}

PerceptualHash phash(const img::Image& crop, int min_crop_px) {
    require(crop.width >= 1 && crop.height >= 1, ErrorCode::InvalidArgument, "zero-area crop");
    img::Image gray = img::to_gray(crop);
    gray = img::pad_to_min(gray, min_crop_px);
    const std::vector<double> plane = img::resize_bilinear_gray(gray, kN);
    return phash32(plane.data());
}

img::Image crop_for_box(const img::Image& screenshot, const BoundingBox& box) {
    int x0 = static_cast<int>(std::floor(box.x1));
    int y0 = static_cast<int>(std::floor(box.y1));
    int x1 = static_cast<int>(std::ceil(box.x2));
    int y1 = static_cast<int>(std::ceil(box.y2));
    x0 = std::clamp(x0, 0, screenshot.width - 1);
    y0 = std::clamp(y0, 0, screenshot.height - 1);
    x1 = std::clamp(x1, 0, screenshot.width);
    y1 = std::clamp(y1, 0, screenshot.height);
    if (x1 <= x0) x1 = x0 + 1; // degenerate span takes one source pixel
    if (y1 <= y0) y1 = y0 + 1;
    return img::crop(screenshot, x0, y0, x1 - x0, y1 - y0);
}

int hamming(PerceptualHash a, PerceptualHash b) {
    return std::popcount(a.bits ^ b.bits);
}

} // namespace groundkit::dedup
