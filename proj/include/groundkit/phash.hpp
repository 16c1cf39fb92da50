#pragma once

#include <cstdint>

#include "groundkit/image.hpp"
#include "groundkit/types.hpp"

namespace groundkit::dedup {

// 64-bit perceptual hash. The recipe is pinned so hashes are
// reproducible bit-for-bit across implementations:
//   1. grayscale (Rec.601), edge-pad below min_crop_px, bilinear 32x32
//   2. orthonormal 2D DCT-II over the 32x32 intensities
//   3. take 64 low-frequency coefficients: row-major over the top-left
//      block, 8 per row, skipping DC -- (0,1)..(0,7), (1,0)..(7,7), (8,0)
//   4. round each coefficient to the nearest 1e-3 (ties away from zero),
//      threshold against the median of the 64 rounded values (mean of
//      the two middle order statistics); coeff > median sets the bit,
//      ties give 0
//   5. bit i of the hash (LSB first) is the i-th coefficient in
//      selection order
struct PerceptualHash {
    std::uint64_t bits = 0;

    friend bool operator==(const PerceptualHash&, const PerceptualHash&) = default;
};

// Hash of a 32x32 grayscale plane (values in [0,255]).
PerceptualHash phash32(const double* plane32x32);

// Full pipeline for an arbitrary grayscale/RGB crop.
PerceptualHash phash(const img::Image& crop, int min_crop_px = 8);

// Crop rectangle for an element box: [floor(x1), ceil(x2)) x [floor(y1),
// ceil(y2)) clamped to the image, with degenerate spans widened to one
// pixel (a box past the frame yields its nearest edge pixels).
img::Image crop_for_box(const img::Image& screenshot, const BoundingBox& box);

int hamming(PerceptualHash a, PerceptualHash b);

} // namespace groundkit::dedup
