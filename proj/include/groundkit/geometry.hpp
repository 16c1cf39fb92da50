#pragma once

#include "groundkit/types.hpp"

namespace groundkit::geom {

// p inside b, boundary inclusive.
bool point_in_box(const Point& p, const BoundingBox& b);

struct NearestPoint {
    double distance = 0.0; // Euclidean, 0 iff p in b
    Point closest;         // nearest point of b to p (p itself when inside)
};

NearestPoint unsigned_distance(const Point& p, const BoundingBox& b);

// Negative outside (-unsigned distance), non-negative inside
// (distance to the nearest box edge).
double signed_distance(const Point& p, const BoundingBox& b);

// Largest unsigned distance to b attainable from any point of the
// image rectangle [0,w]x[0,h]. Distance-to-box is convex over the
// image, so the maximum sits at one of the four corners.
// Throws InvalidArgument when b is not fully inside the image.
double max_distance(const BoundingBox& b, double image_w, double image_h);

// Signed distance scaled into [-1, 1]: outside points divide by
// max_distance, inside points by the box inradius (min(w,h)/2) so the
// center scores 1.0. Out-of-image points are clamped to -1.
// Degenerate boxes (inradius <= 1e-6) score 1.0 for any in-box point.
double normalized_distance(const Point& p, const BoundingBox& b, double image_w, double image_h);

// All distance quantities for one prediction against one box.
struct DistanceProfile {
    double unsigned_dist = 0.0;
    Point closest_point;
    double signed_dist = 0.0;
    double max_dist = 0.0;
    double d_norm = 0.0;
};

DistanceProfile distance_profile(const Point& p, const BoundingBox& b, double image_w, double image_h);

inline double inradius(const BoundingBox& b) {
    return 0.5 * (b.width() < b.height() ? b.width() : b.height());
}

} // namespace groundkit::geom
