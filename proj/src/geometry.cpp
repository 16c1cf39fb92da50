#include "groundkit/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "groundkit/error.hpp"

namespace groundkit::geom {

namespace {
constexpr double kDegenerateInradius = 1e-6;

double clampd(double v, double lo, double hi) {
    return v < lo ? lo : (v > hi ? hi : v);
}
} // namespace

bool point_in_box(const Point& p, const BoundingBox& b) {
    return b.contains(p);
}

NearestPoint unsigned_distance(const Point& p, const BoundingBox& b) {
    NearestPoint r;
    r.closest.u = clampd(p.u, b.x1, b.x2);
    r.closest.v = clampd(p.v, b.y1, b.y2);
    r.distance = std::hypot(p.u - r.closest.u, p.v - r.closest.v);
    return r;
}

double signed_distance(const Point& p, const BoundingBox& b) {
    if (!b.contains(p)) return -unsigned_distance(p, b).distance;
    double dx = std::min(p.u - b.x1, b.x2 - p.u);
    double dy = std::min(p.v - b.y1, b.y2 - p.v);
    return std::min(dx, dy);
}

double max_distance(const BoundingBox& b, double image_w, double image_h) {
    require(b.valid(), ErrorCode::InvalidArgument, "invalid bounding box");
    require(b.x1 >= 0.0 && b.y1 >= 0.0 && b.x2 <= image_w && b.y2 <= image_h,
            ErrorCode::InvalidArgument, "box exceeds image bounds");
    const Point corners[4] = {{0.0, 0.0}, {image_w, 0.0}, {0.0, image_h}, {image_w, image_h}};
    double best = 0.0;
    for (const Point& c : corners) best = std::max(best, unsigned_distance(c, b).distance);
    return best;
}

double normalized_distance(const Point& p, const BoundingBox& b, double image_w, double image_h) {
    const double maxd = max_distance(b, image_w, image_h);
    if (b.contains(p)) {
        const double r = inradius(b);
        if (r <= kDegenerateInradius) return 1.0; // center and box coincide
        return clampd(signed_distance(p, b) / r, 0.0, 1.0);
    }
    const double ud = unsigned_distance(p, b).distance;
    if (maxd <= 0.0) return -1.0; // box covers the image; any miss is out of image
    return clampd(-ud / maxd, -1.0, 1.0);
}

DistanceProfile distance_profile(const Point& p, const BoundingBox& b, double image_w, double image_h) {
    DistanceProfile d;
    NearestPoint np = unsigned_distance(p, b);
    d.unsigned_dist = np.distance;
    d.closest_point = np.closest;
    d.signed_dist = signed_distance(p, b);
    d.max_dist = max_distance(b, image_w, image_h);
    d.d_norm = normalized_distance(p, b, image_w, image_h);
    return d;
}

} // namespace groundkit::geom
