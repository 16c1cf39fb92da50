#include "groundkit/rewards.hpp"

#include <cmath>

#include "groundkit/error.hpp"
#include "groundkit/geometry.hpp"

namespace groundkit::rewards {

std::optional<RewardScheme> scheme_from_string(const std::string& s) {
    if (s == "discrete") return RewardScheme::Discrete;
    if (s == "continuous") return RewardScheme::Continuous;
    if (s == "binary") return RewardScheme::Binary;
    return std::nullopt;
}

const char* to_string(RewardScheme s) {
    switch (s) {
        case RewardScheme::Discrete: return "discrete";
        case RewardScheme::Continuous: return "continuous";
        case RewardScheme::Binary: return "binary";
    }
    return "?";
}

double discrete_reward(double d_norm) {
    require(d_norm >= -1.0 && d_norm <= 1.0, ErrorCode::InvalidArgument,
            "d_norm outside [-1, 1]");
    if (d_norm < -0.5) return -1.0;
    if (d_norm < -0.1) return -0.5;
    if (d_norm < 0.0) return -0.1;
    if (d_norm < 0.1) return 0.1;
    if (d_norm < 0.5) return 0.5;
    return 1.0;
}

double continuous_reward(const Point& p, const BoundingBox& b, double image_w, double image_h) {
    const double ud = geom::unsigned_distance(p, b).distance;
    const double maxd = geom::max_distance(b, image_w, image_h);
    if (ud == 0.0) return 1.0;
    if (maxd <= 0.0) return 0.0; // box covers the image; any miss is out of it
    const double r = 1.0 - ud / maxd;
    return r < 0.0 ? 0.0 : r;
}

double binary_reward(const Point& p, const BoundingBox& b) {
    return geom::point_in_box(p, b) ? 1.0 : 0.0;
}

double scheme_minimum(RewardScheme s) {
    return s == RewardScheme::Discrete ? -1.0 : 0.0;
}

std::vector<double> score_group(const RolloutGroup& g, RewardScheme scheme, eval::CoordSpace cs,
                                bool last_pair) {
    require(!g.rollouts.empty(), ErrorCode::InvalidArgument, "empty rollout group");
    std::vector<double> out;
    out.reserve(g.rollouts.size());
    for (const Prediction& pred : g.rollouts) {
        std::optional<Point> p;
        if (pred.is_point()) {
            p = eval::scale_to_pixels(std::get<Point>(pred.value), cs, g.image_w, g.image_h);
        } else {
            p = eval::parse_prediction(std::get<std::string>(pred.value), cs, g.image_w,
                                       g.image_h, last_pair);
        }
        if (!p || !std::isfinite(p->u) || !std::isfinite(p->v)) {
            out.push_back(scheme_minimum(scheme));
            continue;
        }
        switch (scheme) {
            case RewardScheme::Discrete:
                out.push_back(discrete_reward(
                    geom::normalized_distance(*p, g.box, g.image_w, g.image_h)));
                break;
            case RewardScheme::Continuous:
                out.push_back(continuous_reward(*p, g.box, g.image_w, g.image_h));
                break;
            case RewardScheme::Binary:
                out.push_back(binary_reward(*p, g.box));
                break;
        }
    }
    return out;
}

std::vector<double> rloo_advantages(const std::vector<double>& rewards) {
    const std::size_t n = rewards.size();
    require(n >= 2, ErrorCode::InvalidArgument, "leave-one-out undefined for n < 2");
    double total = 0.0;
    for (double r : rewards) total += r;
    std::vector<double> adv(n);
    for (std::size_t i = 0; i < n; ++i) {
        adv[i] = rewards[i] - (total - rewards[i]) / static_cast<double>(n - 1);
    }
    return adv;
}

} // namespace groundkit::rewards
