#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "groundkit/parsing.hpp"
#include "groundkit/types.hpp"

namespace groundkit::rewards {

enum class RewardScheme { Discrete, Continuous, Binary };

std::optional<RewardScheme> scheme_from_string(const std::string& s);
const char* to_string(RewardScheme s);

// One rollout: either an already-extracted point or the raw rollout
// text, parsed lazily during scoring. Both forms are interpreted in the
// group's declared coordinate space.
struct Prediction {
    std::variant<Point, std::string> value;

    static Prediction from_point(Point p) { return Prediction{p}; }
    static Prediction from_text(std::string t) { return Prediction{std::move(t)}; }
    bool is_point() const { return std::holds_alternative<Point>(value); }
};

struct RolloutGroup {
    BoundingBox box;
    double image_w = 0.0;
    double image_h = 0.0;
    std::vector<Prediction> rollouts;
};

// Six-band lookup from the shaped reward table; lower bounds inclusive,
// upper bounds exclusive, d_norm >= 0.5 maps to 1.0.
// Throws InvalidArgument when d_norm is outside [-1, 1].
double discrete_reward(double d_norm);

// 1 - unsigned_distance/max_distance, floored at 0 (out-of-image misses).
double continuous_reward(const Point& p, const BoundingBox& b, double image_w, double image_h);

// 1 if p in b else 0, boundary inclusive.
double binary_reward(const Point& p, const BoundingBox& b);

// Minimum reward a scheme can hand out; unparseable rollouts get this.
double scheme_minimum(RewardScheme s);

// One reward per rollout, in order. Text rollouts that fail to parse
// score the scheme minimum; last_pair picks which coordinate pair of a
// text rollout counts. Throws on an empty group.
std::vector<double> score_group(const RolloutGroup& g, RewardScheme scheme, eval::CoordSpace cs,
                                bool last_pair = true);

// Leave-one-out advantages: adv_i = R_i - mean(R_j, j != i).
// Throws InvalidArgument when n < 2.
std::vector<double> rloo_advantages(const std::vector<double>& rewards);

} // namespace groundkit::rewards
