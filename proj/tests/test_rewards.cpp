#include <algorithm>
#include <random>
#include <set>

#include <doctest.h>

#include "groundkit/error.hpp"
#include "groundkit/geometry.hpp"
#include "groundkit/rewards.hpp"

using namespace groundkit;
using namespace groundkit::rewards;

TEST_CASE("discrete reward follows the six-band table exactly") {
    // Every boundary-adjacent value, lower bounds inclusive.
    CHECK(discrete_reward(-1.0) == -1.0);
    CHECK(discrete_reward(-0.51) == -1.0);
    CHECK(discrete_reward(-0.5) == -0.5);
    CHECK(discrete_reward(-0.11) == -0.5);
    CHECK(discrete_reward(-0.1) == -0.1);
    CHECK(discrete_reward(-0.001) == -0.1);
    CHECK(discrete_reward(0.0) == 0.1);
    CHECK(discrete_reward(0.099) == 0.1);
    CHECK(discrete_reward(0.1) == 0.5);
    CHECK(discrete_reward(0.499) == 0.5);
    CHECK(discrete_reward(0.5) == 1.0);
    CHECK(discrete_reward(1.0) == 1.0);
    // Spec'd spot checks.
    CHECK(discrete_reward(-0.7) == -1.0);
    CHECK_THROWS_AS(discrete_reward(1.01), Error);
    CHECK_THROWS_AS(discrete_reward(-1.01), Error);
}

TEST_CASE("discrete reward is a non-decreasing step with six values") {
    std::mt19937_64 g(42);
    std::uniform_real_distribution<double> dn(-1.0, 1.0);
    std::set<double> seen;
    double prev_x = -1.0, prev_r = discrete_reward(-1.0);
    std::vector<double> xs;
    for (int i = 0; i < 100000; ++i) xs.push_back(dn(g));
    std::sort(xs.begin(), xs.end());
    for (double x : xs) {
        const double r = discrete_reward(x);
        seen.insert(r);
        CHECK(x >= prev_x);
        CHECK(r >= prev_r);
        prev_x = x;
        prev_r = r;
    }
    CHECK(seen.size() <= 6);
    CHECK(seen == std::set<double>{-1.0, -0.5, -0.1, 0.1, 0.5, 1.0});
}

TEST_CASE("continuous reward frozen examples") {
    const BoundingBox b{0, 0, 10, 10};
    CHECK(continuous_reward({5, 5}, b, 100, 100) == 1.0);
    CHECK(continuous_reward({100, 100}, b, 100, 100) == doctest::Approx(0.0).epsilon(1e-12));
    // 1 - 45/(90*sqrt(2))
    CHECK(continuous_reward({55, 5}, b, 100, 100) == doctest::Approx(0.6464466094).epsilon(1e-9));
    // Out-of-image miss beyond max distance clamps to 0.
    CHECK(continuous_reward({-300, -300}, b, 100, 100) == 0.0);
    // Box covering the whole image: hits score 1, anything else 0.
    CHECK(continuous_reward({5, 5}, {0, 0, 100, 100}, 100, 100) == 1.0);
    CHECK(continuous_reward({-1, 5}, {0, 0, 100, 100}, 100, 100) == 0.0);
}

TEST_CASE("binary reward is the membership indicator") {
    const BoundingBox b{0, 0, 10, 10};
    CHECK(binary_reward({5, 5}, b) == 1.0);
    CHECK(binary_reward({11, 5}, b) == 0.0);
    CHECK(binary_reward({10, 10}, b) == 1.0); // boundary inclusive
}

TEST_CASE("schemes agree on what counts as a hit") {
    std::mt19937_64 g(77);
    std::uniform_real_distribution<double> size(20.0, 300.0);
    for (int i = 0; i < 20000; ++i) {
        const double w = size(g), h = size(g);
        const double bw = std::uniform_real_distribution<double>(1.0, w)(g);
        const double bh = std::uniform_real_distribution<double>(1.0, h)(g);
        BoundingBox b;
        b.x1 = std::uniform_real_distribution<double>(0.0, w - bw)(g);
        b.y1 = std::uniform_real_distribution<double>(0.0, h - bh)(g);
        b.x2 = b.x1 + bw;
        b.y2 = b.y1 + bh;
        const Point p{std::uniform_real_distribution<double>(0.0, w)(g),
                      std::uniform_real_distribution<double>(0.0, h)(g)};
        const bool hit_binary = binary_reward(p, b) == 1.0;
        const bool hit_continuous = continuous_reward(p, b, w, h) == 1.0;
        const bool hit_discrete = discrete_reward(geom::normalized_distance(p, b, w, h)) >= 0.1;
        CHECK(hit_binary == hit_continuous);
        CHECK(hit_binary == hit_discrete);
    }
}

TEST_CASE("rloo advantages on frozen vectors") {
    CHECK(rloo_advantages({1, 1, 1, 1}) == std::vector<double>{0, 0, 0, 0});

    const auto adv = rloo_advantages({1, 0, 0, 0});
    CHECK(adv[0] == doctest::Approx(1.0));
    CHECK(adv[1] == doctest::Approx(-1.0 / 3.0));
    CHECK(adv[2] == doctest::Approx(-1.0 / 3.0));
    CHECK(adv[3] == doctest::Approx(-1.0 / 3.0));

    // Shifted by +1: identical advantages.
    const auto adv2 = rloo_advantages({2, 1, 1, 1});
    for (int i = 0; i < 4; ++i) CHECK(adv2[i] == doctest::Approx(adv[i]).epsilon(1e-12));

    CHECK_THROWS_AS(rloo_advantages({1.0}), Error);
    CHECK_THROWS_AS(rloo_advantages({}), Error);
}

TEST_CASE("rloo advantages: zero sum and shift invariance on random vectors") {
    std::mt19937_64 g(11);
    std::uniform_int_distribution<int> len(2, 16);
    std::uniform_real_distribution<double> reward(-1.0, 1.0);
    std::uniform_real_distribution<double> shift(-10.0, 10.0);
    for (int i = 0; i < 5000; ++i) {
        std::vector<double> r(len(g));
        for (double& x : r) x = reward(g);
        const auto adv = rloo_advantages(r);
        double sum = 0.0;
        for (double a : adv) sum += a;
        CHECK(std::abs(sum) <= 1e-9);

        const double c = shift(g);
        std::vector<double> shifted = r;
        for (double& x : shifted) x += c;
        const auto adv2 = rloo_advantages(shifted);
        for (std::size_t k = 0; k < adv.size(); ++k) {
            CHECK(std::abs(adv[k] - adv2[k]) <= 1e-9);
        }
    }
}

TEST_CASE("score_group composes geometry with the reward bands") {
    RolloutGroup g;
    g.box = {0, 0, 10, 10};
    g.image_w = g.image_h = 100;
    g.rollouts = {Prediction::from_point({5, 5}), Prediction::from_point({10, 5}),
                  Prediction::from_point({100, 100})};
    CHECK(score_group(g, RewardScheme::Discrete, eval::CoordSpace::Pixel) ==
          std::vector<double>{1.0, 0.1, -1.0});
    CHECK(score_group(g, RewardScheme::Binary, eval::CoordSpace::Pixel) ==
          std::vector<double>{1.0, 1.0, 0.0});
}

TEST_CASE("score_group: unparseable rollouts get the scheme minimum") {
    RolloutGroup g;
    g.box = {0, 0, 10, 10};
    g.image_w = g.image_h = 100;
    g.rollouts = {Prediction::from_text("no idea")};
    CHECK(score_group(g, RewardScheme::Discrete, eval::CoordSpace::Pixel) ==
          std::vector<double>{-1.0});
    CHECK(score_group(g, RewardScheme::Continuous, eval::CoordSpace::Pixel) ==
          std::vector<double>{0.0});
    CHECK(score_group(g, RewardScheme::Binary, eval::CoordSpace::Pixel) ==
          std::vector<double>{0.0});

    g.rollouts.clear();
    CHECK_THROWS_AS(score_group(g, RewardScheme::Binary, eval::CoordSpace::Pixel), Error);
}

TEST_CASE("score_group parses text rollouts and honours coord_space") {
    RolloutGroup g;
    g.box = {0, 0, 10, 10};
    g.image_w = g.image_h = 100;
    g.rollouts = {Prediction::from_text("I pick (0.05, 0.05)"),
                  Prediction::from_text("first (1,2) then (50,50)")};
    const auto unit = score_group(g, RewardScheme::Binary, eval::CoordSpace::Unit);
    CHECK(unit[0] == 1.0); // (5,5) after scaling
    CHECK(unit[1] == 0.0); // last pair (50,50) -> (5000,5000)
}

TEST_CASE("score_group is order-equivariant") {
    RolloutGroup g;
    g.box = {20, 20, 40, 35};
    g.image_w = 200;
    g.image_h = 150;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> px(0.0, 200.0), py(0.0, 150.0);
    for (int i = 0; i < 8; ++i) g.rollouts.push_back(Prediction::from_point({px(rng), py(rng)}));
    const auto base = score_group(g, RewardScheme::Discrete, eval::CoordSpace::Pixel);
    RolloutGroup rev = g;
    std::reverse(rev.rollouts.begin(), rev.rollouts.end());
    auto rev_scores = score_group(rev, RewardScheme::Discrete, eval::CoordSpace::Pixel);
    std::reverse(rev_scores.begin(), rev_scores.end());
    CHECK(base == rev_scores);
}
