#include <algorithm>
#include <numeric>
#include <random>

#include <doctest.h>
#include <json.hpp>

#include "groundkit/corpus.hpp"
#include "groundkit/error.hpp"
#include "groundkit/stats.hpp"
#include "helpers.hpp"

using namespace groundkit;
using namespace groundkit::stats;
using gktest::TempDir;

namespace {

Corpus fixture_corpus() {
    Corpus c;
    c.name = "fx";
    c.screenshots = {
        {"s1", "A", "Productivity", 1920, 1080, "s1.pgm"},
        {"s2", "B", "Scientific", 1000, 1000, "s2.pgm"},
        {"s3", "C", "Productivity", 800, 600, "s3.pgm"},
    };
    int n = 0;
    auto add = [&](const std::string& sid, BoundingBox b,
                   std::optional<UiCategory> cat = std::nullopt) {
        c.elements.push_back({"e" + std::to_string(n++), sid, b, "x", std::nullopt, cat});
    };
    // 2, 4, 6 elements per screenshot.
    add("s1", {0, 0, 10, 10}, UiCategory::Button);
    add("s1", {10, 10, 30, 30}, UiCategory::Button);
    for (int i = 0; i < 4; ++i)
        add("s2", {i * 10.0, 0, i * 10.0 + 10, 10},
            i % 2 ? std::optional<UiCategory>(UiCategory::Menu) : std::nullopt);
    for (int i = 0; i < 6; ++i) add("s3", {0, i * 10.0, 8, i * 10.0 + 8});
    c.rebuild_indexes();
    return c;
}

std::size_t hist_total(const Histogram& h) {
    return std::accumulate(h.counts.begin(), h.counts.end(), std::size_t{0});
}

} // namespace

TEST_CASE("compute_stats aggregates the corpus in one pass") {
    const Corpus c = fixture_corpus();
    const CorpusStats s = compute_stats(c);
    CHECK(s.num_screenshots == 3);
    CHECK(s.num_elements == 12);
    CHECK(s.avg_elements_per_screenshot == doctest::Approx(4.0));
    CHECK(s.max_elements_per_screenshot == 6);
    CHECK(s.megapixels_max == doctest::Approx(2.0736));
    CHECK(s.megapixels_min == doctest::Approx(0.48));
    CHECK(s.megapixels_mean == doctest::Approx((2.0736 + 1.0 + 0.48) / 3.0));
    CHECK(s.ui_category_counts.at("button") == 2);
    CHECK(s.ui_category_counts.at("menu") == 2);
    CHECK(s.ui_category_counts.at("uncategorized") == 8);
    CHECK(s.app_category_counts.at("Productivity").screenshots == 2);
    CHECK(s.app_category_counts.at("Productivity").elements == 8);
    CHECK(s.app_category_counts.at("Scientific").screenshots == 1);

    // Sums over breakdowns reproduce the totals.
    std::size_t shots = 0, elems = 0, ui = 0;
    for (const auto& [k, v] : s.app_category_counts) {
        shots += v.screenshots;
        elems += v.elements;
    }
    for (const auto& [k, v] : s.ui_category_counts) ui += v;
    CHECK(shots == s.num_screenshots);
    CHECK(elems == s.num_elements);
    CHECK(ui == s.num_elements);

    // Histogram counts cover their whole populations.
    CHECK(hist_total(s.resolution_mp) == s.num_screenshots);
    CHECK(hist_total(s.element_area_pct) == s.num_elements);
    CHECK(hist_total(s.elements_per_shot) == s.num_screenshots);
}

TEST_CASE("stats frozen single-value examples") {
    Corpus c;
    c.name = "one";
    c.screenshots = {{"s", "A", "Productivity", 1920, 1080, "s.pgm"}};
    c.elements = {};
    c.rebuild_indexes();
    CHECK(compute_stats(c).megapixels_mean == doctest::Approx(2.0736));

    Corpus c2;
    c2.screenshots = {{"s", "A", "Productivity", 100, 100, "s.pgm"}};
    c2.elements = {{"e", "s", {0, 0, 10, 10}, "x", std::nullopt, std::nullopt}};
    c2.rebuild_indexes();
    CHECK(compute_stats(c2).mean_element_area_pct == doctest::Approx(1.0));
    // Single screenshot: histograms still total their population.
    CHECK(hist_total(compute_stats(c2).resolution_mp) == 1);
}

TEST_CASE("compute_stats rejects an empty corpus") {
    Corpus c;
    CHECK_THROWS_AS(compute_stats(c), Error);
}

TEST_CASE("compute_stats is permutation invariant") {
    Corpus c = fixture_corpus();
    const std::string base = compute_stats(c).to_json();
    std::mt19937_64 g(5);
    std::shuffle(c.elements.begin(), c.elements.end(), g);
    std::shuffle(c.screenshots.begin(), c.screenshots.end(), g);
    c.rebuild_indexes();
    const CorpusStats s = compute_stats(c);
    CHECK(s.num_elements == 12);
    CHECK(s.avg_elements_per_screenshot == doctest::Approx(4.0));
    CHECK(s.mean_element_area_pct ==
          doctest::Approx(load_stats(base).mean_element_area_pct).epsilon(1e-12));
}

TEST_CASE("stats JSON round-trips") {
    const CorpusStats s = compute_stats(fixture_corpus());
    const CorpusStats back = load_stats(s.to_json());
    CHECK(back.num_screenshots == s.num_screenshots);
    CHECK(back.num_elements == s.num_elements);
    CHECK(back.megapixels_mean == s.megapixels_mean);
    CHECK(back.mean_element_area_pct == s.mean_element_area_pct);
    CHECK(back.resolution_mp.counts == s.resolution_mp.counts);
    CHECK(back.element_area_pct.bin_edges == s.element_area_pct.bin_edges);
    CHECK(back.ui_category_counts == s.ui_category_counts);
}

TEST_CASE("the table mirrors the headline column names") {
    const CorpusStats s = compute_stats(fixture_corpus());
    const std::string table = s.to_table("fx");
    CHECK(table.find("EleArea") != std::string::npos);
    CHECK(table.find("#AvgE") != std::string::npos);
    CHECK(table.find("Res Range") != std::string::npos);
    CHECK(table.find("4.0") != std::string::npos); // #AvgE to one decimal
}

TEST_CASE("log-area histogram uses 10 bins per decade from 1e-5% to 1e2%") {
    const CorpusStats s = compute_stats(fixture_corpus());
    REQUIRE(s.element_area_pct.bin_edges.size() == 71);
    CHECK(s.element_area_pct.bin_edges.front() == doctest::Approx(1e-5));
    CHECK(s.element_area_pct.bin_edges.back() == doctest::Approx(1e2));
    // 0.25 MP linear bins.
    CHECK(s.resolution_mp.bin_edges[1] - s.resolution_mp.bin_edges[0] ==
          doctest::Approx(0.25));
}
