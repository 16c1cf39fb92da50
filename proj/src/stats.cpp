#include "groundkit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <json.hpp>

#include "groundkit/error.hpp"

using nlohmann::json;

namespace groundkit::stats {

namespace {

// Clamps out-of-range samples into the edge bins so counts always sum
// to the population.
void fill_histogram(Histogram& h, const std::vector<double>& samples) {
    const std::size_t bins = h.counts.size();
    for (double v : samples) {
        std::size_t b = 0;
        if (v >= h.bin_edges.back()) {
            b = bins - 1;
        } else if (v > h.bin_edges.front()) {
            b = static_cast<std::size_t>(
                std::upper_bound(h.bin_edges.begin(), h.bin_edges.end(), v) -
                h.bin_edges.begin() - 1);
            if (b >= bins) b = bins - 1;
        }
        ++h.counts[b];
    }
}

Histogram linear_hist(double width, double max_value) {
    Histogram h;
    const std::size_t bins = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(max_value / width + 1e-12)));
    for (std::size_t i = 0; i <= bins; ++i) h.bin_edges.push_back(width * static_cast<double>(i));
    h.counts.assign(bins, 0);
    return h;
}

Histogram log_hist(double lo_exp, double hi_exp, int bins_per_decade) {
    Histogram h;
    const int bins = static_cast<int>(std::lround((hi_exp - lo_exp) * bins_per_decade));
    for (int i = 0; i <= bins; ++i) {
        h.bin_edges.push_back(std::pow(10.0, lo_exp + static_cast<double>(i) / bins_per_decade));
    }
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    return h;
}

json hist_to_json(const Histogram& h) {
    return json{{"bin_edges", h.bin_edges}, {"counts", h.counts}};
}

Histogram hist_from_json(const json& doc) {
    Histogram h;
    h.bin_edges = doc.at("bin_edges").get<std::vector<double>>();
    h.counts = doc.at("counts").get<std::vector<std::size_t>>();
    return h;
}

} // namespace

CorpusStats compute_stats(const Corpus& c) {
    require(!c.screenshots.empty(), ErrorCode::InvalidArgument, "empty corpus");

    CorpusStats s;
    s.num_screenshots = c.screenshots.size();
    s.num_elements = c.elements.size();
    s.avg_elements_per_screenshot =
        static_cast<double>(s.num_elements) / static_cast<double>(s.num_screenshots);

    std::vector<double> mps;
    mps.reserve(c.screenshots.size());
    std::vector<double> per_shot_counts;
    per_shot_counts.reserve(c.screenshots.size());
    s.megapixels_min = std::numeric_limits<double>::infinity();
    double mp_sum = 0.0;
    for (const Screenshot& shot : c.screenshots) {
        const double mp = shot.megapixels();
        mps.push_back(mp);
        mp_sum += mp;
        s.megapixels_min = std::min(s.megapixels_min, mp);
        s.megapixels_max = std::max(s.megapixels_max, mp);
        const std::size_t n = c.elements_by_screenshot.at(shot.id).size();
        s.max_elements_per_screenshot = std::max(s.max_elements_per_screenshot, n);
        per_shot_counts.push_back(static_cast<double>(n));
        auto& cat = s.app_category_counts[shot.category];
        ++cat.screenshots;
        cat.elements += n;
    }
    s.megapixels_mean = mp_sum / static_cast<double>(s.num_screenshots);

    std::vector<double> area_pcts;
    area_pcts.reserve(c.elements.size());
    double area_pct_sum = 0.0;
    for (const UiElement& e : c.elements) {
        const Screenshot* shot = c.find_screenshot(e.screenshot_id);
        const double shot_area =
            static_cast<double>(shot->width) * static_cast<double>(shot->height);
        const double pct = 100.0 * e.bbox.area() / shot_area;
        area_pcts.push_back(pct);
        area_pct_sum += pct;
        if (e.ui_category) {
            ++s.ui_category_counts[to_string(*e.ui_category)];
        } else {
            ++s.ui_category_counts["uncategorized"];
        }
    }
    s.mean_element_area_pct =
        c.elements.empty() ? 0.0 : area_pct_sum / static_cast<double>(c.elements.size());

    // Bin layouts pinned for reproducibility: 0.25 MP linear bins for
    // resolution, 10 log bins per decade spanning 1e-5 % .. 1e2 % for
    // relative element area, width-10 bins for annotations per shot.
    s.resolution_mp = linear_hist(0.25, s.megapixels_max);
    fill_histogram(s.resolution_mp, mps);
    s.element_area_pct = log_hist(-5.0, 2.0, 10);
    fill_histogram(s.element_area_pct, area_pcts);
    s.elements_per_shot =
        linear_hist(10.0, static_cast<double>(std::max<std::size_t>(
                              s.max_elements_per_screenshot, 1)));
    fill_histogram(s.elements_per_shot, per_shot_counts);
    return s;
}

std::string CorpusStats::to_json() const {
    json ui = json::object();
    for (const auto& [k, v] : ui_category_counts) ui[k] = v;
    json app = json::object();
    for (const auto& [k, v] : app_category_counts) {
        app[k] = {{"screenshots", v.screenshots}, {"elements", v.elements}};
    }
    json doc = {{"num_screenshots", num_screenshots},
                {"num_elements", num_elements},
                {"avg_elements_per_screenshot", avg_elements_per_screenshot},
                {"max_elements_per_screenshot", max_elements_per_screenshot},
                {"megapixels", {{"mean", megapixels_mean}, {"min", megapixels_min},
                                {"max", megapixels_max}}},
                {"mean_element_area_pct", mean_element_area_pct},
                {"ui_category_counts", ui},
                {"app_category_counts", app},
                {"histograms",
                 {{"resolution_mp", hist_to_json(resolution_mp)},
                  {"element_area_pct", hist_to_json(element_area_pct)},
                  {"elements_per_screenshot", hist_to_json(elements_per_shot)}}}};
    return doc.dump(2);
}

CorpusStats load_stats(const std::string& json_text) {
    json doc = json::parse(json_text, nullptr, false);
    require(!doc.is_discarded(), ErrorCode::Parse, "malformed stats JSON");
    CorpusStats s;
    s.num_screenshots = doc.at("num_screenshots").get<std::size_t>();
    s.num_elements = doc.at("num_elements").get<std::size_t>();
    s.avg_elements_per_screenshot = doc.at("avg_elements_per_screenshot").get<double>();
    s.max_elements_per_screenshot = doc.at("max_elements_per_screenshot").get<std::size_t>();
    s.megapixels_mean = doc.at("megapixels").at("mean").get<double>();
    s.megapixels_min = doc.at("megapixels").at("min").get<double>();
    s.megapixels_max = doc.at("megapixels").at("max").get<double>();
    s.mean_element_area_pct = doc.at("mean_element_area_pct").get<double>();
    for (const auto& [k, v] : doc.at("ui_category_counts").items()) {
        s.ui_category_counts[k] = v.get<std::size_t>();
    }
    for (const auto& [k, v] : doc.at("app_category_counts").items()) {
        s.app_category_counts[k] = {v.at("screenshots").get<std::size_t>(),
                                    v.at("elements").get<std::size_t>()};
    }
    const auto& h = doc.at("histograms");
    s.resolution_mp = hist_from_json(h.at("resolution_mp"));
    s.element_area_pct = hist_from_json(h.at("element_area_pct"));
    s.elements_per_shot = hist_from_json(h.at("elements_per_screenshot"));
    return s;
}

std::string CorpusStats::to_table(const std::string& corpus_name) const {
    char buf[256];
    std::string out;
    std::snprintf(buf, sizeof(buf), "%-20s %-10s %-8s %-14s %-9s %-7s\n", "Corpus", "E", "S",
                  "Res Range", "EleArea", "#AvgE");
    out += buf;
    std::snprintf(buf, sizeof(buf), "%-20s %-10zu %-8zu (%.1f, %.1f)     %.2f%%    %.1f\n",
                  corpus_name.c_str(), num_elements, num_screenshots, megapixels_min,
                  megapixels_max, mean_element_area_pct, avg_elements_per_screenshot);
    out += buf;
    return out;
}

} // namespace groundkit::stats
