#pragma once

#include <map>
#include <string>
#include <vector>

#include "groundkit/types.hpp"

namespace groundkit::stats {

struct Histogram {
    std::vector<double> bin_edges; // n+1 edges for n bins
    std::vector<std::size_t> counts;
};

struct PerCategory {
    std::size_t screenshots = 0;
    std::size_t elements = 0;
};

struct CorpusStats {
    std::size_t num_screenshots = 0;
    std::size_t num_elements = 0;
    double avg_elements_per_screenshot = 0.0;
    std::size_t max_elements_per_screenshot = 0;
    double megapixels_mean = 0.0;
    double megapixels_min = 0.0;
    double megapixels_max = 0.0;
    // mean over elements of 100 * element area / screenshot area
    double mean_element_area_pct = 0.0;
    std::map<std::string, std::size_t> ui_category_counts; // "uncategorized" collects the rest
    std::map<std::string, PerCategory> app_category_counts;
    Histogram resolution_mp;     // linear 0.25 MP bins
    Histogram element_area_pct;  // log bins, 10 per decade, 1e-5 % .. 1e2 %
    Histogram elements_per_shot; // width-10 bins

    std::string to_json() const;
    // Table 1-style row: E, S, Res Range, EleArea, #AvgE.
    std::string to_table(const std::string& corpus_name) const;
};

CorpusStats load_stats(const std::string& json_text);

// Single pass over the corpus. Throws InvalidArgument on an empty corpus.
CorpusStats compute_stats(const Corpus& c);

} // namespace groundkit::stats
