#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "groundkit/parsing.hpp"
#include "groundkit/types.hpp"

namespace groundkit::eval {

struct BenchmarkRecord {
    std::string id;
    double image_w = 0.0;
    double image_h = 0.0;
    std::string image_path; // dims are read from this file when w/h absent
    std::string instruction;
    BoundingBox gt_box;
    std::map<std::string, std::string> tags; // keys lowercased on load
};

struct PredictionRecord {
    std::string record_id;
    std::optional<Point> point; // pixel space when given directly
    std::optional<std::string> text;
};

std::vector<BenchmarkRecord> load_benchmark(const std::filesystem::path& path);
std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path);

struct EvalOptions {
    CoordSpace coord_space = CoordSpace::Pixel;
    bool strict_ids = false;       // unknown record_id fails instead of being set aside
    bool exclusive_bounds = false; // parity studies: boundary points count as misses
    bool first_pair = false;       // take the first coordinate pair instead of the last
};

struct TagBucket {
    std::size_t correct = 0;
    std::size_t total = 0;

    double accuracy() const { return total == 0 ? 0.0 : static_cast<double>(correct) / total; }
};

struct EvalReport {
    std::size_t total = 0;
    std::size_t correct = 0;
    std::size_t missing = 0;     // records with no prediction at all
    std::size_t unparseable = 0; // text predictions with no coordinate pair
    std::size_t unmatched = 0;   // predictions referencing unknown record ids
    // tag key -> tag value -> bucket; records missing a key land in "untagged".
    std::map<std::string, std::map<std::string, TagBucket>> by_tag;

    double accuracy() const { return total == 0 ? 0.0 : static_cast<double>(correct) / total; }
    std::string to_json() const;
};

EvalReport load_report(const std::string& json_text);

// Correct iff the (scaled) predicted point lies in the ground-truth box;
// missing and unparseable predictions count as incorrect. Duplicate
// predictions for one record: the last one wins.
EvalReport score(const std::vector<BenchmarkRecord>& benchmark,
                 const std::vector<PredictionRecord>& predictions, const EvalOptions& opts = {});

// Plain-text table, one row per value of each layout key, accuracy in
// percent with one decimal. Throws on a layout key absent from the report.
std::string report_table(const EvalReport& r, const std::vector<std::string>& layout);

} // namespace groundkit::eval
