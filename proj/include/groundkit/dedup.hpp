#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "groundkit/phash.hpp"
#include "groundkit/types.hpp"

namespace groundkit::dedup {

enum class LabelMode { Exact, Normalized };

struct DedupConfig {
    int hamming_threshold = 5; // of 64 bits
    LabelMode label_mode = LabelMode::Normalized;
    int min_crop_px = 8;
    int workers = 0; // 0 = hardware concurrency
};

// Lowercase (ASCII + Latin-1 + Latin Extended-A), trim, collapse
// whitespace runs (incl. NBSP and the common Unicode spaces) to single
// spaces. Invalid UTF-8 bytes pass through untouched.
std::string normalize_label(const std::string& s);

struct Cluster {
    std::string representative_id;
    std::vector<std::string> member_ids; // includes the representative
};

struct DedupReport {
    std::size_t input_count = 0;  // elements that entered clustering
    std::size_t unique_count = 0; // number of clusters
    std::size_t skipped_count = 0;
    std::vector<std::string> skipped_messages;
    std::map<std::size_t, std::size_t> cluster_size_hist; // size -> clusters
    std::vector<Cluster> clusters;

    std::string to_json(bool include_members = false) const;
};

struct DedupResult {
    std::vector<std::string> unique_ids; // one representative per cluster
    DedupReport report;
};

// Two elements share a cluster iff their labels match under label_mode
// AND their crop hashes are within hamming_threshold; the cluster
// relation is the transitive closure of that predicate (union-find over
// pairs bucketed by label). Representatives are picked cluster by
// cluster in seeded order, favouring the screenshot that has supplied
// the fewest representatives so far. Elements whose screenshot image
// cannot be read are skipped with a warning in the report.
DedupResult dedup_elements(const Corpus& c, const DedupConfig& cfg, std::uint64_t seed);

} // namespace groundkit::dedup
