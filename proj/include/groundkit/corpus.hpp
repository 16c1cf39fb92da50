#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "groundkit/types.hpp"

namespace groundkit::corpus {

// Loads a corpus from a directory containing manifest.json (or from the
// manifest file itself). Structural problems are fatal: missing
// manifest, malformed JSON lines (reported with line number), missing
// fields, duplicate ids, elements referencing unknown screenshots.
Corpus load_corpus(const std::filesystem::path& path);

// Writes manifest.json + screenshots.jsonl + elements.jsonl into dir.
// load_corpus(save_corpus(c)) reproduces c field-exactly.
void save_corpus(const Corpus& c, const std::filesystem::path& dir);

enum class Severity { Warning, Error };

struct Diagnostic {
    std::string record_id;
    Severity severity = Severity::Warning;
    std::string code; // bbox_out_of_bounds, degenerate_box, megapixels_out_of_range, unknown_category
    std::string message;
};

struct ValidationReport {
    std::size_t error_count = 0;
    std::size_t warning_count = 0;
    std::vector<Diagnostic> diagnostics;

    std::string to_json() const;
};

// Data-quality pass. Non-strict mode clamps out-of-bounds boxes to the
// image (mutating c) and downgrades bbox problems to warnings; strict
// mode reports them as errors and leaves the data untouched. Run before
// sharing the corpus across threads.
ValidationReport validate_corpus(Corpus& c, bool strict);

} // namespace groundkit::corpus
