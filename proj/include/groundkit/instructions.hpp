#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "groundkit/templates.hpp"
#include "groundkit/types.hpp"

namespace groundkit::instr {

enum class Kind { Direct, Functional, Spatial };
enum class Subkind { Textual, Visual, General, Description, FunctionalGoal, SpatialRelative };
enum class Provenance { Template, Model };

std::optional<Kind> kind_from_string(const std::string& s);
const char* to_string(Kind k);
std::optional<Subkind> subkind_from_string(const std::string& s);
const char* to_string(Subkind k);
const char* to_string(Provenance p);
std::optional<Provenance> provenance_from_string(const std::string& s);

// A synthesized (screenshot, instruction, target element) triple.
// Spatial samples carry their anchor element ids (1 for directional
// relations, 2 for between); everything else has none.
struct InstructionSample {
    std::string id;
    std::string screenshot_id;
    std::string element_id;
    std::string instruction;
    Kind kind = Kind::Direct;
    Subkind subkind = Subkind::General;
    Provenance provenance = Provenance::Template;
    std::vector<std::string> anchors;

    // Carried so SFT export works without re-opening the corpus.
    std::string image_path;
    BoundingBox target_box;
};

// Throws InvalidArgument when a sample violates its own invariants.
void check_sample(const InstructionSample& s);

// An element is textual when its OCR text matches its label after
// normalization, or it belongs to the InformationDisplay category.
bool is_textual(const UiElement& e);

// template_id 0 picks a template with the seeded engine; a nonzero id
// selects that exact template. Throws on non-textual elements.
InstructionSample make_textual_instruction(const UiElement& e, const Screenshot& shot,
                                           const tpl::TemplateSet& set, int template_id,
                                           std::uint64_t rng_seed);

InstructionSample make_general_instruction(const UiElement& e, const Screenshot& shot,
                                           const tpl::TemplateSet& set, int template_id,
                                           std::uint64_t rng_seed);

struct SpatialConfig {
    double max_gap_px = 200.0;      // per-side ceiling for "between"
    double min_overlap_frac = 0.5;  // of the shorter box's cross extent
    std::size_t max_label_chars = 40;
};

struct SpatialRelationHit {
    tpl::Relation relation;
    std::vector<std::size_t> anchor_indexes; // into the candidate span
};

// Relations the target participates in, at most one per relation kind:
//   RightOf(target, a): a.x2 <= target.x1, vertical overlap >= 50% of
//   the shorter box, a the horizontally nearest such anchor (ties break
//   toward the smaller element id). LeftOf/Above/Below mirror it.
//   Between(target, a, b): a and b are the nearest valid left and right
//   anchors and both gaps are <= max_gap_px.
// Anchors must pass the reliability filter: non-empty label, at most
// max_label_chars code points, label unique on the screenshot (after
// normalization).
std::vector<SpatialRelationHit> spatial_relations(const UiElement& target,
                                                  std::span<const UiElement> same_screenshot,
                                                  const SpatialConfig& cfg = {});

InstructionSample make_spatial_instruction(const UiElement& target, const Screenshot& shot,
                                           tpl::Relation relation,
                                           std::span<const UiElement* const> anchors,
                                           const tpl::TemplateSet& set, int template_id,
                                           std::uint64_t rng_seed);

// A fully rendered remote-model request.
struct PromptRequest {
    std::string request_id;
    tpl::PromptKind prompt_kind = tpl::PromptKind::Description;
    std::string platform;
    std::string element_label;
    std::string full_image_ref;
    std::string crop_image_ref;
    std::string rendered_prompt;
};

PromptRequest build_prompt(tpl::PromptKind kind, const std::string& platform,
                           const std::string& label, const std::string& full_image_ref,
                           const std::string& crop_image_ref, const tpl::TemplateSet& set);

struct ModelResponse {
    std::string request_id;
    std::string raw;
    struct Parsed {
        bool visible = false;
        std::string text;
    };
    std::optional<Parsed> parsed;
    std::optional<std::string> transport_error;
};

// Parses the JSON reply ({"visible": ..., "description"/"instruction"/
// "function"/"caption": ...}); leaves parsed empty when the shape is wrong.
ModelResponse parse_model_response(const std::string& request_id, const std::string& raw);

struct ResponseVerdict {
    bool accepted = false;
    std::string text;   // instruction text when accepted
    std::string reason; // rejection reason otherwise
};

// Accepts only visible=true responses with non-empty text that never
// mention the annotation artifacts ("bounding box", "highlighted").
ResponseVerdict validate_response(const ModelResponse& r);

struct MixSpec {
    double direct = 0.50;
    double functional = 0.35;
    double spatial = 0.15;
    std::size_t total = 0;
};

// Largest-remainder seat counts for (direct, functional, spatial).
std::array<std::size_t, 3> mix_counts(const MixSpec& spec);

// Seeded sampling without replacement, per-kind counts by largest
// remainder. Throws when a kind cannot fill its seats, naming the kind
// and the shortfall.
std::vector<InstructionSample> sample_mix(const std::vector<InstructionSample>& pool,
                                          const MixSpec& spec, std::uint64_t seed);

// JSONL: {"image", "instruction", "target_point", "target_box", "kind",
// "element_id"}; target_point is the box center.
void export_sft(const std::vector<InstructionSample>& dataset, const std::filesystem::path& out);

// k elements drawn uniformly (seeded) from pool minus sft_used. Throws
// when fewer than k remain, reporting the available count.
std::vector<std::string> select_rl_unseen(const std::vector<std::string>& pool,
                                          const std::set<std::string>& sft_used, std::size_t k,
                                          std::uint64_t seed);

struct PredictionOutcome {
    InstructionSample sample;
    Point predicted;
};

// Keeps the misses (predicted point outside the target box) and returns
// min(k, misses) of them, seeded uniform.
std::vector<InstructionSample> rejection_sample_errors(std::span<const PredictionOutcome> records,
                                                       std::size_t k, std::uint64_t seed);

// Pool file IO (instructions.jsonl inside a pool directory).
void write_pool(const std::vector<InstructionSample>& samples, const std::filesystem::path& dir);
std::vector<InstructionSample> load_pool(const std::filesystem::path& dir);

} // namespace groundkit::instr
