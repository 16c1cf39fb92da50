#include "groundkit/instructions.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "groundkit/dedup.hpp"
#include "groundkit/error.hpp"
#include "groundkit/geometry.hpp"
#include "groundkit/jsonl.hpp"
#include "groundkit/rng.hpp"

using nlohmann::json;

namespace groundkit::instr {

std::optional<Kind> kind_from_string(const std::string& s) {
    if (s == "direct") return Kind::Direct;
    if (s == "functional") return Kind::Functional;
    if (s == "spatial") return Kind::Spatial;
    return std::nullopt;
}

const char* to_string(Kind k) {
    switch (k) {
        case Kind::Direct: return "direct";
        case Kind::Functional: return "functional";
        case Kind::Spatial: return "spatial";
    }
    return "?";
}

std::optional<Subkind> subkind_from_string(const std::string& s) {
    if (s == "textual") return Subkind::Textual;
    if (s == "visual") return Subkind::Visual;
    if (s == "general") return Subkind::General;
    if (s == "description") return Subkind::Description;
    if (s == "functional_goal") return Subkind::FunctionalGoal;
    if (s == "spatial_relative") return Subkind::SpatialRelative;
    return std::nullopt;
}

const char* to_string(Subkind k) {
    switch (k) {
        case Subkind::Textual: return "textual";
        case Subkind::Visual: return "visual";
        case Subkind::General: return "general";
        case Subkind::Description: return "description";
        case Subkind::FunctionalGoal: return "functional_goal";
        case Subkind::SpatialRelative: return "spatial_relative";
    }
    return "?";
}

const char* to_string(Provenance p) {
    return p == Provenance::Template ? "template" : "model";
}

std::optional<Provenance> provenance_from_string(const std::string& s) {
    if (s == "template") return Provenance::Template;
    if (s == "model") return Provenance::Model;
    return std::nullopt;
}

void check_sample(const InstructionSample& s) {
    require(!s.instruction.empty(), ErrorCode::InvalidArgument,
            "sample " + s.id + ": empty instruction");
    require(!tpl::has_unresolved_placeholder(s.instruction), ErrorCode::InvalidArgument,
            "sample " + s.id + ": unresolved placeholder in instruction");
    if (s.kind == Kind::Spatial) {
        require(s.anchors.size() == 1 || s.anchors.size() == 2, ErrorCode::InvalidArgument,
                "sample " + s.id + ": spatial sample needs 1 or 2 anchors");
    } else {
        require(s.anchors.empty(), ErrorCode::InvalidArgument,
                "sample " + s.id + ": non-spatial sample carries anchors");
    }
}

bool is_textual(const UiElement& e) {
    if (e.ui_category && *e.ui_category == UiCategory::InformationDisplay) return true;
    if (!e.ocr_text) return false;
    return dedup::normalize_label(*e.ocr_text) == dedup::normalize_label(e.label);
}

namespace {

std::string sample_id(const std::string& element_id, Subkind sk, int template_id) {
    return element_id + "/" + to_string(sk) + "/" + std::to_string(template_id);
}

InstructionSample finish(const UiElement& e, const Screenshot& shot, InstructionSample s) {
    s.screenshot_id = e.screenshot_id;
    s.element_id = e.id;
    s.image_path = shot.image_path;
    s.target_box = e.bbox;
    check_sample(s);
    return s;
}

int pick_template_id(const std::vector<tpl::Template>& set, int template_id,
                     std::uint64_t rng_seed) {
    if (template_id != 0) return template_id;
    auto g = rng::make_engine(rng_seed);
    return set[rng::bounded(g, set.size())].id;
}

} // namespace

InstructionSample make_textual_instruction(const UiElement& e, const Screenshot& shot,
                                           const tpl::TemplateSet& set, int template_id,
                                           std::uint64_t rng_seed) {
    require(is_textual(e), ErrorCode::InvalidArgument,
            "element " + e.id + " is not textual (no matching OCR text, not InformationDisplay)");
    const int id = pick_template_id(set.textual, template_id, rng_seed);
    const tpl::Template& t = set.textual_by_id(id);
    InstructionSample s;
    s.id = sample_id(e.id, Subkind::Textual, id);
    s.instruction = tpl::render(t.text, {{"text", e.label}});
    s.kind = Kind::Direct;
    s.subkind = Subkind::Textual;
    s.provenance = Provenance::Template;
    return finish(e, shot, std::move(s));
}

InstructionSample make_general_instruction(const UiElement& e, const Screenshot& shot,
                                           const tpl::TemplateSet& set, int template_id,
                                           std::uint64_t rng_seed) {
    require(!e.label.empty(), ErrorCode::InvalidArgument,
            "element " + e.id + " has an empty label");
    const int id = pick_template_id(set.general, template_id, rng_seed);
    const tpl::Template& t = set.general_by_id(id);
    InstructionSample s;
    s.id = sample_id(e.id, Subkind::General, id);
    s.instruction = tpl::render(t.text, {{"text", e.label}});
    s.kind = Kind::Direct;
    s.subkind = Subkind::General;
    s.provenance = Provenance::Template;
    return finish(e, shot, std::move(s));
}

namespace {

std::size_t count_code_points(const std::string& s) {
    std::size_t n = 0;
    for (unsigned char c : s)
        if ((c & 0xC0) != 0x80) ++n;
    return n;
}

double overlap_len(double a1, double a2, double b1, double b2) {
    return std::min(a2, b2) - std::max(a1, b1);
}

} // namespace

std::vector<SpatialRelationHit> spatial_relations(const UiElement& target,
                                                  std::span<const UiElement> same_screenshot,
                                                  const SpatialConfig& cfg) {
    // Reliability filter: usable anchors have a non-empty, short label
    // that is unique on the screenshot after normalization.
    std::map<std::string, std::size_t> label_freq;
    for (const UiElement& e : same_screenshot) ++label_freq[dedup::normalize_label(e.label)];

    auto reliable = [&](const UiElement& a) {
        if (a.label.empty()) return false;
        if (count_code_points(a.label) > cfg.max_label_chars) return false;
        return label_freq[dedup::normalize_label(a.label)] == 1;
    };

    const BoundingBox& t = target.bbox;
    struct Best {
        double gap = std::numeric_limits<double>::infinity();
        std::size_t index = 0;
        bool found = false;
    };
    Best left, right, above, below; // named for where the anchor sits relative to the target

    for (std::size_t i = 0; i < same_screenshot.size(); ++i) {
        const UiElement& a = same_screenshot[i];
        if (a.id == target.id) continue;
        if (!reliable(a)) continue;
        const BoundingBox& b = a.bbox;

        const double v_overlap = overlap_len(t.y1, t.y2, b.y1, b.y2);
        const double v_needed = cfg.min_overlap_frac * std::min(t.height(), b.height());
        if (v_overlap >= v_needed) {
            if (b.x2 <= t.x1) { // anchor left of target
                const double gap = t.x1 - b.x2;
                if (gap < left.gap ||
                    (gap == left.gap && a.id < same_screenshot[left.index].id)) {
                    left = {gap, i, true};
                }
            }
            if (b.x1 >= t.x2) { // anchor right of target
                const double gap = b.x1 - t.x2;
                if (gap < right.gap ||
                    (gap == right.gap && a.id < same_screenshot[right.index].id)) {
                    right = {gap, i, true};
                }
            }
        }
        const double h_overlap = overlap_len(t.x1, t.x2, b.x1, b.x2);
        const double h_needed = cfg.min_overlap_frac * std::min(t.width(), b.width());
        if (h_overlap >= h_needed) {
            if (b.y2 <= t.y1) { // anchor above target
                const double gap = t.y1 - b.y2;
                if (gap < above.gap ||
                    (gap == above.gap && a.id < same_screenshot[above.index].id)) {
                    above = {gap, i, true};
                }
            }
            if (b.y1 >= t.y2) { // anchor below target
                const double gap = b.y1 - t.y2;
                if (gap < below.gap ||
                    (gap == below.gap && a.id < same_screenshot[below.index].id)) {
                    below = {gap, i, true};
                }
            }
        }
    }

    std::vector<SpatialRelationHit> out;
    // Target is right of its left anchor, and so on.
    if (left.found) out.push_back({tpl::Relation::RightOf, {left.index}});
    if (right.found) out.push_back({tpl::Relation::LeftOf, {right.index}});
    if (above.found) out.push_back({tpl::Relation::Below, {above.index}});
    if (below.found) out.push_back({tpl::Relation::Above, {below.index}});
    if (left.found && right.found && left.gap <= cfg.max_gap_px && right.gap <= cfg.max_gap_px) {
        out.push_back({tpl::Relation::Between, {left.index, right.index}});
    }
    return out;
}

InstructionSample make_spatial_instruction(const UiElement& target, const Screenshot& shot,
                                           tpl::Relation relation,
                                           std::span<const UiElement* const> anchors,
                                           const tpl::TemplateSet& set, int template_id,
                                           std::uint64_t rng_seed) {
    const std::size_t need = relation == tpl::Relation::Between ? 2 : 1;
    require(anchors.size() == need, ErrorCode::InvalidArgument,
            std::string(tpl::to_string(relation)) + " takes " + std::to_string(need) +
                " anchor(s), got " + std::to_string(anchors.size()));

    int id = template_id;
    if (id == 0) {
        auto candidates = set.spatial_for(relation);
        require(!candidates.empty(), ErrorCode::NotFound,
                std::string("no spatial template for relation ") + tpl::to_string(relation));
        auto g = rng::make_engine(rng_seed);
        id = candidates[rng::bounded(g, candidates.size())]->id;
    }
    const tpl::SpatialTemplate& t = set.spatial_by_id(id);
    require(t.relation == relation, ErrorCode::InvalidArgument,
            "template " + std::to_string(id) + " renders relation " +
                tpl::to_string(t.relation) + ", not " + tpl::to_string(relation));

    std::map<std::string, std::string> vars;
    if (relation == tpl::Relation::Between) {
        vars["element_1"] = anchors[0]->label;
        vars["element_2"] = anchors[1]->label;
    } else {
        vars["element"] = anchors[0]->label;
    }

    InstructionSample s;
    s.id = sample_id(target.id, Subkind::SpatialRelative, id);
    s.instruction = tpl::render(t.text, vars);
    s.kind = Kind::Spatial;
    s.subkind = Subkind::SpatialRelative;
    s.provenance = Provenance::Template;
    for (const UiElement* a : anchors) s.anchors.push_back(a->id);
    return finish(target, shot, std::move(s));
}

PromptRequest build_prompt(tpl::PromptKind kind, const std::string& platform,
                           const std::string& label, const std::string& full_image_ref,
                           const std::string& crop_image_ref, const tpl::TemplateSet& set) {
    require(!label.empty(), ErrorCode::InvalidArgument, "prompt needs a non-empty element label");
    auto it = set.prompts.find(kind);
    require(it != set.prompts.end(), ErrorCode::NotFound,
            std::string("no prompt template for kind ") + tpl::to_string(kind));
    PromptRequest req;
    req.prompt_kind = kind;
    req.platform = platform;
    req.element_label = label;
    req.full_image_ref = full_image_ref;
    req.crop_image_ref = crop_image_ref;
    req.rendered_prompt = tpl::render(it->second, {{"platform", platform}, {"text", label}});
    return req;
}

ModelResponse parse_model_response(const std::string& request_id, const std::string& raw) {
    ModelResponse r;
    r.request_id = request_id;
    r.raw = raw;
    std::string trimmed = raw;
    const auto first = trimmed.find_first_not_of(" \t\r\n");
    const auto last = trimmed.find_last_not_of(" \t\r\n");
    if (first == std::string::npos) return r;
    trimmed = trimmed.substr(first, last - first + 1);
    json doc = json::parse(trimmed, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) return r;
    auto vis = doc.find("visible");
    if (vis == doc.end() || !vis->is_boolean()) return r;
    for (const char* key : {"description", "instruction", "function", "caption"}) {
        auto it = doc.find(key);
        if (it != doc.end() && it->is_string()) {
            r.parsed = ModelResponse::Parsed{vis->get<bool>(), it->get<std::string>()};
            return r;
        }
    }
    return r;
}

namespace {
bool contains_ci(const std::string& hay, const std::string& needle) {
    auto it = std::search(hay.begin(), hay.end(), needle.begin(), needle.end(),
                          [](char a, char b) {
                              return std::tolower(static_cast<unsigned char>(a)) ==
                                     std::tolower(static_cast<unsigned char>(b));
                          });
    return it != hay.end();
}
} // namespace

ResponseVerdict validate_response(const ModelResponse& r) {
    if (r.transport_error) return {false, "", "transport error: " + *r.transport_error};
    if (!r.parsed) return {false, "", "response is not the expected JSON shape"};
    if (!r.parsed->visible) return {false, "", "element reported not visible"};
    if (r.parsed->text.empty()) return {false, "", "empty instruction text"};
    // The prompts forbid referencing the red annotation box.
    if (contains_ci(r.parsed->text, "bounding box") || contains_ci(r.parsed->text, "highlighted")) {
        return {false, "", "references the annotation artifact"};
    }
    return {true, r.parsed->text, ""};
}

std::array<std::size_t, 3> mix_counts(const MixSpec& spec) {
    const double sum = spec.direct + spec.functional + spec.spatial;
    require(std::abs(sum - 1.0) <= 1e-9, ErrorCode::InvalidArgument,
            "mix fractions must sum to 1.0");
    const double fracs[3] = {spec.direct, spec.functional, spec.spatial};
    std::array<std::size_t, 3> counts{};
    double remainders[3];
    std::size_t assigned = 0;
    for (int i = 0; i < 3; ++i) {
        const double exact = fracs[i] * static_cast<double>(spec.total);
        counts[i] = static_cast<std::size_t>(std::floor(exact));
        remainders[i] = exact - std::floor(exact);
        assigned += counts[i];
    }
    // Remaining seats go to the largest remainders; ties favour the
    // declaration order direct > functional > spatial.
    while (assigned < spec.total) {
        int best = 0;
        for (int i = 1; i < 3; ++i)
            if (remainders[i] > remainders[best]) best = i;
        ++counts[best];
        remainders[best] = -1.0;
        ++assigned;
    }
    return counts;
}

std::vector<InstructionSample> sample_mix(const std::vector<InstructionSample>& pool,
                                          const MixSpec& spec, std::uint64_t seed) {
    const auto counts = mix_counts(spec);

    std::vector<std::size_t> by_kind[3];
    for (std::size_t i = 0; i < pool.size(); ++i) {
        by_kind[static_cast<int>(pool[i].kind)].push_back(i);
    }
    static const Kind kinds[3] = {Kind::Direct, Kind::Functional, Kind::Spatial};
    for (int k = 0; k < 3; ++k) {
        require(by_kind[k].size() >= counts[k], ErrorCode::InvalidArgument,
                std::string("insufficient pool for kind '") + to_string(kinds[k]) + "': need " +
                    std::to_string(counts[k]) + ", have " + std::to_string(by_kind[k].size()) +
                    " (short by " + std::to_string(counts[k] - by_kind[k].size()) + ")");
    }

    auto g = rng::make_engine(seed);
    std::vector<InstructionSample> out;
    out.reserve(spec.total);
    for (int k = 0; k < 3; ++k) {
        auto picks = rng::sample_indices(by_kind[k].size(), counts[k], g);
        std::sort(picks.begin(), picks.end()); // keep pool order within a kind
        for (std::size_t p : picks) out.push_back(pool[by_kind[k][p]]);
    }
    return out;
}

void export_sft(const std::vector<InstructionSample>& dataset, const std::filesystem::path& out) {
    jsonl::Writer w(out);
    for (const InstructionSample& s : dataset) {
        require(!s.image_path.empty(), ErrorCode::NotFound,
                "sample " + s.id + ": element " + s.element_id +
                    " does not resolve to an image");
        const BoundingBox& b = s.target_box;
        w.write(json{{"image", s.image_path},
                     {"instruction", s.instruction},
                     {"target_point", {0.5 * (b.x1 + b.x2), 0.5 * (b.y1 + b.y2)}},
                     {"target_box", {b.x1, b.y1, b.x2, b.y2}},
                     {"kind", to_string(s.kind)},
                     {"element_id", s.element_id}});
    }
}

std::vector<std::string> select_rl_unseen(const std::vector<std::string>& pool,
                                          const std::set<std::string>& sft_used, std::size_t k,
                                          std::uint64_t seed) {
    std::vector<std::string> unseen;
    unseen.reserve(pool.size());
    for (const std::string& id : pool) {
        if (!sft_used.count(id)) unseen.push_back(id);
    }
    require(unseen.size() >= k, ErrorCode::InvalidArgument,
            "need " + std::to_string(k) + " unseen elements but only " +
                std::to_string(unseen.size()) + " are available");
    auto g = rng::make_engine(seed);
    auto picks = rng::sample_indices(unseen.size(), k, g);
    std::sort(picks.begin(), picks.end());
    std::vector<std::string> out;
    out.reserve(k);
    for (std::size_t p : picks) out.push_back(unseen[p]);
    return out;
}

std::vector<InstructionSample> rejection_sample_errors(std::span<const PredictionOutcome> records,
                                                       std::size_t k, std::uint64_t seed) {
    std::vector<std::size_t> misses;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (!geom::point_in_box(records[i].predicted, records[i].sample.target_box)) {
            misses.push_back(i);
        }
    }
    auto g = rng::make_engine(seed);
    auto picks = rng::sample_indices(misses.size(), std::min(k, misses.size()), g);
    std::sort(picks.begin(), picks.end());
    std::vector<InstructionSample> out;
    out.reserve(picks.size());
    for (std::size_t p : picks) out.push_back(records[misses[p]].sample);
    return out;
}

void write_pool(const std::vector<InstructionSample>& samples, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    jsonl::Writer w(dir / "instructions.jsonl");
    for (const InstructionSample& s : samples) {
        json doc = {{"id", s.id},
                    {"screenshot_id", s.screenshot_id},
                    {"element_id", s.element_id},
                    {"instruction", s.instruction},
                    {"kind", to_string(s.kind)},
                    {"subkind", to_string(s.subkind)},
                    {"provenance", to_string(s.provenance)},
                    {"anchors", s.anchors},
                    {"image", s.image_path},
                    {"target_box", {s.target_box.x1, s.target_box.y1, s.target_box.x2,
                                    s.target_box.y2}}};
        w.write(doc);
    }
}

std::vector<InstructionSample> load_pool(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    const fs::path file = fs::is_directory(dir) ? dir / "instructions.jsonl" : dir;
    std::vector<InstructionSample> out;
    jsonl::for_each(file, [&](std::size_t lineno, const json& doc) {
        const std::string where = file.filename().string() + ":" + std::to_string(lineno);
        InstructionSample s;
        s.id = doc.at("id").get<std::string>();
        s.screenshot_id = doc.at("screenshot_id").get<std::string>();
        s.element_id = doc.at("element_id").get<std::string>();
        s.instruction = doc.at("instruction").get<std::string>();
        auto kind = kind_from_string(doc.at("kind").get<std::string>());
        require(kind.has_value(), ErrorCode::Parse, where + ": unknown kind");
        s.kind = *kind;
        auto subkind = subkind_from_string(doc.at("subkind").get<std::string>());
        require(subkind.has_value(), ErrorCode::Parse, where + ": unknown subkind");
        s.subkind = *subkind;
        auto prov = provenance_from_string(doc.at("provenance").get<std::string>());
        require(prov.has_value(), ErrorCode::Parse, where + ": unknown provenance");
        s.provenance = *prov;
        for (const auto& a : doc.at("anchors")) s.anchors.push_back(a.get<std::string>());
        if (doc.contains("image")) s.image_path = doc["image"].get<std::string>();
        if (doc.contains("target_box")) {
            const auto& b = doc["target_box"];
            require(b.is_array() && b.size() == 4, ErrorCode::Parse, where + ": bad target_box");
            s.target_box = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>(),
                            b[3].get<double>()};
        }
        check_sample(s);
        out.push_back(std::move(s));
    });
    return out;
}

} // namespace groundkit::instr
