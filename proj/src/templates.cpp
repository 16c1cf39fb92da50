#include "groundkit/templates.hpp"

#include <fstream>

#include <json.hpp>

#include "groundkit/error.hpp"
#include "templates_data.inc"

using nlohmann::json;

namespace groundkit::tpl {

std::optional<PromptKind> prompt_kind_from_string(const std::string& s) {
    if (s == "description") return PromptKind::Description;
    if (s == "general_instruction") return PromptKind::GeneralInstruction;
    if (s == "functional_goal") return PromptKind::FunctionalGoal;
    if (s == "visual_caption") return PromptKind::VisualCaption;
    return std::nullopt;
}

const char* to_string(PromptKind k) {
    switch (k) {
        case PromptKind::Description: return "description";
        case PromptKind::GeneralInstruction: return "general_instruction";
        case PromptKind::FunctionalGoal: return "functional_goal";
        case PromptKind::VisualCaption: return "visual_caption";
    }
    return "?";
}

std::optional<Relation> relation_from_string(const std::string& s) {
    if (s == "left_of") return Relation::LeftOf;
    if (s == "right_of") return Relation::RightOf;
    if (s == "above") return Relation::Above;
    if (s == "below") return Relation::Below;
    if (s == "between") return Relation::Between;
    return std::nullopt;
}

const char* to_string(Relation r) {
    switch (r) {
        case Relation::LeftOf: return "left_of";
        case Relation::RightOf: return "right_of";
        case Relation::Above: return "above";
        case Relation::Below: return "below";
        case Relation::Between: return "between";
    }
    return "?";
}

namespace {

std::vector<Template> parse_plain_templates(const json& doc, const std::string& where) {
    std::vector<Template> out;
    const auto& arr = doc.at("templates");
    require(arr.is_array() && !arr.empty(), ErrorCode::Parse, where + ": empty template set");
    for (const auto& t : arr) {
        out.push_back({t.at("id").get<int>(), t.at("text").get<std::string>()});
    }
    return out;
}

std::vector<SpatialTemplate> parse_spatial_templates(const json& doc, const std::string& where) {
    std::vector<SpatialTemplate> out;
    for (const auto& t : doc.at("templates")) {
        auto rel = relation_from_string(t.at("relation").get<std::string>());
        require(rel.has_value(), ErrorCode::Parse,
                where + ": unknown relation '" + t.at("relation").get<std::string>() + "'");
        out.push_back({t.at("id").get<int>(), *rel, t.at("text").get<std::string>()});
    }
    return out;
}

std::map<PromptKind, std::string> parse_prompts(const json& doc, const std::string& where) {
    std::map<PromptKind, std::string> out;
    for (const auto& [key, value] : doc.at("prompts").items()) {
        auto kind = prompt_kind_from_string(key);
        require(kind.has_value(), ErrorCode::Parse, where + ": unknown prompt kind '" + key + "'");
        out[*kind] = value.get<std::string>();
    }
    for (PromptKind k : {PromptKind::Description, PromptKind::GeneralInstruction,
                         PromptKind::FunctionalGoal, PromptKind::VisualCaption}) {
        require(out.count(k) != 0, ErrorCode::Parse,
                where + ": missing prompt '" + std::string(to_string(k)) + "'");
    }
    return out;
}

json parse_doc(const std::string& text, const std::string& where) {
    json doc = json::parse(text, nullptr, false);
    require(!doc.is_discarded(), ErrorCode::Parse, where + ": malformed JSON");
    return doc;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    require(in.good(), ErrorCode::Io, "cannot open " + p.string());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

TemplateSet build(const std::string& textual, const std::string& general,
                  const std::string& spatial, const std::string& prompts,
                  const std::string& where) {
    TemplateSet set;
    set.textual = parse_plain_templates(parse_doc(textual, where + "/textual.json"),
                                        where + "/textual.json");
    set.general = parse_plain_templates(parse_doc(general, where + "/general.json"),
                                        where + "/general.json");
    set.spatial = parse_spatial_templates(parse_doc(spatial, where + "/spatial.json"),
                                          where + "/spatial.json");
    set.prompts = parse_prompts(parse_doc(prompts, where + "/prompts.json"),
                                where + "/prompts.json");
    return set;
}

} // namespace

const TemplateSet& default_templates() {
    static const TemplateSet set =
        build(embedded::kTextualJson, embedded::kGeneralJson, embedded::kSpatialJson,
              embedded::kPromptsJson, "<embedded>");
    return set;
}

TemplateSet load_templates(const std::filesystem::path& dir) {
    return build(slurp(dir / "textual.json"), slurp(dir / "general.json"),
                 slurp(dir / "spatial.json"), slurp(dir / "prompts.json"), dir.string());
}

namespace {
template <typename T>
const T& by_id(const std::vector<T>& v, int id, const char* what) {
    for (const T& t : v)
        if (t.id == id) return t;
    fail(ErrorCode::NotFound, std::string(what) + " template id " + std::to_string(id) +
                                  " not in the shipped set");
}
} // namespace

const Template& TemplateSet::textual_by_id(int id) const {
    return by_id(textual, id, "textual");
}
const Template& TemplateSet::general_by_id(int id) const {
    return by_id(general, id, "general");
}
const SpatialTemplate& TemplateSet::spatial_by_id(int id) const {
    return by_id(spatial, id, "spatial");
}

std::vector<const SpatialTemplate*> TemplateSet::spatial_for(Relation r) const {
    std::vector<const SpatialTemplate*> out;
    for (const SpatialTemplate& t : spatial)
        if (t.relation == r) out.push_back(&t);
    return out;
}

namespace {
const char* const kKnownPlaceholders[] = {"{text}", "{element}", "{element_1}", "{element_2}",
                                          "{platform}"};
}

std::string render(const std::string& tmpl, const std::map<std::string, std::string>& vars) {
    std::string out = tmpl;
    for (const auto& [name, value] : vars) {
        const std::string token = "{" + name + "}";
        std::size_t pos = 0;
        while ((pos = out.find(token, pos)) != std::string::npos) {
            out.replace(pos, token.size(), value);
            pos += value.size();
        }
    }
    require(!has_unresolved_placeholder(out), ErrorCode::InvalidArgument,
            "unresolved placeholder after substitution: " + out);
    return out;
}

bool has_unresolved_placeholder(const std::string& text) {
    for (const char* token : kKnownPlaceholders) {
        if (text.find(token) != std::string::npos) return true;
    }
    return false;
}

} // namespace groundkit::tpl
