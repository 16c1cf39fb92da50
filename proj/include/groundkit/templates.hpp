#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace groundkit::tpl {

enum class PromptKind { Description, GeneralInstruction, FunctionalGoal, VisualCaption };

std::optional<PromptKind> prompt_kind_from_string(const std::string& s);
const char* to_string(PromptKind k);

enum class Relation { LeftOf, RightOf, Above, Below, Between };

std::optional<Relation> relation_from_string(const std::string& s);
const char* to_string(Relation r);

struct Template {
    int id = 0;
    std::string text;
};

struct SpatialTemplate {
    int id = 0;
    Relation relation = Relation::RightOf;
    std::string text;
};

// The versioned instruction/prompt template sets. The library embeds the
// copies under data/templates/; load_templates() reads a drop-in
// replacement directory with the same four files.
struct TemplateSet {
    std::vector<Template> textual;
    std::vector<Template> general;
    std::vector<SpatialTemplate> spatial;
    std::map<PromptKind, std::string> prompts;

    const Template& textual_by_id(int id) const;
    const Template& general_by_id(int id) const;
    const SpatialTemplate& spatial_by_id(int id) const;
    std::vector<const SpatialTemplate*> spatial_for(Relation r) const;
};

const TemplateSet& default_templates();
TemplateSet load_templates(const std::filesystem::path& dir);

// Substitutes {name} -> value for every pair in vars, then rejects any
// leftover placeholder token known to the template language.
std::string render(const std::string& tmpl, const std::map<std::string, std::string>& vars);

// True when the text still carries an unresolved template placeholder.
bool has_unresolved_placeholder(const std::string& text);

} // namespace groundkit::tpl
