#include "groundkit/corpus.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "groundkit/error.hpp"
#include "groundkit/jsonl.hpp"

using nlohmann::json;

namespace groundkit {

const char* to_string(UiCategory c) {
    switch (c) {
        case UiCategory::InputElement: return "input_element";
        case UiCategory::Sidebar: return "sidebar";
        case UiCategory::InformationDisplay: return "information_display";
        case UiCategory::Button: return "button";
        case UiCategory::Navigation: return "navigation";
        case UiCategory::VisualElements: return "visual_elements";
        case UiCategory::Menu: return "menu";
        case UiCategory::Others: return "others";
    }
    return "?";
}

std::optional<UiCategory> ui_category_from_string(const std::string& s) {
    static const std::pair<const char*, UiCategory> table[] = {
        {"input_element", UiCategory::InputElement},
        {"sidebar", UiCategory::Sidebar},
        {"information_display", UiCategory::InformationDisplay},
        {"button", UiCategory::Button},
        {"navigation", UiCategory::Navigation},
        {"visual_elements", UiCategory::VisualElements},
        {"menu", UiCategory::Menu},
        {"others", UiCategory::Others},
    };
    for (const auto& [name, cat] : table)
        if (s == name) return cat;
    return std::nullopt;
}

const std::vector<std::string>& software_categories() {
    static const std::vector<std::string> cats = {
        "Education",
        "Browsers",
        "Development",
        "Productivity",
        "Graphics and Design",
        "Video and Audio Production",
        "Communication",
        "Entertainment",
        "System Utilities",
        "Security",
        "Finance and Business Analytics",
        "Scientific",
    };
    return cats;
}

void Corpus::rebuild_indexes() {
    screenshot_index.clear();
    element_index.clear();
    elements_by_screenshot.clear();
    for (std::size_t i = 0; i < screenshots.size(); ++i) {
        auto [it, fresh] = screenshot_index.emplace(screenshots[i].id, i);
        require(fresh, ErrorCode::Parse, "duplicate screenshot id: " + screenshots[i].id);
        elements_by_screenshot.emplace(screenshots[i].id, std::vector<std::size_t>{});
    }
    for (std::size_t i = 0; i < elements.size(); ++i) {
        const UiElement& e = elements[i];
        auto [it, fresh] = element_index.emplace(e.id, i);
        require(fresh, ErrorCode::Parse, "duplicate element id: " + e.id);
        auto sit = elements_by_screenshot.find(e.screenshot_id);
        require(sit != elements_by_screenshot.end(), ErrorCode::Parse,
                "element " + e.id + " references unknown screenshot id: " + e.screenshot_id);
        sit->second.push_back(i);
    }
}

} // namespace groundkit

namespace groundkit::corpus {

namespace {

const json& member(const json& doc, const char* key, const std::string& where) {
    auto it = doc.find(key);
    require(it != doc.end(), ErrorCode::Parse, where + ": missing field '" + key + "'");
    return *it;
}

std::string str_field(const json& doc, const char* key, const std::string& where) {
    const json& v = member(doc, key, where);
    require(v.is_string(), ErrorCode::Parse, where + ": field '" + key + "' must be a string");
    return v.get<std::string>();
}

int int_field(const json& doc, const char* key, const std::string& where) {
    const json& v = member(doc, key, where);
    require(v.is_number_integer(), ErrorCode::Parse,
            where + ": field '" + key + "' must be an integer");
    return v.get<int>();
}

Screenshot parse_screenshot(const json& doc, const std::string& where) {
    Screenshot s;
    s.id = str_field(doc, "id", where);
    s.app_name = str_field(doc, "app_name", where);
    s.category = str_field(doc, "category", where);
    s.width = int_field(doc, "width", where);
    s.height = int_field(doc, "height", where);
    s.image_path = str_field(doc, "image_path", where);
    require(s.width >= 1 && s.height >= 1, ErrorCode::Parse,
            where + ": screenshot " + s.id + " has non-positive dimensions");
    return s;
}

UiElement parse_element(const json& doc, const std::string& where) {
    UiElement e;
    e.id = str_field(doc, "id", where);
    e.screenshot_id = str_field(doc, "screenshot_id", where);
    const json& bb = member(doc, "bbox", where);
    require(bb.is_array() && bb.size() == 4, ErrorCode::Parse,
            where + ": element " + e.id + ": bbox must be a 4-element array");
    for (const auto& v : bb)
        require(v.is_number(), ErrorCode::Parse,
                where + ": element " + e.id + ": bbox entries must be numbers");
    e.bbox = {bb[0].get<double>(), bb[1].get<double>(), bb[2].get<double>(), bb[3].get<double>()};
    require(e.bbox.valid(), ErrorCode::Parse,
            where + ": element " + e.id + ": bbox has x1 > x2 or y1 > y2");
    e.label = str_field(doc, "label", where);
    if (auto it = doc.find("ocr_text"); it != doc.end() && !it->is_null()) {
        require(it->is_string(), ErrorCode::Parse,
                where + ": element " + e.id + ": ocr_text must be a string");
        e.ocr_text = it->get<std::string>();
    }
    if (auto it = doc.find("ui_category"); it != doc.end() && !it->is_null()) {
        require(it->is_string(), ErrorCode::Parse,
                where + ": element " + e.id + ": ui_category must be a string");
        auto cat = ui_category_from_string(it->get<std::string>());
        require(cat.has_value(), ErrorCode::Parse,
                where + ": element " + e.id + ": unknown ui_category '" +
                    it->get<std::string>() + "'");
        e.ui_category = cat;
    }
    return e;
}

} // namespace

Corpus load_corpus(const std::filesystem::path& path) {
    namespace fs = std::filesystem;
    fs::path manifest_path = path;
    if (fs::is_directory(path)) manifest_path = path / "manifest.json";
    require(fs::exists(manifest_path), ErrorCode::NotFound,
            "missing manifest: " + manifest_path.string());

    std::ifstream mf(manifest_path);
    require(mf.good(), ErrorCode::Io, "cannot open " + manifest_path.string());
    json manifest = json::parse(mf, nullptr, false);
    require(!manifest.is_discarded(), ErrorCode::Parse,
            manifest_path.string() + ": malformed manifest JSON");

    Corpus c;
    c.root = manifest_path.parent_path();
    c.name = str_field(manifest, "name", "manifest");
    const int version = int_field(manifest, "version", "manifest");
    require(version == 1, ErrorCode::Unsupported,
            "unsupported corpus version " + std::to_string(version));

    const fs::path shots_file = c.root / str_field(manifest, "screenshots_file", "manifest");
    const fs::path elems_file = c.root / str_field(manifest, "elements_file", "manifest");

    jsonl::for_each(shots_file, [&](std::size_t lineno, const json& doc) {
        c.screenshots.push_back(
            parse_screenshot(doc, shots_file.filename().string() + ":" + std::to_string(lineno)));
    });
    jsonl::for_each(elems_file, [&](std::size_t lineno, const json& doc) {
        c.elements.push_back(
            parse_element(doc, elems_file.filename().string() + ":" + std::to_string(lineno)));
    });

    c.rebuild_indexes();
    return c;
}

void save_corpus(const Corpus& c, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        json manifest = {
            {"name", c.name},
            {"screenshots_file", "screenshots.jsonl"},
            {"elements_file", "elements.jsonl"},
            {"version", 1},
        };
        std::ofstream out(dir / "manifest.json", std::ios::binary | std::ios::trunc);
        require(out.good(), ErrorCode::Io, "cannot write " + (dir / "manifest.json").string());
        out << manifest.dump(2) << '\n';
    }
    jsonl::Writer shots(dir / "screenshots.jsonl");
    for (const Screenshot& s : c.screenshots) {
        shots.write(json{{"id", s.id},
                         {"app_name", s.app_name},
                         {"category", s.category},
                         {"width", s.width},
                         {"height", s.height},
                         {"image_path", s.image_path}});
    }
    jsonl::Writer elems(dir / "elements.jsonl");
    for (const UiElement& e : c.elements) {
        json doc = {{"id", e.id},
                    {"screenshot_id", e.screenshot_id},
                    {"bbox", {e.bbox.x1, e.bbox.y1, e.bbox.x2, e.bbox.y2}},
                    {"label", e.label}};
        if (e.ocr_text) doc["ocr_text"] = *e.ocr_text;
        if (e.ui_category) doc["ui_category"] = to_string(*e.ui_category);
        elems.write(doc);
    }
}

namespace {

// 0.1 to 16 megapixels accepted without comment.
constexpr double kMinMegapixels = 0.1;
constexpr double kMaxMegapixels = 16.0;

void diag(ValidationReport& r, const std::string& id, Severity sev, const std::string& code,
          const std::string& msg) {
    r.diagnostics.push_back({id, sev, code, msg});
    if (sev == Severity::Error)
        ++r.error_count;
    else
        ++r.warning_count;
}

} // namespace

ValidationReport validate_corpus(Corpus& c, bool strict) {
    ValidationReport report;

    for (const Screenshot& s : c.screenshots) {
        const double mp = s.megapixels();
        if (mp < kMinMegapixels || mp > kMaxMegapixels) {
            diag(report, s.id, Severity::Warning, "megapixels_out_of_range",
                 "screenshot " + s.id + " is " + std::to_string(mp) +
                     " MP, outside the accepted 0.1-16 MP range");
        }
        const auto& cats = software_categories();
        if (std::find(cats.begin(), cats.end(), s.category) == cats.end()) {
            diag(report, s.id, Severity::Warning, "unknown_category",
                 "screenshot " + s.id + " has unrecognized category '" + s.category + "'");
        }
    }

    for (UiElement& e : c.elements) {
        const Screenshot* s = c.find_screenshot(e.screenshot_id);
        if (!s) continue; // unreachable after load, but keep validation total
        const double w = static_cast<double>(s->width);
        const double h = static_cast<double>(s->height);
        BoundingBox& b = e.bbox;
        const bool outside = b.x1 < 0.0 || b.y1 < 0.0 || b.x2 > w || b.y2 > h;
        if (outside) {
            if (strict) {
                diag(report, e.id, Severity::Error, "bbox_out_of_bounds",
                     "element " + e.id + " bbox exceeds image bounds");
            } else {
                b.x1 = std::clamp(b.x1, 0.0, w);
                b.x2 = std::clamp(b.x2, 0.0, w);
                b.y1 = std::clamp(b.y1, 0.0, h);
                b.y2 = std::clamp(b.y2, 0.0, h);
                diag(report, e.id, Severity::Warning, "bbox_out_of_bounds",
                     "element " + e.id + " bbox exceeded image bounds; clamped");
            }
        }
        if (b.width() == 0.0 || b.height() == 0.0) {
            diag(report, e.id, strict ? Severity::Error : Severity::Warning, "degenerate_box",
                 "element " + e.id + " has a degenerate box (zero width or height)");
        }
    }
    return report;
}

std::string ValidationReport::to_json() const {
    json diags = json::array();
    for (const Diagnostic& d : diagnostics) {
        diags.push_back({{"record_id", d.record_id},
                         {"severity", d.severity == Severity::Error ? "error" : "warning"},
                         {"code", d.code},
                         {"message", d.message}});
    }
    json doc = {{"errors", error_count}, {"warnings", warning_count}, {"diagnostics", diags}};
    return doc.dump(2);
}

} // namespace groundkit::corpus
