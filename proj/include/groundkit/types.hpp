#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace groundkit {

// Pixel coordinates, origin top-left, x rightward, y downward.
struct Point {
    double u = 0.0;
    double v = 0.0;
};

// Axis-aligned box [x1,y1,x2,y2] with inclusive boundary membership.
struct BoundingBox {
    double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;

    double width() const { return x2 - x1; }
    double height() const { return y2 - y1; }
    double area() const { return width() * height(); }
    bool valid() const { return x1 <= x2 && y1 <= y2; }

    bool contains(const Point& p) const {
        return p.u >= x1 && p.u <= x2 && p.v >= y1 && p.v <= y2;
    }
};

enum class UiCategory {
    InputElement,
    Sidebar,
    InformationDisplay,
    Button,
    Navigation,
    VisualElements,
    Menu,
    Others,
};

const char* to_string(UiCategory c);
std::optional<UiCategory> ui_category_from_string(const std::string& s);

// The 12 canonical software categories a screenshot may belong to.
const std::vector<std::string>& software_categories();

struct Screenshot {
    std::string id;
    std::string app_name;
    std::string category;
    int width = 0;
    int height = 0;
    std::string image_path; // relative to the corpus root

    double megapixels() const {
        return static_cast<double>(width) * static_cast<double>(height) / 1e6;
    }
};

struct UiElement {
    std::string id;
    std::string screenshot_id;
    BoundingBox bbox;
    std::string label;
    std::optional<std::string> ocr_text;
    std::optional<UiCategory> ui_category;
};

// Immutable after load (and after a mutating non-strict validation pass);
// safe for unlimited concurrent readers afterwards.
struct Corpus {
    std::string name;
    std::filesystem::path root;
    std::vector<Screenshot> screenshots;
    std::vector<UiElement> elements;

    std::unordered_map<std::string, std::size_t> screenshot_index; // id -> screenshots[]
    std::unordered_map<std::string, std::size_t> element_index;    // id -> elements[]
    std::unordered_map<std::string, std::vector<std::size_t>> elements_by_screenshot;

    const Screenshot* find_screenshot(const std::string& id) const {
        auto it = screenshot_index.find(id);
        return it == screenshot_index.end() ? nullptr : &screenshots[it->second];
    }
    const UiElement* find_element(const std::string& id) const {
        auto it = element_index.find(id);
        return it == element_index.end() ? nullptr : &elements[it->second];
    }
    std::filesystem::path image_file(const Screenshot& s) const { return root / s.image_path; }

    void rebuild_indexes();
};

} // namespace groundkit
