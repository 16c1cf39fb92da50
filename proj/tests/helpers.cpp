#include "helpers.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <random>

#include <json.hpp>

using namespace groundkit;
using nlohmann::json;

namespace gktest {

TempDir::TempDir() {
    static std::atomic<unsigned> counter{0};
    const auto base = std::filesystem::temp_directory_path();
    path_ = base / ("groundkit_test_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

img::Image noise_image(int w, int h, std::uint64_t seed) {
    img::Image out;
    out.width = w;
    out.height = h;
    out.channels = 1;
    out.pixels.resize(static_cast<std::size_t>(w) * h);
    std::mt19937_64 g(seed);
    for (auto& p : out.pixels) p = static_cast<std::uint8_t>(g() & 0xFF);
    return out;
}

img::Image gradient_image(int w, int h, bool horizontal) {
    img::Image out;
    out.width = w;
    out.height = h;
    out.channels = 1;
    out.pixels.resize(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int v = horizontal ? (w > 1 ? x * 255 / (w - 1) : 0)
                                     : (h > 1 ? y * 255 / (h - 1) : 0);
            out.at(x, y) = static_cast<std::uint8_t>(v);
        }
    }
    return out;
}

img::Image constant_image(int w, int h, std::uint8_t value) {
    img::Image out;
    out.width = w;
    out.height = h;
    out.channels = 1;
    out.pixels.assign(static_cast<std::size_t>(w) * h, value);
    return out;
}

void write_corpus_files(const std::filesystem::path& dir,
                        const std::vector<Screenshot>& screenshots,
                        const std::vector<UiElement>& elements, const std::string& name) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream mf(dir / "manifest.json");
        mf << json{{"name", name},
                   {"screenshots_file", "screenshots.jsonl"},
                   {"elements_file", "elements.jsonl"},
                   {"version", 1}}
                  .dump(2);
    }
    {
        std::ofstream out(dir / "screenshots.jsonl");
        for (const Screenshot& s : screenshots) {
            out << json{{"id", s.id},
                        {"app_name", s.app_name},
                        {"category", s.category},
                        {"width", s.width},
                        {"height", s.height},
                        {"image_path", s.image_path}}
                       .dump()
                << '\n';
        }
    }
    {
        std::ofstream out(dir / "elements.jsonl");
        for (const UiElement& e : elements) {
            json doc = {{"id", e.id},
                        {"screenshot_id", e.screenshot_id},
                        {"bbox", {e.bbox.x1, e.bbox.y1, e.bbox.x2, e.bbox.y2}},
                        {"label", e.label}};
            if (e.ocr_text) doc["ocr_text"] = *e.ocr_text;
            if (e.ui_category) doc["ui_category"] = to_string(*e.ui_category);
            out << doc.dump() << '\n';
        }
    }
}

std::filesystem::path make_mini_corpus(const TempDir& dir) {
    const auto root = dir / "mini";
    std::filesystem::create_directories(root);
    std::vector<Screenshot> shots = {
        {"s1", "GIMP", "Graphics and Design", 640, 480, "s1.pgm"},
        {"s2", "LibreOffice Calc", "Productivity", 800, 600, "s2.pgm"},
    };
    img::save_pnm(root / "s1.pgm", noise_image(640, 480, 11));
    img::save_pnm(root / "s2.pgm", noise_image(800, 600, 22));
    std::vector<UiElement> elems = {
        {"e1", "s1", {10, 10, 60, 30}, "Save", std::string("Save"), UiCategory::Button},
        {"e2", "s1", {70, 10, 120, 30}, "Open", std::string("Open"), UiCategory::Button},
        {"e3", "s1", {10, 40, 200, 60}, "Layer opacity", std::nullopt,
         UiCategory::InputElement},
        {"e4", "s2", {5, 5, 25, 25}, "Bold", std::nullopt, UiCategory::Button},
        {"e5", "s2", {30, 5, 50, 25}, "Italic", std::nullopt, std::nullopt},
    };
    write_corpus_files(root, shots, elems, "mini");
    return root;
}

DedupFixture make_dedup_fixture(const TempDir& dir) {
    DedupFixture fx;
    fx.root = dir / "dedup100";
    std::filesystem::create_directories(fx.root);

    constexpr int kShots = 10;
    constexpr int kCell = 20; // 10x10 grid of 20x20 cells per 200x200 shot
    std::vector<img::Image> canvases(kShots, constant_image(200, 200, 128));
    std::vector<int> slot_of(kShots, 0);

    std::vector<Screenshot> shots;
    for (int s = 0; s < kShots; ++s) {
        shots.push_back({"shot" + std::to_string(s), "App" + std::to_string(s % 3),
                         "Productivity", 200, 200, "shot" + std::to_string(s) + ".pgm"});
    }

    std::vector<UiElement> elems;
    int shot_cursor = 0;
    int next_elem = 0;
    for (int cluster = 0; cluster < 40; ++cluster) {
        const int size = cluster < 20 ? 3 : 2;
        // Four same-label pairs rely on the hash gate to stay apart.
        std::string label;
        if (cluster < 8) {
            label = "twin_" + std::to_string(cluster / 2);
        } else {
            label = "widget_" + std::to_string(cluster);
        }
        const img::Image pattern = noise_image(kCell, kCell, 1000 + cluster);
        std::vector<std::string> members;
        for (int m = 0; m < size; ++m) {
            const int shot = shot_cursor;
            shot_cursor = (shot_cursor + 1) % kShots;
            const int slot = slot_of[shot]++;
            const int cx = (slot % 10) * kCell;
            const int cy = (slot / 10) * kCell;
            for (int y = 0; y < kCell; ++y) {
                for (int x = 0; x < kCell; ++x) {
                    canvases[shot].at(cx + x, cy + y) = pattern.at(x, y);
                }
            }
            const std::string id = "el" + std::to_string(next_elem++);
            elems.push_back({id,
                             shots[shot].id,
                             {static_cast<double>(cx), static_cast<double>(cy),
                              static_cast<double>(cx + kCell), static_cast<double>(cy + kCell)},
                             label,
                             std::nullopt,
                             std::nullopt});
            members.push_back(id);
        }
        std::sort(members.begin(), members.end());
        fx.truth.push_back(std::move(members));
    }
    std::sort(fx.truth.begin(), fx.truth.end());

    for (int s = 0; s < kShots; ++s) {
        img::save_pnm(fx.root / shots[s].image_path, canvases[s]);
    }
    write_corpus_files(fx.root, shots, elems, "dedup100");
    return fx;
}

std::string slurp_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

} // namespace gktest
