#include <fstream>

#include <doctest.h>
#include <json.hpp>

#include "groundkit/corpus.hpp"
#include "groundkit/error.hpp"
#include "helpers.hpp"

using namespace groundkit;
using gktest::TempDir;

TEST_CASE("load_corpus preserves counts and resolves references") {
    TempDir tmp;
    const auto root = gktest::make_mini_corpus(tmp);
    const Corpus c = corpus::load_corpus(root);
    CHECK(c.screenshots.size() == 2);
    CHECK(c.elements.size() == 5);
    CHECK(c.name == "mini");
    CHECK(c.find_screenshot("s1") != nullptr);
    CHECK(c.find_element("e4")->screenshot_id == "s2");
    // Index agrees with a direct scan for every screenshot.
    for (const Screenshot& s : c.screenshots) {
        std::size_t direct = 0;
        for (const UiElement& e : c.elements)
            if (e.screenshot_id == s.id) ++direct;
        CHECK(c.elements_by_screenshot.at(s.id).size() == direct);
    }
}

TEST_CASE("load_corpus accepts the manifest path itself") {
    TempDir tmp;
    const auto root = gktest::make_mini_corpus(tmp);
    const Corpus c = corpus::load_corpus(root / "manifest.json");
    CHECK(c.elements.size() == 5);
}

TEST_CASE("load_corpus fails on a missing manifest") {
    TempDir tmp;
    CHECK_THROWS_WITH_AS(corpus::load_corpus(tmp / "nowhere"),
                         doctest::Contains("missing manifest"), Error);
}

TEST_CASE("elements referencing unknown screenshots name the offender") {
    TempDir tmp;
    std::vector<Screenshot> shots = {{"s1", "GIMP", "Graphics and Design", 100, 100, "s1.pgm"}};
    std::vector<UiElement> elems = {
        {"e1", "ghost", {0, 0, 10, 10}, "X", std::nullopt, std::nullopt}};
    gktest::write_corpus_files(tmp.path(), shots, elems);
    CHECK_THROWS_WITH_AS(corpus::load_corpus(tmp.path()), doctest::Contains("ghost"), Error);
}

TEST_CASE("malformed JSON lines are fatal and carry the line number") {
    TempDir tmp;
    gktest::write_corpus_files(tmp.path(),
                               {{"s1", "GIMP", "Graphics and Design", 100, 100, "s1.pgm"}}, {});
    {
        std::ofstream out(tmp / "elements.jsonl", std::ios::app);
        out << R"({"id": "e1", "screenshot_id": "s1", "bbox": [0,0,5,5], "label": "a"})" << "\n";
        out << "{broken\n";
    }
    CHECK_THROWS_WITH_AS(corpus::load_corpus(tmp.path()), doctest::Contains(":2"), Error);
}

TEST_CASE("an empty elements file loads as zero elements with zero warnings") {
    TempDir tmp;
    gktest::write_corpus_files(tmp.path(),
                               {{"s1", "GIMP", "Graphics and Design", 1000, 1000, "s1.pgm"}}, {});
    Corpus c = corpus::load_corpus(tmp.path());
    CHECK(c.elements.empty());
    const auto report = corpus::validate_corpus(c, false);
    CHECK(report.error_count == 0);
    CHECK(report.warning_count == 0);
}

TEST_CASE("duplicate ids are fatal at load") {
    TempDir tmp;
    std::vector<Screenshot> shots = {{"s1", "A", "Productivity", 1000, 1000, "s1.pgm"},
                                     {"s1", "B", "Productivity", 100, 100, "s1.pgm"}};
    gktest::write_corpus_files(tmp.path(), shots, {});
    CHECK_THROWS_WITH_AS(corpus::load_corpus(tmp.path()), doctest::Contains("duplicate"), Error);
}

TEST_CASE("invalid bbox ordering is fatal at load") {
    TempDir tmp;
    std::vector<Screenshot> shots = {{"s1", "A", "Productivity", 1000, 1000, "s1.pgm"}};
    std::vector<UiElement> elems = {
        {"e1", "s1", {10, 0, 0, 10}, "X", std::nullopt, std::nullopt}};
    gktest::write_corpus_files(tmp.path(), shots, elems);
    CHECK_THROWS_WITH_AS(corpus::load_corpus(tmp.path()), doctest::Contains("x1 > x2"), Error);
}

TEST_CASE("non-strict validation clamps out-of-bounds boxes with one warning") {
    TempDir tmp;
    std::vector<Screenshot> shots = {{"s1", "A", "Productivity", 1000, 1000, "s1.pgm"}};
    std::vector<UiElement> elems = {
        {"e1", "s1", {-3, 0, 10, 10}, "X", std::nullopt, std::nullopt}};
    gktest::write_corpus_files(tmp.path(), shots, elems);
    Corpus c = corpus::load_corpus(tmp.path());

    const auto report = corpus::validate_corpus(c, false);
    CHECK(report.error_count == 0);
    CHECK(report.warning_count == 1);
    CHECK(report.diagnostics[0].code == "bbox_out_of_bounds");
    CHECK(c.elements[0].bbox.x1 == 0.0);
    CHECK(c.elements[0].bbox.x2 == 10.0);

    // Idempotent: a clamped corpus re-validates without bbox warnings.
    const auto again = corpus::validate_corpus(c, false);
    for (const auto& d : again.diagnostics) CHECK(d.code != "bbox_out_of_bounds");
}

TEST_CASE("strict validation reports degenerate boxes as errors") {
    TempDir tmp;
    std::vector<Screenshot> shots = {{"s1", "A", "Productivity", 1000, 1000, "s1.pgm"}};
    std::vector<UiElement> elems = {
        {"e1", "s1", {10, 10, 10, 40}, "X", std::nullopt, std::nullopt}};
    gktest::write_corpus_files(tmp.path(), shots, elems);
    Corpus c = corpus::load_corpus(tmp.path());

    const auto strict = corpus::validate_corpus(c, true);
    CHECK(strict.error_count == 1);
    CHECK(strict.diagnostics[0].code == "degenerate_box");

    // Non-strict keeps the degenerate box as a line target, warning only.
    const auto lax = corpus::validate_corpus(c, false);
    CHECK(lax.error_count == 0);
    CHECK(lax.warning_count == 1);
    CHECK(c.elements[0].bbox.width() == 0.0);
}

TEST_CASE("a fully valid fixture validates clean") {
    TempDir tmp;
    const auto root = gktest::make_mini_corpus(tmp);
    Corpus c = corpus::load_corpus(root);
    const auto report = corpus::validate_corpus(c, true);
    CHECK(report.error_count == 0);
    CHECK(report.warning_count == 0);
}

TEST_CASE("megapixel range and unknown categories warn") {
    TempDir tmp;
    std::vector<Screenshot> shots = {
        {"tiny", "A", "Productivity", 10, 10, "t.pgm"},          // 0.0001 MP
        {"odd", "B", "Basketweaving", 1000, 1000, "o.pgm"},      // unknown category
    };
    gktest::write_corpus_files(tmp.path(), shots, {});
    Corpus c = corpus::load_corpus(tmp.path());
    const auto report = corpus::validate_corpus(c, false);
    CHECK(report.error_count == 0);
    CHECK(report.warning_count == 2);
}

TEST_CASE("save/load round-trip is identity on the in-memory model") {
    TempDir tmp;
    const auto root = gktest::make_mini_corpus(tmp);
    Corpus c = corpus::load_corpus(root);
    // Exercise awkward coordinates.
    c.elements[0].bbox = {0.123456789, 1.0 / 3.0, 60.000001, 30.5};
    c.elements[1].label = "  spaced  label\twith tabs ";
    c.elements[2].ocr_text = "caf\xc3\xa9 \xe2\x80\xa6";

    const auto out = tmp / "copy";
    corpus::save_corpus(c, out);
    const Corpus back = corpus::load_corpus(out);

    REQUIRE(back.screenshots.size() == c.screenshots.size());
    REQUIRE(back.elements.size() == c.elements.size());
    for (std::size_t i = 0; i < c.screenshots.size(); ++i) {
        CHECK(back.screenshots[i].id == c.screenshots[i].id);
        CHECK(back.screenshots[i].app_name == c.screenshots[i].app_name);
        CHECK(back.screenshots[i].category == c.screenshots[i].category);
        CHECK(back.screenshots[i].width == c.screenshots[i].width);
        CHECK(back.screenshots[i].height == c.screenshots[i].height);
        CHECK(back.screenshots[i].image_path == c.screenshots[i].image_path);
    }
    for (std::size_t i = 0; i < c.elements.size(); ++i) {
        CHECK(back.elements[i].id == c.elements[i].id);
        CHECK(back.elements[i].screenshot_id == c.elements[i].screenshot_id);
        // Bit-exact coordinates.
        CHECK(back.elements[i].bbox.x1 == c.elements[i].bbox.x1);
        CHECK(back.elements[i].bbox.y1 == c.elements[i].bbox.y1);
        CHECK(back.elements[i].bbox.x2 == c.elements[i].bbox.x2);
        CHECK(back.elements[i].bbox.y2 == c.elements[i].bbox.y2);
        CHECK(back.elements[i].label == c.elements[i].label);
        CHECK(back.elements[i].ocr_text == c.elements[i].ocr_text);
        CHECK(back.elements[i].ui_category == c.elements[i].ui_category);
    }
}

TEST_CASE("validation report serializes to JSON") {
    TempDir tmp;
    std::vector<Screenshot> shots = {{"s1", "A", "Productivity", 1000, 1000, "s1.pgm"}};
    std::vector<UiElement> elems = {
        {"e1", "s1", {-3, 0, 10, 10}, "X", std::nullopt, std::nullopt}};
    gktest::write_corpus_files(tmp.path(), shots, elems);
    Corpus c = corpus::load_corpus(tmp.path());
    const auto report = corpus::validate_corpus(c, false);
    const auto doc = nlohmann::json::parse(report.to_json());
    CHECK(doc["warnings"] == 1);
    CHECK(doc["diagnostics"][0]["record_id"] == "e1");
}
