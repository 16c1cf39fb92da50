#include "groundkit/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <unordered_map>

#include <json.hpp>

#include "groundkit/error.hpp"
#include "groundkit/image.hpp"
#include "groundkit/jsonl.hpp"

using nlohmann::json;

namespace groundkit::eval {

namespace {

std::string lower_ascii(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

} // namespace

std::vector<BenchmarkRecord> load_benchmark(const std::filesystem::path& path) {
    std::vector<BenchmarkRecord> out;
    jsonl::for_each(path, [&](std::size_t lineno, const json& doc) {
        const std::string where = path.filename().string() + ":" + std::to_string(lineno);
        BenchmarkRecord r;
        r.id = doc.at("id").get<std::string>();
        r.instruction = doc.value("instruction", std::string{});
        if (doc.contains("image_path")) r.image_path = doc["image_path"].get<std::string>();
        if (doc.contains("image_w") && doc.contains("image_h")) {
            r.image_w = doc["image_w"].get<double>();
            r.image_h = doc["image_h"].get<double>();
        } else {
            require(!r.image_path.empty(), ErrorCode::Parse,
                    where + ": record " + r.id + " needs image_w/image_h or image_path");
            const std::filesystem::path img = path.parent_path() / r.image_path;
            auto [w, h] = img::read_image_size(img);
            r.image_w = w;
            r.image_h = h;
        }
        const auto& b = doc.at("gt_box");
        require(b.is_array() && b.size() == 4, ErrorCode::Parse,
                where + ": gt_box must be a 4-element array");
        r.gt_box = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
        require(r.gt_box.valid(), ErrorCode::Parse, where + ": gt_box has x1 > x2 or y1 > y2");
        require(r.gt_box.x1 >= 0 && r.gt_box.y1 >= 0 && r.gt_box.x2 <= r.image_w &&
                    r.gt_box.y2 <= r.image_h,
                ErrorCode::Parse, where + ": record " + r.id + ": gt_box exceeds image bounds");
        if (doc.contains("tags")) {
            for (const auto& [k, v] : doc["tags"].items()) {
                r.tags[lower_ascii(k)] = v.is_string() ? v.get<std::string>() : v.dump();
            }
        }
        out.push_back(std::move(r));
    });
    return out;
}

std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path) {
    std::vector<PredictionRecord> out;
    jsonl::for_each(path, [&](std::size_t lineno, const json& doc) {
        const std::string where = path.filename().string() + ":" + std::to_string(lineno);
        PredictionRecord p;
        p.record_id = doc.at("record_id").get<std::string>();
        if (doc.contains("point")) {
            const auto& pt = doc["point"];
            require(pt.is_array() && pt.size() == 2, ErrorCode::Parse,
                    where + ": point must be a 2-element array");
            p.point = Point{pt[0].get<double>(), pt[1].get<double>()};
        } else if (doc.contains("text")) {
            p.text = doc["text"].get<std::string>();
        } else {
            fail(ErrorCode::Parse, where + ": prediction needs 'point' or 'text'");
        }
        out.push_back(std::move(p));
    });
    return out;
}

EvalReport score(const std::vector<BenchmarkRecord>& benchmark,
                 const std::vector<PredictionRecord>& predictions, const EvalOptions& opts) {
    std::unordered_map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < benchmark.size(); ++i) by_id.emplace(benchmark[i].id, i);

    EvalReport report;
    report.total = benchmark.size();

    std::unordered_map<std::string, const PredictionRecord*> latest;
    for (const PredictionRecord& p : predictions) {
        if (!by_id.count(p.record_id)) {
            require(!opts.strict_ids, ErrorCode::NotFound,
                    "prediction references unknown record id: " + p.record_id);
            ++report.unmatched;
            continue;
        }
        latest[p.record_id] = &p; // last one wins
    }

    auto bucket_tags = [&](const BenchmarkRecord& r, bool correct) {
        for (auto& [key, buckets] : report.by_tag) {
            auto it = r.tags.find(key);
            TagBucket& b = buckets[it == r.tags.end() ? "untagged" : it->second];
            ++b.total;
            if (correct) ++b.correct;
        }
    };
    // Every tag key present anywhere gets a breakdown.
    for (const BenchmarkRecord& r : benchmark) {
        for (const auto& kv : r.tags) report.by_tag[kv.first];
    }

    for (const BenchmarkRecord& r : benchmark) {
        auto it = latest.find(r.id);
        bool correct = false;
        if (it == latest.end()) {
            ++report.missing;
        } else {
            const PredictionRecord& p = *it->second;
            std::optional<Point> point;
            if (p.point) {
                point = *p.point; // already pixel space
            } else {
                point = parse_prediction(*p.text, opts.coord_space, r.image_w, r.image_h,
                                         !opts.first_pair);
                if (!point) ++report.unparseable;
            }
            if (point) {
                if (opts.exclusive_bounds) {
                    correct = point->u > r.gt_box.x1 && point->u < r.gt_box.x2 &&
                              point->v > r.gt_box.y1 && point->v < r.gt_box.y2;
                } else {
                    correct = r.gt_box.contains(*point);
                }
            }
        }
        if (correct) ++report.correct;
        bucket_tags(r, correct);
    }
    return report;
}

std::string EvalReport::to_json() const {
    json tags = json::object();
    for (const auto& [key, buckets] : by_tag) {
        json per_value = json::object();
        for (const auto& [value, b] : buckets) {
            per_value[value] = {{"correct", b.correct},
                                {"total", b.total},
                                {"accuracy_pct", std::round(b.accuracy() * 1000.0) / 10.0}};
        }
        tags[key] = std::move(per_value);
    }
    json doc = {{"total", total},
                {"correct", correct},
                {"accuracy", accuracy()},
                {"accuracy_pct", std::round(accuracy() * 1000.0) / 10.0},
                {"missing", missing},
                {"unparseable", unparseable},
                {"unmatched", unmatched},
                {"by_tag", tags}};
    return doc.dump(2);
}

EvalReport load_report(const std::string& json_text) {
    json doc = json::parse(json_text, nullptr, false);
    require(!doc.is_discarded(), ErrorCode::Parse, "malformed report JSON");
    EvalReport r;
    r.total = doc.at("total").get<std::size_t>();
    r.correct = doc.at("correct").get<std::size_t>();
    r.missing = doc.at("missing").get<std::size_t>();
    r.unparseable = doc.at("unparseable").get<std::size_t>();
    r.unmatched = doc.at("unmatched").get<std::size_t>();
    for (const auto& [key, buckets] : doc.at("by_tag").items()) {
        for (const auto& [value, b] : buckets.items()) {
            r.by_tag[key][value] =
                TagBucket{b.at("correct").get<std::size_t>(), b.at("total").get<std::size_t>()};
        }
    }
    return r;
}

std::string report_table(const EvalReport& r, const std::vector<std::string>& layout) {
    for (const std::string& key : layout) {
        require(r.by_tag.count(key) != 0, ErrorCode::NotFound,
                "layout key '" + key + "' not present in the report");
    }
    char buf[64];
    std::string out;
    out += "key        value                correct/total   acc%\n";
    out += "---------- -------------------- --------------- ------\n";
    auto row = [&](const std::string& key, const std::string& value, const TagBucket& b) {
        std::snprintf(buf, sizeof(buf), "%-10s %-20s %7zu/%-7zu %5.1f\n", key.c_str(),
                      value.c_str(), b.correct, b.total, b.accuracy() * 100.0);
        out += buf;
    };
    for (const std::string& key : layout) {
        for (const auto& [value, bucket] : r.by_tag.at(key)) row(key, value, bucket);
    }
    row("overall", "-", TagBucket{r.correct, r.total});
    return out;
}

} // namespace groundkit::eval
