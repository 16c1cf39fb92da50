#include "groundkit.h"

#include <cstring>
#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "groundkit/corpus.hpp"
#include "groundkit/dedup.hpp"
#include "groundkit/error.hpp"
#include "groundkit/evaluation.hpp"
#include "groundkit/geometry.hpp"
#include "groundkit/instructions.hpp"
#include "groundkit/jsonl.hpp"
#include "groundkit/reward_server.hpp"
#include "groundkit/rewards.hpp"
#include "groundkit/stats.hpp"
#include "groundkit/synth.hpp"
#include "groundkit/version.hpp"

using nlohmann::json;
namespace gk = groundkit;

struct gk_corpus {
    gk::Corpus corpus;
};

namespace {

thread_local std::string t_last_error;

gk_status set_error(gk::ErrorCode code, const std::string& msg) {
    t_last_error = msg;
    return static_cast<gk_status>(static_cast<int>(code));
}

// Runs fn, translating exceptions into status codes.
template <typename Fn>
gk_status guarded(Fn&& fn) {
    try {
        fn();
        return GK_OK;
    } catch (const gk::Error& e) {
        return set_error(e.code(), e.what());
    } catch (const json::exception& e) {
        return set_error(gk::ErrorCode::Parse, e.what());
    } catch (const std::exception& e) {
        return set_error(gk::ErrorCode::Internal, e.what());
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

gk::BoundingBox from_c(gk_box b) {
    return {b.x1, b.y1, b.x2, b.y2};
}

json parse_config(const char* config_json) {
    if (!config_json || !*config_json) return json::object();
    json doc = json::parse(config_json, nullptr, false);
    gk::require(!doc.is_discarded() && doc.is_object(), gk::ErrorCode::Parse,
                "config must be a JSON object");
    return doc;
}

} // namespace

extern "C" {

const char* gk_version(void) {
    return gk::kVersion;
}

const char* gk_last_error(void) {
    return t_last_error.c_str();
}

void gk_string_free(char* s) {
    std::free(s);
}

/* ---- corpus ---- */

gk_status gk_corpus_load(const char* path, gk_corpus** out) {
    if (!path || !out) return set_error(gk::ErrorCode::InvalidArgument, "null argument");
    return guarded([&] {
        auto handle = std::make_unique<gk_corpus>();
        handle->corpus = gk::corpus::load_corpus(path);
        *out = handle.release();
    });
}

void gk_corpus_free(gk_corpus* c) {
    delete c;
}

size_t gk_corpus_screenshot_count(const gk_corpus* c) {
    return c ? c->corpus.screenshots.size() : 0;
}

size_t gk_corpus_element_count(const gk_corpus* c) {
    return c ? c->corpus.elements.size() : 0;
}

gk_status gk_corpus_validate(gk_corpus* c, int strict, char** report_json) {
    if (!c) return set_error(gk::ErrorCode::InvalidArgument, "null corpus");
    return guarded([&] {
        gk::corpus::ValidationReport report = gk::corpus::validate_corpus(c->corpus, strict != 0);
        if (report_json) *report_json = dup_string(report.to_json());
    });
}

gk_status gk_corpus_save(const gk_corpus* c, const char* dir) {
    if (!c || !dir) return set_error(gk::ErrorCode::InvalidArgument, "null argument");
    return guarded([&] { gk::corpus::save_corpus(c->corpus, dir); });
}

/* ---- geometry ---- */

int gk_point_in_box(double u, double v, gk_box b) {
    return gk::geom::point_in_box({u, v}, from_c(b)) ? 1 : 0;
}

double gk_unsigned_distance(double u, double v, gk_box b, double* closest_u, double* closest_v) {
    const gk::geom::NearestPoint np = gk::geom::unsigned_distance({u, v}, from_c(b));
    if (closest_u) *closest_u = np.closest.u;
    if (closest_v) *closest_v = np.closest.v;
    return np.distance;
}

double gk_signed_distance(double u, double v, gk_box b) {
    return gk::geom::signed_distance({u, v}, from_c(b));
}

gk_status gk_max_distance(gk_box b, double image_w, double image_h, double* out) {
    if (!out) return set_error(gk::ErrorCode::InvalidArgument, "null output");
    return guarded([&] { *out = gk::geom::max_distance(from_c(b), image_w, image_h); });
}

gk_status gk_normalized_distance(double u, double v, gk_box b, double image_w, double image_h,
                                 double* out) {
    if (!out) return set_error(gk::ErrorCode::InvalidArgument, "null output");
    return guarded(
        [&] { *out = gk::geom::normalized_distance({u, v}, from_c(b), image_w, image_h); });
}

/* ---- rewards ---- */

gk_status gk_discrete_reward(double d_norm, double* out) {
    if (!out) return set_error(gk::ErrorCode::InvalidArgument, "null output");
    return guarded([&] { *out = gk::rewards::discrete_reward(d_norm); });
}

gk_status gk_continuous_reward(double u, double v, gk_box b, double image_w, double image_h,
                               double* out) {
    if (!out) return set_error(gk::ErrorCode::InvalidArgument, "null output");
    return guarded(
        [&] { *out = gk::rewards::continuous_reward({u, v}, from_c(b), image_w, image_h); });
}

double gk_binary_reward(double u, double v, gk_box b) {
    return gk::rewards::binary_reward({u, v}, from_c(b));
}

gk_status gk_rloo_advantages(const double* rewards, size_t n, double* advantages) {
    if (!rewards || !advantages)
        return set_error(gk::ErrorCode::InvalidArgument, "null argument");
    return guarded([&] {
        const std::vector<double> in(rewards, rewards + n);
        const std::vector<double> adv = gk::rewards::rloo_advantages(in);
        std::memcpy(advantages, adv.data(), n * sizeof(double));
    });
}

gk_status gk_reward_process_line(const char* request_line, char** response_line) {
    if (!request_line || !response_line)
        return set_error(gk::ErrorCode::InvalidArgument, "null argument");
    return guarded(
        [&] { *response_line = dup_string(gk::server::process_reward_line(request_line)); });
}

gk_status gk_reward_serve_stdio(void) {
    return guarded([] { gk::server::serve_stdio(); });
}

gk_status gk_reward_serve_tcp(const char* host, int port) {
    return guarded([&] { gk::server::serve_tcp(host ? host : "", port); });
}

/* ---- dedup ---- */

gk_status gk_phash_file(const char* image_path, uint64_t* out) {
    if (!image_path || !out) return set_error(gk::ErrorCode::InvalidArgument, "null argument");
    return guarded([&] { *out = gk::dedup::phash(gk::img::load_image(image_path)).bits; });
}

unsigned gk_hamming(uint64_t a, uint64_t b) {
    return static_cast<unsigned>(gk::dedup::hamming({a}, {b}));
}

gk_status gk_normalize_label(const char* label, char** out) {
    if (!label || !out) return set_error(gk::ErrorCode::InvalidArgument, "null argument");
    return guarded([&] { *out = dup_string(gk::dedup::normalize_label(label)); });
}

gk_status gk_dedup_run(const gk_corpus* c, const char* config_json, char** result_json) {
    if (!c || !result_json) return set_error(gk::ErrorCode::InvalidArgument, "null argument");
    return guarded([&] {
        const json cfg_doc = parse_config(config_json);
        gk::dedup::DedupConfig cfg;
        cfg.hamming_threshold = cfg_doc.value("hamming_threshold", cfg.hamming_threshold);
        cfg.min_crop_px = cfg_doc.value("min_crop_px", cfg.min_crop_px);
        cfg.workers = cfg_doc.value("workers", cfg.workers);
        const std::string mode = cfg_doc.value("label_mode", std::string("normalized"));
        if (mode == "exact") {
            cfg.label_mode = gk::dedup::LabelMode::Exact;
        } else if (mode == "normalized") {
            cfg.label_mode = gk::dedup::LabelMode::Normalized;
        } else {
            gk::fail(gk::ErrorCode::InvalidArgument, "unknown label_mode '" + mode + "'");
        }
        const auto seed = cfg_doc.value("seed", std::uint64_t{0});
        const bool members = cfg_doc.value("include_members", false);

        gk::dedup::DedupResult result = gk::dedup::dedup_elements(c->corpus, cfg, seed);
        json out = {{"unique_ids", result.unique_ids},
                    {"report", json::parse(result.report.to_json(members))}};
        *result_json = dup_string(out.dump(2));
    });
}

/* ---- instruction synthesis ---- */

gk_status gk_synth_run(const gk_corpus* c, const char* unique_path, const char* config_json,
                       const char* out_dir, char** summary_json) {
    if (!c || !out_dir) return set_error(gk::ErrorCode::InvalidArgument, "null argument");
    return guarded([&] {
        const json cfg_doc = parse_config(config_json);
        gk::instr::SynthConfig cfg;
        if (cfg_doc.contains("kinds")) {
            cfg.direct = cfg.functional = cfg.spatial = false;
            std::string kinds = cfg_doc["kinds"].get<std::string>();
            std::size_t pos = 0;
            while (pos != std::string::npos) {
                const auto comma = kinds.find(',', pos);
                const std::string kind = kinds.substr(
                    pos, comma == std::string::npos ? std::string::npos : comma - pos);
                if (kind == "direct") {
                    cfg.direct = true;
                } else if (kind == "functional") {
                    cfg.functional = true;
                } else if (kind == "spatial") {
                    cfg.spatial = true;
                } else if (!kind.empty()) {
                    gk::fail(gk::ErrorCode::InvalidArgument, "unknown kind '" + kind + "'");
                }
                pos = comma == std::string::npos ? comma : comma + 1;
            }
        }
        cfg.spatial_cfg.max_gap_px = cfg_doc.value("max_gap_px", cfg.spatial_cfg.max_gap_px);
        cfg.workers = cfg_doc.value("workers", cfg.workers);
        cfg.regen_budget = cfg_doc.value("regen_budget", cfg.regen_budget);
        if (cfg_doc.contains("templates_dir")) {
            cfg.templates = gk::tpl::load_templates(cfg_doc["templates_dir"].get<std::string>());
        }
        cfg.client = gk::llm::from_env();
        if (cfg_doc.contains("endpoint")) cfg.client.url = cfg_doc["endpoint"].get<std::string>();
        cfg.attachments_dir = std::filesystem::path(out_dir) / "attachments";
        const auto seed = cfg_doc.value("seed", std::uint64_t{0});

        std::vector<std::string> unique_ids;
        if (unique_path && *unique_path) {
            gk::jsonl::for_each(unique_path, [&](std::size_t, const json& doc) {
                if (doc.is_string()) {
                    unique_ids.push_back(doc.get<std::string>());
                } else {
                    unique_ids.push_back(doc.at("element_id").get<std::string>());
                }
            });
        } else {
            for (const auto& e : c->corpus.elements) unique_ids.push_back(e.id);
        }

        gk::instr::SynthSummary summary;
        const auto samples =
            gk::instr::synthesize(c->corpus, unique_ids, cfg, seed, summary);
        gk::instr::write_pool(samples, out_dir);
        if (summary_json) *summary_json = dup_string(summary.to_json());
    });
}

gk_status gk_export_sft(const char* pool_dir, const char* config_json, const char* out_path,
                        char** summary_json) {
    if (!pool_dir || !out_path) return set_error(gk::ErrorCode::InvalidArgument, "null argument");
    return guarded([&] {
        const json cfg_doc = parse_config(config_json);
        gk::instr::MixSpec mix;
        if (cfg_doc.contains("mix")) {
            const auto& m = cfg_doc["mix"];
            gk::require(m.is_array() && m.size() == 3, gk::ErrorCode::InvalidArgument,
                        "mix must be [direct, functional, spatial]");
            mix.direct = m[0].get<double>();
            mix.functional = m[1].get<double>();
            mix.spatial = m[2].get<double>();
        }
        gk::require(cfg_doc.contains("total"), gk::ErrorCode::InvalidArgument,
                    "export config needs 'total' (dataset size)");
        const auto pool = gk::instr::load_pool(pool_dir);
        mix.total = cfg_doc["total"].get<std::size_t>();
        const auto seed = cfg_doc.value("seed", std::uint64_t{0});
        const auto dataset = gk::instr::sample_mix(pool, mix, seed);
        gk::instr::export_sft(dataset, out_path);
        if (summary_json) {
            json out = {{"pool_size", pool.size()}, {"exported", dataset.size()}};
            *summary_json = dup_string(out.dump(2));
        }
    });
}

gk_status gk_select_rl(const char* pool_path, const char* exclude_path, size_t k, uint64_t seed,
                       const char* out_path, char** summary_json) {
    if (!pool_path || !out_path)
        return set_error(gk::ErrorCode::InvalidArgument, "null argument");
    return guarded([&] {
        std::vector<std::string> pool;
        gk::jsonl::for_each(pool_path, [&](std::size_t, const json& doc) {
            if (doc.is_string()) {
                pool.push_back(doc.get<std::string>());
            } else {
                pool.push_back(doc.at("element_id").get<std::string>());
            }
        });
        std::set<std::string> used;
        if (exclude_path && *exclude_path) {
            gk::jsonl::for_each(exclude_path, [&](std::size_t, const json& doc) {
                used.insert(doc.at("element_id").get<std::string>());
            });
        }
        const auto selected = gk::instr::select_rl_unseen(pool, used, k, seed);
        gk::jsonl::Writer w(out_path);
        for (const std::string& id : selected) w.write(json{{"element_id", id}});
        if (summary_json) {
            json out = {{"pool", pool.size()}, {"excluded", used.size()},
                        {"selected", selected.size()}};
            *summary_json = dup_string(out.dump(2));
        }
    });
}

/* ---- evaluation ---- */

gk_status gk_eval_run(const char* benchmark_path, const char* predictions_path,
                      const char* config_json, char** report_json) {
    if (!benchmark_path || !predictions_path || !report_json)
        return set_error(gk::ErrorCode::InvalidArgument, "null argument");
    return guarded([&] {
        const json cfg_doc = parse_config(config_json);
        gk::eval::EvalOptions opts;
        if (cfg_doc.contains("coord_space")) {
            auto cs = gk::eval::coord_space_from_string(cfg_doc["coord_space"].get<std::string>());
            gk::require(cs.has_value(), gk::ErrorCode::InvalidArgument,
                        "unknown coord_space '" + cfg_doc["coord_space"].get<std::string>() + "'");
            opts.coord_space = *cs;
        }
        opts.strict_ids = cfg_doc.value("strict_ids", false);
        opts.exclusive_bounds = cfg_doc.value("exclusive_bounds", false);
        opts.first_pair = cfg_doc.value("first_pair", false);

        const auto benchmark = gk::eval::load_benchmark(benchmark_path);
        const auto predictions = gk::eval::load_predictions(predictions_path);
        const gk::eval::EvalReport report = gk::eval::score(benchmark, predictions, opts);
        *report_json = dup_string(report.to_json());
    });
}

gk_status gk_eval_table(const char* report_json, const char* layout_csv, char** table_text) {
    if (!report_json || !table_text)
        return set_error(gk::ErrorCode::InvalidArgument, "null argument");
    return guarded([&] {
        const gk::eval::EvalReport report = gk::eval::load_report(report_json);
        std::vector<std::string> layout;
        if (layout_csv && *layout_csv) {
            std::string keys(layout_csv);
            std::size_t pos = 0;
            while (pos != std::string::npos) {
                const auto comma = keys.find(',', pos);
                const std::string key = keys.substr(
                    pos, comma == std::string::npos ? std::string::npos : comma - pos);
                if (!key.empty()) layout.push_back(key);
                pos = comma == std::string::npos ? comma : comma + 1;
            }
        }
        *table_text = dup_string(gk::eval::report_table(report, layout));
    });
}

/* ---- corpus statistics ---- */

gk_status gk_stats_compute(const gk_corpus* c, char** stats_json) {
    if (!c || !stats_json) return set_error(gk::ErrorCode::InvalidArgument, "null argument");
    return guarded(
        [&] { *stats_json = dup_string(gk::stats::compute_stats(c->corpus).to_json()); });
}

gk_status gk_stats_table(const char* stats_json, const char* corpus_name, char** table_text) {
    if (!stats_json || !table_text)
        return set_error(gk::ErrorCode::InvalidArgument, "null argument");
    return guarded([&] {
        const gk::stats::CorpusStats s = gk::stats::load_stats(stats_json);
        *table_text = dup_string(s.to_table(corpus_name ? corpus_name : "corpus"));
    });
}

} /* extern "C" */
