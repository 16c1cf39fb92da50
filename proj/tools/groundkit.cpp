// groundkit CLI: thin shell over the C API in groundkit.h.
// Flag precedence: command line > --config file > built-in defaults.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "groundkit.h"

using nlohmann::json;

namespace {

enum class LogLevel { Debug = 0, Info = 1, Warn = 2, Error = 3 };

LogLevel g_log_level = LogLevel::Info;

void log_at(LogLevel level, const char* tag, const std::string& msg) {
    if (level < g_log_level) return;
    std::fprintf(stderr, "[%s] %s\n", tag, msg.c_str());
}
void log_debug(const std::string& m) {
    log_at(LogLevel::Debug, "debug", m);
}
void log_info(const std::string& m) {
    log_at(LogLevel::Info, "info", m);
}
void log_error(const std::string& m) {
    log_at(LogLevel::Error, "error", m);
}

// Owned C string -> std::string.
std::string take(char* s) {
    if (!s) return {};
    std::string out(s);
    gk_string_free(s);
    return out;
}

int fail_data(const std::string& context) {
    log_error(context + ": " + gk_last_error());
    return 1;
}

struct CorpusHandle {
    gk_corpus* c = nullptr;
    ~CorpusHandle() { gk_corpus_free(c); }
};

// Only these keys may appear in the config file.
const json kConfigSchema = {
    {"corpus", ""},
    {"seed", 0},
    {"workers", 0},
    {"log_level", "info"},
    {"dedup", {{"threshold", 5}, {"label_mode", "normalized"}, {"min_crop_px", 8}}},
    {"synth",
     {{"kinds", "direct,functional,spatial"},
      {"max_gap_px", 200.0},
      {"templates_dir", ""},
      {"endpoint", ""},
      {"regen_budget", 0}}},
    {"mix", {{"direct", 0.5}, {"functional", 0.35}, {"spatial", 0.15}, {"total", 0}}},
    {"eval",
     {{"coord_space", "pixel"},
      {"strict_ids", false},
      {"exclusive_bounds", false},
      {"first_pair", false}}},
    {"reward_server", {{"listen", ""}, {"stdio", false}}},
};

void check_known_keys(const json& doc, const json& schema, const std::string& prefix) {
    for (const auto& [key, value] : doc.items()) {
        if (!schema.contains(key)) {
            throw CLI::ValidationError("config", "unknown config key '" + prefix + key + "'");
        }
        if (value.is_object() && schema[key].is_object()) {
            check_known_keys(value, schema[key], prefix + key + ".");
        }
    }
}

json load_config_file(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in.good()) throw CLI::ValidationError("config", "cannot open config file " + path);
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw CLI::ValidationError("config", "config file is not a JSON object: " + path);
    }
    check_known_keys(doc, kConfigSchema, "");
    return doc;
}

template <typename T>
T cfg_get(const json& cfg, const std::string& section, const std::string& key, T fallback) {
    if (!section.empty()) {
        if (cfg.contains(section) && cfg[section].contains(key)) {
            return cfg[section][key].get<T>();
        }
        return fallback;
    }
    return cfg.contains(key) ? cfg[key].get<T>() : fallback;
}

bool write_file(const std::string& path, const std::string& content, const char* what) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out.good()) {
        log_error(std::string("cannot write ") + what + ": " + path);
        return false;
    }
    out << content;
    if (!content.empty() && content.back() != '\n') out << '\n';
    return true;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"groundkit: GUI grounding data pipeline and reward scoring"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand
    app.set_version_flag("--version", std::string(gk_version()));

    std::string config_path;
    std::string corpus_path;
    std::string log_level_flag;
    std::uint64_t seed_flag = 0;
    int workers_flag = 0;
    app.add_option("--config", config_path, "JSON config file (flags take precedence)");
    auto* corpus_opt = app.add_option("--corpus", corpus_path, "corpus directory or manifest");
    auto* seed_opt = app.add_option("--seed", seed_flag, "seed for all randomized steps");
    auto* workers_opt =
        app.add_option("--workers", workers_flag, "worker pool width (0 = hardware)");
    auto* log_opt =
        app.add_option("--log-level", log_level_flag, "debug|info|warn|error (default info)");

    // validate
    auto* cmd_validate = app.add_subcommand("validate", "check corpus invariants");
    bool strict = false;
    cmd_validate->add_flag("--strict", strict, "treat bbox problems as errors, never clamp");
    std::string validate_report_path;
    cmd_validate->add_option("--out", validate_report_path, "write the diagnostics JSON here");

    // stats
    auto* cmd_stats = app.add_subcommand("stats", "corpus statistics report");
    std::string stats_out;
    bool stats_table = false;
    cmd_stats->add_option("--out", stats_out, "write the stats JSON here");
    cmd_stats->add_flag("--table", stats_table, "also print the summary table");

    // dedup
    auto* cmd_dedup = app.add_subcommand("dedup", "collapse near-duplicate elements");
    int dedup_threshold = -1;
    std::string dedup_label_mode, dedup_out, dedup_report;
    int dedup_min_crop = -1;
    auto* thr_opt = cmd_dedup->add_option("--threshold", dedup_threshold,
                                          "max Hamming distance within a cluster (default 5)");
    auto* mode_opt = cmd_dedup->add_option("--label-mode", dedup_label_mode,
                                           "exact|normalized (default normalized)");
    auto* crop_opt =
        cmd_dedup->add_option("--min-crop", dedup_min_crop, "minimum crop side in px (default 8)");
    cmd_dedup->add_option("--out", dedup_out, "unique element ids (JSONL)")->required();
    cmd_dedup->add_option("--report", dedup_report, "cluster report JSON");

    // synth
    auto* cmd_synth = app.add_subcommand("synth", "synthesize grounding instructions");
    std::string synth_unique, synth_kinds, synth_out, synth_templates, synth_endpoint;
    double synth_max_gap = -1.0;
    cmd_synth->add_option("--unique", synth_unique, "dedup output (JSONL of element ids)");
    auto* kinds_opt = cmd_synth->add_option("--kinds", synth_kinds,
                                            "comma list of direct,functional,spatial");
    auto* gap_opt = cmd_synth->add_option("--max-gap", synth_max_gap,
                                          "max px gap per side for 'between' (default 200)");
    auto* tpl_opt = cmd_synth->add_option("--templates", synth_templates,
                                          "directory overriding the built-in template set");
    auto* endpoint_opt = cmd_synth->add_option(
        "--endpoint", synth_endpoint, "chat-completion URL (default $GROUNDKIT_LLM_URL)");
    int synth_regen = 0;
    cmd_synth->add_option("--regen-budget", synth_regen,
                          "extra attempts per rejected model response (default 0: drop)");
    cmd_synth->add_option("--out", synth_out, "pool output directory")->required();

    // export-sft
    auto* cmd_export = app.add_subcommand("export-sft", "sample the training mix and export");
    std::string export_pool, export_mix, export_out;
    std::uint64_t export_total = 0;
    cmd_export->add_option("--pool", export_pool, "pool directory from synth")->required();
    auto* mix_opt = cmd_export->add_option("--mix", export_mix,
                                           "direct,functional,spatial fractions (default "
                                           "0.5,0.35,0.15)");
    auto* total_opt = cmd_export->add_option("--total", export_total, "dataset size");
    cmd_export->add_option("--out", export_out, "SFT dataset JSONL")->required();

    // select-rl
    auto* cmd_select = app.add_subcommand("select-rl", "pick unseen elements for RL");
    std::string select_pool, select_exclude, select_out;
    std::uint64_t select_k = 0;
    cmd_select->add_option("--pool", select_pool, "element id pool (JSONL)")->required();
    cmd_select->add_option("--exclude", select_exclude, "SFT export whose element ids are used");
    cmd_select->add_option("--k", select_k, "how many elements to select")->required();
    cmd_select->add_option("--out", select_out, "selected element ids (JSONL)")->required();

    // reward-server
    auto* cmd_server = app.add_subcommand("reward-server", "serve the scoring protocol");
    std::string listen_addr;
    bool use_stdio = false;
    auto* listen_opt =
        cmd_server->add_option("--listen", listen_addr, "host:port for the TCP line server");
    auto* stdio_flag = cmd_server->add_flag("--stdio", use_stdio, "serve stdin/stdout instead");

    // eval
    auto* cmd_eval = app.add_subcommand("eval", "score predictions against a benchmark");
    std::string eval_benchmark, eval_pred, eval_coord, eval_by, eval_out;
    bool eval_strict_ids = false, eval_exclusive = false, eval_first_pair = false;
    cmd_eval->add_option("--benchmark", eval_benchmark, "benchmark records (JSONL)")->required();
    cmd_eval->add_option("--pred", eval_pred, "predictions (JSONL)")->required();
    auto* coord_opt = cmd_eval->add_option("--coord-space", eval_coord,
                                           "pixel|unit|milli (required unless set in config)");
    cmd_eval->add_option("--by", eval_by, "comma list of tag keys for the breakdown table");
    cmd_eval->add_option("--out", eval_out, "write the report JSON here");
    cmd_eval->add_flag("--strict-ids", eval_strict_ids, "fail on predictions for unknown ids");
    cmd_eval->add_flag("--exclusive-bounds", eval_exclusive,
                       "boundary points count as misses (parity studies)");
    cmd_eval->add_flag("--first-pair", eval_first_pair,
                       "take the first coordinate pair instead of the last");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        // CLI11 maps --help to 0; everything else is a usage error.
        return rc == 0 ? 0 : 2;
    }

    json cfg;
    try {
        cfg = load_config_file(config_path);
    } catch (const CLI::Error& e) {
        std::cerr << e.what() << '\n';
        return 2;
    }

    // Resolve globals: flags > config > env/default.
    std::string log_level = log_opt->count() ? log_level_flag
                                             : cfg_get<std::string>(cfg, "", "log_level", "info");
    if (log_level == "debug") {
        g_log_level = LogLevel::Debug;
    } else if (log_level == "info") {
        g_log_level = LogLevel::Info;
    } else if (log_level == "warn") {
        g_log_level = LogLevel::Warn;
    } else if (log_level == "error") {
        g_log_level = LogLevel::Error;
    } else {
        std::cerr << "unknown log level '" << log_level << "'\n";
        return 2;
    }
    if (!corpus_opt->count()) corpus_path = cfg_get<std::string>(cfg, "", "corpus", "");
    const std::uint64_t seed =
        seed_opt->count() ? seed_flag : cfg_get<std::uint64_t>(cfg, "", "seed", 0);
    int workers = workers_opt->count() ? workers_flag : cfg_get<int>(cfg, "", "workers", 0);
    if (!workers_opt->count() && !cfg.contains("workers")) {
        if (const char* env = std::getenv("GROUNDKIT_WORKERS")) workers = std::atoi(env);
    }

    auto open_corpus = [&](CorpusHandle& handle) -> bool {
        if (corpus_path.empty()) {
            std::cerr << "--corpus is required (flag or config)\n";
            return false;
        }
        if (gk_corpus_load(corpus_path.c_str(), &handle.c) != GK_OK) {
            log_error(std::string("loading corpus failed: ") + gk_last_error());
            return false;
        }
        log_debug("loaded corpus with " +
                  std::to_string(gk_corpus_screenshot_count(handle.c)) + " screenshots, " +
                  std::to_string(gk_corpus_element_count(handle.c)) + " elements");
        return true;
    };

    if (*cmd_validate) {
        json resolved = {{"command", "validate"}, {"corpus", corpus_path}, {"strict", strict}};
        log_info("config: " + resolved.dump());
        CorpusHandle handle;
        if (!open_corpus(handle)) return 1;
        char* report = nullptr;
        if (gk_corpus_validate(handle.c, strict ? 1 : 0, &report) != GK_OK) {
            return fail_data("validate");
        }
        const std::string report_text = take(report);
        const json doc = json::parse(report_text);
        if (!validate_report_path.empty() &&
            !write_file(validate_report_path, report_text, "report")) {
            return 1;
        }
        std::cout << "errors: " << doc["errors"] << ", warnings: " << doc["warnings"] << '\n';
        for (const auto& d : doc["diagnostics"]) {
            log_at(d["severity"] == "error" ? LogLevel::Error : LogLevel::Warn,
                   d["severity"].get<std::string>().c_str(), d["message"].get<std::string>());
        }
        return doc["errors"].get<std::size_t>() > 0 ? 1 : 0;
    }

    if (*cmd_stats) {
        json resolved = {{"command", "stats"}, {"corpus", corpus_path}, {"out", stats_out}};
        log_info("config: " + resolved.dump());
        CorpusHandle handle;
        if (!open_corpus(handle)) return 1;
        char* stats = nullptr;
        if (gk_stats_compute(handle.c, &stats) != GK_OK) return fail_data("stats");
        const std::string stats_text = take(stats);
        if (!stats_out.empty() && !write_file(stats_out, stats_text, "stats")) return 1;
        if (stats_table || stats_out.empty()) {
            char* table = nullptr;
            if (gk_stats_table(stats_text.c_str(),
                               std::filesystem::path(corpus_path).filename().string().c_str(),
                               &table) != GK_OK) {
                return fail_data("stats table");
            }
            std::cout << take(table);
        }
        return 0;
    }

    if (*cmd_dedup) {
        json config = {
            {"hamming_threshold",
             thr_opt->count() ? dedup_threshold : cfg_get<int>(cfg, "dedup", "threshold", 5)},
            {"label_mode", mode_opt->count()
                               ? dedup_label_mode
                               : cfg_get<std::string>(cfg, "dedup", "label_mode", "normalized")},
            {"min_crop_px",
             crop_opt->count() ? dedup_min_crop : cfg_get<int>(cfg, "dedup", "min_crop_px", 8)},
            {"workers", workers},
            {"seed", seed},
        };
        json resolved = {{"command", "dedup"}, {"corpus", corpus_path}, {"config", config}};
        log_info("config: " + resolved.dump());
        CorpusHandle handle;
        if (!open_corpus(handle)) return 1;
        char* result = nullptr;
        if (gk_dedup_run(handle.c, config.dump().c_str(), &result) != GK_OK) {
            return fail_data("dedup");
        }
        const json doc = json::parse(take(result));
        {
            std::ofstream out(dedup_out, std::ios::binary | std::ios::trunc);
            if (!out.good()) {
                log_error("cannot write " + dedup_out);
                return 1;
            }
            for (const auto& id : doc["unique_ids"]) {
                out << json{{"element_id", id}}.dump() << '\n';
            }
        }
        if (!dedup_report.empty() &&
            !write_file(dedup_report, doc["report"].dump(2), "report")) {
            return 1;
        }
        std::cout << "unique elements: " << doc["report"]["unique_count"] << " of "
                  << doc["report"]["input_count"] << '\n';
        return 0;
    }

    if (*cmd_synth) {
        json config = {
            {"kinds", kinds_opt->count()
                          ? synth_kinds
                          : cfg_get<std::string>(cfg, "synth", "kinds",
                                                 "direct,functional,spatial")},
            {"max_gap_px", gap_opt->count()
                               ? synth_max_gap
                               : cfg_get<double>(cfg, "synth", "max_gap_px", 200.0)},
            {"seed", seed},
            {"workers", workers},
            {"regen_budget", synth_regen},
        };
        const std::string templates_dir =
            tpl_opt->count() ? synth_templates
                             : cfg_get<std::string>(cfg, "synth", "templates_dir", "");
        if (!templates_dir.empty()) config["templates_dir"] = templates_dir;
        const std::string endpoint = endpoint_opt->count()
                                         ? synth_endpoint
                                         : cfg_get<std::string>(cfg, "synth", "endpoint", "");
        if (!endpoint.empty()) config["endpoint"] = endpoint;
        json resolved = {{"command", "synth"},
                         {"corpus", corpus_path},
                         {"unique", synth_unique},
                         {"out", synth_out},
                         {"config", config}};
        log_info("config: " + resolved.dump());
        CorpusHandle handle;
        if (!open_corpus(handle)) return 1;
        char* summary = nullptr;
        if (gk_synth_run(handle.c, synth_unique.empty() ? nullptr : synth_unique.c_str(),
                         config.dump().c_str(), synth_out.c_str(), &summary) != GK_OK) {
            return fail_data("synth");
        }
        std::cout << take(summary) << '\n';
        return 0;
    }

    if (*cmd_export) {
        json config = {{"seed", seed}};
        const std::string mix = mix_opt->count() ? export_mix : "";
        if (!mix.empty()) {
            double d, f, s;
            if (std::sscanf(mix.c_str(), "%lf,%lf,%lf", &d, &f, &s) != 3) {
                std::cerr << "--mix expects three comma-separated fractions\n";
                return 2;
            }
            config["mix"] = {d, f, s};
        } else if (cfg.contains("mix")) {
            config["mix"] = {cfg_get<double>(cfg, "mix", "direct", 0.5),
                             cfg_get<double>(cfg, "mix", "functional", 0.35),
                             cfg_get<double>(cfg, "mix", "spatial", 0.15)};
        }
        if (total_opt->count()) {
            config["total"] = export_total;
        } else if (cfg.contains("mix") && cfg["mix"].contains("total") &&
                   cfg["mix"]["total"].get<std::uint64_t>() > 0) {
            config["total"] = cfg["mix"]["total"].get<std::uint64_t>();
        } else {
            std::cerr << "export-sft requires --total (flag or config)\n";
            return 2;
        }
        json resolved = {{"command", "export-sft"},
                         {"pool", export_pool},
                         {"out", export_out},
                         {"config", config}};
        log_info("config: " + resolved.dump());
        char* summary = nullptr;
        if (gk_export_sft(export_pool.c_str(), config.dump().c_str(), export_out.c_str(),
                          &summary) != GK_OK) {
            return fail_data("export-sft");
        }
        std::cout << take(summary) << '\n';
        return 0;
    }

    if (*cmd_select) {
        json resolved = {{"command", "select-rl"}, {"pool", select_pool},
                         {"exclude", select_exclude}, {"k", select_k}, {"seed", seed}};
        log_info("config: " + resolved.dump());
        char* summary = nullptr;
        if (gk_select_rl(select_pool.c_str(),
                         select_exclude.empty() ? nullptr : select_exclude.c_str(), select_k,
                         seed, select_out.c_str(), &summary) != GK_OK) {
            return fail_data("select-rl");
        }
        std::cout << take(summary) << '\n';
        return 0;
    }

    if (*cmd_server) {
        std::string listen = listen_opt->count()
                                 ? listen_addr
                                 : cfg_get<std::string>(cfg, "reward_server", "listen", "");
        bool stdio = stdio_flag->count() ? use_stdio
                                         : cfg_get<bool>(cfg, "reward_server", "stdio", false);
        const bool has_listen = !listen.empty();
        if (stdio == has_listen) { // neither or both
            std::cerr << "reward-server needs exactly one of --listen <host:port> or --stdio\n";
            return 2;
        }
        json resolved = {{"command", "reward-server"}, {"listen", listen}, {"stdio", stdio}};
        log_info("config: " + resolved.dump());
        if (stdio) {
            if (gk_reward_serve_stdio() != GK_OK) return fail_data("reward-server");
            return 0;
        }
        const auto colon = listen.rfind(':');
        if (colon == std::string::npos) {
            std::cerr << "--listen expects host:port\n";
            return 2;
        }
        const std::string host = listen.substr(0, colon);
        const int port = std::atoi(listen.c_str() + colon + 1);
        log_info("listening on " + host + ":" + std::to_string(port));
        if (gk_reward_serve_tcp(host.c_str(), port) != GK_OK) return fail_data("reward-server");
        return 0;
    }

    if (*cmd_eval) {
        // Coordinate space is never sniffed; it must be declared.
        if (!coord_opt->count() &&
            !(cfg.contains("eval") && cfg["eval"].contains("coord_space"))) {
            std::cerr << "eval requires --coord-space (pixel|unit|milli), flag or config\n";
            return 2;
        }
        json config = {
            {"coord_space", coord_opt->count()
                                ? eval_coord
                                : cfg_get<std::string>(cfg, "eval", "coord_space", "pixel")},
            {"strict_ids", eval_strict_ids || cfg_get<bool>(cfg, "eval", "strict_ids", false)},
            {"exclusive_bounds",
             eval_exclusive || cfg_get<bool>(cfg, "eval", "exclusive_bounds", false)},
            {"first_pair", eval_first_pair || cfg_get<bool>(cfg, "eval", "first_pair", false)},
        };
        json resolved = {{"command", "eval"}, {"benchmark", eval_benchmark},
                         {"pred", eval_pred}, {"config", config}};
        log_info("config: " + resolved.dump());
        char* report = nullptr;
        if (gk_eval_run(eval_benchmark.c_str(), eval_pred.c_str(), config.dump().c_str(),
                        &report) != GK_OK) {
            return fail_data("eval");
        }
        const std::string report_text = take(report);
        if (!eval_out.empty() && !write_file(eval_out, report_text, "report")) return 1;
        char* table = nullptr;
        if (gk_eval_table(report_text.c_str(), eval_by.c_str(), &table) != GK_OK) {
            return fail_data("eval table");
        }
        std::cout << take(table);
        return 0;
    }

    return 2;
}
