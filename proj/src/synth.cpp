#include "groundkit/synth.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "groundkit/error.hpp"
#include "groundkit/image.hpp"
#include "groundkit/rng.hpp"

using nlohmann::json;

namespace groundkit::instr {

namespace {

struct ModelJob {
    PromptRequest request;
    const UiElement* element;
    const Screenshot* shot;
    Subkind subkind;
};

// Annotated attachments: the full screenshot with the element boxed in
// red, plus a context crop around it.
std::pair<std::string, std::string> write_attachments(const Corpus& c, const UiElement& e,
                                                      const Screenshot& shot,
                                                      const std::filesystem::path& dir) {
    img::Image image = img::to_rgb(img::load_image(c.image_file(shot)));
    const int x1 = static_cast<int>(std::floor(e.bbox.x1));
    const int y1 = static_cast<int>(std::floor(e.bbox.y1));
    const int x2 = static_cast<int>(std::ceil(e.bbox.x2));
    const int y2 = static_cast<int>(std::ceil(e.bbox.y2));
    img::draw_box(image, x1, y1, x2, y2, 255, 0, 0);

    const int margin = 40;
    const int cx1 = std::max(0, x1 - margin);
    const int cy1 = std::max(0, y1 - margin);
    const int cx2 = std::min(image.width, x2 + margin);
    const int cy2 = std::min(image.height, y2 + margin);
    img::Image cropped = img::crop(image, cx1, cy1, std::max(1, cx2 - cx1),
                                   std::max(1, cy2 - cy1));

    std::filesystem::create_directories(dir);
    const std::string full = (dir / (e.id + "_full.png")).string();
    const std::string crop = (dir / (e.id + "_crop.png")).string();
    img::save_png(full, image);
    img::save_png(crop, cropped);
    return {full, crop};
}

} // namespace

std::vector<InstructionSample> synthesize(const Corpus& c,
                                          const std::vector<std::string>& unique_ids,
                                          const SynthConfig& cfg, std::uint64_t seed,
                                          SynthSummary& summary) {
    const tpl::TemplateSet& set =
        cfg.templates.textual.empty() ? tpl::default_templates() : cfg.templates;

    // Group work by screenshot so anchor sets are materialized once.
    std::map<std::string, std::vector<const UiElement*>> by_shot; // ordered for determinism
    for (const std::string& id : unique_ids) {
        const UiElement* e = c.find_element(id);
        require(e != nullptr, ErrorCode::NotFound, "unique id does not resolve: " + id);
        by_shot[e->screenshot_id].push_back(e);
    }
    std::vector<const std::string*> shot_order;
    shot_order.reserve(by_shot.size());
    for (const auto& [sid, _] : by_shot) shot_order.push_back(&sid);

    std::vector<std::vector<InstructionSample>> per_shot(shot_order.size());
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> textual_count{0}, general_count{0}, spatial_count{0};
    std::mutex err_mu;
    std::string first_error;

    unsigned workers = cfg.workers > 0 ? static_cast<unsigned>(cfg.workers)
                                       : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, std::max<std::size_t>(shot_order.size(), 1));

    auto worker = [&]() {
        for (;;) {
            const std::size_t wi = next.fetch_add(1);
            if (wi >= shot_order.size()) return;
            try {
                const std::string& sid = *shot_order[wi];
                const Screenshot& shot = *c.find_screenshot(sid);
                std::vector<UiElement> anchors;
                for (std::size_t ei : c.elements_by_screenshot.at(sid)) {
                    anchors.push_back(c.elements[ei]);
                }
                std::vector<InstructionSample>& out = per_shot[wi];
                for (const UiElement* e : by_shot.at(sid)) {
                    if (cfg.direct && is_textual(*e)) {
                        out.push_back(make_textual_instruction(
                            *e, shot, set, 0, rng::derive_seed(seed, e->id + "/textual")));
                        ++textual_count;
                    }
                    if (cfg.direct && !e->label.empty()) {
                        out.push_back(make_general_instruction(
                            *e, shot, set, 0, rng::derive_seed(seed, e->id + "/general")));
                        ++general_count;
                    }
                    if (cfg.spatial) {
                        for (const SpatialRelationHit& hit :
                             spatial_relations(*e, anchors, cfg.spatial_cfg)) {
                            std::vector<const UiElement*> hit_anchors;
                            for (std::size_t ai : hit.anchor_indexes) {
                                hit_anchors.push_back(&anchors[ai]);
                            }
                            out.push_back(make_spatial_instruction(
                                *e, shot, hit.relation, hit_anchors, set, 0,
                                rng::derive_seed(seed,
                                                 e->id + "/" + tpl::to_string(hit.relation))));
                            ++spatial_count;
                        }
                    }
                }
            } catch (const Error& e) {
                std::lock_guard lk(err_mu);
                if (first_error.empty()) first_error = e.what();
            }
        }
    };
    {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    require(first_error.empty(), ErrorCode::Internal, first_error);

    std::vector<InstructionSample> samples;
    for (auto& chunk : per_shot) {
        samples.insert(samples.end(), std::make_move_iterator(chunk.begin()),
                       std::make_move_iterator(chunk.end()));
    }
    summary.textual = textual_count;
    summary.general = general_count;
    summary.spatial = spatial_count;
    summary.elements_processed = unique_ids.size();

    // Model-backed subkinds, when an endpoint is configured.
    if (cfg.client.configured() && (cfg.direct || cfg.functional)) {
        const std::filesystem::path att_dir =
            cfg.attachments_dir.empty() ? std::filesystem::path("attachments")
                                        : cfg.attachments_dir;
        std::vector<ModelJob> jobs;
        for (const std::string& id : unique_ids) {
            const UiElement* e = c.find_element(id);
            const Screenshot* shot = c.find_screenshot(e->screenshot_id);
            if (e->label.empty()) continue;
            auto [full, crop] = write_attachments(c, *e, *shot, att_dir);
            auto add = [&](tpl::PromptKind kind, Subkind sk) {
                PromptRequest req =
                    build_prompt(kind, shot->app_name, e->label, full, crop, set);
                req.request_id = e->id + "/" + tpl::to_string(kind);
                jobs.push_back({std::move(req), e, shot, sk});
            };
            if (cfg.direct) {
                add(tpl::PromptKind::Description, Subkind::Description);
                if (e->ui_category && *e->ui_category == UiCategory::VisualElements) {
                    add(tpl::PromptKind::VisualCaption, Subkind::Visual);
                }
            }
            if (cfg.functional && e->ui_category &&
                (*e->ui_category == UiCategory::Button || *e->ui_category == UiCategory::Menu)) {
                add(tpl::PromptKind::FunctionalGoal, Subkind::FunctionalGoal);
            }
        }
        std::vector<std::size_t> pending(jobs.size());
        std::iota(pending.begin(), pending.end(), std::size_t{0});
        std::map<std::size_t, ResponseVerdict> accepted; // job index -> verdict
        std::vector<std::string> last_reason(jobs.size());

        for (int round = 0; round <= cfg.regen_budget && !pending.empty(); ++round) {
            std::vector<PromptRequest> requests;
            requests.reserve(pending.size());
            for (std::size_t j : pending) requests.push_back(jobs[j].request);
            summary.model_requests += requests.size();
            const auto responses = llm::submit_prompts(requests, cfg.client);
            std::vector<std::size_t> still_rejected;
            for (std::size_t i = 0; i < responses.size(); ++i) {
                const std::size_t j = pending[i];
                const ResponseVerdict verdict = validate_response(responses[i]);
                if (verdict.accepted) {
                    accepted.emplace(j, verdict);
                } else {
                    last_reason[j] = verdict.reason;
                    still_rejected.push_back(j);
                }
            }
            pending = std::move(still_rejected);
        }
        for (std::size_t j : pending) {
            ++summary.model_rejected;
            summary.rejections.push_back(jobs[j].request.request_id + ": " + last_reason[j]);
        }
        for (const auto& [j, verdict] : accepted) {
            const ModelJob& job = jobs[j];
            InstructionSample s;
            s.id = job.request.request_id;
            s.screenshot_id = job.element->screenshot_id;
            s.element_id = job.element->id;
            s.instruction = verdict.text;
            s.kind = job.subkind == Subkind::FunctionalGoal ? Kind::Functional : Kind::Direct;
            s.subkind = job.subkind;
            s.provenance = Provenance::Model;
            s.image_path = job.shot->image_path;
            s.target_box = job.element->bbox;
            check_sample(s);
            samples.push_back(std::move(s));
            ++summary.model_accepted;
        }
    }
    return samples;
}

std::string SynthSummary::to_json() const {
    json doc = {{"elements_processed", elements_processed},
                {"samples",
                 {{"textual", textual},
                  {"general", general},
                  {"spatial", spatial},
                  {"model_accepted", model_accepted}}},
                {"model_requests", model_requests},
                {"model_rejected", model_rejected},
                {"rejections", rejections}};
    return doc.dump(2);
}

} // namespace groundkit::instr
