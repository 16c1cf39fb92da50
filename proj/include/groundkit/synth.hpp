#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "groundkit/instructions.hpp"
#include "groundkit/llm_client.hpp"
#include "groundkit/templates.hpp"
#include "groundkit/types.hpp"

namespace groundkit::instr {

struct SynthConfig {
    bool direct = true;
    bool functional = true;
    bool spatial = true;
    SpatialConfig spatial_cfg;
    tpl::TemplateSet templates; // empty -> defaults
    llm::ClientConfig client;   // unconfigured -> template-only subkinds
    // Attachments for model prompts land here (annotated full shots + crops).
    std::filesystem::path attachments_dir;
    int workers = 0;
    // Rejected responses are dropped by default; a budget > 0 re-asks
    // the model that many extra times per rejected prompt.
    int regen_budget = 0;
};

struct SynthSummary {
    std::size_t elements_processed = 0;
    std::size_t textual = 0;
    std::size_t general = 0;
    std::size_t spatial = 0;
    std::size_t model_requests = 0;
    std::size_t model_accepted = 0;
    std::size_t model_rejected = 0;
    std::vector<std::string> rejections; // one reason per rejected response

    std::string to_json() const;
};

// Generates the instruction pool for the given unique elements. All
// template-backed subkinds are produced offline; description / visual
// caption / functional-goal samples are requested from the configured
// model endpoint and pass validate_response before entering the pool.
// Deterministic given (corpus, config, seed) for the offline subkinds.
std::vector<InstructionSample> synthesize(const Corpus& c,
                                          const std::vector<std::string>& unique_ids,
                                          const SynthConfig& cfg, std::uint64_t seed,
                                          SynthSummary& summary);

} // namespace groundkit::instr
