#pragma once

#include <string>
#include <vector>

#include "groundkit/instructions.hpp"

namespace groundkit::llm {

// Chat-completion endpoint configuration. from_env() reads
// GROUNDKIT_LLM_URL / GROUNDKIT_LLM_KEY; an empty url means no endpoint
// is configured and the synthesis pipeline stays template-only.
struct ClientConfig {
    std::string url;  // full endpoint, e.g. http://host:8000/v1/chat/completions
    std::string api_key;
    std::string model = "qwen2.5-vl-72b-instruct";
    int max_in_flight = 4;
    int max_retries = 3;
    int backoff_initial_ms = 500; // doubled per retry
    int timeout_s = 120;

    bool configured() const { return !url.empty(); }
};

ClientConfig from_env();

// Sends every request (bounded parallelism, per-request retry with
// exponential backoff on 429/5xx/transport failures) and returns one
// response per request, paired by request_id and returned in request
// order. Unrecoverable failures become transport_error records; the
// batch always completes.
std::vector<instr::ModelResponse> submit_prompts(const std::vector<instr::PromptRequest>& requests,
                                                 const ClientConfig& cfg);

} // namespace groundkit::llm
