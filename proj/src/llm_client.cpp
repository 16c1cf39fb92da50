#include "groundkit/llm_client.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include "groundkit/error.hpp"

using nlohmann::json;

namespace groundkit::llm {

ClientConfig from_env() {
    ClientConfig cfg;
    if (const char* url = std::getenv("GROUNDKIT_LLM_URL")) cfg.url = url;
    if (const char* key = std::getenv("GROUNDKIT_LLM_KEY")) cfg.api_key = key;
    return cfg;
}

namespace {

struct SplitUrl {
    std::string base; // scheme://host[:port]
    std::string path; // /v1/chat/completions
};

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    require(scheme_end != std::string::npos, ErrorCode::InvalidArgument,
            "endpoint URL needs a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

const char* base64_alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64(const std::string& bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    while (i + 2 < bytes.size()) {
        const unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                           (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                           static_cast<unsigned char>(bytes[i + 2]);
        out.push_back(base64_alphabet[(v >> 18) & 63]);
        out.push_back(base64_alphabet[(v >> 12) & 63]);
        out.push_back(base64_alphabet[(v >> 6) & 63]);
        out.push_back(base64_alphabet[v & 63]);
        i += 3;
    }
    if (i + 1 == bytes.size()) {
        const unsigned v = static_cast<unsigned char>(bytes[i]) << 16;
        out.push_back(base64_alphabet[(v >> 18) & 63]);
        out.push_back(base64_alphabet[(v >> 12) & 63]);
        out += "==";
    } else if (i + 2 == bytes.size()) {
        const unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                           (static_cast<unsigned char>(bytes[i + 1]) << 8);
        out.push_back(base64_alphabet[(v >> 18) & 63]);
        out.push_back(base64_alphabet[(v >> 12) & 63]);
        out.push_back(base64_alphabet[(v >> 6) & 63]);
        out += "=";
    }
    return out;
}

std::string mime_for(const std::string& path) {
    auto ends_with = [&](const char* suffix) {
        const std::string s(suffix);
        return path.size() >= s.size() && path.compare(path.size() - s.size(), s.size(), s) == 0;
    };
    if (ends_with(".jpg") || ends_with(".jpeg")) return "image/jpeg";
    return "image/png";
}

json image_part(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrorCode::Io, "cannot open image attachment " + path);
    std::string bytes(std::istreambuf_iterator<char>(in), {});
    return json{{"type", "image_url"},
                {"image_url", {{"url", "data:" + mime_for(path) + ";base64," + base64(bytes)}}}};
}

json build_body(const instr::PromptRequest& req, const ClientConfig& cfg) {
    json content = json::array();
    content.push_back({{"type", "text"}, {"text", req.rendered_prompt}});
    if (!req.full_image_ref.empty()) content.push_back(image_part(req.full_image_ref));
    if (!req.crop_image_ref.empty()) content.push_back(image_part(req.crop_image_ref));
    return json{{"model", cfg.model},
                {"messages", json::array({{{"role", "user"}, {"content", content}}})}};
}

// Returns the assistant text, or sets error. Retries transport errors,
// 429 and 5xx with exponential backoff.
std::string call_once(httplib::Client& client, const std::string& path, const json& body,
                      const ClientConfig& cfg, std::string& error) {
    httplib::Headers headers;
    if (!cfg.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg.api_key);
    int delay_ms = cfg.backoff_initial_ms;
    for (int attempt = 0;; ++attempt) {
        auto res = client.Post(path, headers, body.dump(), "application/json");
        const bool retryable =
            !res || res->status == 429 || (res->status >= 500 && res->status < 600);
        if (res && !retryable && res->status == 200) {
            json doc = json::parse(res->body, nullptr, false);
            if (doc.is_discarded()) {
                error = "response body is not JSON";
                return {};
            }
            try {
                return doc.at("choices").at(0).at("message").at("content").get<std::string>();
            } catch (const json::exception&) {
                error = "response body missing choices[0].message.content";
                return {};
            }
        }
        if (res && !retryable) {
            error = "HTTP " + std::to_string(res->status);
            return {};
        }
        if (attempt >= cfg.max_retries) {
            error = res ? "HTTP " + std::to_string(res->status) + " after " +
                              std::to_string(attempt) + " retries"
                        : "endpoint unreachable after " + std::to_string(attempt) + " retries";
            return {};
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
        delay_ms *= 2;
    }
}

} // namespace

std::vector<instr::ModelResponse> submit_prompts(const std::vector<instr::PromptRequest>& requests,
                                                 const ClientConfig& cfg) {
    require(cfg.configured(), ErrorCode::InvalidArgument,
            "no model endpoint configured (set GROUNDKIT_LLM_URL)");
    const SplitUrl url = split_url(cfg.url);

    std::vector<instr::ModelResponse> responses(requests.size());
    std::atomic<std::size_t> next{0};
    const unsigned workers =
        std::min<std::size_t>(std::max(cfg.max_in_flight, 1), std::max<std::size_t>(requests.size(), 1));

    auto worker = [&]() {
        // One connection per worker; requests on it run strictly in order.
        httplib::Client client(url.base);
        client.set_connection_timeout(cfg.timeout_s);
        client.set_read_timeout(cfg.timeout_s);
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= requests.size()) return;
            const instr::PromptRequest& req = requests[i];
            instr::ModelResponse out;
            out.request_id = req.request_id;
            try {
                std::string error;
                const std::string raw = call_once(client, url.path, build_body(req, cfg), cfg, error);
                if (!error.empty()) {
                    out.transport_error = error;
                } else {
                    out = instr::parse_model_response(req.request_id, raw);
                }
            } catch (const Error& e) {
                out.transport_error = e.what();
            }
            responses[i] = std::move(out);
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return responses;
}

} // namespace groundkit::llm
