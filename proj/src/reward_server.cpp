#include "groundkit/reward_server.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <iostream>
#include <vector>

#include <json.hpp>

#include "groundkit/error.hpp"
#include "groundkit/rewards.hpp"

using nlohmann::json;
using nlohmann::ordered_json;

namespace groundkit::server {

namespace {

ordered_json error_response(const std::string& id, const std::string& message) {
    ordered_json out;
    out["id"] = id;
    out["error"] = message;
    return out;
}

ordered_json handle(const json& req) {
    std::string id;
    if (auto it = req.find("id"); it != req.end() && it->is_string()) id = it->get<std::string>();

    try {
        auto scheme_it = req.find("scheme");
        if (scheme_it == req.end() || !scheme_it->is_string()) {
            return error_response(id, "missing scheme");
        }
        auto scheme = rewards::scheme_from_string(scheme_it->get<std::string>());
        if (!scheme) {
            return error_response(id, "unknown scheme '" + scheme_it->get<std::string>() + "'");
        }

        eval::CoordSpace cs = eval::CoordSpace::Pixel;
        if (auto it = req.find("coord_space"); it != req.end()) {
            if (!it->is_string()) return error_response(id, "coord_space must be a string");
            auto parsed = eval::coord_space_from_string(it->get<std::string>());
            if (!parsed) {
                return error_response(id, "unknown coord_space '" + it->get<std::string>() + "'");
            }
            cs = *parsed;
        }

        auto image_it = req.find("image");
        if (image_it == req.end() || !image_it->is_object() || !image_it->contains("width") ||
            !image_it->contains("height")) {
            return error_response(id, "missing image {width, height}");
        }
        rewards::RolloutGroup group;
        group.image_w = image_it->at("width").get<double>();
        group.image_h = image_it->at("height").get<double>();
        if (!(group.image_w > 0.0) || !(group.image_h > 0.0)) {
            return error_response(id, "image dimensions must be positive");
        }

        auto box_it = req.find("box");
        if (box_it == req.end() || !box_it->is_array() || box_it->size() != 4) {
            return error_response(id, "box must be a 4-element array");
        }
        for (const auto& v : *box_it) {
            if (!v.is_number()) return error_response(id, "box entries must be numbers");
        }
        group.box = {(*box_it)[0].get<double>(), (*box_it)[1].get<double>(),
                     (*box_it)[2].get<double>(), (*box_it)[3].get<double>()};
        if (!group.box.valid()) return error_response(id, "box has x1 > x2 or y1 > y2");

        auto rollouts_it = req.find("rollouts");
        if (rollouts_it == req.end() || !rollouts_it->is_array() || rollouts_it->empty()) {
            return error_response(id, "rollouts must be a non-empty array");
        }
        for (const auto& r : *rollouts_it) {
            if (r.is_object() && r.contains("point")) {
                const auto& p = r["point"];
                if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
                    return error_response(id, "rollout point must be a numeric pair");
                }
                group.rollouts.push_back(rewards::Prediction::from_point(
                    {p[0].get<double>(), p[1].get<double>()}));
            } else if (r.is_object() && r.contains("text") && r["text"].is_string()) {
                group.rollouts.push_back(
                    rewards::Prediction::from_text(r["text"].get<std::string>()));
            } else {
                return error_response(id, "rollout must carry 'point' or 'text'");
            }
        }

        bool rloo = false;
        if (auto it = req.find("rloo"); it != req.end()) {
            if (!it->is_boolean()) return error_response(id, "rloo must be a boolean");
            rloo = it->get<bool>();
        }

        const std::vector<double> rewards_vec = rewards::score_group(group, *scheme, cs);
        ordered_json out;
        out["id"] = id;
        out["rewards"] = rewards_vec;
        if (rloo) out["advantages"] = rewards::rloo_advantages(rewards_vec);
        return out;
    } catch (const Error& e) {
        return error_response(id, e.what());
    } catch (const json::exception& e) {
        return error_response(id, std::string("bad request: ") + e.what());
    }
}

} // namespace

std::string process_reward_line(const std::string& line) {
    json req = json::parse(line, nullptr, false);
    if (req.is_discarded() || !req.is_object()) {
        return error_response("", "malformed JSON request line").dump();
    }
    return handle(req).dump();
}

void serve_stdio() {
    std::string line;
    while (std::getline(std::cin, line)) {
        if (line.empty()) continue;
        std::cout << process_reward_line(line) << '\n' << std::flush;
    }
}

namespace {

void serve_connection(int fd) {
    std::string buffer;
    char chunk[4096];
    for (;;) {
        const ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
        if (n <= 0) break;
        buffer.append(chunk, static_cast<std::size_t>(n));
        std::size_t pos;
        while ((pos = buffer.find('\n')) != std::string::npos) {
            std::string line = buffer.substr(0, pos);
            buffer.erase(0, pos + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            const std::string response = process_reward_line(line) + "\n";
            std::size_t sent = 0;
            while (sent < response.size()) {
                const ssize_t w = ::send(fd, response.data() + sent, response.size() - sent, 0);
                if (w <= 0) {
                    ::close(fd);
                    return;
                }
                sent += static_cast<std::size_t>(w);
            }
        }
    }
    ::close(fd);
}

int open_listener(const std::string& host, int port) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    require(fd >= 0, ErrorCode::Io, "socket() failed");
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<uint16_t>(port));
    if (host.empty() || host == "0.0.0.0") {
        addr.sin_addr.s_addr = INADDR_ANY;
    } else if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(fd);
        fail(ErrorCode::InvalidArgument, "cannot parse listen address: " + host);
    }
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        ::close(fd);
        fail(ErrorCode::Io, "bind failed on " + host + ":" + std::to_string(port));
    }
    if (::listen(fd, 16) != 0) {
        ::close(fd);
        fail(ErrorCode::Io, "listen failed");
    }
    return fd;
}

int resolved_port(int fd) {
    sockaddr_in addr{};
    socklen_t len = sizeof(addr);
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
    return ntohs(addr.sin_port);
}

} // namespace

void serve_tcp(const std::string& host, int port) {
    const int fd = open_listener(host, port);
    std::vector<std::thread> workers;
    for (;;) {
        const int client = ::accept(fd, nullptr, nullptr);
        if (client < 0) break;
        workers.emplace_back([client]() { serve_connection(client); });
    }
    for (auto& t : workers) t.join();
    ::close(fd);
}

TcpServer::TcpServer(const std::string& host, int port) {
    listen_fd_ = open_listener(host, port);
    port_ = resolved_port(listen_fd_);
    thread_ = std::thread([this]() { run(); });
}

void TcpServer::run() {
    std::vector<std::thread> workers;
    for (;;) {
        const int client = ::accept(listen_fd_, nullptr, nullptr);
        if (client < 0) {
            if (stopping_) break;
            continue;
        }
        workers.emplace_back([client]() { serve_connection(client); });
    }
    for (auto& t : workers) t.join();
}

void TcpServer::stop() {
    if (stopping_.exchange(true)) return;
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    if (thread_.joinable()) thread_.join();
}

TcpServer::~TcpServer() {
    stop();
}

} // namespace groundkit::server
