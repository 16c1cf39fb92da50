#pragma once

#include <atomic>
#include <string>
#include <thread>

namespace groundkit::server {

// One protocol exchange: a newline-delimited JSON request in, the
// response line out (without trailing newline). Never throws; protocol
// problems come back as {"id": ..., "error": ...} lines. Responses are
// byte-deterministic for identical request lines.
std::string process_reward_line(const std::string& line);

// Reads requests from stdin until EOF, one response per line on stdout.
void serve_stdio();

// Blocking TCP loop, thread per connection, newline-delimited JSON.
// Requests on one connection are answered strictly in order.
void serve_tcp(const std::string& host, int port);

// Test-friendly handle: serves in a background thread until stopped.
class TcpServer {
public:
    TcpServer(const std::string& host, int port);
    ~TcpServer();
    TcpServer(const TcpServer&) = delete;
    TcpServer& operator=(const TcpServer&) = delete;

    int port() const { return port_; } // resolved port (useful with port 0)
    void stop();

private:
    void run();
    int listen_fd_ = -1;
    int port_ = 0;
    std::atomic<bool> stopping_{false};
    std::thread thread_;
};

} // namespace groundkit::server
