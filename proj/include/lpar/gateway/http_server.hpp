#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <thread>

#include <boost/asio/ip/tcp.hpp>

#include "lpar/common/error.hpp"
#include "lpar/gateway/platform.hpp"

namespace lpar::gateway {

struct ApiReply {
    int status = 200;
    Json body;  // null for 204
};

// HTTP status for an error code: 404 for unknown ids, 409 for state
// conflicts, 400 for bad input, 500 for the rest.
int http_status_for(ErrorCode code) noexcept;
Json error_body(std::string_view code, std::string_view message);

// The REST surface without any transport. `target` may carry a query string.
ApiReply route_api(Platform &platform, std::string_view method, std::string_view target, std::string_view body);

// Session id from "/ws/sessions/{sid}", if the target has that shape.
std::optional<std::string> ws_session_target(std::string_view target);

// One WebSocket text frame in, the frames to send back out.
std::vector<Json> handle_ws_frame(Platform &platform, const std::string &session_id, std::string_view frame);

struct ServerOptions {
    std::string address = "127.0.0.1";
    std::uint16_t port = 0;  // 0 picks a free port
    std::optional<std::filesystem::path> data_dir;  // snapshot target on stop
};

// Blocking Beast server, one thread per connection. Thread-safe start/stop.
class HttpServer {
public:
    HttpServer(Platform &platform, ServerOptions options);
    ~HttpServer();

    HttpServer(const HttpServer &) = delete;
    HttpServer &operator=(const HttpServer &) = delete;

    // Throws BindError when the address cannot be bound.
    void start();
    [[nodiscard]] std::uint16_t port() const noexcept { return port_.load(); }
    // Stops accepting, closes live connections, then snapshots the stores.
    void stop();

private:
    struct Impl;
    void accept_loop();
    void serve_connection(std::shared_ptr<boost::asio::ip::tcp::socket> socket,
                          std::shared_ptr<std::atomic<bool>> done);

    Platform &platform_;
    ServerOptions options_;
    std::atomic<std::uint16_t> port_{0};
    std::atomic<bool> stopping_{false};
    std::unique_ptr<Impl> impl_;
    std::thread acceptor_thread_;
};

}  // namespace lpar::gateway
