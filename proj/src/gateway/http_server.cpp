#include "lpar/gateway/http_server.hpp"

#include <sys/socket.h>

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "lpar/common/error.hpp"
#include "lpar/common/text.hpp"

namespace lpar::gateway {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

int http_status_for(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::unknown_app:
    case ErrorCode::unknown_session:
    case ErrorCode::unknown_agent:
    case ErrorCode::unknown_pod:
    case ErrorCode::unknown_topic:
    case ErrorCode::unknown_scope: return 404;
    case ErrorCode::session_closed:
    case ErrorCode::session_not_active:
    case ErrorCode::duplicate_app:
    case ErrorCode::duplicate_agent:
    case ErrorCode::duplicate_topic: return 409;
    case ErrorCode::invalid_argument:
    case ErrorCode::invalid_score:
    case ErrorCode::invalid_descriptor:
    case ErrorCode::unsupported_channel:
    case ErrorCode::unknown_policy:
    case ErrorCode::parse_error:
    case ErrorCode::validation_error: return 400;
    default: return 500;
    }
}

Json error_body(std::string_view code, std::string_view message) {
    return Json{{"error", {{"code", code}, {"message", message}}}};
}

namespace {

std::vector<std::string> path_segments(std::string_view target) {
    if (auto q = target.find('?'); q != std::string_view::npos) target = target.substr(0, q);
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= target.size()) {
        auto slash = target.find('/', start);
        if (slash == std::string_view::npos) slash = target.size();
        if (slash > start) out.emplace_back(target.substr(start, slash - start));
        start = slash + 1;
    }
    return out;
}

Json parse_body(std::string_view body) {
    if (trim(std::string(body)).empty()) return Json::object();
    auto parsed = Json::parse(body, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object()) {
        throw Error(ErrorCode::invalid_argument, "request body must be a JSON object");
    }
    return parsed;
}

std::string string_field(const Json &body, const char *key, std::optional<std::string> fallback = std::nullopt) {
    auto it = body.find(key);
    if (it == body.end() || it->is_null()) {
        if (fallback) return *fallback;
        throw Error(ErrorCode::invalid_argument, std::string("missing field: ") + key);
    }
    if (!it->is_string()) throw Error(ErrorCode::invalid_argument, std::string("field must be a string: ") + key);
    return it->get<std::string>();
}

std::string_view sv(beast::string_view s) { return {s.data(), s.size()}; }

Json message_reply(const orchestrate::TurnResult &turn) { return Json(turn); }

ApiReply dispatch(Platform &platform, std::string_view method, const std::vector<std::string> &seg,
                  std::string_view raw_body) {
    const auto n = seg.size();
    if (n < 2 || seg[0] != "api") return {404, error_body("not_found", "no such endpoint")};

    auto method_not_allowed = [] { return ApiReply{405, error_body("method_not_allowed", "method not allowed")}; };

    // /api/agents
    if (n == 2 && seg[1] == "agents") {
        if (method != "GET") return method_not_allowed();
        Json all = Json::array();
        for (const auto &app : platform.registry().apps()) {
            for (auto &a : platform.agents_json(app.app_id)) all.push_back(std::move(a));
        }
        return {200, all};
    }

    // /api/apps/{app}/sessions, /api/apps/{app}/agents
    if (n == 4 && seg[1] == "apps") {
        const auto &app_id = seg[2];
        if (seg[3] == "sessions") {
            if (method != "POST") return method_not_allowed();
            const auto body = parse_body(raw_body);
            const auto user = string_field(body, "user");
            const auto channel = string_field(body, "channel", "web");
            const auto c = platform.start_conversation(app_id, channel, user);
            return {201, Json{{"session_id", c.session_id}, {"greeting", c.greeting}, {"user_id", c.user_id},
                              {"resumed", c.resumed}}};
        }
        if (seg[3] == "agents") {
            if (method != "GET") return method_not_allowed();
            (void)platform.orchestrator(app_id);  // unknown_app
            return {200, platform.agents_json(app_id)};
        }
    }

    // /api/sessions/{sid}[/messages|/feedback]
    if ((n == 3 || n == 4) && seg[1] == "sessions") {
        const auto &sid = seg[2];
        if (n == 3) {
            if (method != "GET") return method_not_allowed();
            return {200, Json(platform.stores().sessions.get(sid))};
        }
        if (seg[3] == "messages") {
            if (method != "POST") return method_not_allowed();
            const auto body = parse_body(raw_body);
            return {200, message_reply(platform.send(sid, string_field(body, "text")))};
        }
        if (seg[3] == "feedback") {
            if (method != "POST") return method_not_allowed();
            const auto body = parse_body(raw_body);
            auto score = body.find("score");
            if (score == body.end() || !score->is_number_integer()) {
                throw Error(ErrorCode::invalid_score, "score must be an integer from 1 to 5");
            }
            (void)platform.stores().sessions.get(sid);
            platform.record_feedback(
                {sid, string_field(body, "agent_id"), score->get<int>(), string_field(body, "comment", "")});
            return {204, nullptr};
        }
    }
    return {404, error_body("not_found", "no such endpoint")};
}

}  // namespace

ApiReply route_api(Platform &platform, std::string_view method, std::string_view target, std::string_view body) {
    try {
        return dispatch(platform, method, path_segments(target), body);
    } catch (const Error &e) {
        return {http_status_for(e.code()), error_body(to_string(e.code()), e.what())};
    } catch (const std::exception &e) {
        return {500, error_body("internal_error", e.what())};
    }
}

std::optional<std::string> ws_session_target(std::string_view target) {
    const auto seg = path_segments(target);
    if (seg.size() == 3 && seg[0] == "ws" && seg[1] == "sessions") return seg[2];
    return std::nullopt;
}

std::vector<Json> handle_ws_frame(Platform &platform, const std::string &session_id, std::string_view frame) {
    auto error_frame = [](std::string_view code, std::string_view message) {
        Json f = error_body(code, message);
        f["type"] = "error";
        return f;
    };
    auto parsed = Json::parse(frame, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object() || parsed.value("type", "") != "user_message" ||
        !parsed.contains("text") || !parsed["text"].is_string()) {
        return {error_frame("invalid_argument", "expected {\"type\":\"user_message\",\"text\":...}")};
    }
    try {
        const auto turn = platform.send(session_id, parsed["text"].get<std::string>());
        Json bot{{"type", "bot_message"}};
        const auto fields = message_reply(turn);
        for (const auto &[k, v] : fields.items()) bot[k] = v;
        std::vector<Json> out{std::move(bot)};
        if (turn.handover) out.push_back(Json{{"type", "handover"}, {"reason", turn.handover_reason.value_or("")}});
        return out;
    } catch (const Error &e) {
        return {error_frame(to_string(e.code()), e.what())};
    } catch (const std::exception &e) {
        return {error_frame("internal_error", e.what())};
    }
}

// ---------------------------------------------------------------------------

struct HttpServer::Impl {
    struct Connection {
        std::shared_ptr<tcp::socket> socket;
        std::thread thread;
        std::shared_ptr<std::atomic<bool>> done = std::make_shared<std::atomic<bool>>(false);
    };

    asio::io_context io;
    tcp::acceptor acceptor{io};
    std::mutex mutex;
    std::map<std::uint64_t, Connection> connections;
    std::uint64_t next_id = 0;

    // Joins threads of connections that already finished.
    void reap() {
        std::vector<std::thread> finished;
        {
            std::lock_guard lock(mutex);
            for (auto it = connections.begin(); it != connections.end();) {
                if (it->second.done->load()) {
                    finished.push_back(std::move(it->second.thread));
                    it = connections.erase(it);
                } else {
                    ++it;
                }
            }
        }
        for (auto &t : finished) t.join();
    }
};

HttpServer::HttpServer(Platform &platform, ServerOptions options)
    : platform_(platform), options_(std::move(options)), impl_(std::make_unique<Impl>()) {}

HttpServer::~HttpServer() { stop(); }

void HttpServer::start() {
    try {
        const tcp::endpoint endpoint(asio::ip::make_address(options_.address), options_.port);
        impl_->acceptor.open(endpoint.protocol());
        impl_->acceptor.set_option(asio::socket_base::reuse_address(true));
        impl_->acceptor.bind(endpoint);
        impl_->acceptor.listen();
        port_ = impl_->acceptor.local_endpoint().port();
    } catch (const boost::system::system_error &e) {
        boost::system::error_code ignored;
        impl_->acceptor.close(ignored);
        throw Error(ErrorCode::bind_error, "cannot bind " + options_.address + ":" + std::to_string(options_.port) +
                                               ": " + e.code().message());
    }
    acceptor_thread_ = std::thread([this] { accept_loop(); });
}

void HttpServer::accept_loop() {
    while (!stopping_) {
        auto socket = std::make_shared<tcp::socket>(impl_->io);
        boost::system::error_code ec;
        impl_->acceptor.accept(*socket, ec);
        if (stopping_) break;
        if (ec) continue;
        impl_->reap();

        std::lock_guard lock(impl_->mutex);
        const auto id = impl_->next_id++;
        auto &conn = impl_->connections[id];
        conn.socket = socket;
        conn.thread = std::thread([this, socket, done = conn.done] { serve_connection(socket, done); });
    }
}

void HttpServer::serve_connection(std::shared_ptr<tcp::socket> socket, std::shared_ptr<std::atomic<bool>> done) {
    try {
        beast::flat_buffer buffer;
        while (!stopping_) {
            http::request<http::string_body> req;
            boost::system::error_code ec;
            http::read(*socket, buffer, req, ec);
            if (ec) break;

            if (websocket::is_upgrade(req)) {
                const auto sid = ws_session_target(sv(req.target()));
                if (!sid || !platform_.stores().sessions.contains(*sid)) {
                    http::response<http::string_body> res{http::status::not_found, req.version()};
                    res.set(http::field::content_type, "application/json");
                    res.body() = error_body(to_string(ErrorCode::unknown_session), "unknown session").dump();
                    res.prepare_payload();
                    http::write(*socket, res, ec);
                    break;
                }
                websocket::stream<tcp::socket &> ws(*socket);
                ws.accept(req, ec);
                if (ec) break;
                ws.text(true);
                beast::flat_buffer frames;
                while (!stopping_) {
                    ws.read(frames, ec);
                    if (ec) break;
                    const auto text = beast::buffers_to_string(frames.data());
                    frames.consume(frames.size());
                    for (const auto &out : handle_ws_frame(platform_, *sid, text)) {
                        ws.write(asio::buffer(out.dump()), ec);
                        if (ec) break;
                    }
                    if (ec) break;
                }
                if (!stopping_) ws.close(websocket::close_code::normal, ec);
                break;
            }

            const auto reply = route_api(platform_, sv(req.method_string()), sv(req.target()), req.body());
            http::response<http::string_body> res;
            res.result(static_cast<unsigned>(reply.status));
            res.version(req.version());
            res.keep_alive(req.keep_alive());
            if (reply.status != 204) {
                res.set(http::field::content_type, "application/json");
                res.body() = reply.body.dump();
            }
            res.prepare_payload();
            http::write(*socket, res, ec);
            if (ec || !res.keep_alive()) break;
        }
    } catch (const std::exception &) {
        // Connection-level failure; the peer sees the socket close.
    }
    boost::system::error_code ignored;
    socket->shutdown(tcp::socket::shutdown_both, ignored);
    socket->close(ignored);
    done->store(true);
}

void HttpServer::stop() {
    if (stopping_.exchange(true)) return;
    if (acceptor_thread_.joinable()) {
        // Unblocks the pending accept() on Linux.
        ::shutdown(impl_->acceptor.native_handle(), SHUT_RDWR);
        acceptor_thread_.join();
    }
    boost::system::error_code ignored;
    impl_->acceptor.close(ignored);

    std::map<std::uint64_t, Impl::Connection> connections;
    {
        std::lock_guard lock(impl_->mutex);
        for (auto &[id, conn] : impl_->connections) ::shutdown(conn.socket->native_handle(), SHUT_RDWR);
        connections.swap(impl_->connections);
    }
    for (auto &[id, conn] : connections) {
        if (conn.thread.joinable()) conn.thread.join();
    }
    if (options_.data_dir && port_ != 0) platform_.snapshot(*options_.data_dir);
}

}  // namespace lpar::gateway
