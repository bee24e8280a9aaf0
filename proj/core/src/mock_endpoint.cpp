#include "lookahead/mock_endpoint.hpp"

#include <atomic>
#include <fstream>
#include <mutex>
#include <regex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

namespace lookahead {

using nlohmann::json;

std::optional<Date> extract_decision_date(std::string_view prompt) {
    static const std::regex kDate(R"(Decision date: ([0-9]{4}-[0-9]{2}-[0-9]{2}))");
    const std::string text(prompt);
    std::smatch m;
    if (!std::regex_search(text, m, kDate)) {
        return std::nullopt;
    }
    return Date::try_parse(m.str(1));
}

struct MockChatServer::Impl {
    std::filesystem::path dir;
    std::string host;
    int port = 0;
    httplib::Server server;
    std::thread worker;
    std::atomic<std::size_t> requests{0};
    mutable std::mutex mutex;
    std::optional<std::string> authorization;

    void handle(const httplib::Request& req, httplib::Response& res) {
        ++requests;
        {
            std::lock_guard lock(mutex);
            if (req.has_header("Authorization")) {
                authorization = req.get_header_value("Authorization");
            } else {
                authorization.reset();
            }
        }
        const json body = json::parse(req.body, nullptr, false);
        std::string prompt;
        if (!body.is_discarded() && body.contains("messages") && body["messages"].is_array() &&
            !body["messages"].empty() && body["messages"][0].contains("content") &&
            body["messages"][0]["content"].is_string()) {
            prompt = body["messages"][0]["content"].get<std::string>();
        } else {
            res.status = 400;
            res.set_content(R"({"error":"expected a chat-completion body"})", "application/json");
            return;
        }
        const auto date = extract_decision_date(prompt);
        if (!date) {
            res.status = 400;
            res.set_content(R"({"error":"prompt has no decision date"})", "application/json");
            return;
        }
        std::ifstream in(dir / (date->iso() + ".txt"), std::ios::binary);
        if (!in) {
            res.status = 404;
            res.set_content(json{{"error", "no fixture for " + date->iso()}}.dump(), "application/json");
            return;
        }
        std::ostringstream text;
        text << in.rdbuf();
        json reply;
        reply["object"] = "chat.completion";
        reply["model"] = body.value("model", "");
        reply["choices"] = json::array(
            {json{{"index", 0}, {"message", {{"role", "assistant"}, {"content", text.str()}}}, {"finish_reason", "stop"}}});
        res.status = 200;
        res.set_content(reply.dump(), "application/json");
    }
};

MockChatServer::MockChatServer(std::filesystem::path fixture_dir, std::string host, int port)
    : impl_(std::make_unique<Impl>()) {
    impl_->dir = std::move(fixture_dir);
    impl_->host = std::move(host);
    impl_->server.Post(R"((.*)/chat/completions)",
                       [impl = impl_.get()](const httplib::Request& req, httplib::Response& res) {
                           impl->handle(req, res);
                       });
    if (port == 0) {
        impl_->port = impl_->server.bind_to_any_port(impl_->host);
    } else {
        impl_->port = impl_->server.bind_to_port(impl_->host, port) ? port : -1;
    }
    if (impl_->port <= 0) {
        throw std::runtime_error(fmt::format("mock endpoint could not bind {}:{}", impl_->host, port));
    }
    impl_->worker = std::thread([impl = impl_.get()] { impl->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

MockChatServer::~MockChatServer() {
    stop();
}

int MockChatServer::port() const noexcept {
    return impl_->port;
}

std::string MockChatServer::base_url() const {
    return fmt::format("http://{}:{}/v1", impl_->host, impl_->port);
}

std::size_t MockChatServer::request_count() const noexcept {
    return impl_->requests.load();
}

std::optional<std::string> MockChatServer::last_authorization() const {
    std::lock_guard lock(impl_->mutex);
    return impl_->authorization;
}

void MockChatServer::stop() {
    impl_->server.stop();
    if (impl_->worker.joinable()) {
        impl_->worker.join();
    }
}

void MockChatServer::wait() {
    if (impl_->worker.joinable()) {
        impl_->worker.join();
    }
}

}  // namespace lookahead
