#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "lookahead/date.hpp"

namespace lookahead {

/// The `Decision date: YYYY-MM-DD` line of a prompt built by build_prompt.
std::optional<Date> extract_decision_date(std::string_view prompt);

/// Local chat-completion endpoint for offline runs. Answers POST `.../chat/completions` with the
/// verbatim contents of `<fixture_dir>/<decision date>.txt`, or 404 when no such file exists.
class MockChatServer {
public:
    /// Binds immediately; port 0 picks a free port. Serves on a background thread.
    explicit MockChatServer(std::filesystem::path fixture_dir, std::string host = "127.0.0.1", int port = 0);
    ~MockChatServer();

    MockChatServer(const MockChatServer&) = delete;
    MockChatServer& operator=(const MockChatServer&) = delete;

    [[nodiscard]] int port() const noexcept;
    /// `http://host:port/v1`
    [[nodiscard]] std::string base_url() const;
    [[nodiscard]] std::size_t request_count() const noexcept;
    [[nodiscard]] std::optional<std::string> last_authorization() const;

    void stop();
    /// Blocks until stop() is called from elsewhere.
    void wait();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace lookahead
