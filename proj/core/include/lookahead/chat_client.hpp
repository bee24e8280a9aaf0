#pragma once

#include <chrono>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lookahead {

/// Could not talk to the endpoint at all (DNS, connect, timeout).
class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The endpoint answered, but not with a usable completion (non-200, malformed body).
class EndpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr const char* kDefaultCredentialEnv = "LOOKAHEAD_API_KEY";

/// Connection settings for a remote agent. Holds the env-var name of the credential,
/// never the credential itself.
struct AgentEndpointConfig {
    std::string base_url;  ///< e.g. "https://api.example.com/v1"; "/chat/completions" is appended
    std::string model_name;
    std::string credential_env = kDefaultCredentialEnv;
    double timeout_seconds = 60.0;
    int max_retries = 2;
    double temperature = 0.0;
    std::chrono::milliseconds retry_backoff{500};

    /// Throws std::invalid_argument on an empty/unsupported base_url or non-positive timeout.
    void validate() const;
};

/// JSON body `{"model", "messages": [{"role": "user", "content"}], "temperature"}`.
std::string chat_request_body(std::string_view model, std::string_view prompt, double temperature);

/// `choices[0].message.content` of a chat-completion response. Throws EndpointError.
std::string extract_completion_text(std::string_view response_body);

/// Stateless client; each call opens its own connection, so one instance may be shared by threads.
class ChatCompletionClient {
public:
    explicit ChatCompletionClient(AgentEndpointConfig config);

    [[nodiscard]] const AgentEndpointConfig& config() const noexcept { return config_; }

    /// One POST to `{base_url}/chat/completions`; no retries here.
    [[nodiscard]] std::string complete(std::string_view prompt) const;

private:
    AgentEndpointConfig config_;
    std::string scheme_host_port_;
    std::string path_;
};

}  // namespace lookahead
