#include "lookahead/chat_client.hpp"

#include <cmath>
#include <cstdlib>
#include <regex>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

namespace lookahead {

using nlohmann::json;

void AgentEndpointConfig::validate() const {
    static const std::regex kUrl(R"(^https?://[^/\s]+(/\S*)?$)");
    if (!std::regex_match(base_url, kUrl)) {
        throw std::invalid_argument(fmt::format("endpoint base_url '{}' must be an http(s) URL", base_url));
    }
    if (!(timeout_seconds > 0.0) || !std::isfinite(timeout_seconds)) {
        throw std::invalid_argument("endpoint timeout must be positive");
    }
    if (max_retries < 0) {
        throw std::invalid_argument("endpoint max_retries must be >= 0");
    }
    if (!std::isfinite(temperature) || temperature < 0.0) {
        throw std::invalid_argument("endpoint temperature must be a finite non-negative number");
    }
}

std::string chat_request_body(std::string_view model, std::string_view prompt, double temperature) {
    json body;
    body["model"] = std::string(model);
    body["messages"] = json::array({json{{"role", "user"}, {"content", std::string(prompt)}}});
    body["temperature"] = temperature;
    return body.dump();
}

std::string extract_completion_text(std::string_view response_body) {
    const json doc = json::parse(response_body, nullptr, false);
    if (doc.is_discarded()) {
        throw EndpointError("chat-completion response is not valid JSON");
    }
    try {
        const auto& content = doc.at("choices").at(0).at("message").at("content");
        if (!content.is_string()) {
            throw EndpointError("chat-completion content is not a string");
        }
        return content.get<std::string>();
    } catch (const json::exception& e) {
        throw EndpointError(fmt::format("chat-completion response missing choices[0].message.content: {}", e.what()));
    }
}

ChatCompletionClient::ChatCompletionClient(AgentEndpointConfig config) : config_(std::move(config)) {
    config_.validate();
    static const std::regex kSplit(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    std::regex_match(config_.base_url, m, kSplit);
    scheme_host_port_ = m.str(1);
    std::string prefix = m.str(2);
    while (!prefix.empty() && prefix.back() == '/') {
        prefix.pop_back();
    }
    path_ = prefix + "/chat/completions";
}

std::string ChatCompletionClient::complete(std::string_view prompt) const {
    httplib::Client client(scheme_host_port_);
    const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
        std::chrono::duration<double>(config_.timeout_seconds));
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    httplib::Headers headers;
    if (const char* key = std::getenv(config_.credential_env.c_str()); key != nullptr && *key != '\0') {
        headers.emplace("Authorization", fmt::format("Bearer {}", key));
    }
    const auto body = chat_request_body(config_.model_name, prompt, config_.temperature);
    auto result = client.Post(path_, headers, body, "application/json");
    if (!result) {
        throw TransportError(fmt::format("POST {}{} failed: {}", scheme_host_port_, path_,
                                         httplib::to_string(result.error())));
    }
    if (result->status != 200) {
        throw EndpointError(fmt::format("POST {}{} returned HTTP {}", scheme_host_port_, path_, result->status));
    }
    return extract_completion_text(result->body);
}

}  // namespace lookahead
