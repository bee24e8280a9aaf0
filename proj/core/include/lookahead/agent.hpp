#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lookahead/chat_client.hpp"
#include "lookahead/date.hpp"
#include "lookahead/marketdata.hpp"
#include "lookahead/portfolio.hpp"

namespace lookahead {

/// No `TICKER: number` line for any universe ticker.
class WeightParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Every attempt to reach the agent failed at the transport level. Not recoverable by fallback.
class AgentUnavailableError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// What the engine tells an agent about the book at decision time.
struct PortfolioSummary {
    double nav = 0.0;
    WeightMap weights;
};

struct TickerHistory {
    std::string ticker;
    std::vector<PriceBar> closes;  ///< oldest first, all dated <= as_of
};

struct AgentDecisionRequest {
    Date as_of;
    std::vector<std::string> universe;  ///< ascending symbol order
    std::size_t history_window_days = 63;
    std::vector<TickerHistory> history;  ///< one entry per universe ticker, same order
    WeightMap current_weights;
    double current_nav = 0.0;
};

struct AgentDecisionResponse {
    std::string raw_text;
    TargetWeights parsed_weights;
    int retries_used = 0;
    bool fallback_applied = false;
};

/// Assembles the request from a slice. Every embedded bar comes from the slice, so none is after as_of.
AgentDecisionRequest make_decision_request(const PitSlice& slice, const PortfolioSummary& state,
                                           std::size_t history_window_days);

/// Deterministic prompt text for a request.
std::string build_prompt(const AgentDecisionRequest& request);

/// Last `TICKER: number` per universe ticker, case-insensitive; missing tickers get 0.
/// Throws WeightParseError when no universe ticker line is found.
WeightMap parse_weights(std::string_view raw_text, std::span<const std::string> universe);

/// Long-only protocol: clamp negatives to 0, scale down if the sum exceeds 1, keep the rest as cash.
/// Throws std::invalid_argument on a non-finite value.
TargetWeights normalize_weights(const WeightMap& raw);

/// Anything that maps (slice, book, date) to target weights.
class DecisionAgent {
public:
    virtual ~DecisionAgent() = default;

    /// Requires slice.as_of() == as_of.
    virtual AgentDecisionResponse decide(const PitSlice& slice, const PortfolioSummary& state, Date as_of) = 0;
};

/// Same weights at every rebalance.
class ConstantAgent final : public DecisionAgent {
public:
    explicit ConstantAgent(WeightMap weights);

    AgentDecisionResponse decide(const PitSlice& slice, const PortfolioSummary& state, Date as_of) override;

private:
    TargetWeights weights_;
};

/// Replays a fixed date -> weights schedule. A date with no entry holds the previous book.
class ScheduleAgent final : public DecisionAgent {
public:
    explicit ScheduleAgent(std::map<Date, WeightMap> schedule);

    AgentDecisionResponse decide(const PitSlice& slice, const PortfolioSummary& state, Date as_of) override;

private:
    std::map<Date, WeightMap> schedule_;
};

struct RetryPolicy {
    int max_retries = 2;
    std::chrono::milliseconds backoff{500};  ///< doubled after each failed attempt
};

/// Base for agents that answer a prompt with free text. Handles retries, parsing and fallback:
/// a response or parse failure on every attempt holds the previous book; transport failure on
/// every attempt raises AgentUnavailableError.
class TextResponseAgent : public DecisionAgent {
public:
    TextResponseAgent(std::size_t history_window_days, RetryPolicy retry);

    AgentDecisionResponse decide(const PitSlice& slice, const PortfolioSummary& state, Date as_of) final;

protected:
    /// Produces the raw reply. May throw TransportError or EndpointError.
    virtual std::string respond(const std::string& prompt, Date as_of) = 0;

private:
    std::size_t history_window_days_;
    RetryPolicy retry_;
};

/// Reads replies from `<dir>/<YYYY-MM-DD>.txt` keyed by decision date, without any network.
/// A missing file behaves like an endpoint error.
class FixtureReplayAgent final : public TextResponseAgent {
public:
    FixtureReplayAgent(std::filesystem::path fixture_dir, std::size_t history_window_days = 63,
                       RetryPolicy retry = {0, std::chrono::milliseconds{0}});

protected:
    std::string respond(const std::string& prompt, Date as_of) override;

private:
    std::filesystem::path dir_;
};

/// Sends the prompt to a chat-completion endpoint.
class RemoteAgent final : public TextResponseAgent {
public:
    RemoteAgent(AgentEndpointConfig endpoint, std::size_t history_window_days = 63);

protected:
    std::string respond(const std::string& prompt, Date as_of) override;

private:
    ChatCompletionClient client_;
};

}  // namespace lookahead
