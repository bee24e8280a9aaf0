#include "lookahead/agent.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace lookahead {

AgentDecisionRequest make_decision_request(const PitSlice& slice, const PortfolioSummary& state,
                                           std::size_t history_window_days) {
    AgentDecisionRequest request;
    request.as_of = slice.as_of();
    request.universe = slice.universe();
    request.history_window_days = history_window_days;
    request.current_nav = state.nav;
    for (const auto& ticker : request.universe) {
        const auto bars = slice.last_bars(ticker, history_window_days);
        request.history.push_back(TickerHistory{ticker, {bars.begin(), bars.end()}});
        request.current_weights[ticker] = 0.0;
    }
    for (const auto& [ticker, w] : state.weights) {
        request.current_weights[ticker] = w;
    }
    return request;
}

std::string build_prompt(const AgentDecisionRequest& request) {
    std::string out;
    out += "You are the portfolio manager of a long-only equity fund trading the stocks listed below.\n";
    out += fmt::format("Decision date: {}\n", request.as_of.iso());
    out += "Only the data shown here is available. Nothing after the decision date is known.\n\n";

    out += "Universe: ";
    for (std::size_t i = 0; i < request.universe.size(); ++i) {
        out += (i ? ", " : "") + request.universe[i];
    }
    out += fmt::format("\nCurrent NAV: {:.2f}\nCurrent weights:\n", request.current_nav);
    for (const auto& [ticker, w] : request.current_weights) {
        out += fmt::format("{}: {:.6f}\n", ticker, w);
    }

    out += fmt::format("\nAdjusted close history (oldest first, up to {} trading days):\n",
                       request.history_window_days);
    for (const auto& h : request.history) {
        out += fmt::format("[{}]\n", h.ticker);
        for (const auto& bar : h.closes) {
            out += fmt::format("{} {}\n", bar.date.iso(), format_decimal(bar.adjusted_close));
        }
    }

    out += "\nChoose target portfolio weights to hold until the next monthly rebalance.\n";
    out += "Reply with exactly one line per ticker in the form\n";
    out += "TICKER: weight\n";
    out += "where each weight is a number between 0 and 1. Weights must sum to at most 1; any remainder is "
           "held as cash.\n";
    return out;
}

namespace {

std::string upper(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

}  // namespace

WeightMap parse_weights(std::string_view raw_text, std::span<const std::string> universe) {
    static const std::regex kLine(
        R"(([A-Za-z][A-Za-z0-9.\-]*)\**\s*:\s*\**\s*([-+]?(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)(?:[eE][-+]?[0-9]+)?))");

    std::map<std::string, std::string, std::less<>> by_upper;
    for (const auto& t : universe) {
        by_upper.emplace(upper(t), t);
    }

    WeightMap out;
    for (const auto& t : universe) {
        out[t] = 0.0;
    }
    bool found = false;
    const std::string text(raw_text);
    for (auto it = std::sregex_iterator(text.begin(), text.end(), kLine); it != std::sregex_iterator(); ++it) {
        const auto& m = *it;
        // Reject matches glued to a preceding identifier character.
        if (m.position(1) > 0) {
            const char before = text[static_cast<std::size_t>(m.position(1)) - 1];
            if (std::isalnum(static_cast<unsigned char>(before)) || before == '.') {
                continue;
            }
        }
        auto ticker = by_upper.find(upper(m.str(1)));
        if (ticker == by_upper.end()) {
            continue;
        }
        const std::string number = m.str(2);
        const char* first = number.data() + (number.front() == '+' ? 1 : 0);
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(first, number.data() + number.size(), value);
        if (ec != std::errc{}) {
            continue;
        }
        out[ticker->second] = value;
        found = true;
    }
    if (!found) {
        throw WeightParseError("no `TICKER: weight` line for any universe ticker");
    }
    return out;
}

TargetWeights normalize_weights(const WeightMap& raw) {
    TargetWeights out;
    double sum = 0.0;
    for (const auto& [ticker, w] : raw) {
        if (!std::isfinite(w)) {
            throw std::invalid_argument(fmt::format("non-finite weight for {}", ticker));
        }
        const double clamped = std::max(w, 0.0);
        out.weights[ticker] = clamped;
        sum += clamped;
    }
    if (sum > 1.0) {
        for (auto& [ticker, w] : out.weights) {
            w /= sum;
        }
    }
    return out;
}

namespace {

void require_matching_date(const PitSlice& slice, Date as_of) {
    if (slice.as_of() != as_of) {
        throw std::logic_error(fmt::format("agent decision for {} was handed a slice as of {}", as_of.iso(),
                                           slice.as_of().iso()));
    }
}

TargetWeights hold_weights(const PortfolioSummary& state) {
    TargetWeights out;
    out.weights = state.weights;
    return out;
}

}  // namespace

ConstantAgent::ConstantAgent(WeightMap weights) : weights_(normalize_weights(weights)) {}

AgentDecisionResponse ConstantAgent::decide(const PitSlice& slice, const PortfolioSummary&, Date as_of) {
    require_matching_date(slice, as_of);
    return AgentDecisionResponse{{}, weights_, 0, false};
}

ScheduleAgent::ScheduleAgent(std::map<Date, WeightMap> schedule) : schedule_(std::move(schedule)) {}

AgentDecisionResponse ScheduleAgent::decide(const PitSlice& slice, const PortfolioSummary& state, Date as_of) {
    require_matching_date(slice, as_of);
    auto it = schedule_.find(as_of);
    if (it == schedule_.end()) {
        return AgentDecisionResponse{{}, hold_weights(state), 0, true};
    }
    return AgentDecisionResponse{{}, normalize_weights(it->second), 0, false};
}

TextResponseAgent::TextResponseAgent(std::size_t history_window_days, RetryPolicy retry)
    : history_window_days_(history_window_days), retry_(retry) {
    if (retry_.max_retries < 0) {
        throw std::invalid_argument("max_retries must be >= 0");
    }
}

AgentDecisionResponse TextResponseAgent::decide(const PitSlice& slice, const PortfolioSummary& state, Date as_of) {
    require_matching_date(slice, as_of);
    const std::string prompt = build_prompt(make_decision_request(slice, state, history_window_days_));
    const auto universe = slice.universe();

    const int attempts = 1 + retry_.max_retries;
    int transport_failures = 0;
    std::string last_text;
    std::string last_error;
    auto backoff = retry_.backoff;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        try {
            last_text = respond(prompt, as_of);
            auto parsed = normalize_weights(parse_weights(last_text, universe));
            return AgentDecisionResponse{last_text, std::move(parsed), attempt, false};
        } catch (const TransportError& e) {
            ++transport_failures;
            last_error = e.what();
        } catch (const EndpointError& e) {
            last_error = e.what();
        } catch (const WeightParseError& e) {
            last_error = e.what();
        } catch (const std::invalid_argument& e) {
            last_error = e.what();
        }
        spdlog::warn("agent decision {} attempt {}/{} failed: {}", as_of.iso(), attempt + 1, attempts, last_error);
        if (attempt + 1 < attempts && backoff.count() > 0) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
    }
    if (transport_failures == attempts) {
        throw AgentUnavailableError(
            fmt::format("agent unreachable on {} after {} attempt(s): {}", as_of.iso(), attempts, last_error));
    }
    spdlog::warn("agent decision {}: holding previous weights after {} attempt(s)", as_of.iso(), attempts);
    return AgentDecisionResponse{last_text, hold_weights(state), attempts - 1, true};
}

FixtureReplayAgent::FixtureReplayAgent(std::filesystem::path fixture_dir, std::size_t history_window_days,
                                       RetryPolicy retry)
    : TextResponseAgent(history_window_days, retry), dir_(std::move(fixture_dir)) {}

std::string FixtureReplayAgent::respond(const std::string&, Date as_of) {
    const auto path = dir_ / (as_of.iso() + ".txt");
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw EndpointError(fmt::format("no fixture for {} in '{}'", as_of.iso(), dir_.string()));
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

RemoteAgent::RemoteAgent(AgentEndpointConfig endpoint, std::size_t history_window_days)
    : TextResponseAgent(history_window_days, RetryPolicy{endpoint.max_retries, endpoint.retry_backoff}),
      client_(std::move(endpoint)) {}

std::string RemoteAgent::respond(const std::string& prompt, Date) {
    return client_.complete(prompt);
}

}  // namespace lookahead
