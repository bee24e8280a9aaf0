#include "lookahead/engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

namespace lookahead {

void PeriodSpec::validate() const {
    if (label.empty()) {
        throw std::invalid_argument("period label must not be empty");
    }
    if (!(start < end)) {
        throw std::invalid_argument(
            fmt::format("period {}: start {} must precede end {}", label, start.iso(), end.iso()));
    }
}

namespace {

constexpr std::array<std::pair<RebalanceFrequency, std::string_view>, 3> kFrequencies{{
    {RebalanceFrequency::once_at_start, "once"},
    {RebalanceFrequency::monthly, "monthly"},
    {RebalanceFrequency::daily, "daily"},
}};

}  // namespace

std::string_view frequency_label(RebalanceFrequency f) noexcept {
    for (const auto& [value, label] : kFrequencies) {
        if (value == f) {
            return label;
        }
    }
    return "monthly";
}

std::optional<RebalanceFrequency> parse_frequency(std::string_view label) noexcept {
    for (const auto& [value, name] : kFrequencies) {
        if (name == label) {
            return value;
        }
    }
    return std::nullopt;
}

std::pair<std::size_t, std::size_t> resolve_period(const TradingCalendar& calendar, const PeriodSpec& period) {
    period.validate();
    const auto first = calendar.first_on_or_after(period.start);
    const auto last = calendar.last_on_or_before(period.end);
    if (!first || !last || *last < *first) {
        throw DataError(fmt::format("period {} ({} to {}) contains no trading days", period.label,
                                    period.start.iso(), period.end.iso()));
    }
    return {*first, *last};
}

std::vector<Date> rebalance_schedule(const TradingCalendar& calendar, const PeriodSpec& period,
                                     RebalanceFrequency frequency) {
    const auto [first, last] = resolve_period(calendar, period);
    const auto days = calendar.days();
    std::vector<Date> out;
    switch (frequency) {
        case RebalanceFrequency::once_at_start:
            out.push_back(days[first]);
            break;
        case RebalanceFrequency::monthly:
            for (std::size_t i = first; i <= last; ++i) {
                if (i == first || days[i].month_key() != days[i - 1].month_key()) {
                    out.push_back(days[i]);
                }
            }
            break;
        case RebalanceFrequency::daily:
            out.assign(days.begin() + static_cast<std::ptrdiff_t>(first),
                       days.begin() + static_cast<std::ptrdiff_t>(last) + 1);
            break;
    }
    return out;
}

DecisionContext::DecisionContext(const PitSlice& slice, Date as_of, const PortfolioSummary& state)
    : slice_(slice), as_of_(as_of), state_(state) {
    if (slice.as_of() != as_of) {
        throw std::logic_error(
            fmt::format("decision on {} must see a slice as of that day, got {}", as_of.iso(), slice.as_of().iso()));
    }
}

StrategySource::StrategySource(StrategyKind kind, StrategyConfig config)
    : kind_(kind), config_(config), rng_(config.noise_seed) {
    config_.validate();
}

Decision StrategySource::decide(const DecisionContext& context) {
    const auto& universe = context.universe();
    switch (kind_) {
        case StrategyKind::buy_hold:
            return {buy_and_hold_weights(universe)};
        case StrategyKind::equal_weight:
            return {equal_weights(universe)};
        case StrategyKind::momentum:
            return {momentum_weights(context.slice(), universe, config_)};
        case StrategyKind::mean_reversion:
            return {mean_reversion_weights(context.slice(), universe, config_)};
        case StrategyKind::ma_crossover:
            return {ma_crossover_weights(context.slice(), universe, config_)};
        case StrategyKind::random_noise:
            return {random_noise_weights(rng_, universe)};
    }
    throw std::logic_error("unhandled strategy kind");
}

std::size_t StrategySource::warmup_days() const {
    return required_warmup_days(kind_, config_);
}

std::optional<std::uint64_t> StrategySource::seed() const {
    if (kind_ == StrategyKind::random_noise) {
        return config_.noise_seed;
    }
    return std::nullopt;
}

AgentSource::AgentSource(std::unique_ptr<DecisionAgent> agent) : agent_(std::move(agent)) {
    if (!agent_) {
        throw std::invalid_argument("agent source needs an agent");
    }
}

Decision AgentSource::decide(const DecisionContext& context) {
    auto response = agent_->decide(context.slice(), context.state(), context.as_of());
    if (response.fallback_applied) {
        return {std::nullopt};
    }
    return {std::move(response.parsed_weights)};
}

RebalanceFrequency default_frequency(StrategyKind kind) noexcept {
    switch (kind) {
        case StrategyKind::buy_hold:
            return RebalanceFrequency::once_at_start;
        case StrategyKind::ma_crossover:
        case StrategyKind::random_noise:
            return RebalanceFrequency::daily;
        default:
            return RebalanceFrequency::monthly;
    }
}

PortfolioMode default_mode(StrategyKind kind) noexcept {
    return kind == StrategyKind::random_noise ? PortfolioMode::overlay : PortfolioMode::holding;
}

std::size_t required_warmup_days(StrategyKind kind, const StrategyConfig& config) noexcept {
    switch (kind) {
        case StrategyKind::momentum:
        case StrategyKind::mean_reversion:
            return config.momentum_lookback_days;
        case StrategyKind::ma_crossover:
            return config.ma_slow;
        default:
            return 0;
    }
}

namespace {

PriceMap closes_on(const PitSlice& slice, Date day) {
    PriceMap prices;
    for (const auto& ticker : slice.universe()) {
        const auto& bar = slice.bar_on_or_before(ticker, day);
        if (bar.date != day) {
            throw DataError(fmt::format("data gap: {} has no bar on trading day {}", ticker, day.iso()));
        }
        prices.emplace(ticker, bar.adjusted_close);
    }
    return prices;
}

void check_warmup(const TradingCalendar& calendar, std::size_t first, std::size_t required, const PeriodSpec& period,
                  const std::string& label) {
    if (first < required) {
        throw WarmupError(fmt::format("{} needs {} trading days of history before {} ({}), data has {}", label,
                                      required, calendar.days()[first].iso(), period.label, first));
    }
}

}  // namespace

BacktestResult run_backtest(const MarketData& data, const PeriodSpec& period, DecisionSource& source,
                            const BacktestOptions& options) {
    if (!(options.initial_capital > 0.0) || !std::isfinite(options.initial_capital)) {
        throw std::invalid_argument("initial capital must be positive");
    }
    const auto& calendar = data.calendar();
    const auto [first, last] = resolve_period(calendar, period);
    check_warmup(calendar, first, source.warmup_days(), period, options.label);

    const auto schedule = rebalance_schedule(calendar, period, options.frequency);
    const auto days = calendar.days();

    BacktestResult result;
    result.label = options.label;
    result.period = PeriodSpec{period.label, days[first], days[last]};
    result.seed = source.seed();

    auto schedule_it = schedule.begin();
    auto scheduled_today = [&](Date day) {
        if (schedule_it != schedule.end() && *schedule_it == day) {
            ++schedule_it;
            return true;
        }
        return false;
    };

    if (options.mode == PortfolioMode::holding) {
        Portfolio book(options.initial_capital);
        for (std::size_t i = first; i <= last; ++i) {
            const Date day = days[i];
            const PitSlice slice = pit_slice(data, day);
            const PriceMap prices = closes_on(slice, day);
            if (scheduled_today(day)) {
                const PortfolioSummary state{mark_to_market(book, prices), implied_weights(book, prices).weights};
                auto decision = source.decide(DecisionContext(slice, day, state));
                if (decision.weights) {
                    if (!is_long_only(*decision.weights)) {
                        throw std::invalid_argument(
                            fmt::format("{}: holding-mode weights on {} are not long-only", options.label, day.iso()));
                    }
                    auto outcome = rebalance_to_weights(book, *decision.weights, prices, day);
                    book = std::move(outcome.portfolio);
                    result.trades.insert(result.trades.end(), outcome.trades.begin(), outcome.trades.end());
                } else {
                    result.fallback_dates.push_back(day);
                    spdlog::warn("{} {}: decision fell back to holding on {}", options.label, period.label,
                                 day.iso());
                }
            }
            book.record_nav(day, mark_to_market(book, prices));
        }
        result.nav.assign(book.nav_history().begin(), book.nav_history().end());
    } else {
        double nav = options.initial_capital;
        TargetWeights current;
        result.nav.push_back(DatedValue{days[first], nav});
        for (std::size_t i = first; i <= last; ++i) {
            const Date day = days[i];
            if (scheduled_today(day) && i < last) {
                const PitSlice slice = pit_slice(data, day);
                const PortfolioSummary state{nav, current.weights};
                auto decision = source.decide(DecisionContext(slice, day, state));
                if (decision.weights) {
                    if (!is_overlay_normalized(*decision.weights)) {
                        throw std::invalid_argument(
                            fmt::format("{}: overlay weights on {} are not gross-normalized", options.label,
                                        day.iso()));
                    }
                    current = std::move(*decision.weights);
                } else {
                    result.fallback_dates.push_back(day);
                }
            }
            if (i == last) {
                break;
            }
            const Date next = days[i + 1];
            const PitSlice next_slice = pit_slice(data, next);
            const PriceMap today = closes_on(next_slice, day);
            const PriceMap tomorrow = closes_on(next_slice, next);
            PriceMap returns;
            for (const auto& [ticker, close] : tomorrow) {
                returns.emplace(ticker, close / today.at(ticker) - 1.0);
            }
            nav = apply_overlay_return(nav, current, returns);
            result.nav.push_back(DatedValue{next, nav});
        }
    }
    result.total_return_pct = period_return_pct(result.nav);
    return result;
}

namespace {

std::string json_string(std::string_view s) {
    return nlohmann::json(std::string(s)).dump();
}

std::string json_number(double v) {
    if (!std::isfinite(v)) {
        return "null";
    }
    return fmt::format("{}", v);
}

}  // namespace

std::string backtest_result_json(const BacktestResult& result) {
    std::string out;
    out += "{\n";
    out += fmt::format("  \"label\": {},\n", json_string(result.label));
    out += fmt::format("  \"period\": {{\"start\": \"{}\", \"end\": \"{}\"}},\n", result.period.start.iso(),
                       result.period.end.iso());
    out += fmt::format("  \"total_return_pct\": {},\n", json_number(result.total_return_pct));
    out += "  \"nav\": [";
    for (std::size_t i = 0; i < result.nav.size(); ++i) {
        out += fmt::format("{}\n    {{\"date\": \"{}\", \"value\": {:.6f}}}", i ? "," : "",
                           result.nav[i].date.iso(), result.nav[i].value);
    }
    out += result.nav.empty() ? "],\n" : "\n  ],\n";
    out += "  \"trades\": [";
    for (std::size_t i = 0; i < result.trades.size(); ++i) {
        const auto& t = result.trades[i];
        out += fmt::format(
            "{}\n    {{\"date\": \"{}\", \"ticker\": {}, \"share_delta\": {}, \"price\": {}, \"cash_delta\": {}}}",
            i ? "," : "", t.date.iso(), json_string(t.ticker), json_number(t.share_delta), json_number(t.price),
            json_number(t.cash_delta));
    }
    out += result.trades.empty() ? "],\n" : "\n  ],\n";
    out += fmt::format("  \"seed\": {}\n", result.seed ? fmt::format("{}", *result.seed) : "null");
    out += "}\n";
    return out;
}

}  // namespace lookahead
