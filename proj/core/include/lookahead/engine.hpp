#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lookahead/agent.hpp"
#include "lookahead/marketdata.hpp"
#include "lookahead/portfolio.hpp"
#include "lookahead/strategies.hpp"

namespace lookahead {

/// Not enough trading days before the period start for the decision source's lookback.
class WarmupError : public DataError {
public:
    using DataError::DataError;
};

struct PeriodSpec {
    std::string label;
    Date start;
    Date end;

    /// Throws std::invalid_argument unless start < end and the label is non-empty.
    void validate() const;
};

enum class RebalanceFrequency { once_at_start, monthly, daily };

enum class PortfolioMode {
    holding,  ///< shares held between rebalances
    overlay,  ///< weights multiply next-day returns; no shares held
};

[[nodiscard]] std::string_view frequency_label(RebalanceFrequency f) noexcept;
[[nodiscard]] std::optional<RebalanceFrequency> parse_frequency(std::string_view label) noexcept;

/// Calendar indices [first, last] of the period, snapped inward to trading days.
/// Throws DataError when no trading day falls inside the period.
std::pair<std::size_t, std::size_t> resolve_period(const TradingCalendar& calendar, const PeriodSpec& period);

/// Decision dates: the first trading day; the first trading day of every calendar month; or every trading day.
std::vector<Date> rebalance_schedule(const TradingCalendar& calendar, const PeriodSpec& period,
                                     RebalanceFrequency frequency);

/// Inputs the engine hands to a decision source. The slice is always as of `as_of`.
class DecisionContext {
public:
    /// Throws std::logic_error if slice.as_of() != as_of.
    DecisionContext(const PitSlice& slice, Date as_of, const PortfolioSummary& state);

    [[nodiscard]] const PitSlice& slice() const noexcept { return slice_; }
    [[nodiscard]] Date as_of() const noexcept { return as_of_; }
    [[nodiscard]] const PortfolioSummary& state() const noexcept { return state_; }
    [[nodiscard]] const std::vector<std::string>& universe() const noexcept { return slice_.universe(); }

private:
    const PitSlice& slice_;
    Date as_of_;
    const PortfolioSummary& state_;
};

struct Decision {
    /// nullopt keeps the current book untouched (agent fallback).
    std::optional<TargetWeights> weights;
};

class DecisionSource {
public:
    virtual ~DecisionSource() = default;

    virtual Decision decide(const DecisionContext& context) = 0;
    /// Trading days of history required strictly before the first decision date.
    [[nodiscard]] virtual std::size_t warmup_days() const { return 0; }
    [[nodiscard]] virtual std::optional<std::uint64_t> seed() const { return std::nullopt; }
};

/// One of the six baselines behind the DecisionSource interface.
class StrategySource final : public DecisionSource {
public:
    StrategySource(StrategyKind kind, StrategyConfig config);

    Decision decide(const DecisionContext& context) override;
    [[nodiscard]] std::size_t warmup_days() const override;
    [[nodiscard]] std::optional<std::uint64_t> seed() const override;

    [[nodiscard]] StrategyKind kind() const noexcept { return kind_; }

private:
    StrategyKind kind_;
    StrategyConfig config_;
    NoiseRng rng_;
};

/// Wraps a DecisionAgent; fallback responses become "hold".
class AgentSource final : public DecisionSource {
public:
    explicit AgentSource(std::unique_ptr<DecisionAgent> agent);

    Decision decide(const DecisionContext& context) override;

private:
    std::unique_ptr<DecisionAgent> agent_;
};

/// Rebalance frequency each baseline uses.
[[nodiscard]] RebalanceFrequency default_frequency(StrategyKind kind) noexcept;
[[nodiscard]] PortfolioMode default_mode(StrategyKind kind) noexcept;
/// Trading days of history the baseline needs before its first decision.
[[nodiscard]] std::size_t required_warmup_days(StrategyKind kind, const StrategyConfig& config) noexcept;

struct BacktestOptions {
    std::string label;
    RebalanceFrequency frequency = RebalanceFrequency::monthly;
    PortfolioMode mode = PortfolioMode::holding;
    double initial_capital = 100000.0;
};

struct BacktestResult {
    std::string label;
    PeriodSpec period;  ///< start/end are the trading days actually simulated
    std::vector<DatedValue> nav;
    std::vector<Trade> trades;
    double total_return_pct = 0.0;
    std::optional<std::uint64_t> seed;
    std::vector<Date> fallback_dates;  ///< decision dates where the agent's book was held
};

/// Simulates one period. NAV is recorded at every trading-day close.
/// Holding mode executes at the decision day's close; overlay mode applies the weights chosen
/// at day d's close to the d -> d+1 returns.
BacktestResult run_backtest(const MarketData& data, const PeriodSpec& period, DecisionSource& source,
                            const BacktestOptions& options);

/// `{label, period: {start, end}, total_return_pct, nav: [{date, value}], trades: [...], seed}`;
/// NAV values with 6 decimal places.
std::string backtest_result_json(const BacktestResult& result);

}  // namespace lookahead
