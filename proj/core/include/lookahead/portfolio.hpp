#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lookahead/date.hpp"

namespace lookahead {

using PriceMap = std::map<std::string, double, std::less<>>;
using WeightMap = std::map<std::string, double, std::less<>>;

struct Position {
    std::string ticker;
    double shares = 0.0;  ///< Fractional; negative means short.

    bool operator==(const Position&) const = default;
};

/// Desired allocation as signed fractions of NAV. Tickers not listed have weight 0;
/// in holding mode the unallocated remainder is cash.
struct TargetWeights {
    WeightMap weights;

    [[nodiscard]] double of(std::string_view ticker) const noexcept;
    [[nodiscard]] double net() const noexcept;
    [[nodiscard]] double gross() const noexcept;
    [[nodiscard]] bool all_zero() const noexcept;

    bool operator==(const TargetWeights&) const = default;
};

inline constexpr double kWeightTolerance = 1e-12;

/// All weights finite and >= 0, and their sum <= 1 + tolerance.
[[nodiscard]] bool is_long_only(const TargetWeights& targets, double tolerance = kWeightTolerance) noexcept;
/// All weights finite, and gross exposure is 1 within tolerance (or every weight is zero).
[[nodiscard]] bool is_overlay_normalized(const TargetWeights& targets, double tolerance = kWeightTolerance) noexcept;

struct Trade {
    Date date;
    std::string ticker;
    double share_delta = 0.0;
    double price = 0.0;
    double cash_delta = 0.0;  ///< -share_delta * price

    bool operator==(const Trade&) const = default;
};

/// Cash plus fractional share positions. Single owner, no sharing across threads.
class Portfolio {
public:
    explicit Portfolio(double cash = 0.0);

    [[nodiscard]] double cash() const noexcept { return cash_; }
    [[nodiscard]] const std::map<std::string, double, std::less<>>& shares() const noexcept { return shares_; }
    [[nodiscard]] double shares_of(std::string_view ticker) const noexcept;
    [[nodiscard]] std::vector<Position> positions() const;
    [[nodiscard]] std::span<const DatedValue> nav_history() const noexcept { return nav_history_; }

    void set_cash(double cash);
    /// Sets the share count; zero removes the position. Throws on non-finite input.
    void set_shares(std::string_view ticker, double shares);
    /// Appends a NAV point. Dates must be strictly ascending.
    void record_nav(Date date, double nav);

private:
    double cash_ = 0.0;
    std::map<std::string, double, std::less<>> shares_;
    std::vector<DatedValue> nav_history_;
};

/// cash + sum(shares * price). Throws std::invalid_argument if a held ticker has no price.
double mark_to_market(const Portfolio& portfolio, const PriceMap& prices);

/// Weight of each held ticker at the given prices (shares * price / NAV).
TargetWeights implied_weights(const Portfolio& portfolio, const PriceMap& prices);

struct RebalanceOutcome {
    Portfolio portfolio;
    std::vector<Trade> trades;
};

/// Frictionless rebalance at `prices`: shares' = weight * NAV / price, cash' = NAV - sum(shares' * price).
/// Held tickers absent from `targets` are closed out.
RebalanceOutcome rebalance_to_weights(const Portfolio& portfolio, const TargetWeights& targets,
                                      const PriceMap& prices, Date date);

/// nav * (1 + sum(weight * return)).
double apply_overlay_return(double nav, const TargetWeights& weights, const PriceMap& returns);

/// (last / first - 1) * 100 over a NAV path. Throws if the path is empty or starts at zero.
double period_return_pct(std::span<const DatedValue> nav_history);

/// `date,ticker,share_delta,price,cash_delta` CSV.
void write_trade_log_csv(std::ostream& out, std::span<const Trade> trades);

}  // namespace lookahead
