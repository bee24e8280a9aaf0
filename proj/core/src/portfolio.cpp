#include "lookahead/portfolio.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "lookahead/marketdata.hpp"

namespace lookahead {

double TargetWeights::of(std::string_view ticker) const noexcept {
    auto it = weights.find(ticker);
    return it == weights.end() ? 0.0 : it->second;
}

double TargetWeights::net() const noexcept {
    double sum = 0.0;
    for (const auto& [t, w] : weights) {
        sum += w;
    }
    return sum;
}

double TargetWeights::gross() const noexcept {
    double sum = 0.0;
    for (const auto& [t, w] : weights) {
        sum += std::abs(w);
    }
    return sum;
}

bool TargetWeights::all_zero() const noexcept {
    for (const auto& [t, w] : weights) {
        if (w != 0.0) {
            return false;
        }
    }
    return true;
}

bool is_long_only(const TargetWeights& targets, double tolerance) noexcept {
    for (const auto& [t, w] : targets.weights) {
        if (!std::isfinite(w) || w < 0.0) {
            return false;
        }
    }
    return targets.net() <= 1.0 + tolerance;
}

bool is_overlay_normalized(const TargetWeights& targets, double tolerance) noexcept {
    for (const auto& [t, w] : targets.weights) {
        if (!std::isfinite(w)) {
            return false;
        }
    }
    return targets.all_zero() || std::abs(targets.gross() - 1.0) <= tolerance;
}

Portfolio::Portfolio(double cash) {
    set_cash(cash);
}

double Portfolio::shares_of(std::string_view ticker) const noexcept {
    auto it = shares_.find(ticker);
    return it == shares_.end() ? 0.0 : it->second;
}

std::vector<Position> Portfolio::positions() const {
    std::vector<Position> out;
    out.reserve(shares_.size());
    for (const auto& [ticker, n] : shares_) {
        out.push_back(Position{ticker, n});
    }
    return out;
}

void Portfolio::set_cash(double cash) {
    if (!std::isfinite(cash)) {
        throw std::invalid_argument("cash must be finite");
    }
    cash_ = cash;
}

void Portfolio::set_shares(std::string_view ticker, double shares) {
    if (!std::isfinite(shares)) {
        throw std::invalid_argument(fmt::format("{}: share count must be finite", ticker));
    }
    if (shares == 0.0) {
        if (auto it = shares_.find(ticker); it != shares_.end()) {
            shares_.erase(it);
        }
        return;
    }
    shares_.insert_or_assign(std::string(ticker), shares);
}

void Portfolio::record_nav(Date date, double nav) {
    if (!nav_history_.empty() && !(nav_history_.back().date < date)) {
        throw std::invalid_argument(fmt::format("NAV history must be strictly ascending; got {} after {}",
                                                date.iso(), nav_history_.back().date.iso()));
    }
    nav_history_.push_back(DatedValue{date, nav});
}

namespace {

double price_of(const PriceMap& prices, std::string_view ticker) {
    auto it = prices.find(ticker);
    if (it == prices.end()) {
        throw std::invalid_argument(fmt::format("missing price for {}", ticker));
    }
    return it->second;
}

}  // namespace

double mark_to_market(const Portfolio& portfolio, const PriceMap& prices) {
    double nav = portfolio.cash();
    for (const auto& [ticker, n] : portfolio.shares()) {
        nav += n * price_of(prices, ticker);
    }
    return nav;
}

TargetWeights implied_weights(const Portfolio& portfolio, const PriceMap& prices) {
    const double nav = mark_to_market(portfolio, prices);
    TargetWeights out;
    if (nav == 0.0) {
        return out;
    }
    for (const auto& [ticker, n] : portfolio.shares()) {
        out.weights[ticker] = n * price_of(prices, ticker) / nav;
    }
    return out;
}

RebalanceOutcome rebalance_to_weights(const Portfolio& portfolio, const TargetWeights& targets,
                                      const PriceMap& prices, Date date) {
    for (const auto& [ticker, w] : targets.weights) {
        if (!std::isfinite(w)) {
            throw std::invalid_argument(fmt::format("non-finite target weight for {}", ticker));
        }
    }
    const double nav = mark_to_market(portfolio, prices);

    std::map<std::string, double, std::less<>> next_shares;
    for (const auto& [ticker, w] : targets.weights) {
        if (w == 0.0) {
            continue;
        }
        const double price = price_of(prices, ticker);
        if (!(price > 0.0) || !std::isfinite(price)) {
            throw std::invalid_argument(fmt::format("invalid price {} for {}", price, ticker));
        }
        next_shares[ticker] = w * nav / price;
    }

    RebalanceOutcome out{Portfolio(0.0), {}};
    // Every ticker that is currently held or targeted.
    std::map<std::string, double, std::less<>> universe = next_shares;
    for (const auto& [ticker, n] : portfolio.shares()) {
        universe.try_emplace(ticker, 0.0);
    }

    double invested = 0.0;
    for (const auto& [ticker, unused] : universe) {
        const double before = portfolio.shares_of(ticker);
        auto it = next_shares.find(ticker);
        double after = it == next_shares.end() ? 0.0 : it->second;
        // Same allocation up to rounding: keep the existing share count.
        if (std::abs(after - before) <= kWeightTolerance * std::max(std::abs(after), std::abs(before))) {
            after = before;
        }
        const double price = price_of(prices, ticker);
        out.portfolio.set_shares(ticker, after);
        invested += after * price;
        const double delta = after - before;
        if (delta != 0.0) {
            out.trades.push_back(Trade{date, ticker, delta, price, -delta * price});
        }
    }
    out.portfolio.set_cash(nav - invested);
    for (const auto& point : portfolio.nav_history()) {
        out.portfolio.record_nav(point.date, point.value);
    }
    return out;
}

double apply_overlay_return(double nav, const TargetWeights& weights, const PriceMap& returns) {
    double portfolio_return = 0.0;
    for (const auto& [ticker, w] : weights.weights) {
        if (w == 0.0) {
            continue;
        }
        auto it = returns.find(ticker);
        if (it == returns.end()) {
            throw std::invalid_argument(fmt::format("missing daily return for {}", ticker));
        }
        portfolio_return += w * it->second;
    }
    return nav * (1.0 + portfolio_return);
}

double period_return_pct(std::span<const DatedValue> nav_history) {
    if (nav_history.empty()) {
        throw std::invalid_argument("period return of an empty NAV history");
    }
    if (nav_history.front().value == 0.0) {
        throw std::invalid_argument("period return undefined for a zero starting NAV");
    }
    return (nav_history.back().value / nav_history.front().value - 1.0) * 100.0;
}

void write_trade_log_csv(std::ostream& out, std::span<const Trade> trades) {
    out << "date,ticker,share_delta,price,cash_delta\n";
    for (const auto& t : trades) {
        out << t.date.iso() << ',' << t.ticker << ',' << format_decimal(t.share_delta) << ','
            << format_decimal(t.price) << ',' << format_decimal(t.cash_delta) << '\n';
    }
}

}  // namespace lookahead
