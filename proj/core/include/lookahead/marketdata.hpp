#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lookahead/date.hpp"

namespace lookahead {

/// Malformed or inconsistent market data. Carries the 1-based source line when known.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what, std::optional<std::size_t> line = std::nullopt);

    [[nodiscard]] std::optional<std::size_t> line() const noexcept { return line_; }

private:
    std::optional<std::size_t> line_;
};

/// Not enough bars on or before a requested date. Strategies branch on this.
class InsufficientHistory : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An access through a PitSlice asked for data dated after the slice's as-of date.
class FutureAccessError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct PriceBar {
    Date date;
    double adjusted_close = 0.0;

    bool operator==(const PriceBar&) const = default;
};

/// Date-ascending adjusted-close history for one ticker. Never empty.
class PriceSeries {
public:
    /// Requires bars strictly ascending by date and every close finite and > 0.
    PriceSeries(std::string ticker, std::vector<PriceBar> bars);

    [[nodiscard]] const std::string& ticker() const noexcept { return ticker_; }
    [[nodiscard]] std::span<const PriceBar> bars() const noexcept { return bars_; }
    [[nodiscard]] Date first_date() const noexcept { return bars_.front().date; }
    [[nodiscard]] Date last_date() const noexcept { return bars_.back().date; }

    bool operator==(const PriceSeries&) const = default;

private:
    std::string ticker_;
    std::vector<PriceBar> bars_;
};

using SeriesMap = std::map<std::string, PriceSeries, std::less<>>;

/// Reads the `ticker,date,adjusted_close` CSV. Rows for tickers outside
/// `expected_universe` are ignored; every expected ticker must be present.
SeriesMap load_price_csv(std::istream& source, const std::set<std::string>& expected_universe);
SeriesMap load_price_csv_file(const std::filesystem::path& path, const std::set<std::string>& expected_universe);

/// Writes the canonical CSV form: header, tickers ascending, dates ascending.
void write_price_csv(std::ostream& out, const SeriesMap& series);

/// Shortest round-trip decimal rendering in fixed notation (no exponent).
std::string format_decimal(double value);

class TradingCalendar {
public:
    TradingCalendar() = default;
    /// Requires strictly ascending days.
    explicit TradingCalendar(std::vector<Date> days);

    [[nodiscard]] std::span<const Date> days() const noexcept { return days_; }
    [[nodiscard]] std::size_t size() const noexcept { return days_.size(); }
    [[nodiscard]] bool empty() const noexcept { return days_.empty(); }
    [[nodiscard]] bool contains(Date d) const noexcept;

    /// Index of the first trading day >= d.
    [[nodiscard]] std::optional<std::size_t> first_on_or_after(Date d) const noexcept;
    /// Index of the last trading day <= d.
    [[nodiscard]] std::optional<std::size_t> last_on_or_before(Date d) const noexcept;
    /// Number of trading days strictly before d.
    [[nodiscard]] std::size_t count_before(Date d) const noexcept;

private:
    std::vector<Date> days_;
};

/// Sorted intersection of every series' dates. Throws DataError on empty input or empty intersection.
TradingCalendar build_calendar(const SeriesMap& series_map);

class PitSlice;

/// Immutable, cheaply copyable bundle of loaded series and their trading calendar.
/// Safe to share across threads.
class MarketData {
public:
    explicit MarketData(SeriesMap series);

    [[nodiscard]] const SeriesMap& series() const noexcept { return state_->series; }
    [[nodiscard]] const TradingCalendar& calendar() const noexcept { return state_->calendar; }
    /// Tickers in ascending symbol order.
    [[nodiscard]] const std::vector<std::string>& universe() const noexcept { return state_->universe; }

private:
    friend class PitSlice;
    friend PitSlice pit_slice(const MarketData& data, Date as_of);

    struct State {
        SeriesMap series;
        TradingCalendar calendar;
        std::vector<std::string> universe;
    };
    std::shared_ptr<const State> state_;
};

/// As-of view over MarketData. Every accessor is truncated to bars dated <= as_of;
/// asking for a later date raises FutureAccessError.
class PitSlice {
public:
    [[nodiscard]] Date as_of() const noexcept { return as_of_; }
    [[nodiscard]] const std::vector<std::string>& universe() const noexcept { return data_->universe; }
    [[nodiscard]] bool has_ticker(std::string_view ticker) const noexcept;

    /// Bars dated <= as_of. Throws std::out_of_range for an unknown ticker.
    [[nodiscard]] std::span<const PriceBar> bars(std::string_view ticker) const;
    /// Trading-calendar days <= as_of.
    [[nodiscard]] std::span<const Date> calendar_days() const noexcept;

    /// Last bar on or before `date`. FutureAccessError if date > as_of; InsufficientHistory if none exists.
    [[nodiscard]] const PriceBar& bar_on_or_before(std::string_view ticker, Date date) const;
    [[nodiscard]] double close_on_or_before(std::string_view ticker, Date date) const;
    /// Up to `count` most recent bars on or before as_of, oldest first.
    [[nodiscard]] std::span<const PriceBar> last_bars(std::string_view ticker, std::size_t count) const;

private:
    friend PitSlice pit_slice(const MarketData& data, Date as_of);

    PitSlice(std::shared_ptr<const MarketData::State> data, Date as_of);

    void check_not_future(Date date) const;

    std::shared_ptr<const MarketData::State> data_;
    Date as_of_;
    std::map<std::string, std::size_t, std::less<>> visible_;
    std::size_t visible_days_ = 0;
};

PitSlice pit_slice(const MarketData& data, Date as_of);

/// close(end) / close(start) - 1 using last-bar-on-or-before lookups.
/// InsufficientHistory when no bar exists on or before `start`.
double total_return(const PitSlice& slice, std::string_view ticker, Date start, Date end);

/// Mean of the last `window` closes on or before `as_of`. InsufficientHistory if fewer exist.
double sma(const PitSlice& slice, std::string_view ticker, Date as_of, std::size_t window);

/// Close-to-close returns between consecutive trading-calendar days inside [start, end],
/// each stamped with the later day.
std::vector<DatedValue> daily_returns(const PitSlice& slice, std::string_view ticker, Date start, Date end);

}  // namespace lookahead
