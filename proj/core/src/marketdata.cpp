#include "lookahead/marketdata.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>

namespace lookahead {

namespace {

constexpr std::string_view kCsvHeader = "ticker,date,adjusted_close";

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::optional<double> parse_decimal(std::string_view text) {
    if (text.empty()) {
        return std::nullopt;
    }
    // Plain decimals only: digits, one '.', optional leading sign.
    bool seen_dot = false;
    bool seen_digit = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c >= '0' && c <= '9') {
            seen_digit = true;
        } else if (c == '.' && !seen_dot) {
            seen_dot = true;
        } else if ((c == '-' || c == '+') && i == 0) {
        } else {
            return std::nullopt;
        }
    }
    if (!seen_digit) {
        return std::nullopt;
    }
    const char* first = text.data() + (text.front() == '+' ? 1 : 0);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(first, text.data() + text.size(), value, std::chars_format::fixed);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        return std::nullopt;
    }
    return value;
}

}  // namespace

DataError::DataError(const std::string& what, std::optional<std::size_t> line)
    : std::runtime_error(line ? fmt::format("line {}: {}", *line, what) : what), line_(line) {}

PriceSeries::PriceSeries(std::string ticker, std::vector<PriceBar> bars)
    : ticker_(std::move(ticker)), bars_(std::move(bars)) {
    if (ticker_.empty()) {
        throw DataError("price series has an empty ticker");
    }
    if (bars_.empty()) {
        throw DataError(fmt::format("price series for {} is empty", ticker_));
    }
    for (std::size_t i = 0; i < bars_.size(); ++i) {
        const double close = bars_[i].adjusted_close;
        if (!std::isfinite(close) || close <= 0.0) {
            throw DataError(fmt::format("{} {}: adjusted_close must be positive and finite", ticker_,
                                        bars_[i].date.iso()));
        }
        if (i > 0 && !(bars_[i - 1].date < bars_[i].date)) {
            throw DataError(fmt::format("{}: bars not strictly ascending at {}", ticker_, bars_[i].date.iso()));
        }
    }
}

SeriesMap load_price_csv(std::istream& source, const std::set<std::string>& expected_universe) {
    struct Row {
        PriceBar bar;
        std::size_t line;
    };
    std::map<std::string, std::vector<Row>, std::less<>> rows;

    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(source, line)) {
        ++line_no;
        std::string_view view(line);
        if (!view.empty() && view.back() == '\r') {
            view.remove_suffix(1);
        }
        if (!header_seen) {
            if (view.size() >= 3 && static_cast<unsigned char>(view[0]) == 0xEF &&
                static_cast<unsigned char>(view[1]) == 0xBB && static_cast<unsigned char>(view[2]) == 0xBF) {
                view.remove_prefix(3);
            }
            if (view != kCsvHeader) {
                throw DataError(fmt::format("expected header '{}'", kCsvHeader), line_no);
            }
            header_seen = true;
            continue;
        }
        if (view.empty()) {
            continue;
        }
        const auto fields = split_fields(view);
        if (fields.size() != 3) {
            throw DataError(fmt::format("expected 3 fields, found {}", fields.size()), line_no);
        }
        if (fields[0].empty()) {
            throw DataError("empty ticker", line_no);
        }
        const auto date = Date::try_parse(fields[1]);
        if (!date) {
            throw DataError(fmt::format("invalid date '{}'", fields[1]), line_no);
        }
        const auto close = parse_decimal(fields[2]);
        if (!close) {
            throw DataError(fmt::format("invalid adjusted_close '{}'", fields[2]), line_no);
        }
        if (!std::isfinite(*close) || *close <= 0.0) {
            throw DataError(fmt::format("non-positive adjusted_close {}", fields[2]), line_no);
        }
        const std::string ticker(fields[0]);
        if (!expected_universe.contains(ticker)) {
            continue;
        }
        rows[ticker].push_back(Row{PriceBar{*date, *close}, line_no});
    }
    if (!header_seen) {
        throw DataError("empty price file: missing header");
    }

    SeriesMap out;
    for (const auto& ticker : expected_universe) {
        auto it = rows.find(ticker);
        if (it == rows.end()) {
            throw DataError(fmt::format("missing ticker {}", ticker));
        }
        auto& ticker_rows = it->second;
        std::stable_sort(ticker_rows.begin(), ticker_rows.end(),
                         [](const Row& a, const Row& b) { return a.bar.date < b.bar.date; });
        std::vector<PriceBar> bars;
        bars.reserve(ticker_rows.size());
        for (std::size_t i = 0; i < ticker_rows.size(); ++i) {
            if (i > 0 && ticker_rows[i].bar.date == ticker_rows[i - 1].bar.date) {
                throw DataError(fmt::format("duplicate row for ({}, {}), first seen on line {}", ticker,
                                            ticker_rows[i].bar.date.iso(), ticker_rows[i - 1].line),
                                ticker_rows[i].line);
            }
            bars.push_back(ticker_rows[i].bar);
        }
        out.emplace(ticker, PriceSeries(ticker, std::move(bars)));
    }
    return out;
}

SeriesMap load_price_csv_file(const std::filesystem::path& path, const std::set<std::string>& expected_universe) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError(fmt::format("cannot open price file '{}'", path.string()));
    }
    return load_price_csv(in, expected_universe);
}

std::string format_decimal(double value) {
    std::array<char, 512> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::fixed);
    if (ec != std::errc{}) {
        throw std::runtime_error("decimal formatting failed");
    }
    return std::string(buf.data(), ptr);
}

void write_price_csv(std::ostream& out, const SeriesMap& series) {
    out << kCsvHeader << '\n';
    for (const auto& [ticker, s] : series) {
        for (const auto& bar : s.bars()) {
            out << ticker << ',' << bar.date.iso() << ',' << format_decimal(bar.adjusted_close) << '\n';
        }
    }
}

TradingCalendar::TradingCalendar(std::vector<Date> days) : days_(std::move(days)) {
    for (std::size_t i = 1; i < days_.size(); ++i) {
        if (!(days_[i - 1] < days_[i])) {
            throw DataError(fmt::format("trading calendar not strictly ascending at {}", days_[i].iso()));
        }
    }
}

bool TradingCalendar::contains(Date d) const noexcept {
    return std::binary_search(days_.begin(), days_.end(), d);
}

std::optional<std::size_t> TradingCalendar::first_on_or_after(Date d) const noexcept {
    auto it = std::lower_bound(days_.begin(), days_.end(), d);
    if (it == days_.end()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - days_.begin());
}

std::optional<std::size_t> TradingCalendar::last_on_or_before(Date d) const noexcept {
    auto it = std::upper_bound(days_.begin(), days_.end(), d);
    if (it == days_.begin()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - days_.begin()) - 1;
}

std::size_t TradingCalendar::count_before(Date d) const noexcept {
    return static_cast<std::size_t>(std::lower_bound(days_.begin(), days_.end(), d) - days_.begin());
}

TradingCalendar build_calendar(const SeriesMap& series_map) {
    if (series_map.empty()) {
        throw DataError("cannot build a trading calendar from no series");
    }
    auto it = series_map.begin();
    std::vector<Date> common;
    for (const auto& bar : it->second.bars()) {
        common.push_back(bar.date);
    }
    for (++it; it != series_map.end(); ++it) {
        std::vector<Date> other;
        other.reserve(it->second.bars().size());
        for (const auto& bar : it->second.bars()) {
            other.push_back(bar.date);
        }
        std::vector<Date> merged;
        std::set_intersection(common.begin(), common.end(), other.begin(), other.end(), std::back_inserter(merged));
        common = std::move(merged);
    }
    if (common.empty()) {
        throw DataError("trading calendar is empty: tickers share no common dates");
    }
    return TradingCalendar(std::move(common));
}

MarketData::MarketData(SeriesMap series) {
    auto state = std::make_shared<State>();
    state->calendar = build_calendar(series);
    for (const auto& [ticker, s] : series) {
        state->universe.push_back(ticker);
    }
    state->series = std::move(series);
    state_ = std::move(state);
}

PitSlice::PitSlice(std::shared_ptr<const MarketData::State> data, Date as_of)
    : data_(std::move(data)), as_of_(as_of) {
    for (const auto& [ticker, s] : data_->series) {
        const auto bars = s.bars();
        const auto end = std::upper_bound(bars.begin(), bars.end(), as_of,
                                          [](Date d, const PriceBar& b) { return d < b.date; });
        visible_.emplace(ticker, static_cast<std::size_t>(end - bars.begin()));
    }
    const auto days = data_->calendar.days();
    visible_days_ = static_cast<std::size_t>(std::upper_bound(days.begin(), days.end(), as_of) - days.begin());
}

PitSlice pit_slice(const MarketData& data, Date as_of) {
    return PitSlice(data.state_, as_of);
}

bool PitSlice::has_ticker(std::string_view ticker) const noexcept {
    return visible_.find(ticker) != visible_.end();
}

std::span<const PriceBar> PitSlice::bars(std::string_view ticker) const {
    const auto vis = visible_.find(ticker);
    if (vis == visible_.end()) {
        throw std::out_of_range(fmt::format("unknown ticker {}", ticker));
    }
    return data_->series.find(ticker)->second.bars().first(vis->second);
}

std::span<const Date> PitSlice::calendar_days() const noexcept {
    return data_->calendar.days().first(visible_days_);
}

void PitSlice::check_not_future(Date date) const {
    if (as_of_ < date) {
        throw FutureAccessError(
            fmt::format("future access: requested {} through a slice as of {}", date.iso(), as_of_.iso()));
    }
}

const PriceBar& PitSlice::bar_on_or_before(std::string_view ticker, Date date) const {
    check_not_future(date);
    const auto visible = bars(ticker);
    auto it = std::upper_bound(visible.begin(), visible.end(), date,
                               [](Date d, const PriceBar& b) { return d < b.date; });
    if (it == visible.begin()) {
        throw InsufficientHistory(fmt::format("{}: no bar on or before {}", ticker, date.iso()));
    }
    return *(it - 1);
}

double PitSlice::close_on_or_before(std::string_view ticker, Date date) const {
    return bar_on_or_before(ticker, date).adjusted_close;
}

std::span<const PriceBar> PitSlice::last_bars(std::string_view ticker, std::size_t count) const {
    const auto visible = bars(ticker);
    return visible.last(std::min(count, visible.size()));
}

double total_return(const PitSlice& slice, std::string_view ticker, Date start, Date end) {
    if (end < start) {
        throw std::invalid_argument(fmt::format("total_return: start {} after end {}", start.iso(), end.iso()));
    }
    const double end_close = slice.close_on_or_before(ticker, end);
    const double start_close = slice.close_on_or_before(ticker, start);
    return end_close / start_close - 1.0;
}

double sma(const PitSlice& slice, std::string_view ticker, Date as_of, std::size_t window) {
    if (window == 0) {
        throw std::invalid_argument("sma window must be positive");
    }
    if (slice.as_of() < as_of) {
        throw FutureAccessError(
            fmt::format("future access: sma as of {} through a slice as of {}", as_of.iso(), slice.as_of().iso()));
    }
    const auto visible = slice.bars(ticker);
    auto end = std::upper_bound(visible.begin(), visible.end(), as_of,
                                [](Date d, const PriceBar& b) { return d < b.date; });
    const auto available = static_cast<std::size_t>(end - visible.begin());
    if (available < window) {
        throw InsufficientHistory(
            fmt::format("{}: sma({}) needs {} bars on or before {}, have {}", ticker, window, window, as_of.iso(),
                        available));
    }
    double sum = 0.0;
    for (auto it = end - static_cast<std::ptrdiff_t>(window); it != end; ++it) {
        sum += it->adjusted_close;
    }
    return sum / static_cast<double>(window);
}

std::vector<DatedValue> daily_returns(const PitSlice& slice, std::string_view ticker, Date start, Date end) {
    if (slice.as_of() < end) {
        throw FutureAccessError(fmt::format("future access: daily returns through {} on a slice as of {}", end.iso(),
                                            slice.as_of().iso()));
    }
    const auto days = slice.calendar_days();
    auto first = std::lower_bound(days.begin(), days.end(), start);
    auto last = std::upper_bound(days.begin(), days.end(), end);
    if (last - first < 2) {
        throw InsufficientHistory(
            fmt::format("{}: daily returns need two trading days in [{}, {}]", ticker, start.iso(), end.iso()));
    }
    std::vector<DatedValue> out;
    out.reserve(static_cast<std::size_t>(last - first) - 1);
    double previous = slice.close_on_or_before(ticker, *first);
    for (auto it = first + 1; it != last; ++it) {
        const double close = slice.close_on_or_before(ticker, *it);
        out.push_back(DatedValue{*it, close / previous - 1.0});
        previous = close;
    }
    return out;
}

}  // namespace lookahead
