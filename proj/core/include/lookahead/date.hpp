#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

namespace lookahead {

/// Proleptic Gregorian calendar date, stored as a day count from 1970-01-01.
class Date {
public:
    constexpr Date() = default;

    /// Throws std::invalid_argument when (year, month, day) is not a real date.
    static Date from_ymd(int year, unsigned month, unsigned day);

    /// Parses strict ISO-8601 `YYYY-MM-DD`. Throws std::invalid_argument.
    static Date parse(std::string_view iso);
    static std::optional<Date> try_parse(std::string_view iso) noexcept;

    static constexpr Date from_serial(std::int32_t days) noexcept { return Date(days); }

    [[nodiscard]] std::string iso() const;
    [[nodiscard]] int year() const noexcept;
    [[nodiscard]] unsigned month() const noexcept;
    [[nodiscard]] unsigned day() const noexcept;
    [[nodiscard]] constexpr std::int32_t serial() const noexcept { return days_; }

    /// Calendar-month key, comparable across years.
    [[nodiscard]] int month_key() const noexcept { return year() * 12 + static_cast<int>(month()) - 1; }

    [[nodiscard]] constexpr Date plus_days(std::int32_t n) const noexcept { return Date(days_ + n); }

    constexpr auto operator<=>(const Date&) const noexcept = default;

private:
    constexpr explicit Date(std::int32_t days) noexcept : days_(days) {}

    std::int32_t days_ = 0;
};

std::ostream& operator<<(std::ostream& os, const Date& d);

/// A value stamped with the date it refers to (NAV points, daily returns).
struct DatedValue {
    Date date;
    double value = 0.0;

    bool operator==(const DatedValue&) const = default;
};

}  // namespace lookahead
