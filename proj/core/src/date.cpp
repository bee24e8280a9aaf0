#include "lookahead/date.hpp"

#include <charconv>
#include <chrono>
#include <stdexcept>

#include <fmt/format.h>

namespace lookahead {

namespace {

std::chrono::year_month_day to_ymd(std::int32_t serial) {
    return std::chrono::year_month_day{std::chrono::sys_days{std::chrono::days{serial}}};
}

bool parse_fixed_digits(std::string_view text, int& out) {
    for (char c : text) {
        if (c < '0' || c > '9') {
            return false;
        }
    }
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

Date Date::from_ymd(int year, unsigned month, unsigned day) {
    const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                          std::chrono::day{day}};
    if (!ymd.ok()) {
        throw std::invalid_argument(fmt::format("invalid calendar date {:04}-{:02}-{:02}", year, month, day));
    }
    return Date(static_cast<std::int32_t>(std::chrono::sys_days{ymd}.time_since_epoch().count()));
}

std::optional<Date> Date::try_parse(std::string_view iso) noexcept {
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') {
        return std::nullopt;
    }
    int y = 0;
    int m = 0;
    int d = 0;
    if (!parse_fixed_digits(iso.substr(0, 4), y) || !parse_fixed_digits(iso.substr(5, 2), m) ||
        !parse_fixed_digits(iso.substr(8, 2), d)) {
        return std::nullopt;
    }
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                          std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) {
        return std::nullopt;
    }
    return Date(static_cast<std::int32_t>(std::chrono::sys_days{ymd}.time_since_epoch().count()));
}

Date Date::parse(std::string_view iso) {
    if (auto d = try_parse(iso)) {
        return *d;
    }
    throw std::invalid_argument(fmt::format("invalid ISO date '{}', expected YYYY-MM-DD", iso));
}

std::string Date::iso() const {
    return fmt::format("{:04}-{:02}-{:02}", year(), month(), day());
}

int Date::year() const noexcept {
    return static_cast<int>(to_ymd(days_).year());
}

unsigned Date::month() const noexcept {
    return static_cast<unsigned>(to_ymd(days_).month());
}

unsigned Date::day() const noexcept {
    return static_cast<unsigned>(to_ymd(days_).day());
}

std::ostream& operator<<(std::ostream& os, const Date& d) {
    return os << d.iso();
}

}  // namespace lookahead
