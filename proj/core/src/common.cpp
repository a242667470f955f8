#include "limitlab/common.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace limitlab {

std::string_view to_string(Direction d) noexcept { return d == Direction::up ? "up" : "down"; }

Direction parse_direction(std::string_view text) {
    if (text == "up") return Direction::up;
    if (text == "down") return Direction::down;
    throw ConfigError("invalid direction '" + std::string(text) + "'");
}

StockId::StockId(std::string_view text) {
    if (text.size() != chars_.size())
        throw DataError("stock id must be six digits: '" + std::string(text) + "'");
    for (std::size_t i = 0; i < chars_.size(); ++i) {
        if (text[i] < '0' || text[i] > '9')
            throw DataError("stock id must be six digits: '" + std::string(text) + "'");
        chars_[i] = text[i];
    }
}

namespace {

bool parse_fixed_digits(std::string_view text, int& out) noexcept {
    if (text.empty()) return false;
    int value = 0;
    for (char c : text) {
        if (c < '0' || c > '9') return false;
        value = value * 10 + (c - '0');
    }
    out = value;
    return true;
}

}  // namespace

std::optional<Seconds> parse_time(std::string_view text) noexcept {
    if (text.size() != 8 || text[2] != ':' || text[5] != ':') return std::nullopt;
    int h = 0, m = 0, s = 0;
    if (!parse_fixed_digits(text.substr(0, 2), h) || !parse_fixed_digits(text.substr(3, 2), m) ||
        !parse_fixed_digits(text.substr(6, 2), s))
        return std::nullopt;
    if (h > 23 || m > 59 || s > 59) return std::nullopt;
    return hms(h, m, s);
}

std::string format_time(Seconds t) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d:%02d:%02d", t / 3600, (t / 60) % 60, t % 60);
    return buf;
}

std::string format_hhmm(Seconds t) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d:%02d", t / 3600, (t / 60) % 60);
    return buf;
}

std::optional<Date> parse_date(std::string_view text) noexcept {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    int y = 0, m = 0, d = 0;
    if (!parse_fixed_digits(text.substr(0, 4), y) || !parse_fixed_digits(text.substr(5, 2), m) ||
        !parse_fixed_digits(text.substr(8, 2), d))
        return std::nullopt;
    Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
              std::chrono::day{static_cast<unsigned>(d)}};
    if (!date.ok()) return std::nullopt;
    return date;
}

std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
    return buf;
}

std::string format_real(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) throw std::logic_error("format_real: buffer too small");
    return std::string(buf, end);
}

std::string format_optional(const std::optional<double>& value) {
    return value ? format_real(*value) : std::string{};
}

std::string format_yuan(Cents cents) {
    const bool negative = cents < 0;
    const Cents mag = negative ? -cents : cents;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%lld.%02lld", negative ? "-" : "",
                  static_cast<long long>(mag / 100), static_cast<long long>(mag % 100));
    return buf;
}

std::optional<Cents> parse_yuan(std::string_view text) noexcept {
    const auto dot = text.find('.');
    if (dot == std::string_view::npos || dot == 0 || text.size() - dot - 1 != 2) return std::nullopt;
    const auto whole = text.substr(0, dot);
    const auto frac = text.substr(dot + 1);
    long long w = 0;
    auto [p, ec] = std::from_chars(whole.data(), whole.data() + whole.size(), w);
    if (ec != std::errc{} || p != whole.data() + whole.size() || w < 0) return std::nullopt;
    if (whole.size() > 1 && whole[0] == '0') return std::nullopt;
    int f = 0;
    if (!parse_fixed_digits(frac, f)) return std::nullopt;
    return static_cast<Cents>(w) * 100 + f;
}

std::optional<std::int64_t> parse_int(std::string_view text) noexcept {
    if (text.empty()) return std::nullopt;
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || p != text.data() + text.size()) return std::nullopt;
    return v;
}

}  // namespace limitlab
