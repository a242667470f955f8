#pragma once

#include <array>
#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace limitlab {

// Prices are integer cents end-to-end; volumes are integer shares.
using Cents = std::int64_t;
using Shares = std::int64_t;
// Seconds since midnight (exchange-local) or an elapsed number of seconds.
using Seconds = std::int32_t;

using Date = std::chrono::year_month_day;

enum class Direction : std::uint8_t { up, down };

inline constexpr std::array<Direction, 2> kDirections{Direction::up, Direction::down};

constexpr std::size_t index_of(Direction d) noexcept { return d == Direction::up ? 0 : 1; }
constexpr Direction opposite(Direction d) noexcept {
    return d == Direction::up ? Direction::down : Direction::up;
}
std::string_view to_string(Direction d) noexcept;
Direction parse_direction(std::string_view text);

// ---------------------------------------------------------------------------
// Errors. The CLI maps these onto its exit status contract.

/// Malformed or inconsistent input data (exit status 2).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or scenario (exit status 1).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical routine failed to converge (exit status 3).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Six-digit exchange symbol, stored inline.

class StockId {
public:
    StockId() = default;
    /// Throws DataError unless `text` is exactly six ASCII digits.
    explicit StockId(std::string_view text);

    std::string_view view() const noexcept { return {chars_.data(), chars_.size()}; }
    std::string str() const { return std::string(view()); }

    friend bool operator==(const StockId&, const StockId&) = default;
    friend auto operator<=>(const StockId&, const StockId&) = default;

private:
    std::array<char, 6> chars_{'0', '0', '0', '0', '0', '0'};
};

// ---------------------------------------------------------------------------
// Calendar and clock helpers.

constexpr Seconds hms(int h, int m, int s = 0) noexcept { return h * 3600 + m * 60 + s; }

/// Parses "HH:MM:SS"; returns nullopt on any format error.
std::optional<Seconds> parse_time(std::string_view text) noexcept;
std::string format_time(Seconds t);
/// "HH:MM", used for bin labels.
std::string format_hhmm(Seconds t);

/// Parses "YYYY-MM-DD"; returns nullopt on format error or invalid date.
std::optional<Date> parse_date(std::string_view text) noexcept;
std::string format_date(const Date& d);

// ---------------------------------------------------------------------------
// Number formatting shared by every report writer.

/// Shortest decimal text that round-trips to the same double.
std::string format_real(double value);
/// As format_real, or the empty string for an absent value.
std::string format_optional(const std::optional<double>& value);
/// Cents as yuan with exactly two fraction digits ("12.34").
std::string format_yuan(Cents cents);
/// Parses a yuan amount with exactly two fraction digits into cents.
std::optional<Cents> parse_yuan(std::string_view text) noexcept;
std::optional<std::int64_t> parse_int(std::string_view text) noexcept;

}  // namespace limitlab
