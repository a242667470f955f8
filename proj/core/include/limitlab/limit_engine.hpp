#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "limitlab/common.hpp"
#include "limitlab/market_data.hpp"

namespace limitlab {

/// Daily price-limit rule: limit = R[prev_close * (1 +/- fraction)] rounded
/// half-up to the tick. The fraction is held in basis points so the whole
/// computation stays in integers.
struct LimitRule {
    std::int64_t fraction_bp = 1000; // 10%
    Cents tick_cents = 1;
};

struct LimitPrices {
    Cents up_limit = 0;
    Cents down_limit = 0;
    Cents prev_close = 0;
};

/// up = floor((prev_close * 110 + 50) / 100), down likewise with 90, for
/// the default rule. Throws std::domain_error if prev_close <= 0.
LimitPrices compute_limit_prices(Cents prev_close, const LimitRule& rule = {});

/// Trading-day clock boundaries.
struct SessionWindows {
    Seconds first_record = hms(9, 15);
    Seconds open_end = hms(9, 30);  // hits at or before this are opening-auction hits
    Seconds am_end = hms(11, 30);
    Seconds pm_start = hms(13, 0);
    Seconds close = hms(15, 0);

    bool in_session(Seconds t) const noexcept {
        return (t >= first_record && t <= am_end) || (t >= pm_start && t <= close);
    }
};

/// How elapsed time between two intraday timestamps is measured.
enum class DurationClock : std::uint8_t {
    trading, // wall-clock difference minus any overlap with the midday halt
    wall,    // plain timestamp difference
};

Seconds elapsed(Seconds from, Seconds to, const SessionWindows& windows, DurationClock clock) noexcept;

enum class HitWindow : std::uint8_t { open, am, pm };
std::string_view to_string(HitWindow w) noexcept;
HitWindow classify_window(Seconds first_hit, const SessionWindows& windows) noexcept;

enum class NextDayClass : std::uint8_t { continuation, reversal, flat, unavailable };
std::string_view to_string(NextDayClass c) noexcept;

struct HitSegment {
    Direction direction = Direction::up;
    Seconds start_time = 0;
    Seconds end_time = 0;  // timestamp of the first interior record, or the close
    Seconds duration = 0;  // elapsed(start_time, end_time) on the configured clock
    bool ends_at_close = false;
    std::size_t start_index = 0; // index of the opening record within the session ticks

    friend bool operator==(const HitSegment&, const HitSegment&) = default;
};

struct DayHitRecord {
    StockId stock_id;
    Date date{};
    Direction direction = Direction::up; // direction of the first hit of the day
    std::array<std::vector<HitSegment>, 2> segments; // indexed by index_of(Direction)
    std::array<Seconds, 2> total_duration{};
    std::array<Seconds, 2> span{};
    HitWindow first_hit_window = HitWindow::am;
    bool closed_at_limit = false;
    std::optional<Direction> close_direction;
    NextDayClass next_day_class = NextDayClass::unavailable;

    std::size_t count(Direction d) const noexcept { return segments[index_of(d)].size(); }
    bool has(Direction d) const noexcept { return !segments[index_of(d)].empty(); }
    /// Start time of the first segment in direction `d`; requires has(d).
    Seconds first_hit_time(Direction d) const { return segments[index_of(d)].front().start_time; }
};

/// Detects every at-limit interval of the session. Records without a trade
/// carry the last trade price forward. Returns nullopt when the session
/// never trades at either limit. Throws DataError for ticks outside the
/// session windows or limits that do not bracket any interior price.
std::optional<DayHitRecord> segment_hits(const StockDaySession& session, const LimitPrices& limits,
                                         const SessionWindows& windows = {},
                                         DurationClock clock = DurationClock::trading);

NextDayClass classify_next_day(Direction first_hit, Cents today_close, std::optional<Cents> next_day_open) noexcept;

// Per-day hit CSV.
inline constexpr std::string_view kHitsHeader =
    "stock_id,date,direction,M_up,M_down,dt_up_s,dt_down_s,span_up_s,span_down_s,first_window,"
    "closed_at_limit,close_direction,next_day_class";
void write_hit_row(std::ostream& out, const DayHitRecord& record);

}  // namespace limitlab
