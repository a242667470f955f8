#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "limitlab/aggregation.hpp"
#include "limitlab/common.hpp"
#include "limitlab/limit_engine.hpp"
#include "limitlab/market_data.hpp"

namespace limitlab {

enum class PrehitClass : std::uint8_t { up_bull, up_bear, down_bull, down_bear };
inline constexpr std::array<PrehitClass, 4> kPrehitClasses{PrehitClass::up_bull, PrehitClass::up_bear,
                                                           PrehitClass::down_bull, PrehitClass::down_bear};
std::string_view to_string(PrehitClass c) noexcept;
PrehitClass prehit_class(Direction d, Regime r) noexcept;
constexpr std::size_t index_of(PrehitClass c) noexcept { return static_cast<std::size_t>(c); }

struct PrehitConfig {
    int event_window = 100;        // trades per event, the hit trade included
    int velocity_subintervals = 10;
    std::int64_t velocity_start_bp = 500; // first threshold, 5% from the previous close
    LimitRule rule{};
    SessionWindows windows{};
    DurationClock clock = DurationClock::trading;
};

/// Threshold prices theta_0..theta_n for a move from the start level to the
/// limit. Up: smallest cent price with price / prev_close >= 1 + level,
/// down: largest with price / prev_close <= 1 - level. The last entry is
/// the limit price itself.
std::vector<Cents> velocity_thresholds(Cents prev_close, Direction d, const PrehitConfig& config = {});

enum class TradeRole : std::uint8_t { same, opposite, unknown };

/// One of the last `event_window` trades before and including the hit.
struct EventPoint {
    double log_size = 0.0;
    TradeRole role = TradeRole::unknown;
    double log_return = 0.0; // ln p(k) - ln p(k-1)
    std::optional<double> spread; // relative level-1 spread before the trade
};

enum class VelocityExclusion : std::uint8_t { none, opening_hit, gap_open, zero_duration };
enum class StudyExclusion : std::uint8_t { none, opening_hit, short_history };

/// Everything the accumulation step needs from one limit-hitting event:
/// the first hit segment of a direction on one day.
struct PrehitEvent {
    StockId stock_id;
    Date date{};
    Direction direction = Direction::up;
    PrehitClass cls = PrehitClass::up_bull;
    Seconds hit_time = 0;

    VelocityExclusion velocity_exclusion = VelocityExclusion::none;
    std::vector<Seconds> durations; // Delta t_m, m = 0..n-1, when not excluded

    StudyExclusion study_exclusion = StudyExclusion::none;
    std::vector<EventPoint> points; // k = 1..window, when not excluded
};

/// One event per direction present in `record`.
std::vector<PrehitEvent> extract_prehit_events(const StockDaySession& session, const DayHitRecord& record,
                                               Regime regime, const PrehitConfig& config = {});

struct VelocityProfile {
    PrehitClass cls = PrehitClass::up_bull;
    std::size_t n_events = 0;
    std::vector<double> mean_share;          // mean of Delta t_m / sum_m Delta t_m
    std::vector<std::optional<double>> V;     // 1 / mean_share; absent without events
};

struct EventStudyPoint {
    std::optional<double> s_plus, s_minus, S;
    double R = 0.0, v = 0.0;
    std::size_t n_contributing = 0, n_plus = 0, n_minus = 0, n_unknown = 0, n_spread = 0;
};

struct EventStudySeries {
    PrehitClass cls = PrehitClass::up_bull;
    std::size_t n_events = 0;
    std::vector<EventStudyPoint> points; // index k - 1
};

struct PrehitResult {
    std::array<VelocityProfile, 4> velocity;
    std::array<EventStudySeries, 4> event_study;
    std::array<std::vector<double>, 4> s_plus_last; // ln(size) of every hit trade
    std::map<std::string, std::int64_t> exclusions;
};

/// Accumulates events in (stock, date, direction) order, so the result does
/// not depend on the order in which they were extracted.
PrehitResult accumulate_prehit(std::vector<PrehitEvent> events, const PrehitConfig& config = {});

void write_velocity_csv(std::ostream& out, const VelocityProfile& profile);
void write_event_study_csv(std::ostream& out, const EventStudySeries& series);

}  // namespace limitlab
