#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "limitlab/aggregation.hpp"
#include "limitlab/common.hpp"
#include "limitlab/limit_engine.hpp"
#include "limitlab/market_data.hpp"
#include "limitlab/prehit.hpp"

namespace limitlab {

// ---------------------------------------------------------------------------
// Pseudo-random numbers.
//
// splitmix64 (Steele, Lea, Flood) derives seeds; the stream itself is
// xorshift64* (Vigna):
//     x ^= x >> 12;  x ^= x << 25;  x ^= x >> 27;  return x * 0x2545F4914F6CDD1D
// uniform(a, b) = a + next() % (b - a + 1)
// unit()        = (next() >> 11) * 2^-53

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

class XorShift64Star {
public:
    explicit XorShift64Star(std::uint64_t seed) noexcept;
    std::uint64_t next() noexcept;
    std::int64_t uniform(std::int64_t lo, std::int64_t hi) noexcept; // inclusive
    double unit() noexcept;                                          // [0, 1)
    bool chance(double p) noexcept { return unit() < p; }
    /// Index drawn with probability proportional to the weights.
    std::size_t weighted(std::span<const double> weights) noexcept;

private:
    std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// Scenario.

enum class NextDayRelation : std::uint8_t { higher, lower, equal, halt };
std::string_view to_string(NextDayRelation r) noexcept;

struct StockSpec {
    StockId id;
    Shares shares_outstanding = 0;
};

struct SegmentPlan {
    Direction direction = Direction::up;
    Seconds start = 0;                // wall clock
    std::optional<Seconds> duration;  // trading seconds; absent = held to the close
};

/// Approach to the first hit of a direction: `lead_in` trades at 5 s spacing
/// below the first threshold, then one stretch per velocity subinterval.
struct RampPlan {
    std::vector<Seconds> durations; // trading seconds, one per subinterval
    int lead_in = 100;
};

struct DayPlan {
    StockId stock;
    Date date{};
    std::vector<SegmentPlan> segments; // chronological, either direction
    NextDayRelation next_day = NextDayRelation::higher;
    std::optional<RampPlan> ramp; // applies to every event of the day
    bool gap_open = false;        // opening trade at the first threshold of the first event
    std::optional<Cents> prev_close;
};

/// A day written record by record, outside the planner. Such days are not
/// described by the manifest.
struct ScriptRecord {
    Seconds time = 0;
    Cents price = 0;
    Shares volume = 0;
    std::optional<Cents> bid, ask;
};

struct DayScript {
    StockId stock;
    Date date{};
    Cents prev_close = 0;
    std::optional<Cents> next_day_open;
    std::vector<ScriptRecord> records;
};

enum class VelocityMode : std::uint8_t { random, uniform, decelerating };

struct PlannerConfig {
    double hit_rate = 0.05;
    VelocityMode velocity = VelocityMode::random;
    Seconds velocity_step = 30; // uniform and decelerating modes
    double both_directions_rate = 0.05;
    double gap_open_rate = 0.05;
};

struct Cadence {
    Seconds dense = 5;    // grid spacing and planted-feature cadence
    Seconds sparse = 300; // mean spacing of filler records
    double quote_only_fraction = 0.3;
};

struct ScenarioSpec {
    std::uint64_t seed = 1;
    int levels = 5;
    std::vector<StockSpec> stocks;
    std::vector<Date> dates;
    RegimeCalendar calendar = RegimeCalendar::default_calendar();
    Cadence cadence{};
    PlannerConfig planned{};
    double ex_dividend_rate = 0.0;
    int ipo_stocks = 0;
    std::vector<DayPlan> plans;     // replace the random planner on their stock-days
    std::vector<DayScript> scripts; // replace generation entirely
    int portfolio_count = 6;
    int intraday_bin_minutes = 5;
    PrehitConfig prehit{};
};

/// Reads the JSON scenario format documented in the README.
/// Throws ConfigError on any schema violation.
ScenarioSpec parse_scenario(std::string_view json_text);
ScenarioSpec load_scenario(const std::filesystem::path& path);

/// Weekdays from `start` on, `count` of them.
std::vector<Date> weekdays_from(const Date& start, std::size_t count);

// ---------------------------------------------------------------------------
// Ground truth.

struct TruthEvent {
    Direction direction = Direction::up;
    std::vector<Seconds> durations; // planned subinterval durations, empty if no ramp
    PrehitEvent expected;           // event-study points from the intended script
};

struct TruthDay {
    StockId stock;
    Date date{};
    Cents prev_close = 0;
    Shares shares_outstanding = 0;
    bool is_ipo_day = false;
    bool is_ex_dividend_day = false;
    bool scripted = false;
    std::size_t records = 0;
    Cents close = 0;
    std::optional<Cents> next_day_open;
    NextDayRelation next_day = NextDayRelation::halt;
    std::vector<SegmentPlan> segments; // resolved plan
    std::vector<TruthEvent> events;
};

struct TruthManifest {
    std::uint64_t seed = 0;
    bool complete = true; // false when scripted days are present
    std::map<std::string, std::size_t> file_rows;
    std::size_t rows_total = 0;
    std::size_t sessions_total = 0;
    std::size_t sessions_excluded = 0;
    std::size_t planted_hits = 0; // hit days among non-excluded sessions

    std::vector<DayHitRecord> hits; // ordered by (stock, date); start_index is not meaningful
    std::vector<std::pair<Scope, HitCounters>> table1;
    std::vector<Table2Row> table2;
    std::vector<StockHitStats> per_stock;
    IntradayPattern intraday;
    PrehitResult prehit;
};

struct GeneratedCorpus {
    int levels = 5;
    std::vector<StockDaySession> sessions; // every stock-day, ordered by (stock, date)
    std::vector<TruthDay> days;
    TruthManifest manifest;
    std::string calendar;
};

/// Deterministic for a given spec. Throws ConfigError for infeasible plans
/// (segments past the close, overlapping features, prices escaping limits).
GeneratedCorpus generate(const ScenarioSpec& spec);

/// Writes ticks_<stock>.csv, sessions.csv, manifest.json and calendar.txt.
void write_corpus(const GeneratedCorpus& corpus, const std::filesystem::path& dir);

/// Derives every expected report from the day truths alone.
TruthManifest derive_manifest(const ScenarioSpec& spec, const std::vector<TruthDay>& days);

std::string manifest_to_json(const TruthManifest& manifest);

}  // namespace limitlab
