#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "limitlab/common.hpp"
#include "limitlab/limit_engine.hpp"

namespace limitlab {

// ---------------------------------------------------------------------------
// Market regimes

enum class Regime : std::uint8_t { bull, bear };
std::string_view to_string(Regime r) noexcept;

struct RegimeInterval {
    Date start{};
    Date end{}; // inclusive
    Regime regime = Regime::bear;
};

/// Contiguous, gap-free date -> regime mapping.
class RegimeCalendar {
public:
    /// Throws ConfigError if the intervals are empty, unordered, or leave gaps.
    explicit RegimeCalendar(std::vector<RegimeInterval> intervals);

    /// Bull windows 2000-01-04..2001-06-13, 2005-06-04..2007-10-16 and
    /// 2008-10-28..2009-08-04; bear elsewhere through 2011-12-30.
    static RegimeCalendar default_calendar();

    /// "start:end:regime" entries separated by commas,
    /// e.g. "2000-01-04:2001-06-13:bull,2001-06-14:2005-06-03:bear".
    static RegimeCalendar parse(std::string_view text);
    std::string to_string() const;

    bool covers(const Date& d) const noexcept;
    /// Throws ConfigError for a date outside the calendar.
    Regime regime_of(const Date& d) const;

    const std::vector<RegimeInterval>& intervals() const noexcept { return intervals_; }

private:
    std::vector<RegimeInterval> intervals_;
};

// ---------------------------------------------------------------------------
// Session index and capitalization portfolios

/// What aggregation needs from a (non-excluded) stock-day session.
struct SessionSummary {
    StockId stock_id;
    Date date{};
    Cents prev_close = 0;
    std::int64_t capitalization = 0;
};

struct PortfolioAssignment {
    Date date{};
    std::map<StockId, int> portfolio; // 1 = smallest capitalizations

    std::vector<std::size_t> sizes(int count) const;
};

/// Sorts by capitalization (ties by stock_id) and cuts into `count`
/// contiguous groups. With n = count*q + s, the s largest-cap groups get
/// q+1 members and the rest q.
PortfolioAssignment assign_portfolios(const Date& date, std::vector<std::pair<StockId, std::int64_t>> stocks,
                                      int count = 6);

using PortfolioBook = std::map<Date, PortfolioAssignment>;

/// One assignment per date over every stock with a hit record that day.
/// Capitalizations are looked up in `sessions`; a record without a
/// matching session is a DataError.
PortfolioBook build_portfolios(std::span<const DayHitRecord> records, std::span<const SessionSummary> sessions,
                               int count = 6);

// ---------------------------------------------------------------------------
// Table-1 counters

enum class RegimeScope : std::uint8_t { whole, bull, bear };
std::string_view to_string(RegimeScope r) noexcept;
inline constexpr std::array<RegimeScope, 3> kRegimeScopes{RegimeScope::whole, RegimeScope::bull, RegimeScope::bear};

struct Scope {
    RegimeScope regime = RegimeScope::whole;
    int portfolio = 0; // 0 = all stocks, otherwise 1..count

    std::string label() const; // e.g. "whole_all", "bull_p3"
    friend bool operator==(const Scope&, const Scope&) = default;
};

/// Every (regime, portfolio) scope in report order.
std::vector<Scope> all_scopes(int portfolio_count = 6);

struct DirectionCounters {
    std::int64_t N = 0, N_con = 0, N_rev = 0, N_open = 0, N_am = 0, N_pm = 0;
    std::int64_t N_close = 0, N_close_con = 0, N_close_rev = 0;

    void merge(const DirectionCounters& other) noexcept;
    friend bool operator==(const DirectionCounters&, const DirectionCounters&) = default;
};

struct HitCounters {
    std::array<DirectionCounters, 2> by_direction; // indexed by index_of(Direction)
    std::set<StockId> stocks;                       // distinct stocks with a session in scope

    const DirectionCounters& operator[](Direction d) const noexcept { return by_direction[index_of(d)]; }
    DirectionCounters& operator[](Direction d) noexcept { return by_direction[index_of(d)]; }

    /// <N> = N / distinct stocks in scope; absent when the scope has none.
    std::optional<double> mean_N(Direction d) const noexcept;

    /// Adds one day to the family of its first-hit direction.
    void add(const DayHitRecord& record) noexcept;
    void merge(const HitCounters& other);
    friend bool operator==(const HitCounters&, const HitCounters&) = default;
};

bool in_regime_scope(RegimeScope scope, Regime regime) noexcept;

/// Counts the records and sessions falling in `scope`. For portfolio scopes
/// the stock denominator is that of the scope's whole regime, since
/// portfolios are assigned to hit stocks only.
HitCounters tabulate_counters(std::span<const DayHitRecord> records, std::span<const SessionSummary> sessions,
                              const RegimeCalendar& calendar, const PortfolioBook& portfolios, const Scope& scope);

// ---------------------------------------------------------------------------
// Per-stock statistics

struct StockHitStats {
    StockId stock_id;
    std::int64_t T = 0; // trading days
    std::int64_t K = 0; // limit-hitting days
    std::array<std::int64_t, 2> K_dir{};
    double n = 0.0;
    std::array<double, 2> n_dir{};
    // Means over the limit-hitting days of each direction; absent if none.
    std::array<std::optional<double>, 2> mean_M;
    std::array<std::optional<double>, 2> mean_dt;
    std::array<std::optional<double>, 2> mean_span;
};

std::vector<StockHitStats> per_stock_stats(std::span<const DayHitRecord> records,
                                           std::span<const SessionSummary> sessions);

// ---------------------------------------------------------------------------
// Table-2 summaries

struct SummaryStats {
    std::size_t count = 0;
    std::optional<double> max, mean, median;
    friend bool operator==(const SummaryStats&, const SummaryStats&) = default;
};

/// max / mean / median; the median of an even-size set is the mean of the
/// two central values. Empty input gives absent entries.
SummaryStats summarize(std::vector<double> values);

enum class Table2Measure : std::uint8_t {
    daily_hits,     // M_{i,k}
    daily_duration, // total at-limit time on the day
    stock_span,     // per-stock average of the daily span
    daily_span,     // pooled daily span
};
std::string_view to_string(Table2Measure m) noexcept;
inline constexpr std::array<Table2Measure, 4> kTable2Measures{Table2Measure::daily_hits, Table2Measure::daily_duration,
                                                              Table2Measure::stock_span, Table2Measure::daily_span};

struct Table2Row {
    Scope scope;
    Direction direction = Direction::up;
    Table2Measure measure = Table2Measure::daily_hits;
    SummaryStats stats;
};

/// A day belongs to a direction's population whenever it has at least one
/// segment in that direction.
std::vector<Table2Row> summarize_table2(std::span<const DayHitRecord> records, const RegimeCalendar& calendar,
                                        const PortfolioBook& portfolios, int portfolio_count = 6);

// ---------------------------------------------------------------------------
// Intraday occurrence pattern

struct IntradayBin {
    Seconds start = 0; // bin covers (start, start + width]
    std::array<std::int64_t, 2> count{};      // C^u, C^d
    std::array<std::int64_t, 2> count_bull{};
    std::array<std::int64_t, 2> count_bear{};
};

struct IntradayPattern {
    int bin_minutes = 5;
    std::vector<IntradayBin> bins; // morning bins, then afternoon bins
};

/// Bins each day's first hit time per direction. Opening-auction hits go to
/// the first morning bin and hits at exactly the afternoon restart to the
/// first afternoon bin. Throws ConfigError unless bin_minutes divides both
/// continuous sessions.
IntradayPattern intraday_pattern(std::span<const DayHitRecord> records, const RegimeCalendar& calendar,
                                 int bin_minutes = 5, const SessionWindows& windows = {});

/// Index into IntradayPattern::bins for a first-hit time.
std::size_t intraday_bin_index(Seconds t, int bin_minutes, const SessionWindows& windows = {});

// ---------------------------------------------------------------------------
// Report writers (each writes its header row first).

void write_table1_csv(std::ostream& out, const std::vector<std::pair<Scope, HitCounters>>& counters);
void write_table2_csv(std::ostream& out, const std::vector<Table2Row>& rows);
void write_per_stock_csv(std::ostream& out, const std::vector<StockHitStats>& stats);
void write_intraday_csv(std::ostream& out, const IntradayPattern& pattern);

inline constexpr std::array<std::string_view, 10> kTable1Measures{
    "N", "mean_N", "N_con", "N_rev", "N_open", "N_am", "N_pm", "N_close", "N_close_con", "N_close_rev"};

}  // namespace limitlab
