#include <numeric>
#include <sstream>

#include <gtest/gtest.h>

#include "limitlab/aggregation.hpp"
#include "support.hpp"

using namespace limitlab;
using test::ymd;

namespace {

DayHitRecord record(const char* stock, Date date, Direction d, HitWindow w, std::vector<Seconds> durations,
                    bool closed, NextDayClass next, Seconds first = hms(10, 0)) {
    DayHitRecord r;
    r.stock_id = StockId(stock);
    r.date = date;
    r.direction = d;
    Seconds t = first;
    for (auto dt : durations) {
        HitSegment s;
        s.direction = d;
        s.start_time = t;
        s.duration = dt;
        s.end_time = t + dt;
        r.segments[index_of(d)].push_back(s);
        r.total_duration[index_of(d)] += dt;
        t += dt + 60;
    }
    const auto& segs = r.segments[index_of(d)];
    r.span[index_of(d)] = segs.back().end_time - segs.front().start_time;
    r.first_hit_window = w;
    r.closed_at_limit = closed;
    if (closed) r.close_direction = d;
    r.next_day_class = next;
    return r;
}

}  // namespace

TEST(Calendar, DefaultBoundaries) {
    const auto cal = RegimeCalendar::default_calendar();
    EXPECT_EQ(cal.regime_of(ymd(2000, 1, 4)), Regime::bull);
    EXPECT_EQ(cal.regime_of(ymd(2001, 6, 13)), Regime::bull);
    EXPECT_EQ(cal.regime_of(ymd(2001, 6, 14)), Regime::bear);
    EXPECT_EQ(cal.regime_of(ymd(2007, 10, 16)), Regime::bull);
    EXPECT_EQ(cal.regime_of(ymd(2007, 10, 17)), Regime::bear);
    EXPECT_EQ(cal.regime_of(ymd(2009, 8, 4)), Regime::bull);
    EXPECT_EQ(cal.regime_of(ymd(2011, 12, 30)), Regime::bear);
    EXPECT_THROW(cal.regime_of(ymd(2012, 1, 4)), ConfigError);
    EXPECT_THROW(cal.regime_of(ymd(1999, 12, 31)), ConfigError);
}

TEST(Calendar, ParseRoundTripAndGaps) {
    const auto cal = RegimeCalendar::parse("2007-01-01:2007-06-30:bull,2007-07-01:2007-12-31:bear");
    EXPECT_EQ(RegimeCalendar::parse(cal.to_string()).to_string(), cal.to_string());
    EXPECT_EQ(cal.regime_of(ymd(2007, 7, 1)), Regime::bear);
    EXPECT_THROW(RegimeCalendar::parse("2007-01-01:2007-06-30:bull,2007-07-02:2007-12-31:bear"), ConfigError);
    EXPECT_THROW(RegimeCalendar::parse("2007-01-01:2007-06-30:sideways"), ConfigError);
    EXPECT_THROW(RegimeCalendar::parse(""), ConfigError);
}

// Brute-force oracle: deal stocks in capitalization order into groups
// whose sizes are q or q+1 with the larger groups at the top.
TEST(Portfolios, SizesAndOrderForEveryRemainder) {
    for (int n = 1; n <= 40; ++n) {
        std::vector<std::pair<StockId, std::int64_t>> stocks;
        for (int i = 0; i < n; ++i) {
            char id[8];
            std::snprintf(id, sizeof id, "%06d", 600000 + i);
            stocks.emplace_back(StockId(id), (i * 7919) % 101); // ties included
        }
        const auto a = assign_portfolios(ymd(2007, 3, 1), stocks, 6);
        const auto sizes = a.sizes(6);
        const int q = n / 6, s = n % 6;
        for (int g = 0; g < 6; ++g) EXPECT_EQ(static_cast<int>(sizes[g]), q + (g >= 6 - s ? 1 : 0)) << n;
        EXPECT_EQ(std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}), static_cast<std::size_t>(n));

        auto sorted = stocks;
        std::sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) {
            return x.second != y.second ? x.second < y.second : x.first < y.first;
        });
        int prev = 1;
        for (const auto& [id, cap] : sorted) {
            const int g = a.portfolio.at(id);
            EXPECT_GE(g, prev);
            prev = g;
        }
    }
}

TEST(Portfolios, MissingSessionIsDataError) {
    const auto r = record("600000", ymd(2007, 3, 1), Direction::up, HitWindow::am, {60}, false, NextDayClass::flat);
    EXPECT_THROW(build_portfolios(std::vector<DayHitRecord>{r}, std::vector<SessionSummary>{}, 6), DataError);
}

TEST(Counters, SingleDayTrace) {
    const auto d = ymd(2007, 3, 1);
    const std::vector<DayHitRecord> records{
        record("600000", d, Direction::up, HitWindow::am, {60, 30}, true, NextDayClass::continuation),
        record("600001", d, Direction::down, HitWindow::open, {10}, false, NextDayClass::reversal),
        record("600002", d, Direction::up, HitWindow::pm, {5}, false, NextDayClass::flat),
    };
    std::vector<SessionSummary> sessions;
    for (const char* id : {"600000", "600001", "600002", "600003"})
        sessions.push_back({StockId(id), d, 1000, 1000});
    const auto cal = RegimeCalendar::default_calendar();
    const auto book = build_portfolios(records, sessions, 6);
    const auto c = tabulate_counters(records, sessions, cal, book, {RegimeScope::whole, 0});
    EXPECT_EQ(c[Direction::up].N, 2);
    EXPECT_EQ(c[Direction::up].N_con, 1);
    EXPECT_EQ(c[Direction::up].N_am, 1);
    EXPECT_EQ(c[Direction::up].N_pm, 1);
    EXPECT_EQ(c[Direction::up].N_close, 1);
    EXPECT_EQ(c[Direction::up].N_close_con, 1);
    EXPECT_EQ(c[Direction::down].N, 1);
    EXPECT_EQ(c[Direction::down].N_rev, 1);
    EXPECT_EQ(c[Direction::down].N_open, 1);
    EXPECT_DOUBLE_EQ(*c.mean_N(Direction::up), 0.5);
    EXPECT_EQ(tabulate_counters(records, sessions, cal, book, {RegimeScope::bear, 0})[Direction::up].N, 0);
    EXPECT_FALSE(tabulate_counters(records, sessions, cal, book, {RegimeScope::bear, 0}).mean_N(Direction::up));

    // Partition identity over portfolios (three hit stocks, cap ties broken by id).
    DirectionCounters sum;
    for (int p = 1; p <= 6; ++p) sum.merge(tabulate_counters(records, sessions, cal, book, {RegimeScope::whole, p})[Direction::up]);
    EXPECT_EQ(sum, c[Direction::up]);
}

TEST(Counters, MergeIsAddition) {
    HitCounters a, b;
    const auto d = ymd(2007, 3, 1);
    a.add(record("600000", d, Direction::up, HitWindow::am, {60}, false, NextDayClass::continuation));
    b.add(record("600001", d, Direction::up, HitWindow::pm, {60}, true, NextDayClass::reversal));
    b.stocks.insert(StockId("600001"));
    a.merge(b);
    EXPECT_EQ(a[Direction::up].N, 2);
    EXPECT_EQ(a[Direction::up].N_close_rev, 1);
    EXPECT_EQ(a.stocks.size(), 1u);
}

TEST(PerStock, Means) {
    const auto d1 = ymd(2007, 3, 1), d2 = ymd(2007, 3, 2);
    const std::vector<DayHitRecord> records{
        record("600000", d1, Direction::up, HitWindow::am, {60, 30}, false, NextDayClass::flat),
        record("600000", d2, Direction::up, HitWindow::am, {10}, false, NextDayClass::flat),
    };
    std::vector<SessionSummary> sessions{{StockId("600000"), d1, 1000, 1},
                                         {StockId("600000"), d2, 1000, 1},
                                         {StockId("600000"), ymd(2007, 3, 5), 1000, 1},
                                         {StockId("600001"), d1, 1000, 1}};
    const auto stats = per_stock_stats(records, sessions);
    ASSERT_EQ(stats.size(), 2u);
    EXPECT_EQ(stats[0].T, 3);
    EXPECT_EQ(stats[0].K, 2);
    EXPECT_DOUBLE_EQ(stats[0].n, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(*stats[0].mean_M[0], 1.5);
    EXPECT_DOUBLE_EQ(*stats[0].mean_dt[0], 50.0);
    EXPECT_DOUBLE_EQ(*stats[0].mean_span[0], (150.0 + 10.0) / 2.0);
    EXPECT_FALSE(stats[0].mean_M[1]);
    EXPECT_EQ(stats[1].K, 0);
    EXPECT_DOUBLE_EQ(stats[1].n, 0.0);
}

TEST(Summary, MaxMeanMedian) {
    const auto odd = summarize({3, 1, 2});
    EXPECT_EQ(odd.count, 3u);
    EXPECT_EQ(*odd.max, 3);
    EXPECT_EQ(*odd.mean, 2);
    EXPECT_EQ(*odd.median, 2);
    const auto even = summarize({4, 1, 2, 10});
    EXPECT_EQ(*even.median, 3);
    EXPECT_EQ(*even.mean, 4.25);
    EXPECT_FALSE(summarize({}).max);
}

TEST(Table2, BothSpanVariants) {
    const auto d1 = ymd(2007, 3, 1), d2 = ymd(2007, 3, 2);
    const std::vector<DayHitRecord> records{
        record("600000", d1, Direction::up, HitWindow::am, {100}, false, NextDayClass::flat),
        record("600000", d2, Direction::up, HitWindow::am, {300}, false, NextDayClass::flat),
        record("600001", d1, Direction::up, HitWindow::am, {50}, false, NextDayClass::flat),
    };
    std::vector<SessionSummary> sessions{{StockId("600000"), d1, 1, 1}, {StockId("600000"), d2, 1, 1},
                                         {StockId("600001"), d1, 1, 2}};
    const auto rows = summarize_table2(records, RegimeCalendar::default_calendar(), build_portfolios(records, sessions), 6);
    ASSERT_EQ(rows.size(), 3u * 7u * 2u * 4u);
    auto find = [&](Table2Measure m) {
        for (const auto& r : rows)
            if (r.scope == Scope{RegimeScope::whole, 0} && r.direction == Direction::up && r.measure == m) return r.stats;
        return SummaryStats{};
    };
    EXPECT_EQ(*find(Table2Measure::daily_span).mean, 150.0);       // (100 + 300 + 50) / 3
    EXPECT_EQ(*find(Table2Measure::stock_span).mean, 125.0);       // (200 + 50) / 2
    EXPECT_EQ(*find(Table2Measure::daily_hits).max, 1.0);
    EXPECT_EQ(find(Table2Measure::daily_duration).count, 3u);
}

TEST(Intraday, BinEdges) {
    EXPECT_EQ(intraday_bin_index(hms(9, 25), 5), 0u);
    EXPECT_EQ(intraday_bin_index(hms(9, 30), 5), 0u);
    EXPECT_EQ(intraday_bin_index(hms(9, 35), 5), 0u);
    EXPECT_EQ(intraday_bin_index(hms(9, 35, 1), 5), 1u);
    EXPECT_EQ(intraday_bin_index(hms(11, 30), 5), 23u);
    EXPECT_EQ(intraday_bin_index(hms(13, 0), 5), 24u);
    EXPECT_EQ(intraday_bin_index(hms(13, 5), 5), 24u);
    EXPECT_EQ(intraday_bin_index(hms(15, 0), 5), 47u);
}

TEST(Intraday, CountsAndRegimeSplit) {
    const std::vector<DayHitRecord> records{
        record("600000", ymd(2007, 3, 1), Direction::up, HitWindow::am, {60}, false, NextDayClass::flat, hms(9, 40)),
        record("600000", ymd(2008, 3, 3), Direction::up, HitWindow::am, {60}, false, NextDayClass::flat, hms(9, 40)),
    };
    const auto p = intraday_pattern(records, RegimeCalendar::default_calendar(), 5);
    ASSERT_EQ(p.bins.size(), 48u);
    EXPECT_EQ(p.bins[1].count[0], 2);
    EXPECT_EQ(p.bins[1].count_bull[0], 1);
    EXPECT_EQ(p.bins[1].count_bear[0], 1);
    EXPECT_THROW(intraday_pattern(records, RegimeCalendar::default_calendar(), 7), ConfigError);
    std::ostringstream out;
    write_intraday_csv(out, p);
    EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "bin_start,C_u,C_d,C_u_bull,C_u_bear,C_d_bull,C_d_bear");
}
