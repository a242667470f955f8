#include "limitlab/aggregation.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <sstream>

namespace limitlab {

namespace {

using std::chrono::sys_days;

Date ymd(int y, unsigned m, unsigned d) {
    return Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
}

bool next_day(const Date& a, const Date& b) { return sys_days{a} + std::chrono::days{1} == sys_days{b}; }

}  // namespace

std::string_view to_string(Regime r) noexcept { return r == Regime::bull ? "bull" : "bear"; }

RegimeCalendar::RegimeCalendar(std::vector<RegimeInterval> intervals) : intervals_(std::move(intervals)) {
    if (intervals_.empty()) throw ConfigError("regime calendar is empty");
    for (std::size_t i = 0; i < intervals_.size(); ++i) {
        const auto& iv = intervals_[i];
        if (!iv.start.ok() || !iv.end.ok() || iv.end < iv.start)
            throw ConfigError("regime interval " + std::to_string(i + 1) + " is not a valid date range");
        if (i > 0 && !next_day(intervals_[i - 1].end, iv.start))
            throw ConfigError("regime calendar intervals must be ordered and contiguous (gap or overlap before " +
                              format_date(iv.start) + ")");
    }
}

RegimeCalendar RegimeCalendar::default_calendar() {
    return RegimeCalendar({
        {ymd(2000, 1, 4), ymd(2001, 6, 13), Regime::bull},
        {ymd(2001, 6, 14), ymd(2005, 6, 3), Regime::bear},
        {ymd(2005, 6, 4), ymd(2007, 10, 16), Regime::bull},
        {ymd(2007, 10, 17), ymd(2008, 10, 27), Regime::bear},
        {ymd(2008, 10, 28), ymd(2009, 8, 4), Regime::bull},
        {ymd(2009, 8, 5), ymd(2011, 12, 30), Regime::bear},
    });
}

RegimeCalendar RegimeCalendar::parse(std::string_view text) {
    std::vector<RegimeInterval> intervals;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto comma = text.find(',', pos);
        if (comma == std::string_view::npos) comma = text.size();
        auto item = text.substr(pos, comma - pos);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        if (!item.empty()) {
            const auto c1 = item.find(':');
            const auto c2 = c1 == std::string_view::npos ? c1 : item.find(':', c1 + 1);
            if (c2 == std::string_view::npos) throw ConfigError("bad regime interval '" + std::string(item) + "'");
            const auto start = parse_date(item.substr(0, c1));
            const auto end = parse_date(item.substr(c1 + 1, c2 - c1 - 1));
            const auto label = item.substr(c2 + 1);
            if (!start || !end || (label != "bull" && label != "bear"))
                throw ConfigError("bad regime interval '" + std::string(item) + "'");
            intervals.push_back({*start, *end, label == "bull" ? Regime::bull : Regime::bear});
        }
        pos = comma + 1;
    }
    return RegimeCalendar(std::move(intervals));
}

std::string RegimeCalendar::to_string() const {
    std::string out;
    for (const auto& iv : intervals_) {
        if (!out.empty()) out += ',';
        out += format_date(iv.start) + ':' + format_date(iv.end) + ':' + std::string(limitlab::to_string(iv.regime));
    }
    return out;
}

bool RegimeCalendar::covers(const Date& d) const noexcept {
    return !(d < intervals_.front().start) && !(intervals_.back().end < d);
}

Regime RegimeCalendar::regime_of(const Date& d) const {
    if (!covers(d)) throw ConfigError("date " + format_date(d) + " is outside the regime calendar");
    auto it = std::upper_bound(intervals_.begin(), intervals_.end(), d,
                               [](const Date& value, const RegimeInterval& iv) { return value < iv.start; });
    return std::prev(it)->regime;
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> PortfolioAssignment::sizes(int count) const {
    std::vector<std::size_t> out(static_cast<std::size_t>(count), 0);
    for (const auto& [stock, j] : portfolio) ++out[static_cast<std::size_t>(j - 1)];
    return out;
}

PortfolioAssignment assign_portfolios(const Date& date, std::vector<std::pair<StockId, std::int64_t>> stocks,
                                      int count) {
    if (count < 1) throw ConfigError("portfolio count must be positive");
    std::sort(stocks.begin(), stocks.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second < b.second;
        return a.first < b.first;
    });
    PortfolioAssignment out;
    out.date = date;
    const std::size_t n = stocks.size();
    const std::size_t groups = static_cast<std::size_t>(count);
    const std::size_t q = n / groups;
    const std::size_t s = n % groups;
    std::size_t next = 0;
    for (std::size_t g = 0; g < groups; ++g) {
        const std::size_t size = q + (g >= groups - s ? 1 : 0);
        for (std::size_t k = 0; k < size; ++k, ++next)
            out.portfolio.emplace(stocks[next].first, static_cast<int>(g + 1));
    }
    return out;
}

PortfolioBook build_portfolios(std::span<const DayHitRecord> records, std::span<const SessionSummary> sessions,
                               int count) {
    std::map<SessionKey, std::int64_t, SessionKeyLess> caps;
    for (const auto& s : sessions) caps.emplace(SessionKey{s.stock_id, s.date}, s.capitalization);

    std::map<Date, std::vector<std::pair<StockId, std::int64_t>>> by_date;
    for (const auto& r : records) {
        const auto it = caps.find({r.stock_id, r.date});
        if (it == caps.end())
            throw DataError("hit record without a session: " + r.stock_id.str() + " " + format_date(r.date));
        by_date[r.date].emplace_back(r.stock_id, it->second);
    }
    PortfolioBook book;
    for (auto& [date, stocks] : by_date) book.emplace(date, assign_portfolios(date, std::move(stocks), count));
    return book;
}

// ---------------------------------------------------------------------------

std::string_view to_string(RegimeScope r) noexcept {
    switch (r) {
        case RegimeScope::whole: return "whole";
        case RegimeScope::bull: return "bull";
        case RegimeScope::bear: break;
    }
    return "bear";
}

std::string Scope::label() const {
    return std::string(to_string(regime)) + (portfolio == 0 ? "_all" : "_p" + std::to_string(portfolio));
}

std::vector<Scope> all_scopes(int portfolio_count) {
    std::vector<Scope> out;
    for (auto r : kRegimeScopes)
        for (int j = 0; j <= portfolio_count; ++j) out.push_back({r, j});
    return out;
}

bool in_regime_scope(RegimeScope scope, Regime regime) noexcept {
    switch (scope) {
        case RegimeScope::whole: return true;
        case RegimeScope::bull: return regime == Regime::bull;
        case RegimeScope::bear: break;
    }
    return regime == Regime::bear;
}

void DirectionCounters::merge(const DirectionCounters& o) noexcept {
    N += o.N;
    N_con += o.N_con;
    N_rev += o.N_rev;
    N_open += o.N_open;
    N_am += o.N_am;
    N_pm += o.N_pm;
    N_close += o.N_close;
    N_close_con += o.N_close_con;
    N_close_rev += o.N_close_rev;
}

std::optional<double> HitCounters::mean_N(Direction d) const noexcept {
    if (stocks.empty()) return std::nullopt;
    return static_cast<double>((*this)[d].N) / static_cast<double>(stocks.size());
}

void HitCounters::add(const DayHitRecord& r) noexcept {
    auto& c = (*this)[r.direction];
    ++c.N;
    const bool con = r.next_day_class == NextDayClass::continuation;
    const bool rev = r.next_day_class == NextDayClass::reversal;
    c.N_con += con;
    c.N_rev += rev;
    switch (r.first_hit_window) {
        case HitWindow::open: ++c.N_open; break;
        case HitWindow::am: ++c.N_am; break;
        case HitWindow::pm: ++c.N_pm; break;
    }
    if (r.closed_at_limit) {
        ++c.N_close;
        c.N_close_con += con;
        c.N_close_rev += rev;
    }
}

void HitCounters::merge(const HitCounters& other) {
    for (std::size_t i = 0; i < by_direction.size(); ++i) by_direction[i].merge(other.by_direction[i]);
    stocks.insert(other.stocks.begin(), other.stocks.end());
}

HitCounters tabulate_counters(std::span<const DayHitRecord> records, std::span<const SessionSummary> sessions,
                              const RegimeCalendar& calendar, const PortfolioBook& portfolios, const Scope& scope) {
    HitCounters counters;
    for (const auto& s : sessions)
        if (in_regime_scope(scope.regime, calendar.regime_of(s.date))) counters.stocks.insert(s.stock_id);
    for (const auto& r : records) {
        if (!in_regime_scope(scope.regime, calendar.regime_of(r.date))) continue;
        if (scope.portfolio != 0) {
            const auto day = portfolios.find(r.date);
            if (day == portfolios.end()) throw DataError("no portfolio assignment for " + format_date(r.date));
            const auto it = day->second.portfolio.find(r.stock_id);
            if (it == day->second.portfolio.end() || it->second != scope.portfolio) continue;
        }
        counters.add(r);
    }
    return counters;
}

// ---------------------------------------------------------------------------

std::vector<StockHitStats> per_stock_stats(std::span<const DayHitRecord> records,
                                           std::span<const SessionSummary> sessions) {
    struct Acc {
        StockHitStats stats;
        std::array<std::int64_t, 2> sum_M{}, sum_dt{}, sum_span{};
    };
    std::map<StockId, Acc> acc;
    for (const auto& s : sessions) {
        auto& a = acc[s.stock_id];
        a.stats.stock_id = s.stock_id;
        ++a.stats.T;
    }
    for (const auto& r : records) {
        auto it = acc.find(r.stock_id);
        if (it == acc.end()) throw DataError("hit record without a session: " + r.stock_id.str());
        auto& a = it->second;
        ++a.stats.K;
        for (Direction d : kDirections) {
            if (!r.has(d)) continue;
            const auto i = index_of(d);
            ++a.stats.K_dir[i];
            a.sum_M[i] += static_cast<std::int64_t>(r.count(d));
            a.sum_dt[i] += r.total_duration[i];
            a.sum_span[i] += r.span[i];
        }
    }
    std::vector<StockHitStats> out;
    out.reserve(acc.size());
    for (auto& [stock, a] : acc) {
        auto& s = a.stats;
        const auto T = static_cast<double>(s.T);
        s.n = static_cast<double>(s.K) / T;
        for (std::size_t i = 0; i < 2; ++i) {
            s.n_dir[i] = static_cast<double>(s.K_dir[i]) / T;
            if (s.K_dir[i] == 0) continue;
            const auto K = static_cast<double>(s.K_dir[i]);
            s.mean_M[i] = static_cast<double>(a.sum_M[i]) / K;
            s.mean_dt[i] = static_cast<double>(a.sum_dt[i]) / K;
            s.mean_span[i] = static_cast<double>(a.sum_span[i]) / K;
        }
        out.push_back(s);
    }
    return out;
}

// ---------------------------------------------------------------------------

SummaryStats summarize(std::vector<double> values) {
    SummaryStats out;
    out.count = values.size();
    if (values.empty()) return out;
    std::sort(values.begin(), values.end());
    out.max = values.back();
    out.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    const std::size_t n = values.size();
    out.median = n % 2 == 1 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
    return out;
}

std::string_view to_string(Table2Measure m) noexcept {
    switch (m) {
        case Table2Measure::daily_hits: return "M";
        case Table2Measure::daily_duration: return "dt";
        case Table2Measure::stock_span: return "span_stock";
        case Table2Measure::daily_span: break;
    }
    return "span_day";
}

std::vector<Table2Row> summarize_table2(std::span<const DayHitRecord> records, const RegimeCalendar& calendar,
                                        const PortfolioBook& portfolios, int portfolio_count) {
    std::vector<Table2Row> rows;
    for (const auto& scope : all_scopes(portfolio_count)) {
        std::array<std::vector<double>, 2> hits, durations, spans;
        std::array<std::map<StockId, std::pair<std::int64_t, std::int64_t>>, 2> per_stock; // (sum, count)
        for (const auto& r : records) {
            if (!in_regime_scope(scope.regime, calendar.regime_of(r.date))) continue;
            if (scope.portfolio != 0) {
                const auto day = portfolios.find(r.date);
                if (day == portfolios.end()) continue;
                const auto it = day->second.portfolio.find(r.stock_id);
                if (it == day->second.portfolio.end() || it->second != scope.portfolio) continue;
            }
            for (Direction d : kDirections) {
                if (!r.has(d)) continue;
                const auto i = index_of(d);
                hits[i].push_back(static_cast<double>(r.count(d)));
                durations[i].push_back(static_cast<double>(r.total_duration[i]));
                spans[i].push_back(static_cast<double>(r.span[i]));
                auto& acc = per_stock[i][r.stock_id];
                acc.first += r.span[i];
                acc.second += 1;
            }
        }
        for (Direction d : kDirections) {
            const auto i = index_of(d);
            std::vector<double> stock_means;
            for (const auto& [stock, acc] : per_stock[i])
                stock_means.push_back(static_cast<double>(acc.first) / static_cast<double>(acc.second));
            rows.push_back({scope, d, Table2Measure::daily_hits, summarize(std::move(hits[i]))});
            rows.push_back({scope, d, Table2Measure::daily_duration, summarize(std::move(durations[i]))});
            rows.push_back({scope, d, Table2Measure::stock_span, summarize(std::move(stock_means))});
            rows.push_back({scope, d, Table2Measure::daily_span, summarize(std::move(spans[i]))});
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------

namespace {

void check_bins(int bin_minutes, const SessionWindows& w) {
    const Seconds width = bin_minutes * 60;
    if (bin_minutes <= 0 || (w.am_end - w.open_end) % width != 0 || (w.close - w.pm_start) % width != 0)
        throw ConfigError("intraday bin width must divide both continuous sessions");
}

Seconds ceil_div(Seconds a, Seconds b) { return (a + b - 1) / b; }

}  // namespace

std::size_t intraday_bin_index(Seconds t, int bin_minutes, const SessionWindows& w) {
    const Seconds width = bin_minutes * 60;
    const auto am_bins = static_cast<std::size_t>((w.am_end - w.open_end) / width);
    if (t <= w.open_end) return 0;
    if (t <= w.am_end) return static_cast<std::size_t>(ceil_div(t - w.open_end, width) - 1);
    if (t <= w.pm_start) return am_bins;
    return am_bins + static_cast<std::size_t>(ceil_div(t - w.pm_start, width) - 1);
}

IntradayPattern intraday_pattern(std::span<const DayHitRecord> records, const RegimeCalendar& calendar,
                                 int bin_minutes, const SessionWindows& w) {
    check_bins(bin_minutes, w);
    const Seconds width = bin_minutes * 60;
    IntradayPattern pattern;
    pattern.bin_minutes = bin_minutes;
    for (Seconds t = w.open_end; t < w.am_end; t += width) pattern.bins.push_back({t, {}, {}, {}});
    for (Seconds t = w.pm_start; t < w.close; t += width) pattern.bins.push_back({t, {}, {}, {}});

    for (const auto& r : records) {
        const Regime regime = calendar.regime_of(r.date);
        for (Direction d : kDirections) {
            if (!r.has(d)) continue;
            auto& bin = pattern.bins.at(intraday_bin_index(r.first_hit_time(d), bin_minutes, w));
            const auto i = index_of(d);
            ++bin.count[i];
            ++(regime == Regime::bull ? bin.count_bull : bin.count_bear)[i];
        }
    }
    return pattern;
}

// ---------------------------------------------------------------------------

void write_table1_csv(std::ostream& out, const std::vector<std::pair<Scope, HitCounters>>& counters) {
    std::string line = "measure";
    for (const auto& [scope, c] : counters)
        for (Direction d : kDirections) line += ',' + scope.label() + '_' + std::string(to_string(d));
    out << line << '\n';

    using Field = std::int64_t DirectionCounters::*;
    const std::array<Field, 9> fields{&DirectionCounters::N,       &DirectionCounters::N_con,
                                      &DirectionCounters::N_rev,   &DirectionCounters::N_open,
                                      &DirectionCounters::N_am,    &DirectionCounters::N_pm,
                                      &DirectionCounters::N_close, &DirectionCounters::N_close_con,
                                      &DirectionCounters::N_close_rev};
    for (std::size_t m = 0; m < kTable1Measures.size(); ++m) {
        line = std::string(kTable1Measures[m]);
        for (const auto& [scope, c] : counters) {
            for (Direction d : kDirections) {
                line += ',';
                if (m == 1) line += format_optional(c.mean_N(d));
                else line += std::to_string(c[d].*fields[m == 0 ? 0 : m - 1]);
            }
        }
        out << line << '\n';
    }
}

void write_table2_csv(std::ostream& out, const std::vector<Table2Row>& rows) {
    out << "scope,direction,measure,count,max,mean,median\n";
    for (const auto& r : rows) {
        out << r.scope.label() << ',' << to_string(r.direction) << ',' << to_string(r.measure) << ','
            << r.stats.count << ',' << format_optional(r.stats.max) << ',' << format_optional(r.stats.mean) << ','
            << format_optional(r.stats.median) << '\n';
    }
}

void write_per_stock_csv(std::ostream& out, const std::vector<StockHitStats>& stats) {
    out << "stock_id,T,K,K_u,K_d,n,n_u,n_d,M_u,M_d,dt_u,dt_d,span_u,span_d\n";
    for (const auto& s : stats) {
        out << s.stock_id.view() << ',' << s.T << ',' << s.K << ',' << s.K_dir[0] << ',' << s.K_dir[1] << ','
            << format_real(s.n) << ',' << format_real(s.n_dir[0]) << ',' << format_real(s.n_dir[1]) << ','
            << format_optional(s.mean_M[0]) << ',' << format_optional(s.mean_M[1]) << ','
            << format_optional(s.mean_dt[0]) << ',' << format_optional(s.mean_dt[1]) << ','
            << format_optional(s.mean_span[0]) << ',' << format_optional(s.mean_span[1]) << '\n';
    }
}

void write_intraday_csv(std::ostream& out, const IntradayPattern& pattern) {
    out << "bin_start,C_u,C_d,C_u_bull,C_u_bear,C_d_bull,C_d_bear\n";
    for (const auto& b : pattern.bins) {
        out << format_hhmm(b.start) << ',' << b.count[0] << ',' << b.count[1] << ',' << b.count_bull[0] << ','
            << b.count_bear[0] << ',' << b.count_bull[1] << ',' << b.count_bear[1] << '\n';
    }
}

}  // namespace limitlab
