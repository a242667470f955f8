#include "limitlab/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include <json.hpp>

namespace limitlab {

using nlohmann::json;

namespace {

// Trading-time coordinate: the midday halt collapses to a single instant.
struct TradingAxis {
    SessionWindows w;
    Seconds halt() const noexcept { return w.pm_start - w.am_end; }
    Seconds to(Seconds t) const noexcept { return t >= w.pm_start ? t - halt() : t; }
    Seconds from(Seconds tau) const noexcept { return tau <= w.am_end ? tau : tau + halt(); }
};

NextDayClass expected_class(Direction d, NextDayRelation rel) {
    switch (rel) {
        case NextDayRelation::higher: return d == Direction::up ? NextDayClass::continuation : NextDayClass::reversal;
        case NextDayRelation::lower: return d == Direction::up ? NextDayClass::reversal : NextDayClass::continuation;
        case NextDayRelation::equal: return NextDayClass::flat;
        case NextDayRelation::halt: break;
    }
    return NextDayClass::unavailable;
}

DayHitRecord expected_record(const TruthDay& day, const SessionWindows& w) {
    const TradingAxis axis{w};
    DayHitRecord r;
    r.stock_id = day.stock;
    r.date = day.date;
    for (const auto& s : day.segments) {
        HitSegment seg;
        seg.direction = s.direction;
        seg.start_time = s.start;
        seg.ends_at_close = !s.duration.has_value();
        seg.end_time = s.duration ? axis.from(axis.to(s.start) + *s.duration) : w.close;
        seg.duration = axis.to(seg.end_time) - axis.to(seg.start_time);
        r.segments[index_of(s.direction)].push_back(seg);
    }
    for (Direction d : kDirections) {
        const auto& segs = r.segments[index_of(d)];
        if (segs.empty()) continue;
        for (const auto& s : segs) r.total_duration[index_of(d)] += s.duration;
        r.span[index_of(d)] = axis.to(segs.back().end_time) - axis.to(segs.front().start_time);
    }
    const auto& first = day.segments.front();
    r.direction = first.direction;
    r.first_hit_window = first.start <= w.open_end ? HitWindow::open
                         : first.start <= w.am_end ? HitWindow::am
                                                   : HitWindow::pm;
    if (!day.segments.back().duration) r.close_direction = day.segments.back().direction;
    r.closed_at_limit = r.close_direction.has_value();
    r.next_day_class = expected_class(r.direction, day.next_day);
    return r;
}

struct Session {
    StockId stock;
    Date date;
    std::int64_t cap = 0;
    Regime regime = Regime::bear;
};

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

SummaryStats stats_of_ints(const std::vector<std::int64_t>& values) {
    SummaryStats s;
    s.count = values.size();
    if (values.empty()) return s;
    std::int64_t sum = 0, mx = values.front();
    for (auto v : values) {
        sum += v;
        mx = std::max(mx, v);
    }
    s.max = static_cast<double>(mx);
    s.mean = static_cast<double>(sum) / static_cast<double>(values.size());
    std::vector<double> d(values.begin(), values.end());
    s.median = median_of(std::move(d));
    return s;
}

SummaryStats stats_of_reals(std::vector<double> values) {
    SummaryStats s;
    s.count = values.size();
    if (values.empty()) return s;
    s.max = *std::max_element(values.begin(), values.end());
    double sum = 0.0;
    std::sort(values.begin(), values.end());
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    s.median = median_of(std::move(values));
    return s;
}

PrehitResult expected_prehit(std::vector<const PrehitEvent*> events, const PrehitConfig& cfg) {
    std::sort(events.begin(), events.end(), [](const PrehitEvent* a, const PrehitEvent* b) {
        return std::tie(a->stock_id, a->date, a->direction) < std::tie(b->stock_id, b->date, b->direction);
    });
    const auto n_sub = static_cast<std::size_t>(cfg.velocity_subintervals);
    const auto window = static_cast<std::size_t>(cfg.event_window);
    PrehitResult out;
    for (const char* key : {"opening_hit", "velocity_gap_open", "velocity_zero_duration", "study_short_history",
                            "study_unknown_direction", "study_spread_missing"})
        out.exclusions[key] = 0;

    for (auto cls : kPrehitClasses) {
        const auto c = index_of(cls);
        auto& vp = out.velocity[c];
        vp.cls = cls;
        vp.mean_share.assign(n_sub, 0.0);
        vp.V.assign(n_sub, std::nullopt);
        auto& es = out.event_study[c];
        es.cls = cls;
        es.points.assign(window, {});

        std::vector<std::vector<double>> shares; // per event
        std::vector<const PrehitEvent*> study;
        for (const auto* e : events) {
            if (e->cls != cls) continue;
            if (e->velocity_exclusion == VelocityExclusion::none) {
                Seconds total = 0;
                for (auto dt : e->durations) total += dt;
                std::vector<double> sh;
                for (auto dt : e->durations) sh.push_back(static_cast<double>(dt) / static_cast<double>(total));
                shares.push_back(std::move(sh));
            }
            if (e->study_exclusion == StudyExclusion::none) study.push_back(e);
        }
        vp.n_events = shares.size();
        for (std::size_t m = 0; m < n_sub && !shares.empty(); ++m) {
            double sum = 0.0;
            for (const auto& sh : shares) sum += sh[m];
            vp.mean_share[m] = sum / static_cast<double>(shares.size());
            vp.V[m] = 1.0 / vp.mean_share[m];
        }

        es.n_events = study.size();
        for (const auto* e : study) out.s_plus_last[c].push_back(e->points.back().log_size);
        for (std::size_t k = 0; k < window; ++k) {
            auto& p = es.points[k];
            double R = 0, v = 0, sp = 0, sm = 0, S = 0;
            for (const auto* e : study) {
                const auto& q = e->points[k];
                ++p.n_contributing;
                R += q.log_return;
                v += std::fabs(q.log_return);
                if (q.role == TradeRole::same) {
                    sp += q.log_size;
                    ++p.n_plus;
                } else if (q.role == TradeRole::opposite) {
                    sm += q.log_size;
                    ++p.n_minus;
                } else {
                    ++p.n_unknown;
                }
                if (q.spread) {
                    S += *q.spread;
                    ++p.n_spread;
                }
            }
            if (p.n_contributing == 0) continue;
            p.R = R / static_cast<double>(p.n_contributing);
            p.v = v / static_cast<double>(p.n_contributing);
            if (p.n_plus) p.s_plus = sp / static_cast<double>(p.n_plus);
            if (p.n_minus) p.s_minus = sm / static_cast<double>(p.n_minus);
            if (p.n_spread) p.S = S / static_cast<double>(p.n_spread);
        }
        if (window > 0) es.points.back().s_minus = 0.0;
        for (const auto& p : es.points) {
            out.exclusions["study_unknown_direction"] += static_cast<std::int64_t>(p.n_unknown);
            out.exclusions["study_spread_missing"] += static_cast<std::int64_t>(p.n_contributing - p.n_spread);
        }
    }
    for (const auto* e : events) {
        if (e->velocity_exclusion == VelocityExclusion::opening_hit) ++out.exclusions["opening_hit"];
        if (e->velocity_exclusion == VelocityExclusion::gap_open) ++out.exclusions["velocity_gap_open"];
        if (e->velocity_exclusion == VelocityExclusion::zero_duration) ++out.exclusions["velocity_zero_duration"];
        if (e->study_exclusion == StudyExclusion::short_history) ++out.exclusions["study_short_history"];
    }
    return out;
}

}  // namespace

TruthManifest derive_manifest(const ScenarioSpec& spec, const std::vector<TruthDay>& days) {
    const auto& w = spec.prehit.windows;
    const int P = spec.portfolio_count;
    if (P < 1) throw ConfigError("portfolio count must be positive");
    TruthManifest m;
    m.seed = spec.seed;

    std::vector<Session> sessions;
    std::vector<const TruthDay*> hit_days;
    for (const auto& d : days) {
        m.file_rows["ticks_" + d.stock.str() + ".csv"] += d.records;
        m.rows_total += d.records;
        ++m.sessions_total;
        if (d.scripted) m.complete = false;
        if (d.is_ipo_day || d.is_ex_dividend_day) {
            ++m.sessions_excluded;
            continue;
        }
        sessions.push_back({d.stock, d.date, d.prev_close * d.shares_outstanding, spec.calendar.regime_of(d.date)});
        if (!d.scripted && !d.segments.empty()) hit_days.push_back(&d);
    }
    m.planted_hits = hit_days.size();
    for (const auto* d : hit_days) m.hits.push_back(expected_record(*d, w));
    std::sort(m.hits.begin(), m.hits.end(),
              [](const auto& a, const auto& b) { return std::tie(a.stock_id, a.date) < std::tie(b.stock_id, b.date); });

    // Portfolio of each hit record: rank among that date's hit stocks by
    // (capitalization, id); the first P - s groups hold q members.
    std::map<SessionKey, std::int64_t, SessionKeyLess> cap;
    std::map<SessionKey, Regime, SessionKeyLess> regime;
    for (const auto& s : sessions) {
        cap[{s.stock, s.date}] = s.cap;
        regime[{s.stock, s.date}] = s.regime;
    }
    std::map<Date, std::vector<std::pair<std::int64_t, StockId>>> by_date;
    for (const auto& r : m.hits) by_date[r.date].emplace_back(cap.at({r.stock_id, r.date}), r.stock_id);
    std::map<SessionKey, int, SessionKeyLess> group;
    for (auto& [date, list] : by_date) {
        std::sort(list.begin(), list.end());
        const auto n = static_cast<std::int64_t>(list.size());
        const std::int64_t q = n / P, s = n % P;
        const std::int64_t small = (P - s) * q; // members in the q-sized groups
        for (std::int64_t rank = 0; rank < n; ++rank) {
            const std::int64_t g = rank < small ? rank / q : (P - s) + (rank - small) / (q + 1);
            group[{list[static_cast<std::size_t>(rank)].second, date}] = static_cast<int>(g + 1);
        }
    }

    auto in_scope = [&](const Scope& sc, const DayHitRecord& r) {
        const Regime rg = regime.at({r.stock_id, r.date});
        if (sc.regime == RegimeScope::bull && rg != Regime::bull) return false;
        if (sc.regime == RegimeScope::bear && rg != Regime::bear) return false;
        return sc.portfolio == 0 || group.at({r.stock_id, r.date}) == sc.portfolio;
    };

    for (auto rs : kRegimeScopes) {
        for (int p = 0; p <= P; ++p) {
            const Scope sc{rs, p};
            HitCounters c;
            for (const auto& s : sessions)
                if (rs == RegimeScope::whole || (rs == RegimeScope::bull) == (s.regime == Regime::bull))
                    c.stocks.insert(s.stock);
            for (const auto& r : m.hits) {
                if (!in_scope(sc, r)) continue;
                auto& dc = c.by_direction[index_of(r.direction)];
                const std::int64_t con = r.next_day_class == NextDayClass::continuation;
                const std::int64_t rev = r.next_day_class == NextDayClass::reversal;
                dc.N += 1;
                dc.N_con += con;
                dc.N_rev += rev;
                dc.N_open += r.first_hit_window == HitWindow::open;
                dc.N_am += r.first_hit_window == HitWindow::am;
                dc.N_pm += r.first_hit_window == HitWindow::pm;
                if (r.closed_at_limit) {
                    dc.N_close += 1;
                    dc.N_close_con += con;
                    dc.N_close_rev += rev;
                }
            }
            m.table1.emplace_back(sc, std::move(c));

            for (Direction d : kDirections) {
                const auto i = index_of(d);
                std::vector<std::int64_t> M, dt, span;
                std::map<StockId, std::pair<std::int64_t, std::int64_t>> per;
                for (const auto& r : m.hits) {
                    if (!in_scope(sc, r) || !r.has(d)) continue;
                    M.push_back(static_cast<std::int64_t>(r.count(d)));
                    dt.push_back(r.total_duration[i]);
                    span.push_back(r.span[i]);
                    per[r.stock_id].first += r.span[i];
                    per[r.stock_id].second += 1;
                }
                std::vector<double> stock_means;
                for (const auto& [id, acc] : per)
                    stock_means.push_back(static_cast<double>(acc.first) / static_cast<double>(acc.second));
                m.table2.push_back({sc, d, Table2Measure::daily_hits, stats_of_ints(M)});
                m.table2.push_back({sc, d, Table2Measure::daily_duration, stats_of_ints(dt)});
                m.table2.push_back({sc, d, Table2Measure::stock_span, stats_of_reals(std::move(stock_means))});
                m.table2.push_back({sc, d, Table2Measure::daily_span, stats_of_ints(span)});
            }
        }
    }

    // Per-stock statistics.
    std::map<StockId, StockHitStats> per;
    std::map<StockId, std::array<std::array<std::int64_t, 3>, 2>> sums;
    for (const auto& s : sessions) {
        per[s.stock].stock_id = s.stock;
        ++per[s.stock].T;
    }
    for (const auto& r : m.hits) {
        auto& st = per.at(r.stock_id);
        ++st.K;
        for (Direction d : kDirections) {
            if (!r.has(d)) continue;
            const auto i = index_of(d);
            ++st.K_dir[i];
            sums[r.stock_id][i][0] += static_cast<std::int64_t>(r.count(d));
            sums[r.stock_id][i][1] += r.total_duration[i];
            sums[r.stock_id][i][2] += r.span[i];
        }
    }
    for (auto& [id, st] : per) {
        st.n = static_cast<double>(st.K) / static_cast<double>(st.T);
        for (std::size_t i = 0; i < 2; ++i) {
            st.n_dir[i] = static_cast<double>(st.K_dir[i]) / static_cast<double>(st.T);
            if (st.K_dir[i] == 0) continue;
            const auto& sm = sums[id][i];
            const auto K = static_cast<double>(st.K_dir[i]);
            st.mean_M[i] = static_cast<double>(sm[0]) / K;
            st.mean_dt[i] = static_cast<double>(sm[1]) / K;
            st.mean_span[i] = static_cast<double>(sm[2]) / K;
        }
        m.per_stock.push_back(st);
    }

    // Intraday pattern: bins of width b minutes over (open_end, am_end] and
    // (pm_start, close]; opening hits fall in the first bin and a hit at
    // exactly pm_start in the first afternoon bin.
    const Seconds width = spec.intraday_bin_minutes * 60;
    if (width <= 0 || (w.am_end - w.open_end) % width || (w.close - w.pm_start) % width)
        throw ConfigError("intraday bin width must divide both continuous sessions");
    const Seconds am_bins = (w.am_end - w.open_end) / width;
    m.intraday.bin_minutes = spec.intraday_bin_minutes;
    for (Seconds b = 0; b < am_bins; ++b) m.intraday.bins.push_back({w.open_end + b * width, {}, {}, {}});
    for (Seconds b = 0; b < (w.close - w.pm_start) / width; ++b)
        m.intraday.bins.push_back({w.pm_start + b * width, {}, {}, {}});
    for (const auto& r : m.hits) {
        for (Direction d : kDirections) {
            if (!r.has(d)) continue;
            const Seconds t = r.first_hit_time(d);
            Seconds idx;
            if (t <= w.open_end) idx = 0;
            else if (t <= w.am_end) idx = static_cast<Seconds>(std::ceil((t - w.open_end) / double(width))) - 1;
            else if (t <= w.pm_start) idx = am_bins;
            else idx = am_bins + static_cast<Seconds>(std::ceil((t - w.pm_start) / double(width))) - 1;
            auto& bin = m.intraday.bins.at(static_cast<std::size_t>(idx));
            const auto i = index_of(d);
            ++bin.count[i];
            ++(regime.at({r.stock_id, r.date}) == Regime::bull ? bin.count_bull : bin.count_bear)[i];
        }
    }

    std::vector<const PrehitEvent*> events;
    for (const auto* d : hit_days)
        for (const auto& e : d->events) events.push_back(&e.expected);
    m.prehit = expected_prehit(std::move(events), spec.prehit);
    return m;
}

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json stats_json(const SummaryStats& s) {
    return {{"count", s.count}, {"max", opt(s.max)}, {"mean", opt(s.mean)}, {"median", opt(s.median)}};
}

}  // namespace

std::string manifest_to_json(const TruthManifest& m) {
    json doc;
    doc["seed"] = m.seed;
    doc["complete"] = m.complete;
    doc["files"] = m.file_rows;
    doc["rows_total"] = m.rows_total;
    doc["sessions_total"] = m.sessions_total;
    doc["sessions_excluded"] = m.sessions_excluded;
    doc["planted_hits"] = m.planted_hits;

    auto& hits = doc["hits"] = json::array();
    for (const auto& r : m.hits) {
        json h = {{"stock", r.stock_id.str()},
                  {"date", format_date(r.date)},
                  {"direction", std::string(to_string(r.direction))},
                  {"M", {r.count(Direction::up), r.count(Direction::down)}},
                  {"dt", r.total_duration},
                  {"span", r.span},
                  {"window", std::string(to_string(r.first_hit_window))},
                  {"closed_at_limit", r.closed_at_limit},
                  {"next_day", std::string(to_string(r.next_day_class))}};
        auto& segs = h["segments"] = json::array();
        for (Direction d : kDirections)
            for (const auto& s : r.segments[index_of(d)])
                segs.push_back({{"direction", std::string(to_string(d))},
                                {"start", format_time(s.start_time)},
                                {"end", format_time(s.end_time)},
                                {"duration", s.duration},
                                {"to_close", s.ends_at_close}});
        hits.push_back(std::move(h));
    }

    auto& t1 = doc["table1"] = json::object();
    for (const auto& [scope, c] : m.table1) {
        json entry;
        for (Direction d : kDirections) {
            const auto& x = c[d];
            entry[std::string(to_string(d))] = {{"N", x.N},         {"mean_N", opt(c.mean_N(d))},
                                                {"N_con", x.N_con}, {"N_rev", x.N_rev},
                                                {"N_open", x.N_open}, {"N_am", x.N_am},
                                                {"N_pm", x.N_pm},   {"N_close", x.N_close},
                                                {"N_close_con", x.N_close_con}, {"N_close_rev", x.N_close_rev}};
        }
        entry["stocks"] = c.stocks.size();
        t1[scope.label()] = std::move(entry);
    }

    auto& t2 = doc["table2"] = json::array();
    for (const auto& r : m.table2)
        t2.push_back({{"scope", r.scope.label()},
                      {"direction", std::string(to_string(r.direction))},
                      {"measure", std::string(to_string(r.measure))},
                      {"stats", stats_json(r.stats)}});

    auto& ps = doc["per_stock"] = json::array();
    for (const auto& s : m.per_stock)
        ps.push_back({{"stock", s.stock_id.str()},
                      {"T", s.T},
                      {"K", s.K},
                      {"K_dir", s.K_dir},
                      {"n", s.n},
                      {"n_dir", s.n_dir},
                      {"mean_M", {opt(s.mean_M[0]), opt(s.mean_M[1])}},
                      {"mean_dt", {opt(s.mean_dt[0]), opt(s.mean_dt[1])}},
                      {"mean_span", {opt(s.mean_span[0]), opt(s.mean_span[1])}}});

    auto& id = doc["intraday"] = json::array();
    for (const auto& b : m.intraday.bins)
        id.push_back({{"bin_start", format_hhmm(b.start)},
                      {"count", b.count},
                      {"bull", b.count_bull},
                      {"bear", b.count_bear}});

    auto& ph = doc["prehit"];
    ph["exclusions"] = m.prehit.exclusions;
    for (auto cls : kPrehitClasses) {
        const auto c = index_of(cls);
        const auto& vp = m.prehit.velocity[c];
        json V = json::array();
        for (const auto& v : vp.V) V.push_back(opt(v));
        auto& entry = ph["classes"][std::string(to_string(cls))];
        entry["velocity"] = {{"n_events", vp.n_events}, {"V", V}};
        const auto& es = m.prehit.event_study[c];
        json pts = json::array();
        for (const auto& p : es.points)
            pts.push_back({{"s_plus", opt(p.s_plus)},
                           {"s_minus", opt(p.s_minus)},
                           {"R", p.n_contributing ? json(p.R) : json(nullptr)},
                           {"v", p.n_contributing ? json(p.v) : json(nullptr)},
                           {"S", opt(p.S)},
                           {"n", p.n_contributing}});
        entry["event_study"] = {{"n_events", es.n_events}, {"points", pts}};
    }
    return doc.dump(1);
}

}  // namespace limitlab
