#include "limitlab/prehit.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <tuple>

namespace limitlab {

std::string_view to_string(PrehitClass c) noexcept {
    switch (c) {
        case PrehitClass::up_bull: return "up_bull";
        case PrehitClass::up_bear: return "up_bear";
        case PrehitClass::down_bull: return "down_bull";
        case PrehitClass::down_bear: break;
    }
    return "down_bear";
}

PrehitClass prehit_class(Direction d, Regime r) noexcept {
    if (d == Direction::up) return r == Regime::bull ? PrehitClass::up_bull : PrehitClass::up_bear;
    return r == Regime::bull ? PrehitClass::down_bull : PrehitClass::down_bear;
}

std::vector<Cents> velocity_thresholds(Cents prev_close, Direction d, const PrehitConfig& config) {
    const auto limits = compute_limit_prices(prev_close, config.rule);
    const std::int64_t n = config.velocity_subintervals;
    if (n < 1 || config.velocity_start_bp <= 0 || config.velocity_start_bp >= config.rule.fraction_bp)
        throw ConfigError("velocity thresholds need 0 < start < limit fraction and at least one subinterval");
    const std::int64_t denom = 10000 * n;
    std::vector<Cents> out;
    out.reserve(static_cast<std::size_t>(n + 1));
    for (std::int64_t m = 0; m < n; ++m) {
        const std::int64_t level = config.velocity_start_bp * n + (config.rule.fraction_bp - config.velocity_start_bp) * m;
        if (d == Direction::up) {
            const std::int64_t num = prev_close * (denom + level);
            out.push_back(std::min((num + denom - 1) / denom, limits.up_limit));
        } else {
            const std::int64_t num = prev_close * (denom - level);
            out.push_back(std::max(num / denom, limits.down_limit));
        }
    }
    out.push_back(d == Direction::up ? limits.up_limit : limits.down_limit);
    return out;
}

namespace {

bool reached(Cents price, Cents threshold, Direction d) noexcept {
    return d == Direction::up ? price >= threshold : price <= threshold;
}

void fill_velocity(PrehitEvent& ev, const StockDaySession& session, std::size_t hit_index, const PrehitConfig& config) {
    const auto thresholds = velocity_thresholds(session.prev_close, ev.direction, config);
    const auto n = thresholds.size() - 1;

    const auto first_trade = std::find_if(session.ticks.begin(), session.ticks.end(),
                                          [](const TickRecord& t) { return t.has_trade(); });
    if (first_trade == session.ticks.end() || reached(first_trade->trade_price, thresholds[0], ev.direction)) {
        ev.velocity_exclusion = VelocityExclusion::gap_open;
        return;
    }

    std::vector<Seconds> crossing(n + 1, ev.hit_time);
    std::size_t m = 0;
    for (std::size_t i = 0; i <= hit_index && m < n; ++i) {
        const auto& t = session.ticks[i];
        if (!t.has_trade()) continue;
        while (m < n && reached(t.trade_price, thresholds[m], ev.direction)) crossing[m++] = t.timestamp;
    }

    ev.durations.resize(n);
    Seconds total = 0;
    for (std::size_t j = 0; j < n; ++j) {
        ev.durations[j] = elapsed(crossing[j], crossing[j + 1], config.windows, config.clock);
        total += ev.durations[j];
    }
    if (total == 0) {
        ev.durations.clear();
        ev.velocity_exclusion = VelocityExclusion::zero_duration;
    }
}

void fill_study(PrehitEvent& ev, const StockDaySession& session, std::size_t hit_index, const PrehitConfig& config) {
    std::vector<std::size_t> trades;
    for (std::size_t i = 0; i <= hit_index; ++i)
        if (session.ticks[i].has_trade()) trades.push_back(i);
    const auto window = static_cast<std::size_t>(config.event_window);
    if (trades.size() < window + 1) {
        ev.study_exclusion = StudyExclusion::short_history;
        return;
    }
    const std::size_t base = trades.size() - window - 1;
    const TradeSide same = ev.direction == Direction::up ? TradeSide::buyer_initiated : TradeSide::seller_initiated;
    ev.points.resize(window);
    for (std::size_t k = 1; k <= window; ++k) {
        const std::size_t idx = trades[base + k];
        const auto& tick = session.ticks[idx];
        const Cents prev_price = session.ticks[trades[base + k - 1]].trade_price;
        const LobSnapshot* prev_lob = idx > 0 ? &session.ticks[idx - 1].lob : nullptr;

        auto& p = ev.points[k - 1];
        p.log_size = std::log(static_cast<double>(tick.trade_volume));
        p.log_return = std::log(static_cast<double>(tick.trade_price)) - std::log(static_cast<double>(prev_price));
        if (k == window) {
            p.role = TradeRole::same;
        } else {
            const auto side = classify_trade_direction(tick, prev_lob, prev_price);
            p.role = side == TradeSide::unknown ? TradeRole::unknown
                     : side == same              ? TradeRole::same
                                                 : TradeRole::opposite;
        }
        if (prev_lob) {
            const auto a = prev_lob->best_ask();
            const auto b = prev_lob->best_bid();
            if (a && b) p.spread = static_cast<double>(*a - *b) / (0.5 * static_cast<double>(*a + *b));
        }
    }
}

}  // namespace

std::vector<PrehitEvent> extract_prehit_events(const StockDaySession& session, const DayHitRecord& record,
                                               Regime regime, const PrehitConfig& config) {
    std::vector<PrehitEvent> out;
    for (Direction d : kDirections) {
        if (!record.has(d)) continue;
        const auto& seg = record.segments[index_of(d)].front();
        PrehitEvent ev;
        ev.stock_id = record.stock_id;
        ev.date = record.date;
        ev.direction = d;
        ev.cls = prehit_class(d, regime);
        ev.hit_time = seg.start_time;
        if (seg.start_time <= config.windows.open_end) {
            ev.velocity_exclusion = VelocityExclusion::opening_hit;
            ev.study_exclusion = StudyExclusion::opening_hit;
        } else {
            fill_velocity(ev, session, seg.start_index, config);
            fill_study(ev, session, seg.start_index, config);
        }
        out.push_back(std::move(ev));
    }
    return out;
}

PrehitResult accumulate_prehit(std::vector<PrehitEvent> events, const PrehitConfig& config) {
    std::sort(events.begin(), events.end(), [](const PrehitEvent& a, const PrehitEvent& b) {
        return std::tie(a.stock_id, a.date, a.direction) < std::tie(b.stock_id, b.date, b.direction);
    });
    const auto n_sub = static_cast<std::size_t>(config.velocity_subintervals);
    const auto window = static_cast<std::size_t>(config.event_window);

    struct StudyAcc {
        double sum_plus = 0, sum_minus = 0, sum_R = 0, sum_v = 0, sum_S = 0;
        std::size_t n = 0, n_plus = 0, n_minus = 0, n_unknown = 0, n_spread = 0;
    };
    std::array<std::vector<double>, 4> share_sum;
    std::array<std::size_t, 4> velocity_n{};
    std::array<std::vector<StudyAcc>, 4> study;
    std::array<std::size_t, 4> study_n{};
    for (std::size_t c = 0; c < 4; ++c) {
        share_sum[c].assign(n_sub, 0.0);
        study[c].assign(window, {});
    }

    PrehitResult result;
    auto& ex = result.exclusions;
    for (const char* key : {"opening_hit", "velocity_gap_open", "velocity_zero_duration", "study_short_history",
                            "study_unknown_direction", "study_spread_missing"})
        ex[key] = 0;

    for (const auto& ev : events) {
        const auto c = index_of(ev.cls);
        if (ev.velocity_exclusion == VelocityExclusion::opening_hit) ++ex["opening_hit"];
        if (ev.velocity_exclusion == VelocityExclusion::gap_open) ++ex["velocity_gap_open"];
        if (ev.velocity_exclusion == VelocityExclusion::zero_duration) ++ex["velocity_zero_duration"];
        if (ev.study_exclusion == StudyExclusion::short_history) ++ex["study_short_history"];

        if (ev.velocity_exclusion == VelocityExclusion::none) {
            Seconds total = 0;
            for (auto dt : ev.durations) total += dt;
            for (std::size_t m = 0; m < n_sub; ++m)
                share_sum[c][m] += static_cast<double>(ev.durations[m]) / static_cast<double>(total);
            ++velocity_n[c];
        }
        if (ev.study_exclusion == StudyExclusion::none) {
            ++study_n[c];
            result.s_plus_last[c].push_back(ev.points.back().log_size);
            for (std::size_t k = 0; k < window; ++k) {
                const auto& p = ev.points[k];
                auto& a = study[c][k];
                ++a.n;
                a.sum_R += p.log_return;
                a.sum_v += std::abs(p.log_return);
                switch (p.role) {
                    case TradeRole::same:
                        a.sum_plus += p.log_size;
                        ++a.n_plus;
                        break;
                    case TradeRole::opposite:
                        a.sum_minus += p.log_size;
                        ++a.n_minus;
                        break;
                    case TradeRole::unknown:
                        ++a.n_unknown;
                        ++ex["study_unknown_direction"];
                        break;
                }
                if (p.spread) {
                    a.sum_S += *p.spread;
                    ++a.n_spread;
                } else {
                    ++ex["study_spread_missing"];
                }
            }
        }
    }

    for (auto cls : kPrehitClasses) {
        const auto c = index_of(cls);
        auto& vp = result.velocity[c];
        vp.cls = cls;
        vp.n_events = velocity_n[c];
        vp.mean_share.assign(n_sub, 0.0);
        vp.V.assign(n_sub, std::nullopt);
        if (vp.n_events > 0) {
            for (std::size_t m = 0; m < n_sub; ++m) {
                vp.mean_share[m] = share_sum[c][m] / static_cast<double>(vp.n_events);
                vp.V[m] = 1.0 / vp.mean_share[m];
            }
        }

        auto& es = result.event_study[c];
        es.cls = cls;
        es.n_events = study_n[c];
        es.points.resize(window);
        for (std::size_t k = 0; k < window; ++k) {
            const auto& a = study[c][k];
            auto& p = es.points[k];
            p.n_contributing = a.n;
            p.n_plus = a.n_plus;
            p.n_minus = a.n_minus;
            p.n_unknown = a.n_unknown;
            p.n_spread = a.n_spread;
            if (a.n == 0) continue;
            p.R = a.sum_R / static_cast<double>(a.n);
            p.v = a.sum_v / static_cast<double>(a.n);
            if (a.n_plus > 0) p.s_plus = a.sum_plus / static_cast<double>(a.n_plus);
            if (a.n_minus > 0) p.s_minus = a.sum_minus / static_cast<double>(a.n_minus);
            if (a.n_spread > 0) p.S = a.sum_S / static_cast<double>(a.n_spread);
        }
        if (!es.points.empty()) es.points.back().s_minus = 0.0;
    }
    return result;
}

void write_velocity_csv(std::ostream& out, const VelocityProfile& profile) {
    out << "m,V_m,mean_share,n_events\n";
    for (std::size_t m = 0; m < profile.V.size(); ++m) {
        out << m << ',' << format_optional(profile.V[m]) << ','
            << (profile.n_events > 0 ? format_real(profile.mean_share[m]) : std::string()) << ',' << profile.n_events
            << '\n';
    }
}

void write_event_study_csv(std::ostream& out, const EventStudySeries& series) {
    out << "k,s_plus,s_minus,R,v,S,n_contributing,n_plus,n_minus,n_unknown,n_spread\n";
    for (std::size_t i = 0; i < series.points.size(); ++i) {
        const auto& p = series.points[i];
        const bool any = p.n_contributing > 0;
        out << i + 1 << ',' << format_optional(p.s_plus) << ',' << format_optional(p.s_minus) << ','
            << (any ? format_real(p.R) : std::string()) << ',' << (any ? format_real(p.v) : std::string()) << ','
            << format_optional(p.S) << ',' << p.n_contributing << ',' << p.n_plus << ',' << p.n_minus << ','
            << p.n_unknown << ',' << p.n_spread << '\n';
    }
}

}  // namespace limitlab
