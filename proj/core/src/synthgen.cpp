#include "limitlab/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace limitlab {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// RNG

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

XorShift64Star::XorShift64Star(std::uint64_t seed) noexcept {
    std::uint64_t s = seed;
    state_ = splitmix64(s);
    if (state_ == 0) state_ = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t XorShift64Star::next() noexcept {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545F4914F6CDD1DULL;
}

std::int64_t XorShift64Star::uniform(std::int64_t lo, std::int64_t hi) noexcept {
    if (hi <= lo) return lo;
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next() % span);
}

double XorShift64Star::unit() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::size_t XorShift64Star::weighted(std::span<const double> weights) noexcept {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = unit() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (u < weights[i]) return i;
        u -= weights[i];
    }
    return weights.size() - 1;
}

std::string_view to_string(NextDayRelation r) noexcept {
    switch (r) {
        case NextDayRelation::higher: return "higher";
        case NextDayRelation::lower: return "lower";
        case NextDayRelation::equal: return "equal";
        case NextDayRelation::halt: break;
    }
    return "halt";
}

std::vector<Date> weekdays_from(const Date& start, std::size_t count) {
    std::vector<Date> out;
    auto day = std::chrono::sys_days{start};
    while (out.size() < count) {
        const std::chrono::weekday wd{day};
        if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) out.emplace_back(day);
        day += std::chrono::days{1};
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scenario JSON

namespace {

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
    if (!obj.is_object()) throw ConfigError(std::string(where) + " must be an object");
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError("unknown key '" + key + "' in " + std::string(where));
    }
}

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("bad value for '") + key + "'");
    }
}

Date json_date(const json& v) {
    if (!v.is_string()) throw ConfigError("dates must be strings");
    const auto d = parse_date(v.get<std::string>());
    if (!d) throw ConfigError("bad date '" + v.get<std::string>() + "'");
    return *d;
}

Seconds json_time(const json& v) {
    if (!v.is_string()) throw ConfigError("times must be HH:MM:SS strings");
    const auto t = parse_time(v.get<std::string>());
    if (!t) throw ConfigError("bad time '" + v.get<std::string>() + "'");
    return *t;
}

NextDayRelation parse_relation(const std::string& s) {
    if (s == "higher") return NextDayRelation::higher;
    if (s == "lower") return NextDayRelation::lower;
    if (s == "equal") return NextDayRelation::equal;
    if (s == "halt") return NextDayRelation::halt;
    throw ConfigError("next_day must be higher, lower, equal or halt");
}

StockId json_stock(const json& v) {
    if (!v.is_string()) throw ConfigError("stock ids must be strings");
    try {
        return StockId(v.get<std::string>());
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    }
}

}  // namespace

ScenarioSpec parse_scenario(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
    }
    check_keys(doc,
               {"seed", "levels", "stocks", "dates", "regime_calendar", "cadence", "planted", "ex_dividend_rate",
                "ipo_stocks", "plans", "scripts", "portfolio_count", "intraday_bin_minutes", "event_window"},
               "scenario");

    ScenarioSpec spec;
    spec.seed = get_or<std::uint64_t>(doc, "seed", 1);
    spec.levels = get_or<int>(doc, "levels", 5);
    if (spec.levels != 3 && spec.levels != 5) throw ConfigError("levels must be 3 or 5");
    if (doc.contains("regime_calendar")) spec.calendar = RegimeCalendar::parse(doc["regime_calendar"].get<std::string>());
    spec.ex_dividend_rate = get_or<double>(doc, "ex_dividend_rate", 0.0);
    spec.ipo_stocks = get_or<int>(doc, "ipo_stocks", 0);
    spec.portfolio_count = get_or<int>(doc, "portfolio_count", 6);
    spec.intraday_bin_minutes = get_or<int>(doc, "intraday_bin_minutes", 5);
    spec.prehit.event_window = get_or<int>(doc, "event_window", 100);

    const auto& stocks = doc.at("stocks");
    if (stocks.is_array()) {
        for (const auto& s : stocks) {
            check_keys(s, {"id", "shares"}, "stocks[]");
            spec.stocks.push_back({json_stock(s.at("id")), s.at("shares").get<Shares>()});
        }
    } else {
        check_keys(stocks, {"count", "first_id", "shares_min", "shares_max"}, "stocks");
        const auto count = stocks.at("count").get<int>();
        const auto first = std::stoll(get_or<std::string>(stocks, "first_id", "600000"));
        const auto lo = get_or<Shares>(stocks, "shares_min", 100'000'000);
        const auto hi = get_or<Shares>(stocks, "shares_max", 2'000'000'000);
        if (count < 1 || lo < 1 || hi < lo) throw ConfigError("bad stocks block");
        std::uint64_t s = spec.seed ^ 0x5EED5EED5EED5EEDULL;
        XorShift64Star rng(splitmix64(s));
        for (int i = 0; i < count; ++i) {
            char buf[16];
            std::snprintf(buf, sizeof buf, "%06lld", static_cast<long long>(first + i));
            spec.stocks.push_back({StockId(buf), rng.uniform(lo / 10000, hi / 10000) * 10000});
        }
    }

    const auto& dates = doc.at("dates");
    if (dates.is_array()) {
        for (const auto& d : dates) spec.dates.push_back(json_date(d));
    } else {
        check_keys(dates, {"start", "count"}, "dates");
        spec.dates = weekdays_from(json_date(dates.at("start")), dates.at("count").get<std::size_t>());
    }

    if (doc.contains("cadence")) {
        const auto& c = doc["cadence"];
        check_keys(c, {"dense_s", "sparse_s", "quote_only_fraction"}, "cadence");
        spec.cadence.dense = get_or<Seconds>(c, "dense_s", 5);
        spec.cadence.sparse = get_or<Seconds>(c, "sparse_s", 300);
        spec.cadence.quote_only_fraction = get_or<double>(c, "quote_only_fraction", 0.3);
    }
    if (doc.contains("planted")) {
        const auto& p = doc["planted"];
        check_keys(p, {"hit_rate", "velocity", "velocity_step_s", "both_directions_rate", "gap_open_rate"}, "planted");
        spec.planned.hit_rate = get_or<double>(p, "hit_rate", 0.05);
        const auto mode = get_or<std::string>(p, "velocity", "random");
        if (mode == "random") spec.planned.velocity = VelocityMode::random;
        else if (mode == "uniform") spec.planned.velocity = VelocityMode::uniform;
        else if (mode == "decelerating") spec.planned.velocity = VelocityMode::decelerating;
        else throw ConfigError("planted.velocity must be random, uniform or decelerating");
        spec.planned.velocity_step = get_or<Seconds>(p, "velocity_step_s", 30);
        spec.planned.both_directions_rate = get_or<double>(p, "both_directions_rate", 0.05);
        spec.planned.gap_open_rate = get_or<double>(p, "gap_open_rate", 0.05);
    } else {
        spec.planned.hit_rate = 0.0;
    }

    if (doc.contains("plans")) {
        for (const auto& p : doc["plans"]) {
            check_keys(p, {"stock", "date", "prev_close", "segments", "next_day", "ramp", "gap_open"}, "plans[]");
            DayPlan plan;
            plan.stock = json_stock(p.at("stock"));
            plan.date = json_date(p.at("date"));
            if (p.contains("prev_close")) plan.prev_close = p["prev_close"].get<Cents>();
            plan.next_day = parse_relation(get_or<std::string>(p, "next_day", "higher"));
            plan.gap_open = get_or<bool>(p, "gap_open", false);
            for (const auto& s : p.at("segments")) {
                check_keys(s, {"direction", "start", "duration"}, "segments[]");
                SegmentPlan seg;
                seg.direction = parse_direction(s.at("direction").get<std::string>());
                seg.start = json_time(s.at("start"));
                const auto& d = s.at("duration");
                if (d.is_string()) {
                    if (d.get<std::string>() != "close") throw ConfigError("segment duration must be seconds or \"close\"");
                } else {
                    seg.duration = d.get<Seconds>();
                }
                plan.segments.push_back(seg);
            }
            if (p.contains("ramp")) {
                const auto& r = p["ramp"];
                check_keys(r, {"durations", "lead_in"}, "ramp");
                RampPlan ramp;
                ramp.durations = r.at("durations").get<std::vector<Seconds>>();
                ramp.lead_in = get_or<int>(r, "lead_in", 100);
                plan.ramp = ramp;
            }
            spec.plans.push_back(std::move(plan));
        }
    }

    if (doc.contains("scripts")) {
        for (const auto& s : doc["scripts"]) {
            check_keys(s, {"stock", "date", "prev_close", "next_day_open", "records"}, "scripts[]");
            DayScript script;
            script.stock = json_stock(s.at("stock"));
            script.date = json_date(s.at("date"));
            script.prev_close = s.at("prev_close").get<Cents>();
            if (s.contains("next_day_open") && !s["next_day_open"].is_null())
                script.next_day_open = s["next_day_open"].get<Cents>();
            for (const auto& r : s.at("records")) {
                check_keys(r, {"time", "price", "volume", "bid", "ask"}, "records[]");
                ScriptRecord rec;
                rec.time = json_time(r.at("time"));
                rec.price = get_or<Cents>(r, "price", 0);
                rec.volume = get_or<Shares>(r, "volume", 0);
                if (r.contains("bid") && !r["bid"].is_null()) rec.bid = r["bid"].get<Cents>();
                if (r.contains("ask") && !r["ask"].is_null()) rec.ask = r["ask"].get<Cents>();
                script.records.push_back(rec);
            }
            spec.scripts.push_back(std::move(script));
        }
    }

    if (spec.stocks.empty() || spec.dates.empty()) throw ConfigError("scenario needs stocks and dates");
    if (spec.cadence.dense <= 0 || spec.cadence.sparse < spec.cadence.dense || 300 % spec.cadence.dense != 0)
        throw ConfigError("cadence: dense_s must divide 300 and sparse_s must be >= dense_s");
    for (const auto& d : spec.dates)
        if (!spec.calendar.covers(d)) throw ConfigError("date " + format_date(d) + " is outside the regime calendar");
    return spec;
}

ScenarioSpec load_scenario(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open scenario " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

// ---------------------------------------------------------------------------
// Day construction

namespace {

constexpr Seconds kOpeningTrade = hms(9, 25);

struct Rec {
    Seconds time = 0;
    Cents price = 0; // 0 = quote only
    Shares volume = 0;
    bool hit = false; // first trade of an event; labelled same-direction
    Direction hit_direction = Direction::up;
    TradeSide label = TradeSide::unknown;
    LobSnapshot lob;
};

struct Band {
    Cents lo = 0, hi = 0;
};

struct Region {
    Seconds from = 0, to = 0; // [from, to)
};

class DayBuilder {
public:
    DayBuilder(const ScenarioSpec& spec, Cents prev_close, XorShift64Star& rng)
        : spec_(spec), w_(spec.prehit.windows), rng_(rng), P_(prev_close),
          limits_(compute_limit_prices(prev_close, spec.prehit.rule)) {
        base_ = {(P_ * 96 + 99) / 100, P_ * 104 / 100};
        if (!(limits_.down_limit < base_.lo && base_.hi < limits_.up_limit))
            throw ConfigError("prev_close " + std::to_string(P_) + " is too small for the generator");
    }

    Seconds advance(Seconds t, Seconds d) const noexcept {
        Seconds r = t + d;
        if (t <= w_.am_end && r > w_.am_end) r += w_.pm_start - w_.am_end;
        return r;
    }
    Seconds retreat(Seconds t, Seconds d) const noexcept {
        Seconds r = t - d;
        if (t >= w_.pm_start && r < w_.pm_start) r -= w_.pm_start - w_.am_end;
        return r;
    }
    bool on_grid(Seconds t) const noexcept {
        return (t - kOpeningTrade) % spec_.cadence.dense == 0 && t >= kOpeningTrade && t <= w_.close &&
               !(t > w_.am_end && t < w_.pm_start);
    }

    Cents limit(Direction d) const noexcept { return d == Direction::up ? limits_.up_limit : limits_.down_limit; }
    Band near_band(Direction d) const noexcept {
        const Cents width = std::max<Cents>(1, P_ / 100);
        if (d == Direction::up) return {limits_.up_limit - width, limits_.up_limit - 1};
        return {limits_.down_limit + 1, limits_.down_limit + width};
    }

    void put(Rec r) {
        if (!on_grid(r.time)) throw ConfigError("planned record at " + format_time(r.time) + " is off the time grid");
        if (!recs_.emplace(r.time, r).second)
            throw ConfigError("planned features overlap at " + format_time(r.time));
    }

    void put(Seconds t, Cents price, Shares volume) {
        Rec r;
        r.time = t;
        r.price = price;
        r.volume = volume;
        put(r);
    }

    Shares trade_size() { return 100 * rng_.uniform(1, 50); }

    void build(const DayPlan& plan, TruthDay& truth);
    std::vector<Rec> records() const {
        std::vector<Rec> out;
        out.reserve(recs_.size());
        for (const auto& [t, r] : recs_) out.push_back(r);
        return out;
    }

private:
    void validate_segments(const std::vector<SegmentPlan>& segs) const;
    void place_ramp(Direction d, Seconds hit, const RampPlan& ramp, Seconds after);
    void fill(const std::vector<SegmentPlan>& segs);
    void assign_labels();
    void assign_books();

    const ScenarioSpec& spec_;
    const SessionWindows& w_;
    XorShift64Star& rng_;
    Cents P_;
    LimitPrices limits_;
    Band base_;
    std::map<Seconds, Rec> recs_;
    std::vector<Region> quiet_; // regions the filler leaves alone
};

Seconds segment_end(const DayBuilder& b, const SegmentPlan& s, Seconds close) {
    return s.duration ? b.advance(s.start, *s.duration) : close;
}

void DayBuilder::validate_segments(const std::vector<SegmentPlan>& segs) const {
    const auto dense = spec_.cadence.dense;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const auto& s = segs[i];
        if (!on_grid(s.start)) throw ConfigError("segment start " + format_time(s.start) + " is off the time grid");
        if (s.duration) {
            if (*s.duration <= 0 || *s.duration % dense != 0)
                throw ConfigError("segment durations must be positive multiples of the cadence");
            if (advance(s.start, *s.duration) >= w_.close)
                throw ConfigError("segment at " + format_time(s.start) + " runs into the close");
        } else if (i + 1 != segs.size()) {
            throw ConfigError("only the last segment may be held to the close");
        }
        if (i > 0) {
            const auto& p = segs[i - 1];
            if (!p.duration || s.start <= advance(p.start, *p.duration))
                throw ConfigError("segments overlap at " + format_time(s.start));
        }
    }
}

void DayBuilder::place_ramp(Direction d, Seconds hit, const RampPlan& ramp, Seconds after) {
    const auto dense = spec_.cadence.dense;
    PrehitConfig pc = spec_.prehit;
    const auto theta = velocity_thresholds(P_, d, pc);
    const std::size_t n = theta.size() - 1;
    if (ramp.durations.size() != n)
        throw ConfigError("ramp needs " + std::to_string(n) + " subinterval durations");
    for (std::size_t m = 0; m < n; ++m) {
        if (theta[m] == theta[m + 1]) throw ConfigError("velocity thresholds coincide for prev_close " + std::to_string(P_));
        if (ramp.durations[m] < 0 || ramp.durations[m] % dense != 0)
            throw ConfigError("ramp durations must be non-negative multiples of the cadence");
    }
    const bool up = d == Direction::up;

    std::vector<Seconds> cross(n + 1);
    cross[n] = hit;
    for (std::size_t m = n; m-- > 0;) cross[m] = retreat(cross[m + 1], ramp.durations[m]);
    const Seconds first = retreat(cross[0], dense * ramp.lead_in);
    if (first <= after || first <= kOpeningTrade)
        throw ConfigError("ramp before " + format_time(hit) + " does not fit after " + format_time(after));
    quiet_.push_back({first, hit});

    // Lead-in: below the first threshold.
    const Band lead = up ? Band{base_.lo, theta[0] - 1} : Band{theta[0] + 1, base_.hi};
    Cents price = rng_.uniform(lead.lo, lead.hi);
    for (int j = ramp.lead_in; j >= 1; --j) {
        price = std::clamp<Cents>(price + rng_.uniform(-3, 3), lead.lo, lead.hi);
        put(retreat(cross[0], dense * j), price, trade_size());
    }
    for (std::size_t m = 0; m < n; ++m) {
        const Band band = up ? Band{theta[m], theta[m + 1] - 1} : Band{theta[m + 1] + 1, theta[m]};
        bool first_in = true;
        for (Seconds t = cross[m]; t < cross[m + 1]; t = advance(t, dense)) {
            Cents p = first_in ? theta[m] : rng_.uniform(band.lo, band.hi);
            first_in = false;
            put(t, p, trade_size());
        }
    }
}

void DayBuilder::build(const DayPlan& plan, TruthDay& truth) {
    auto segs = plan.segments;
    validate_segments(segs);
    const auto dense = spec_.cadence.dense;

    // Opening trade.
    Cents open_price = rng_.uniform((P_ * 98 + 99) / 100, P_ * 102 / 100);
    if (!segs.empty() && segs.front().start == kOpeningTrade) {
        open_price = limit(segs.front().direction);
    } else if (!segs.empty() && plan.gap_open && segs.front().start > w_.open_end) {
        open_price = velocity_thresholds(P_, segs.front().direction, spec_.prehit).front();
    }
    if (segs.empty() || segs.front().start != kOpeningTrade) put(kOpeningTrade, open_price, trade_size());

    // Segments.
    std::array<bool, 2> seen{};
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const auto& s = segs[i];
        const Direction d = s.direction;
        const bool first_of_direction = !seen[index_of(d)];
        seen[index_of(d)] = true;
        const Cents lim = limit(d);
        const Seconds end = segment_end(*this, s, w_.close);

        Rec start;
        start.time = s.start;
        start.price = lim;
        start.volume = first_of_direction ? 100 * rng_.uniform(100, 300) : trade_size();
        start.hit = first_of_direction;
        start.hit_direction = d;
        put(start);
        quiet_.push_back({s.start, s.duration ? end : w_.close + 1});
        for (Seconds t = advance(s.start, dense); t < end; t = advance(t, dense)) {
            if (!rng_.chance(0.2)) continue;
            if (rng_.chance(spec_.cadence.quote_only_fraction)) put(t, 0, 0);
            else put(t, lim, trade_size());
        }
        if (s.duration) {
            const Band nb = near_band(d);
            put(end, rng_.uniform(nb.lo, nb.hi), trade_size());
        } else if (s.start != w_.close) {
            put(w_.close, lim, trade_size());
        }
    }

    // Ramps before the first segment of each direction outside the opening window.
    const RampPlan ramp = plan.ramp.value_or(RampPlan{std::vector<Seconds>(static_cast<std::size_t>(
                                                          spec_.prehit.velocity_subintervals), 30), 100});
    seen = {};
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const Direction d = segs[i].direction;
        if (seen[index_of(d)]) continue;
        seen[index_of(d)] = true;
        TruthEvent ev;
        ev.direction = d;
        if (segs[i].start > w_.open_end) {
            Seconds after = kOpeningTrade;
            if (i > 0) after = segment_end(*this, segs[i - 1], w_.close);
            place_ramp(d, segs[i].start, ramp, after);
            ev.durations = ramp.durations;
        }
        truth.events.push_back(std::move(ev));
    }

    fill(segs);
    assign_labels();
    assign_books();
    truth.segments = segs;
}

void DayBuilder::fill(const std::vector<SegmentPlan>& segs) {
    const auto dense = spec_.cadence.dense;
    const double p_fill = static_cast<double>(dense) / static_cast<double>(spec_.cadence.sparse);
    Cents last = 0;
    auto band_at = [&](Seconds t) {
        std::optional<Direction> d;
        for (const auto& s : segs)
            if (s.duration && advance(s.start, *s.duration) <= t) d = s.direction;
        return d ? near_band(*d) : base_;
    };
    auto quiet = [&](Seconds t) {
        return std::any_of(quiet_.begin(), quiet_.end(), [&](const Region& r) { return t >= r.from && t < r.to; });
    };

    for (Seconds t = kOpeningTrade; t <= w_.close; t = advance(t, dense)) {
        auto it = recs_.find(t);
        if (it == recs_.end() && t == w_.close) {
            const Band b = band_at(t);
            put(t, std::clamp<Cents>(last + rng_.uniform(-3, 3), b.lo, b.hi), trade_size());
            it = recs_.find(t);
        }
        if (it != recs_.end()) {
            if (it->second.price > 0) last = it->second.price;
            continue;
        }
        if (quiet(t) || !rng_.chance(p_fill)) continue;
        if (rng_.chance(spec_.cadence.quote_only_fraction)) {
            put(t, 0, 0);
        } else {
            const Band b = band_at(t);
            last = std::clamp<Cents>(last + rng_.uniform(-3, 3), b.lo, b.hi);
            put(t, last, trade_size());
        }
    }
}

void DayBuilder::assign_labels() {
    std::optional<Cents> prev;
    for (auto& [t, r] : recs_) {
        if (r.price == 0) continue;
        if (r.hit) {
            r.label = r.hit_direction == Direction::up ? TradeSide::buyer_initiated : TradeSide::seller_initiated;
        } else if (prev && *prev == r.price) {
            r.label = static_cast<TradeSide>(rng_.uniform(0, 2));
        } else {
            r.label = static_cast<TradeSide>(rng_.uniform(0, 1));
        }
        prev = r.price;
    }
}

void DayBuilder::assign_books() {
    const int levels = spec_.levels;
    const Rec* next = nullptr;
    for (auto it = recs_.rbegin(); it != recs_.rend(); ++it) {
        auto& r = it->second;
        Cents ask1 = 0, bid1 = 0;
        if (next == nullptr) {
            const Cents q = r.price > 0 ? r.price : P_;
            ask1 = q + 1;
            bid1 = q - 1;
        } else {
            const Cents q = next->price;
            const Cents gap = rng_.uniform(1, 3);
            switch (next->label) {
                case TradeSide::buyer_initiated: ask1 = q; bid1 = q - gap; break;
                case TradeSide::seller_initiated: bid1 = q; ask1 = q + gap; break;
                case TradeSide::unknown: ask1 = q + 1; bid1 = q - 1; break;
            }
        }
        LobSnapshot lob;
        lob.levels = levels;
        for (int j = 0; j < levels; ++j) {
            const Cents a = ask1 + j, b = bid1 - j;
            if (a <= limits_.up_limit && a >= limits_.down_limit) {
                lob.ask_prices[static_cast<std::size_t>(j)] = a;
                lob.ask_volumes[static_cast<std::size_t>(j)] = 100 * rng_.uniform(1, 100);
            }
            if (b >= limits_.down_limit && b <= limits_.up_limit) {
                lob.bid_prices[static_cast<std::size_t>(j)] = b;
                lob.bid_volumes[static_cast<std::size_t>(j)] = 100 * rng_.uniform(1, 100);
            }
        }
        // Keep ladders contiguous from level 1: drop anything after a gap.
        for (int j = 1; j < levels; ++j) {
            const auto k = static_cast<std::size_t>(j);
            if (lob.ask_prices[k - 1] == 0) lob.ask_prices[k] = lob.ask_volumes[k] = 0;
            if (lob.bid_prices[k - 1] == 0) lob.bid_prices[k] = lob.bid_volumes[k] = 0;
        }
        r.lob = lob;
        if (r.price > 0) next = &r;
    }
}

// Expected event-study inputs straight from the intended records.
void expect_event(const std::vector<Rec>& recs, TruthEvent& ev, const StockId& stock, const Date& date, Regime regime,
                  const ScenarioSpec& spec, bool gap) {
    auto& e = ev.expected;
    e.stock_id = stock;
    e.date = date;
    e.direction = ev.direction;
    e.cls = prehit_class(ev.direction, regime);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < recs.size(); ++i)
        if (recs[i].hit && recs[i].hit_direction == ev.direction) hit = i;
    e.hit_time = recs[hit].time;
    if (e.hit_time <= spec.prehit.windows.open_end) {
        e.velocity_exclusion = VelocityExclusion::opening_hit;
        e.study_exclusion = StudyExclusion::opening_hit;
        return;
    }
    if (gap) {
        e.velocity_exclusion = VelocityExclusion::gap_open;
    } else {
        Seconds total = 0;
        for (auto dt : ev.durations) total += dt;
        if (total == 0) e.velocity_exclusion = VelocityExclusion::zero_duration;
        else e.durations = ev.durations;
    }

    std::vector<std::size_t> trades;
    for (std::size_t i = 0; i <= hit; ++i)
        if (recs[i].price > 0) trades.push_back(i);
    const auto window = static_cast<std::size_t>(spec.prehit.event_window);
    if (trades.size() < window + 1) {
        e.study_exclusion = StudyExclusion::short_history;
        return;
    }
    const auto base = trades.size() - window - 1;
    const TradeSide same = ev.direction == Direction::up ? TradeSide::buyer_initiated : TradeSide::seller_initiated;
    for (std::size_t k = 1; k <= window; ++k) {
        const auto& r = recs[trades[base + k]];
        const auto& prev_trade = recs[trades[base + k - 1]];
        const auto& before = recs[trades[base + k] - 1];
        EventPoint p;
        p.log_size = std::log(static_cast<double>(r.volume));
        p.log_return = std::log(static_cast<double>(r.price)) - std::log(static_cast<double>(prev_trade.price));
        p.role = k == window || r.label == same ? TradeRole::same
                 : r.label == TradeSide::unknown ? TradeRole::unknown
                                                 : TradeRole::opposite;
        const Cents a = before.lob.ask_prices[0], b = before.lob.bid_prices[0];
        if (a > 0 && b > 0) p.spread = static_cast<double>(a - b) / (0.5 * static_cast<double>(a + b));
        e.points.push_back(p);
    }
}

TickRecord to_tick(const StockId& stock, const Rec& r) {
    TickRecord t;
    t.stock_id = stock;
    t.timestamp = r.time;
    t.trade_price = r.price;
    t.trade_volume = r.volume;
    t.lob = r.lob;
    return t;
}

// ---------------------------------------------------------------------------
// Random planner

std::vector<Seconds> plan_durations(const ScenarioSpec& spec, XorShift64Star& rng) {
    const auto n = static_cast<std::size_t>(spec.prehit.velocity_subintervals);
    const auto dense = spec.cadence.dense;
    std::vector<Seconds> out(n);
    for (std::size_t m = 0; m < n; ++m) {
        switch (spec.planned.velocity) {
            case VelocityMode::random: out[m] = dense * static_cast<Seconds>(rng.uniform(1, 12)); break;
            case VelocityMode::uniform: out[m] = spec.planned.velocity_step; break;
            case VelocityMode::decelerating: out[m] = spec.planned.velocity_step * static_cast<Seconds>(m + 1); break;
        }
    }
    return out;
}

DayPlan plan_hit_day(const ScenarioSpec& spec, const StockId& stock, const Date& date, XorShift64Star& rng) {
    const auto& w = spec.prehit.windows;
    const auto dense = spec.cadence.dense;
    auto advance = [&](Seconds t, Seconds d) {
        Seconds r = t + d;
        if (t <= w.am_end && r > w.am_end) r += w.pm_start - w.am_end;
        return r;
    };
    const Seconds last_slot = w.close - dense;

    DayPlan plan;
    plan.stock = stock;
    plan.date = date;
    static constexpr std::array<double, 4> relation_w{45, 35, 10, 10};
    plan.next_day = static_cast<NextDayRelation>(rng.weighted(relation_w));
    static constexpr std::array<double, 3> window_w{15, 45, 40};
    auto window = rng.weighted(window_w);
    const Direction dir = rng.chance(0.55) ? Direction::up : Direction::down;
    bool closed = rng.chance(0.5);
    const int nseg = static_cast<int>(rng.uniform(1, 4));
    bool both = rng.chance(spec.planned.both_directions_rate);

    RampPlan ramp;
    ramp.durations = plan_durations(spec, rng);
    ramp.lead_in = static_cast<int>(rng.uniform(0, 120));
    Seconds ramp_len = dense * ramp.lead_in;
    for (auto d : ramp.durations) ramp_len += d;
    plan.ramp = ramp;

    auto pick = [&](Seconds lo, Seconds hi) { return lo + dense * static_cast<Seconds>(rng.uniform(0, (hi - lo) / dense)); };
    const Seconds earliest = advance(kOpeningTrade, ramp_len + dense);

    Seconds h1 = 0;
    bool at_close = false;
    if (window == 1) {
        const Seconds lo = std::max(w.open_end + dense, earliest);
        if (lo > w.am_end) window = 2;
        else h1 = pick(lo, w.am_end);
    }
    if (window == 2) {
        const Seconds lo = std::max(w.pm_start, earliest);
        if (rng.chance(0.02)) {
            h1 = w.close;
            at_close = true;
        } else {
            h1 = pick(lo, last_slot);
        }
    }
    if (window == 0) h1 = rng.chance(0.5) ? kOpeningTrade : pick(kOpeningTrade + dense, w.open_end);
    plan.gap_open = window != 0 && rng.chance(spec.planned.gap_open_rate);

    if (at_close) {
        plan.segments.push_back({dir, h1, std::nullopt});
        return plan;
    }

    Seconds t = h1;
    for (int j = 0; j < nseg; ++j) {
        const bool last = j == nseg - 1 && !both;
        if (last && closed) {
            plan.segments.push_back({dir, t, std::nullopt});
            break;
        }
        Seconds d = dense * static_cast<Seconds>(rng.uniform(1, 360));
        if (advance(t, d) > last_slot) {
            if (closed && !both) {
                plan.segments.push_back({dir, t, std::nullopt});
                break;
            }
            d = elapsed(t, last_slot, w, DurationClock::trading);
            if (d < dense) {
                plan.segments.push_back({dir, t, std::nullopt});
                both = false;
                break;
            }
        }
        plan.segments.push_back({dir, t, d});
        const Seconds end = advance(t, d);
        if (j + 1 == nseg) break;
        t = advance(end, dense * static_cast<Seconds>(rng.uniform(1, 240)));
        if (t > last_slot) break;
    }

    if (both && plan.segments.back().duration) {
        const Seconds end = advance(plan.segments.back().start, *plan.segments.back().duration);
        const Seconds h2 = advance(end, ramp_len + dense * static_cast<Seconds>(rng.uniform(1, 60)));
        if (closed && h2 <= w.close) {
            plan.segments.push_back({opposite(dir), h2, std::nullopt});
        } else if (h2 < last_slot) {
            Seconds d = dense * static_cast<Seconds>(rng.uniform(1, 120));
            d = std::min(d, elapsed(h2, last_slot, w, DurationClock::trading));
            plan.segments.push_back({opposite(dir), h2, d});
        }
    }
    return plan;
}

Cents next_open(NextDayRelation rel, Cents close, XorShift64Star& rng) {
    switch (rel) {
        case NextDayRelation::higher: return close + rng.uniform(1, 20);
        case NextDayRelation::lower: return close - rng.uniform(1, 20);
        case NextDayRelation::equal: return close;
        case NextDayRelation::halt: break;
    }
    return 0;
}

}  // namespace

GeneratedCorpus generate(const ScenarioSpec& spec) {
    GeneratedCorpus out;
    out.levels = spec.levels;
    out.calendar = spec.calendar.to_string();

    std::map<SessionKey, const DayPlan*, SessionKeyLess> plans;
    for (const auto& p : spec.plans) plans[{p.stock, p.date}] = &p;
    std::map<SessionKey, const DayScript*, SessionKeyLess> scripts;
    for (const auto& s : spec.scripts) scripts[{s.stock, s.date}] = &s;
    std::set<StockId> known;
    for (const auto& s : spec.stocks) known.insert(s.id);
    for (const auto& [key, p] : plans)
        if (!known.count(key.first)) throw ConfigError("plan for unknown stock " + key.first.str());
    for (const auto& [key, s] : scripts)
        if (!known.count(key.first)) throw ConfigError("script for unknown stock " + key.first.str());

    std::vector<StockSpec> stocks = spec.stocks;
    std::sort(stocks.begin(), stocks.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    std::vector<Date> dates = spec.dates;
    std::sort(dates.begin(), dates.end());
    dates.erase(std::unique(dates.begin(), dates.end()), dates.end());

    for (std::size_t si = 0; si < stocks.size(); ++si) {
        const auto& stock = stocks[si];
        std::uint64_t s = spec.seed ^ (0xA5A5ULL << 40) ^ (static_cast<std::uint64_t>(si) << 20);
        XorShift64Star walk(splitmix64(s));
        Cents level = walk.uniform(1500, 6000);

        for (std::size_t di = 0; di < dates.size(); ++di) {
            const Date& date = dates[di];
            level = std::clamp<Cents>(level + level * walk.uniform(-200, 200) / 10000, 1000, 9000);
            std::uint64_t ds = spec.seed ^ (static_cast<std::uint64_t>(si) << 32) ^ static_cast<std::uint64_t>(di);
            splitmix64(ds);
            XorShift64Star rng(splitmix64(ds));

            TruthDay truth;
            truth.stock = stock.id;
            truth.date = date;
            truth.shares_outstanding = stock.shares_outstanding;
            truth.is_ipo_day = di == 0 && static_cast<int>(si) < spec.ipo_stocks;
            truth.is_ex_dividend_day = !truth.is_ipo_day && rng.chance(spec.ex_dividend_rate);
            const bool last_day = di + 1 == dates.size();

            StockDaySession session;
            session.stock_id = stock.id;
            session.date = date;
            session.shares_outstanding = stock.shares_outstanding;

            if (auto sc = scripts.find({stock.id, date}); sc != scripts.end()) {
                const auto& script = *sc->second;
                truth.scripted = true;
                truth.prev_close = script.prev_close;
                truth.next_day_open = script.next_day_open;
                for (const auto& r : script.records) {
                    TickRecord t;
                    t.stock_id = stock.id;
                    t.timestamp = r.time;
                    t.trade_price = r.price;
                    t.trade_volume = r.volume;
                    t.lob.levels = spec.levels;
                    if (r.bid) {
                        t.lob.bid_prices[0] = *r.bid;
                        t.lob.bid_volumes[0] = 1000;
                    }
                    if (r.ask) {
                        t.lob.ask_prices[0] = *r.ask;
                        t.lob.ask_volumes[0] = 1000;
                    }
                    session.ticks.push_back(t);
                }
                std::stable_sort(session.ticks.begin(), session.ticks.end(),
                                 [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
            } else {
                DayPlan plan;
                const auto pl = plans.find({stock.id, date});
                if (pl != plans.end()) {
                    plan = *pl->second;
                } else {
                    const bool decoy = truth.is_ipo_day || (truth.is_ex_dividend_day && rng.chance(0.5));
                    if (decoy || rng.chance(spec.planned.hit_rate)) {
                        plan = plan_hit_day(spec, stock.id, date, rng);
                    } else {
                        static constexpr std::array<double, 4> relation_w{45, 35, 10, 10};
                        plan.next_day = static_cast<NextDayRelation>(rng.weighted(relation_w));
                    }
                }
                truth.prev_close = plan.prev_close.value_or(level);
                DayBuilder builder(spec, truth.prev_close, rng);
                builder.build(plan, truth);
                const auto recs = builder.records();
                const Regime regime = spec.calendar.regime_of(date);
                for (auto& ev : truth.events) {
                    const bool gap = plan.gap_open && &ev == &truth.events.front();
                    expect_event(recs, ev, stock.id, date, regime, spec, gap);
                }
                for (const auto& r : recs) session.ticks.push_back(to_tick(stock.id, r));
                truth.next_day = last_day ? NextDayRelation::halt : plan.next_day;
            }

            session.prev_close = truth.prev_close;
            session.is_ipo_day = truth.is_ipo_day;
            session.is_ex_dividend_day = truth.is_ex_dividend_day;
            truth.records = session.ticks.size();
            truth.close = session.closing_price().value_or(0);
            if (!truth.scripted) {
                truth.next_day_open = truth.next_day == NextDayRelation::halt
                                          ? std::nullopt
                                          : std::optional<Cents>(next_open(truth.next_day, truth.close, rng));
            }
            session.next_day_open = truth.next_day_open;
            out.sessions.push_back(std::move(session));
            out.days.push_back(std::move(truth));
        }
    }
    out.manifest = derive_manifest(spec, out.days);
    return out;
}

void write_corpus(const GeneratedCorpus& corpus, const fs::path& dir) {
    fs::create_directories(dir);
    std::map<StockId, std::vector<const StockDaySession*>> by_stock;
    for (const auto& s : corpus.sessions) by_stock[s.stock_id].push_back(&s);

    for (const auto& [stock, sessions] : by_stock) {
        std::ofstream out(dir / ("ticks_" + stock.str() + ".csv"), std::ios::binary);
        if (!out) throw DataError("cannot write to " + dir.string());
        out << ColumnMap::canonical_header(corpus.levels) << '\n';
        for (const auto* s : sessions)
            for (const auto& t : s->ticks) write_tick_row(out, t, s->date, corpus.levels);
    }
    {
        std::ofstream out(dir / "sessions.csv", std::ios::binary);
        out << kMetadataHeader << '\n';
        for (const auto& s : corpus.sessions) {
            SessionMetadata m{s.prev_close, s.shares_outstanding, s.is_ipo_day, s.is_ex_dividend_day, s.next_day_open};
            write_metadata_row(out, s.stock_id, s.date, m);
        }
    }
    {
        std::ofstream out(dir / "manifest.json", std::ios::binary);
        out << manifest_to_json(corpus.manifest) << '\n';
    }
    {
        std::ofstream out(dir / "calendar.txt", std::ios::binary);
        out << corpus.calendar << '\n';
    }
}

}  // namespace limitlab
