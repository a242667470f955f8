#include "limitlab/limit_engine.hpp"

#include <algorithm>
#include <ostream>
#include <string>

namespace limitlab {

LimitPrices compute_limit_prices(Cents prev_close, const LimitRule& rule) {
    if (prev_close <= 0) throw std::domain_error("compute_limit_prices: prev_close must be positive");
    if (rule.tick_cents <= 0 || rule.fraction_bp <= 0 || rule.fraction_bp >= 10000)
        throw std::domain_error("compute_limit_prices: invalid limit rule");
    // R[x] rounds half-up to the tick; every quantity is positive.
    const std::int64_t denom = 10000 * rule.tick_cents;
    auto round_to_tick = [&](std::int64_t scaled_bp) {
        return (prev_close * scaled_bp + denom / 2) / denom * rule.tick_cents;
    };
    return LimitPrices{round_to_tick(10000 + rule.fraction_bp), round_to_tick(10000 - rule.fraction_bp), prev_close};
}

Seconds elapsed(Seconds from, Seconds to, const SessionWindows& windows, DurationClock clock) noexcept {
    Seconds diff = to - from;
    if (clock == DurationClock::trading) {
        const Seconds lo = std::max(from, windows.am_end);
        const Seconds hi = std::min(to, windows.pm_start);
        if (hi > lo) diff -= hi - lo;
    }
    return diff;
}

std::string_view to_string(HitWindow w) noexcept {
    switch (w) {
        case HitWindow::open: return "open";
        case HitWindow::am: return "am";
        case HitWindow::pm: break;
    }
    return "pm";
}

HitWindow classify_window(Seconds first_hit, const SessionWindows& windows) noexcept {
    if (first_hit <= windows.open_end) return HitWindow::open;
    if (first_hit <= windows.am_end) return HitWindow::am;
    return HitWindow::pm;
}

std::string_view to_string(NextDayClass c) noexcept {
    switch (c) {
        case NextDayClass::continuation: return "continuation";
        case NextDayClass::reversal: return "reversal";
        case NextDayClass::flat: return "flat";
        case NextDayClass::unavailable: break;
    }
    return "unavailable";
}

NextDayClass classify_next_day(Direction first_hit, Cents today_close, std::optional<Cents> next_day_open) noexcept {
    if (!next_day_open) return NextDayClass::unavailable;
    if (*next_day_open == today_close) return NextDayClass::flat;
    const bool higher = *next_day_open > today_close;
    if (first_hit == Direction::up) return higher ? NextDayClass::continuation : NextDayClass::reversal;
    return higher ? NextDayClass::reversal : NextDayClass::continuation;
}

std::optional<DayHitRecord> segment_hits(const StockDaySession& session, const LimitPrices& limits,
                                         const SessionWindows& windows, DurationClock clock) {
    if (limits.down_limit >= limits.up_limit)
        throw DataError("limit prices do not bracket an interior price for " + session.stock_id.str());

    DayHitRecord record;
    record.stock_id = session.stock_id;
    record.date = session.date;

    std::optional<Cents> carried;
    std::optional<Direction> open_dir;
    HitSegment current;

    auto close_segment = [&](Seconds end_time, bool at_close) {
        current.end_time = end_time;
        current.ends_at_close = at_close;
        current.duration = elapsed(current.start_time, end_time, windows, clock);
        record.segments[index_of(current.direction)].push_back(current);
        open_dir.reset();
    };

    for (std::size_t i = 0; i < session.ticks.size(); ++i) {
        const auto& tick = session.ticks[i];
        if (!windows.in_session(tick.timestamp))
            throw DataError("tick at " + format_time(tick.timestamp) + " outside session windows for " +
                            session.stock_id.str() + " " + format_date(session.date));
        if (tick.has_trade()) carried = tick.trade_price;
        if (!carried) continue;

        std::optional<Direction> state;
        if (*carried == limits.up_limit) state = Direction::up;
        else if (*carried == limits.down_limit) state = Direction::down;

        if (open_dir && open_dir != state) close_segment(tick.timestamp, false);
        if (!open_dir && state) {
            open_dir = state;
            current = HitSegment{};
            current.direction = *state;
            current.start_time = tick.timestamp;
            current.start_index = i;
        }
    }
    if (open_dir) close_segment(windows.close, true);

    if (!record.has(Direction::up) && !record.has(Direction::down)) return std::nullopt;

    for (Direction d : kDirections) {
        const auto& segs = record.segments[index_of(d)];
        if (segs.empty()) continue;
        Seconds total = 0;
        for (const auto& s : segs) total += s.duration;
        record.total_duration[index_of(d)] = total;
        record.span[index_of(d)] = elapsed(segs.front().start_time, segs.back().end_time, windows, clock);
    }

    if (record.has(Direction::up) && record.has(Direction::down)) {
        const auto& up = record.segments[0].front();
        const auto& down = record.segments[1].front();
        record.direction = up.start_index < down.start_index ? Direction::up : Direction::down;
    } else {
        record.direction = record.has(Direction::up) ? Direction::up : Direction::down;
    }
    record.first_hit_window = classify_window(record.first_hit_time(record.direction), windows);

    const Cents close = *session.closing_price();
    if (close == limits.up_limit) record.close_direction = Direction::up;
    else if (close == limits.down_limit) record.close_direction = Direction::down;
    record.closed_at_limit = record.close_direction.has_value();
    record.next_day_class = classify_next_day(record.direction, close, session.next_day_open);
    return record;
}

void write_hit_row(std::ostream& out, const DayHitRecord& r) {
    std::string row;
    row += r.stock_id.view();
    row += ',' + format_date(r.date);
    row += ',';
    row += to_string(r.direction);
    row += ',' + std::to_string(r.count(Direction::up));
    row += ',' + std::to_string(r.count(Direction::down));
    row += ',' + std::to_string(r.total_duration[0]);
    row += ',' + std::to_string(r.total_duration[1]);
    row += ',' + std::to_string(r.span[0]);
    row += ',' + std::to_string(r.span[1]);
    row += ',';
    row += to_string(r.first_hit_window);
    row += r.closed_at_limit ? ",1," : ",0,";
    if (r.close_direction) row += to_string(*r.close_direction);
    row += ',';
    row += to_string(r.next_day_class);
    row += '\n';
    out << row;
}

}  // namespace limitlab
