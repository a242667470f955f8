#include <cmath>
#include <sstream>

#include <benchmark/benchmark.h>

#include "limitlab/aggregation.hpp"
#include "limitlab/distfit.hpp"
#include "limitlab/limit_engine.hpp"
#include "limitlab/market_data.hpp"
#include "limitlab/prehit.hpp"
#include "limitlab/synthgen.hpp"

using namespace limitlab;

namespace {

const GeneratedCorpus& corpus() {
    static const GeneratedCorpus g = generate(parse_scenario(R"({"seed": 11, "levels": 5,
      "stocks": {"count": 10}, "dates": {"start": "2007-03-01", "count": 50},
      "planted": {"hit_rate": 0.2}})"));
    return g;
}

std::vector<DayHitRecord> corpus_records() {
    std::vector<DayHitRecord> out;
    for (const auto& s : corpus().sessions)
        if (auto r = segment_hits(s, compute_limit_prices(s.prev_close))) out.push_back(std::move(*r));
    return out;
}

void BM_ParseTicks(benchmark::State& state) {
    std::ostringstream csv;
    write_tick_csv(csv, corpus().sessions, corpus().levels);
    const std::string text = csv.str();
    std::ostringstream meta;
    meta << kMetadataHeader << '\n';
    for (const auto& s : corpus().sessions)
        write_metadata_row(meta, s.stock_id, s.date, {s.prev_close, s.shares_outstanding, false, false, s.next_day_open});
    std::istringstream min(meta.str());
    const auto table = parse_metadata_stream(min, "meta");
    std::size_t rows = 0;
    for (auto _ : state) {
        std::istringstream in(text);
        const auto r = parse_tick_stream(in, "bench", table);
        rows = r.rows_read;
        benchmark::DoNotOptimize(r.sessions.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * rows));
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_ParseTicks)->Unit(benchmark::kMillisecond);

void BM_SegmentHits(benchmark::State& state) {
    const auto& sessions = corpus().sessions;
    for (auto _ : state) {
        std::size_t hits = 0;
        for (const auto& s : sessions) hits += segment_hits(s, compute_limit_prices(s.prev_close)).has_value();
        benchmark::DoNotOptimize(hits);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * sessions.size()));
}
BENCHMARK(BM_SegmentHits)->Unit(benchmark::kMillisecond);

void BM_SolveR(benchmark::State& state) {
    const double target = r_prime(static_cast<double>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(solve_r(target));
}
BENCHMARK(BM_SolveR)->Arg(-20)->Arg(-1)->Arg(0)->Arg(5);

void BM_FitMle(benchmark::State& state) {
    XorShift64Star rng(3);
    std::vector<double> xs;
    while (xs.size() < static_cast<std::size_t>(state.range(0))) {
        const double u1 = 1.0 - rng.unit(), u2 = rng.unit();
        const double x = 2.0 + 3.0 * std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
        if (x > 0) xs.push_back(x);
    }
    for (auto _ : state) benchmark::DoNotOptimize(fit_mle(xs));
}
BENCHMARK(BM_FitMle)->Arg(1000)->Arg(100000);

void BM_Aggregation(benchmark::State& state) {
    const auto records = corpus_records();
    std::vector<SessionSummary> sessions;
    for (const auto& s : corpus().sessions) sessions.push_back({s.stock_id, s.date, s.prev_close, s.capitalization()});
    const auto calendar = RegimeCalendar::default_calendar();
    for (auto _ : state) {
        const auto book = build_portfolios(records, sessions);
        for (const auto& scope : all_scopes())
            benchmark::DoNotOptimize(tabulate_counters(records, sessions, calendar, book, scope));
        benchmark::DoNotOptimize(summarize_table2(records, calendar, book));
        benchmark::DoNotOptimize(intraday_pattern(records, calendar));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * records.size()));
}
BENCHMARK(BM_Aggregation)->Unit(benchmark::kMillisecond);

void BM_AccumulatePrehit(benchmark::State& state) {
    std::vector<PrehitEvent> events;
    const auto calendar = RegimeCalendar::default_calendar();
    for (const auto& s : corpus().sessions)
        if (auto r = segment_hits(s, compute_limit_prices(s.prev_close)))
            for (auto& e : extract_prehit_events(s, *r, calendar.regime_of(s.date))) events.push_back(std::move(e));
    for (auto _ : state) benchmark::DoNotOptimize(accumulate_prehit(events));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * events.size()));
}
BENCHMARK(BM_AccumulatePrehit)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
