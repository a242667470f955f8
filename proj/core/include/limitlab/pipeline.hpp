#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <filesystem>
#include <thread>
#include <utility>
#include <vector>

#include "limitlab/aggregation.hpp"
#include "limitlab/limit_engine.hpp"
#include "limitlab/market_data.hpp"
#include "limitlab/prehit.hpp"

namespace limitlab {

/// Runs fn(i) for i in [0, n) on up to `threads` workers pulling indices
/// from a shared counter. The first exception (lowest index) is rethrown
/// after every worker has stopped.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), n));
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto run = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        run();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct AnalysisConfig {
    LimitRule rule{};
    SessionWindows windows{};
    DurationClock clock = DurationClock::trading;
    RegimeCalendar calendar = RegimeCalendar::default_calendar();
    int portfolio_count = 6;
    int intraday_bin_minutes = 5;
    PrehitConfig prehit{};
    bool collect_prehit = true;
};

struct CorpusAnalysis {
    std::size_t files = 0;
    std::size_t rows_read = 0;
    std::size_t rows_valid = 0;
    std::vector<RecordError> record_errors;
    std::vector<SessionError> session_errors;
    std::size_t sessions_total = 0;    // parsed stock-days, excluded ones included
    std::size_t sessions_excluded = 0; // IPO or ex-dividend days
    std::vector<SessionSummary> sessions; // non-excluded, ordered by (stock, date)
    std::vector<DayHitRecord> records;    // ordered by (stock, date)
    std::vector<PrehitEvent> events;
};

/// Expands directories into their ticks*.csv files; the result is sorted.
std::vector<std::filesystem::path> discover_tick_files(const std::vector<std::filesystem::path>& inputs);

/// Parses every file and analyzes each non-excluded session. Files are
/// processed in parallel; the result is independent of `threads`. Sessions
/// that the limit engine rejects are reported as session errors. Throws
/// DataError if one stock-day appears in more than one file.
CorpusAnalysis analyze_corpus(const std::vector<std::filesystem::path>& files, const MetadataTable& metadata,
                              const AnalysisConfig& config, int threads = 1);

struct SummaryReport {
    PortfolioBook portfolios;
    std::vector<std::pair<Scope, HitCounters>> table1;
    std::vector<Table2Row> table2;
    std::vector<StockHitStats> per_stock;
    IntradayPattern intraday;
};

SummaryReport summarize_corpus(const CorpusAnalysis& analysis, const AnalysisConfig& config);

}  // namespace limitlab
