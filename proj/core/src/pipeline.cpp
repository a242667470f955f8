#include "limitlab/pipeline.hpp"

#include <algorithm>
#include <tuple>

namespace limitlab {

namespace fs = std::filesystem;

std::vector<fs::path> discover_tick_files(const std::vector<fs::path>& inputs) {
    std::vector<fs::path> out;
    for (const auto& p : inputs) {
        if (fs::is_directory(p)) {
            for (const auto& entry : fs::directory_iterator(p)) {
                const auto name = entry.path().filename().string();
                if (entry.is_regular_file() && name.starts_with("ticks") && entry.path().extension() == ".csv")
                    out.push_back(entry.path());
            }
        } else if (fs::exists(p)) {
            out.push_back(p);
        } else {
            throw DataError("input " + p.string() + " does not exist");
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

namespace {

struct FileResult {
    std::size_t rows_read = 0, rows_valid = 0, sessions_total = 0, sessions_excluded = 0;
    std::vector<RecordError> record_errors;
    std::vector<SessionError> session_errors;
    std::vector<SessionSummary> sessions;
    std::vector<DayHitRecord> records;
    std::vector<PrehitEvent> events;
};

FileResult analyze_file(const fs::path& path, const MetadataTable& metadata, const AnalysisConfig& config) {
    auto parsed = parse_tick_file(path, metadata);
    FileResult out;
    out.rows_read = parsed.rows_read;
    out.rows_valid = parsed.rows_valid;
    out.record_errors = std::move(parsed.record_errors);
    out.session_errors = std::move(parsed.session_errors);
    out.sessions_total = parsed.sessions.size();
    PrehitConfig prehit = config.prehit;
    prehit.rule = config.rule;
    prehit.windows = config.windows;
    prehit.clock = config.clock;
    for (const auto& s : parsed.sessions) {
        if (s.excluded()) {
            ++out.sessions_excluded;
            continue;
        }
        std::optional<DayHitRecord> record;
        try {
            record = segment_hits(s, compute_limit_prices(s.prev_close, config.rule), config.windows, config.clock);
        } catch (const DataError& e) {
            out.session_errors.push_back({s.stock_id.str(), format_date(s.date), e.what()});
            continue;
        }
        out.sessions.push_back({s.stock_id, s.date, s.prev_close, s.capitalization()});
        if (!record) continue;
        if (config.collect_prehit) {
            auto evs = extract_prehit_events(s, *record, config.calendar.regime_of(s.date), prehit);
            for (auto& e : evs) out.events.push_back(std::move(e));
        }
        out.records.push_back(std::move(*record));
    }
    return out;
}

}  // namespace

CorpusAnalysis analyze_corpus(const std::vector<fs::path>& files, const MetadataTable& metadata,
                              const AnalysisConfig& config, int threads) {
    std::vector<FileResult> results(files.size());
    parallel_for(files.size(), threads, [&](std::size_t i) { results[i] = analyze_file(files[i], metadata, config); });

    CorpusAnalysis out;
    out.files = files.size();
    for (auto& r : results) {
        out.rows_read += r.rows_read;
        out.rows_valid += r.rows_valid;
        out.sessions_total += r.sessions_total;
        out.sessions_excluded += r.sessions_excluded;
        std::move(r.record_errors.begin(), r.record_errors.end(), std::back_inserter(out.record_errors));
        std::move(r.session_errors.begin(), r.session_errors.end(), std::back_inserter(out.session_errors));
        std::move(r.sessions.begin(), r.sessions.end(), std::back_inserter(out.sessions));
        std::move(r.records.begin(), r.records.end(), std::back_inserter(out.records));
        std::move(r.events.begin(), r.events.end(), std::back_inserter(out.events));
    }

    auto key_less = [](const auto& a, const auto& b) {
        return std::tie(a.stock_id, a.date) < std::tie(b.stock_id, b.date);
    };
    std::sort(out.sessions.begin(), out.sessions.end(), key_less);
    std::sort(out.records.begin(), out.records.end(), key_less);
    const auto dup = std::adjacent_find(out.sessions.begin(), out.sessions.end(), [](const auto& a, const auto& b) {
        return a.stock_id == b.stock_id && a.date == b.date;
    });
    if (dup != out.sessions.end())
        throw DataError("stock-day " + dup->stock_id.str() + " " + format_date(dup->date) +
                        " appears in more than one file");
    std::sort(out.events.begin(), out.events.end(), [](const PrehitEvent& a, const PrehitEvent& b) {
        return std::tie(a.stock_id, a.date, a.direction) < std::tie(b.stock_id, b.date, b.direction);
    });
    return out;
}

SummaryReport summarize_corpus(const CorpusAnalysis& analysis, const AnalysisConfig& config) {
    SummaryReport out;
    out.portfolios = build_portfolios(analysis.records, analysis.sessions, config.portfolio_count);
    for (const auto& scope : all_scopes(config.portfolio_count))
        out.table1.emplace_back(scope, tabulate_counters(analysis.records, analysis.sessions, config.calendar,
                                                         out.portfolios, scope));
    out.table2 = summarize_table2(analysis.records, config.calendar, out.portfolios, config.portfolio_count);
    out.per_stock = per_stock_stats(analysis.records, analysis.sessions);
    out.intraday = intraday_pattern(analysis.records, config.calendar, config.intraday_bin_minutes, config.windows);
    return out;
}

}  // namespace limitlab
