#include "cli/commands.hpp"

#include <algorithm>
#include <fstream>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "cli/run_config.hpp"
#include "limitlab/distfit.hpp"
#include "limitlab/pipeline.hpp"
#include "limitlab/synthgen.hpp"
#include "limitlab/version.hpp"

namespace limitlab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
    std::string config_file;
    std::vector<std::string> overrides;
    int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    std::vector<std::string> inputs;
    std::vector<std::string> metadata;
    std::string out_dir;
    // fit
    std::string target;
    std::string direction = "up";
    double bin_width = 0.0;
    // synth
    std::string scenario;
};

RunConfig resolve_config(const Options& o) {
    RunConfig cfg;
    if (!o.config_file.empty()) apply_config_file(cfg, o.config_file);
    for (const auto& s : o.overrides) apply_override(cfg, s);
    cfg.validate();
    return cfg;
}

std::string header_line(const RunConfig& cfg) {
    return "# limitlab " + std::string(kVersion) + " config=" + cfg.hash() + "\n";
}

json provenance(const RunConfig& cfg) {
    return {{"tool", "limitlab " + std::string(kVersion)}, {"config", cfg.hash()}};
}

/// Report sink: a file under --out, or the command's stdout.
class Sink {
public:
    Sink(const std::string& dir, const std::string& name, std::ostream& fallback) {
        if (dir.empty()) {
            stream_ = &fallback;
        } else {
            fs::create_directories(dir);
            file_ = std::make_unique<std::ofstream>(fs::path(dir) / name, std::ios::binary);
            if (!*file_) throw DataError("cannot write " + (fs::path(dir) / name).string());
            stream_ = file_.get();
        }
    }
    std::ostream& operator*() { return *stream_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_ = nullptr;
};

std::string require_out(const Options& o, std::string_view cmd) {
    if (o.out_dir.empty()) throw ConfigError(std::string(cmd) + " writes several files and needs --out");
    return o.out_dir;
}

MetadataTable load_metadata(const Options& o) {
    std::vector<fs::path> paths;
    if (!o.metadata.empty()) {
        for (const auto& m : o.metadata) paths.emplace_back(m);
    } else {
        std::set<fs::path> seen;
        for (const auto& in : o.inputs) {
            const fs::path p(in);
            const fs::path dir = fs::is_directory(p) ? p : p.parent_path();
            const fs::path candidate = (dir.empty() ? fs::path(".") : dir) / "sessions.csv";
            if (fs::exists(candidate) && seen.insert(candidate).second) paths.push_back(candidate);
        }
        if (paths.empty()) throw ConfigError("no sessions.csv next to the inputs; pass --metadata");
    }
    MetadataTable table;
    for (const auto& p : paths) {
        auto t = parse_metadata_file(p);
        table.merge(t);
    }
    return table;
}

CorpusAnalysis load(const Options& o, const RunConfig& cfg, bool prehit) {
    if (o.inputs.empty()) throw ConfigError("no input files or directories given");
    std::vector<fs::path> inputs(o.inputs.begin(), o.inputs.end());
    const auto files = discover_tick_files(inputs);
    if (files.empty()) throw DataError("no ticks*.csv files found in the inputs");
    const auto metadata = load_metadata(o);
    AnalysisConfig a = cfg.analysis;
    a.collect_prehit = prehit;
    return analyze_corpus(files, metadata, a, o.threads);
}

// ---------------------------------------------------------------------------

int cmd_validate(const Options& o, std::ostream& out) {
    const auto cfg = resolve_config(o);
    const auto analysis = load(o, cfg, false);
    Sink sink(o.out_dir, "validate.txt", out);
    auto& s = *sink;
    s << header_line(cfg);
    s << "[config]\n";
    for (const auto& [k, v] : cfg.entries()) s << k << '=' << v << '\n';
    s << "[input]\n";
    s << "files=" << analysis.files << '\n';
    s << "rows_read=" << analysis.rows_read << '\n';
    s << "rows_valid=" << analysis.rows_valid << '\n';
    s << "record_errors=" << analysis.record_errors.size() << '\n';
    s << "session_errors=" << analysis.session_errors.size() << '\n';
    s << "sessions_total=" << analysis.sessions_total << '\n';
    s << "sessions_excluded=" << analysis.sessions_excluded << '\n';
    s << "sessions_analyzed=" << analysis.sessions.size() << '\n';
    s << "limit_hit_days=" << analysis.records.size() << '\n';
    s << "[record_errors]\n";
    for (const auto& e : analysis.record_errors) s << e.file << ':' << e.row << ": " << e.message << '\n';
    s << "[session_errors]\n";
    for (const auto& e : analysis.session_errors) s << e.stock_id << ' ' << e.date << ": " << e.message << '\n';
    return kOk;
}

int cmd_hits(const Options& o, std::ostream& out) {
    const auto cfg = resolve_config(o);
    const auto analysis = load(o, cfg, false);
    Sink sink(o.out_dir, "hits.csv", out);
    *sink << header_line(cfg) << kHitsHeader << '\n';
    for (const auto& r : analysis.records) write_hit_row(*sink, r);
    return kOk;
}

int cmd_summary(const Options& o, std::ostream&) {
    const auto dir = require_out(o, "summary");
    const auto cfg = resolve_config(o);
    const auto analysis = load(o, cfg, false);
    const auto report = summarize_corpus(analysis, cfg.analysis);
    {
        Sink s(dir, "table1.csv", std::cout);
        *s << header_line(cfg);
        write_table1_csv(*s, report.table1);
    }
    {
        Sink s(dir, "table2.csv", std::cout);
        *s << header_line(cfg);
        write_table2_csv(*s, report.table2);
    }
    {
        Sink s(dir, "per_stock.csv", std::cout);
        *s << header_line(cfg);
        write_per_stock_csv(*s, report.per_stock);
    }
    return kOk;
}

int cmd_intraday(const Options& o, std::ostream& out) {
    const auto cfg = resolve_config(o);
    const auto analysis = load(o, cfg, false);
    const auto pattern =
        intraday_pattern(analysis.records, cfg.analysis.calendar, cfg.analysis.intraday_bin_minutes, cfg.analysis.windows);
    Sink sink(o.out_dir, "intraday.csv", out);
    *sink << header_line(cfg);
    write_intraday_csv(*sink, pattern);
    return kOk;
}

// ---------------------------------------------------------------------------
// fit

double default_width(const std::string& target) {
    if (target == "hit_prob") return 0.001;
    if (target == "daily_hits") return 1.0;
    if (target == "duration") return 60.0;
    if (target == "span") return 300.0;
    return 0.25; // per_stock_means
}

std::vector<double> fit_samples(const std::string& target, Direction d, const CorpusAnalysis& analysis,
                                std::size_t& dropped) {
    const auto i = index_of(d);
    std::vector<double> v;
    auto push = [&](double x) {
        if (x > 0) v.push_back(x);
        else ++dropped;
    };
    if (target == "hit_prob" || target == "per_stock_means") {
        for (const auto& s : per_stock_stats(analysis.records, analysis.sessions)) {
            if (target == "hit_prob") push(s.n_dir[i]);
            else if (s.mean_M[i]) push(*s.mean_M[i]);
        }
    } else {
        for (const auto& r : analysis.records) {
            if (!r.has(d)) continue;
            if (target == "daily_hits") push(static_cast<double>(r.count(d)));
            else if (target == "span") push(static_cast<double>(r.span[i]));
            else
                for (const auto& seg : r.segments[i]) push(static_cast<double>(seg.duration));
        }
    }
    return v;
}

int cmd_fit(const Options& o, std::ostream&) {
    static const std::set<std::string> targets{"hit_prob", "daily_hits", "duration", "span", "per_stock_means"};
    if (!targets.count(o.target))
        throw ConfigError("--target must be one of hit_prob, daily_hits, duration, span, per_stock_means");
    if (o.bin_width < 0) throw ConfigError("--bin-width must be positive");
    const Direction d = o.direction == "down" ? Direction::down : Direction::up;
    if (o.direction != "up" && o.direction != "down") throw ConfigError("--direction must be up or down");
    const auto dir = require_out(o, "fit");
    const auto cfg = resolve_config(o);
    const auto analysis = load(o, cfg, false);

    std::size_t dropped = 0;
    const auto samples = fit_samples(o.target, d, analysis, dropped);
    if (samples.empty()) throw DataError("no positive " + o.target + " values for direction " + o.direction);
    const double width = o.bin_width > 0 ? o.bin_width : default_width(o.target);
    const auto hist = estimate_pdf(samples, width);

    json fits = json::array();
    try {
        const auto f = fit_mle(samples);
        fits.push_back({{"method", "MLE"},
                        {"mu", f.mu},
                        {"sigma", f.sigma},
                        {"diagnostics",
                         {{"iterations", f.iterations},
                          {"residual", f.residual},
                          {"sample_mean", f.sample_mean},
                          {"sample_sd", f.sample_sd},
                          {"n", f.n}}}});
    } catch (const std::domain_error& e) {
        fits.push_back({{"method", "MLE"}, {"error", e.what()}});
    }
    try {
        const auto f = fit_ols(hist);
        fits.push_back({{"method", "OLS"}, {"mu", f.mu}, {"sigma", f.sigma}, {"diagnostics", {{"rss", f.rss}, {"bins", f.n}}}});
    } catch (const std::domain_error& e) {
        fits.push_back({{"method", "OLS"}, {"error", e.what()}});
    }

    const std::string stem = o.target + "_" + o.direction;
    {
        json doc = provenance(cfg);
        doc["target"] = o.target;
        doc["direction"] = o.direction;
        doc["n"] = samples.size();
        doc["dropped_nonpositive"] = dropped;
        doc["bin_width"] = width;
        doc["fits"] = fits;
        Sink s(dir, "fit_" + stem + ".json", std::cout);
        *s << doc.dump(2) << '\n';
    }
    {
        Sink s(dir, "hist_" + stem + ".csv", std::cout);
        *s << header_line(cfg) << "bin_left,bin_center,count,density\n";
        for (const auto& b : hist)
            *s << format_real(b.left) << ',' << format_real(b.center) << ',' << b.count << ',' << format_real(b.density)
               << '\n';
    }
    return kOk;
}

// ---------------------------------------------------------------------------

int cmd_prehit(const Options& o, std::ostream&) {
    const auto dir = require_out(o, "prehit");
    const auto cfg = resolve_config(o);
    const auto analysis = load(o, cfg, true);
    auto pc = cfg.analysis.prehit;
    pc.rule = cfg.analysis.rule;
    pc.windows = cfg.analysis.windows;
    pc.clock = cfg.analysis.clock;
    const auto result = accumulate_prehit(analysis.events, pc);

    for (auto cls : kPrehitClasses) {
        const auto c = index_of(cls);
        const std::string name(to_string(cls));
        {
            Sink s(dir, "velocity_" + name + ".csv", std::cout);
            *s << header_line(cfg);
            write_velocity_csv(*s, result.velocity[c]);
        }
        {
            Sink s(dir, "event_study_" + name + ".csv", std::cout);
            *s << header_line(cfg);
            write_event_study_csv(*s, result.event_study[c]);
        }
        {
            Sink s(dir, "s_plus_last_" + name + ".csv", std::cout);
            *s << header_line(cfg) << "bin_left,bin_center,count,density\n";
            const auto& v = result.s_plus_last[c];
            if (!v.empty())
                for (const auto& b : estimate_pdf(v, 0.25))
                    *s << format_real(b.left) << ',' << format_real(b.center) << ',' << b.count << ','
                       << format_real(b.density) << '\n';
        }
    }
    json doc = provenance(cfg);
    doc["events"] = analysis.events.size();
    doc["exclusions"] = result.exclusions;
    for (auto cls : kPrehitClasses) {
        const auto c = index_of(cls);
        doc["classes"][std::string(to_string(cls))] = {{"velocity_events", result.velocity[c].n_events},
                                                       {"event_study_events", result.event_study[c].n_events}};
    }
    Sink s(dir, "prehit_exclusions.json", std::cout);
    *s << doc.dump(2) << '\n';
    return kOk;
}

int cmd_synth(const Options& o, std::ostream& out) {
    const auto dir = require_out(o, "synth");
    const auto spec = load_scenario(o.scenario);
    const auto corpus = generate(spec);
    write_corpus(corpus, dir);
    out << "wrote " << corpus.manifest.file_rows.size() << " tick files, " << corpus.manifest.rows_total << " rows, "
        << corpus.manifest.sessions_total << " sessions, " << corpus.manifest.planted_hits << " hit days to " << dir
        << '\n';
    return kOk;
}

}  // namespace

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Price-limit hit analytics for tick data", "limitlab"};
    app.set_version_flag("--version", "limitlab " + std::string(kVersion));
    app.require_subcommand(1);
    app.fallthrough();

    Options o;
    app.add_option("--config", o.config_file, "key = value config file");
    app.add_option("--set", o.overrides, "Override one setting, key=value (repeatable)");
    app.add_option("--threads", o.threads, "Worker threads")->check(CLI::Range(1, 1024));

    auto analysis_cmd = [&](const char* name, const char* help) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("inputs", o.inputs, "Tick CSV files or directories")->required();
        sub->add_option("--metadata", o.metadata, "Session metadata CSV (default: sessions.csv beside the inputs)");
        sub->add_option("--out", o.out_dir, "Output directory");
        return sub;
    };
    auto* validate = analysis_cmd("validate", "Parse the corpus and report errors and counts");
    auto* hits = analysis_cmd("hits", "Per-day limit-hit records");
    auto* summary = analysis_cmd("summary", "Table-1 counters, Table-2 statistics, per-stock statistics");
    auto* intraday = analysis_cmd("intraday", "Intraday first-hit pattern");
    auto* fit = analysis_cmd("fit", "Truncated-normal fits of a hit statistic");
    fit->add_option("--target", o.target, "hit_prob, daily_hits, duration, span or per_stock_means")->required();
    fit->add_option("--direction", o.direction, "up or down");
    fit->add_option("--bin-width", o.bin_width, "Histogram bin width");
    auto* prehit = analysis_cmd("prehit", "Velocity profiles and event studies before hits");
    auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus and its manifest");
    synth->add_option("scenario", o.scenario, "Scenario JSON")->required();
    synth->add_option("--out", o.out_dir, "Output directory")->required();

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = e.get_exit_code();
        if (code == 0) {
            out << (dynamic_cast<const CLI::CallForVersion*>(&e) ? e.what() : app.help()) << '\n';
            return kOk;
        }
        err << "limitlab: " << e.what() << '\n';
        return kConfigError;
    }

    try {
        if (*validate) return cmd_validate(o, out);
        if (*hits) return cmd_hits(o, out);
        if (*summary) return cmd_summary(o, out);
        if (*intraday) return cmd_intraday(o, out);
        if (*fit) return cmd_fit(o, out);
        if (*prehit) return cmd_prehit(o, out);
        if (*synth) return cmd_synth(o, out);
    } catch (const ConfigError& e) {
        err << "limitlab: config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const DataError& e) {
        err << "limitlab: data error: " << e.what() << '\n';
        return kDataError;
    } catch (const NumericalError& e) {
        err << "limitlab: numerical error: " << e.what() << '\n';
        return kNumericalError;
    } catch (const std::domain_error& e) {
        err << "limitlab: data error: " << e.what() << '\n';
        return kDataError;
    } catch (const std::exception& e) {
        err << "limitlab: internal error: " << e.what() << '\n';
        return kNumericalError;
    }
    return kConfigError;
}

}  // namespace limitlab::cli
