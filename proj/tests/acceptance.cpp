// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "cli/commands.hpp"
#include "limitlab/distfit.hpp"
#include "limitlab/limit_engine.hpp"
#include "limitlab/pipeline.hpp"
#include "limitlab/prehit.hpp"
#include "limitlab/synthgen.hpp"
#include "support.hpp"

using namespace limitlab;
namespace fs = std::filesystem;

namespace {

const fs::path kData = LIMITLAB_TEST_DATA_DIR;

/// Collects failed checks for one criterion.
class Check {
public:
    void expect(bool ok, const std::string& what) {
        if (!ok && failures_.size() < 8) failures_.push_back(what);
        if (!ok) ++failed_;
    }
    void note(const std::string& s) { notes_ += (notes_.empty() ? "" : "; ") + s; }
    bool ok() const { return failed_ == 0; }
    std::string detail() const {
        std::string s = notes_;
        for (const auto& f : failures_) s += (s.empty() ? "" : "; ") + f;
        if (failed_ > failures_.size()) s += "; ... " + std::to_string(failed_ - failures_.size()) + " more";
        return s;
    }

private:
    std::vector<std::string> failures_;
    std::size_t failed_ = 0;
    std::string notes_;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

bool near_rel(double got, double want, double rel) {
    if (want == 0.0) return std::abs(got) <= rel;
    return std::abs(got - want) <= rel * std::abs(want);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

int threads() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

struct Analyzed {
    fs::path dir;
    GeneratedCorpus corpus;
    CorpusAnalysis analysis;
    PrehitResult prehit;
};

Analyzed generate_and_analyze(const ScenarioSpec& spec, const std::string& name) {
    Analyzed a;
    a.dir = fs::temp_directory_path() / ("limitlab_acceptance_" + name);
    fs::remove_all(a.dir);
    a.corpus = generate(spec);
    write_corpus(a.corpus, a.dir);
    AnalysisConfig cfg;
    cfg.calendar = spec.calendar;
    cfg.portfolio_count = spec.portfolio_count;
    cfg.intraday_bin_minutes = spec.intraday_bin_minutes;
    cfg.prehit = spec.prehit;
    a.analysis = analyze_corpus(discover_tick_files({a.dir}), parse_metadata_file(a.dir / "sessions.csv"), cfg, threads());
    a.prehit = accumulate_prehit(a.analysis.events, spec.prehit);
    return a;
}

// ---------------------------------------------------------------------------

Check criterion1() {
    Check c;
    const auto t0 = Clock::now();
    struct Row {
        Cents prev, up, down;
    };
    // R[1.1 P] and R[0.9 P], half-up to the cent, worked by hand.
    const Row rows[] = {{1000, 1100, 900}, {777, 855, 699}, {995, 1095, 896}, {1, 1, 1}, {999999, 1099999, 899999}};
    for (const auto& r : rows) {
        const auto l = compute_limit_prices(r.prev, {});
        c.expect(l.up_limit == r.up, "up(" + std::to_string(r.prev) + ")=" + std::to_string(l.up_limit));
        c.expect(l.down_limit == r.down, "down(" + std::to_string(r.prev) + ")=" + std::to_string(l.down_limit));
    }
    const double dt = seconds_since(t0);
    c.expect(dt < 1.0, "runtime " + num(dt) + " s");
    c.note("5 prev_close values, " + num(dt) + " s");
    return c;
}

void compare_hits(Check& c, const std::vector<DayHitRecord>& got, const std::vector<DayHitRecord>& want) {
    c.expect(got.size() == want.size(), "hit count " + std::to_string(got.size()) + " vs " + std::to_string(want.size()));
    for (std::size_t i = 0; i < std::min(got.size(), want.size()); ++i) {
        std::ostringstream a, b;
        write_hit_row(a, got[i]);
        write_hit_row(b, want[i]);
        c.expect(a.str() == b.str(), "hit row " + a.str() + " vs " + b.str());
        for (auto d : kDirections) {
            const auto& sa = got[i].segments[index_of(d)];
            const auto& sb = want[i].segments[index_of(d)];
            bool same = sa.size() == sb.size();
            for (std::size_t j = 0; same && j < sa.size(); ++j)
                same = sa[j].direction == sb[j].direction && sa[j].start_time == sb[j].start_time &&
                       sa[j].end_time == sb[j].end_time && sa[j].duration == sb[j].duration &&
                       sa[j].ends_at_close == sb[j].ends_at_close;
            c.expect(same, "segments of " + got[i].stock_id.str() + " " + format_date(got[i].date));
        }
    }
}

Check criterion2(const Analyzed& a, double runtime) {
    Check c;
    const auto& m = a.corpus.manifest;
    const auto& an = a.analysis;
    AnalysisConfig cfg;
    const auto sum = summarize_corpus(an, cfg);

    c.expect(an.record_errors.empty(), "record errors in the generated corpus");
    c.expect(an.session_errors.empty(), "session errors in the generated corpus");
    c.expect(an.rows_read == m.rows_total, "rows_total");
    c.expect(an.sessions_total == m.sessions_total, "sessions_total");
    c.expect(an.sessions_excluded == m.sessions_excluded, "sessions_excluded");
    compare_hits(c, an.records, m.hits);

    c.expect(sum.table1.size() == m.table1.size(), "table1 scope count");
    for (std::size_t i = 0; i < std::min(sum.table1.size(), m.table1.size()); ++i) {
        c.expect(sum.table1[i].first == m.table1[i].first, "table1 scope order at " + std::to_string(i));
        c.expect(sum.table1[i].second == m.table1[i].second, "table1 counters " + sum.table1[i].first.label());
    }
    c.expect(sum.table2.size() == m.table2.size(), "table2 row count");
    for (std::size_t i = 0; i < std::min(sum.table2.size(), m.table2.size()); ++i) {
        const auto &x = sum.table2[i], &y = m.table2[i];
        c.expect(x.scope == y.scope && x.direction == y.direction && x.measure == y.measure && x.stats == y.stats,
                 "table2 " + x.scope.label() + " " + std::string(to_string(x.direction)) + " " +
                     std::string(to_string(x.measure)));
    }
    c.expect(sum.intraday.bins.size() == m.intraday.bins.size(), "intraday bin count");
    for (std::size_t i = 0; i < std::min(sum.intraday.bins.size(), m.intraday.bins.size()); ++i) {
        const auto &x = sum.intraday.bins[i], &y = m.intraday.bins[i];
        c.expect(x.start == y.start && x.count == y.count && x.count_bull == y.count_bull &&
                     x.count_bear == y.count_bear,
                 "intraday bin " + format_hhmm(x.start));
    }
    {
        std::ostringstream x, y;
        write_per_stock_csv(x, sum.per_stock);
        write_per_stock_csv(y, m.per_stock);
        c.expect(x.str() == y.str(), "per-stock statistics");
    }

    // Partition identities.
    auto find = [&](RegimeScope r, int p) -> const HitCounters& {
        for (const auto& [s, h] : sum.table1)
            if (s.regime == r && s.portfolio == p) return h;
        throw std::logic_error("missing scope");
    };
    for (auto r : kRegimeScopes) {
        for (auto d : kDirections) {
            const auto& all = find(r, 0)[d];
            std::int64_t parts = 0;
            for (int p = 1; p <= cfg.portfolio_count; ++p) parts += find(r, p)[d].N;
            c.expect(parts == all.N, "N = sum over portfolios, " + std::string(to_string(r)));
            c.expect(all.N_open + all.N_am + all.N_pm == all.N, "N_open + N_am + N_pm = N");
        }
    }
    for (auto d : kDirections) {
        const auto& w = find(RegimeScope::whole, 0)[d];
        c.expect(find(RegimeScope::bull, 0)[d].N + find(RegimeScope::bear, 0)[d].N == w.N, "N = N_bull + N_bear");
    }
    for (const auto& b : sum.intraday.bins)
        for (std::size_t d = 0; d < 2; ++d)
            c.expect(b.count[d] == b.count_bull[d] + b.count_bear[d], "C = C_bull + C_bear at " + format_hhmm(b.start));

    // Coverage of the planted hits.
    std::array<int, 3> windows{};
    std::array<int, 2> dirs{}, closed{};
    for (const auto& r : an.records) {
        ++windows[static_cast<std::size_t>(r.first_hit_window)];
        for (auto d : kDirections)
            if (r.has(d)) ++dirs[index_of(d)];
        ++closed[r.closed_at_limit ? 1 : 0];
    }
    c.expect(an.records.size() >= 500, "only " + std::to_string(an.records.size()) + " hit days");
    for (int w : windows) c.expect(w > 0, "a hit window is not covered");
    for (int d : dirs) c.expect(d > 0, "a direction is not covered");
    for (int k : closed) c.expect(k > 0, "a close state is not covered");
    c.expect(runtime < 60.0, "runtime " + num(runtime) + " s");
    c.note(std::to_string(an.records.size()) + " hit days, " + std::to_string(an.rows_read) + " rows, " +
           num(runtime) + " s");
    return c;
}

Check criterion3() {
    Check c;
    for (double r : {-5.0, -1.0, 0.0, 1.0, 5.0}) {
        const auto sol = solve_r(r_prime(r));
        c.expect(std::abs(sol.r - r) <= 1e-8, "solve_r(r'(" + num(r) + ")) = " + num(sol.r));
    }
    const double r0 = r_prime(0.0);
    c.expect(std::abs(r0 - 1.3236) <= 1e-3, "r'(0) = " + num(r0));
    double prev = -std::numeric_limits<double>::infinity();
    int breaks = 0;
    for (int i = 0; i <= 2000; ++i) {
        const double v = r_prime(-10.0 + 0.01 * i);
        if (!(v > prev)) ++breaks;
        prev = v;
    }
    c.expect(breaks == 0, std::to_string(breaks) + " monotonicity breaks");
    c.note("r'(0) = " + num(r0));
    return c;
}

std::vector<double> truncnorm_samples(double mu, double sigma, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(mu, sigma);
    std::vector<double> out;
    out.reserve(n);
    while (out.size() < n) {
        const double x = normal(rng);
        if (x > 0) out.push_back(x);
    }
    return out;
}

Check criterion4() {
    Check c;
    const auto t0 = Clock::now();
    const double mu = 2.0, sigma = 3.0;
    const std::size_t ns[] = {1000, 10000, 100000};
    const std::uint64_t seeds[] = {101, 202, 303};
    std::vector<double> mean_err;
    for (auto n : ns) {
        double total = 0;
        for (auto s : seeds) {
            const auto f = fit_mle(truncnorm_samples(mu, sigma, n, s * 1000 + n));
            const double e = std::max(std::abs(f.mu - mu) / mu, std::abs(f.sigma - sigma) / sigma);
            total += e;
            if (n == 100000) {
                c.expect(std::abs(f.mu - mu) <= 0.05 * mu, "mu = " + num(f.mu) + " at n = 1e5");
                c.expect(std::abs(f.sigma - sigma) <= 0.05 * sigma, "sigma = " + num(f.sigma) + " at n = 1e5");
            }
        }
        mean_err.push_back(total / 3.0);
    }
    c.expect(mean_err[0] > mean_err[1] && mean_err[1] > mean_err[2],
             "mean error not decreasing: " + num(mean_err[0]) + ", " + num(mean_err[1]) + ", " + num(mean_err[2]));
    const double dt = seconds_since(t0);
    c.expect(dt < 30.0, "runtime " + num(dt) + " s");
    c.note("mean relative error " + num(mean_err[0]) + " > " + num(mean_err[1]) + " > " + num(mean_err[2]) + ", " +
           num(dt) + " s");
    return c;
}

Check criterion5() {
    Check c;
    using boost::math::quadrature::gauss_kronrod;
    const std::pair<double, double> pairs[] = {{2, 3},  {0, 1},  {-1, 0.5}, {-5, 1},   {-20, 1},
                                               {-30, 2}, {5, 1}, {50, 1},   {1000, 10}};
    double worst = 0;
    for (auto [mu, sigma] : pairs) {
        auto f = [&](double x) { return truncnorm_pdf(x, mu, sigma); };
        // Adaptive Gauss-Kronrod; beyond max(mu, 0) + 40 sigma the mass is below 1e-300.
        const double hi = std::max(mu, 0.0) + 40.0 * sigma;
        const double total = gauss_kronrod<double, 61>::integrate(f, 0.0, hi, 15, 1e-13);
        worst = std::max(worst, std::abs(total - 1.0));
        c.expect(std::abs(total - 1.0) <= 1e-8, "integral " + num(total) + " at (" + num(mu) + ", " + num(sigma) + ")");
    }
    c.note("9 pairs, worst |I - 1| = " + num(worst));
    return c;
}

void check_inverse_sum(Check& c, const PrehitResult& r, const std::string& corpus) {
    for (auto cls : kPrehitClasses) {
        const auto& v = r.velocity[index_of(cls)];
        if (v.n_events == 0) continue;
        double s = 0;
        for (const auto& x : v.V) s += 1.0 / *x;
        c.expect(std::abs(s - 1.0) <= 1e-12, "sum 1/V = " + num(s) + " in " + corpus + " " + std::string(to_string(cls)));
    }
}

// One up event from 10:00:00: threshold m (10.50, 10.55, ...) is first
// traded at 10:00:00 + sum_{j<m} (j+1), so Delta t_m = m + 1 seconds.
ScenarioSpec scripted_velocity_spec() {
    ScenarioSpec spec;
    spec.seed = 1;
    spec.levels = 3;
    spec.stocks = {{StockId("600000"), 100'000'000}};
    spec.dates = {test::ymd(2007, 3, 1)};
    DayScript s;
    s.stock = StockId("600000");
    s.date = spec.dates[0];
    s.prev_close = 1000;
    s.records.push_back({hms(9, 25), 1000, 1000, 999, 1001});
    Seconds t = hms(10, 0);
    for (int m = 0; m <= 10; ++m) {
        const Cents p = m < 10 ? 1050 + 5 * m : 1100;
        s.records.push_back({t, p, 1000, p - 1, p});
        t += m + 1;
    }
    s.records.push_back({hms(14, 0), 1080, 1000, 1079, 1081});
    spec.scripts = {s};
    return spec;
}

Check criterion6(const Analyzed& acceptance) {
    Check c;
    const auto uni = generate_and_analyze(load_scenario(kData / "velocity_uniform.json"), "uniform");
    std::size_t uni_events = 0;
    for (auto cls : kPrehitClasses) {
        const auto& v = uni.prehit.velocity[index_of(cls)];
        uni_events += v.n_events;
        if (v.n_events == 0) continue;
        for (std::size_t m = 0; m < v.V.size(); ++m)
            c.expect(std::abs(*v.V[m] - 10.0) <= 1e-12, "uniform V_" + std::to_string(m) + " = " + num(*v.V[m]));
    }
    c.expect(uni_events > 0, "uniform corpus has no velocity events");

    const auto dec = generate_and_analyze(load_scenario(kData / "velocity_decelerating.json"), "decelerating_v");
    const auto script = generate_and_analyze(scripted_velocity_spec(), "scripted_velocity");
    const auto& sv = script.prehit.velocity[index_of(PrehitClass::up_bull)];
    c.expect(sv.n_events == 1, "scripted event count " + std::to_string(sv.n_events));
    if (sv.n_events == 1) {
        c.expect(*sv.V[0] == 55.0, "scripted V_0 = " + num(*sv.V[0]));
        c.expect(*sv.V[9] == 5.5, "scripted V_9 = " + num(*sv.V[9]));
    }
    check_inverse_sum(c, acceptance.prehit, "acceptance");
    check_inverse_sum(c, uni.prehit, "uniform");
    check_inverse_sum(c, dec.prehit, "decelerating");
    check_inverse_sum(c, script.prehit, "scripted");
    c.note(std::to_string(uni_events) + " uniform events");
    fs::remove_all(uni.dir);
    fs::remove_all(dec.dir);
    fs::remove_all(script.dir);
    return c;
}

// ---------------------------------------------------------------------------
// Event-study hand check.

enum class Role { buyer, seller, unknown };

struct PlannedTrade {
    Cents price = 0;
    Shares volume = 0;
    Cents bid = 0, ask = 0; // quote posted one second before the trade
    Role role = Role::unknown;
};

// 100 trades ending with the hit at 11.00; trade k - 1 is window position k.
std::vector<PlannedTrade> plan_event(int variant) {
    std::vector<PlannedTrade> out;
    Cents p = 1000;
    for (int k = 1; k < 100; ++k) {
        PlannedTrade t;
        const int phase = (k + variant) % (3 + variant);
        t.role = phase == 0 ? Role::seller : phase == 1 ? Role::unknown : Role::buyer;
        const Cents half = 1 + (k * (variant + 3)) % 3;
        if (t.role == Role::buyer) {
            p += 1 + variant;
            t.bid = p - 2 * half;
            t.ask = p;
        } else if (t.role == Role::seller) {
            p -= 1;
            t.bid = p;
            t.ask = p + 2 * half;
        } else {
            t.bid = p - half;
            t.ask = p + half;
        }
        t.price = p;
        t.volume = 100 * (1 + (7 * k + 3 * variant) % 13);
        out.push_back(t);
    }
    out.push_back({1100, 5000 + 100 * variant, 1098, 1100, Role::buyer});
    return out;
}

DayScript script_event(const char* stock, const std::vector<PlannedTrade>& plan) {
    DayScript s;
    s.stock = StockId(stock);
    s.date = test::ymd(2007, 3, 1);
    s.prev_close = 1000;
    s.records.push_back({hms(9, 25), 1000, 1000, std::nullopt, std::nullopt});
    Seconds t = hms(9, 40);
    for (const auto& p : plan) {
        s.records.push_back({t, 0, 0, p.bid, p.ask});
        s.records.push_back({t + 1, p.price, p.volume, std::nullopt, std::nullopt});
        t += 2;
    }
    return s;
}

Check criterion7() {
    Check c;
    const std::vector<std::vector<PlannedTrade>> plans{plan_event(0), plan_event(1)};
    ScenarioSpec spec;
    spec.levels = 3;
    spec.stocks = {{StockId("600000"), 100'000'000}, {StockId("600001"), 200'000'000}};
    spec.dates = {test::ymd(2007, 3, 1)};
    spec.scripts = {script_event("600000", plans[0]), script_event("600001", plans[1])};
    const auto a = generate_and_analyze(spec, "event_study");
    const auto& es = a.prehit.event_study[index_of(PrehitClass::up_bull)];
    c.expect(es.n_events == 2, "event count " + std::to_string(es.n_events));

    // Hand computation straight from the planned trades.
    const double tol = 1e-12;
    double sum_R = 0;
    for (std::size_t k = 0; k < 100 && es.points.size() == 100; ++k) {
        double sp = 0, sm = 0, R = 0, v = 0, S = 0;
        int np = 0, nm = 0;
        for (const auto& plan : plans) {
            const auto& t = plan[k];
            const Cents prev = k == 0 ? 1000 : plan[k - 1].price;
            const double ret = std::log(static_cast<double>(t.price) / static_cast<double>(prev));
            R += ret / 2;
            v += std::abs(ret) / 2;
            S += (static_cast<double>(t.ask - t.bid) / ((t.ask + t.bid) / 2.0)) / 2;
            const bool same = k == 99 || t.role == Role::buyer;
            if (same) {
                sp += std::log(static_cast<double>(t.volume));
                ++np;
            } else if (t.role == Role::seller) {
                sm += std::log(static_cast<double>(t.volume));
                ++nm;
            }
        }
        const auto& got = es.points[k];
        const std::string at = " at k = " + std::to_string(k + 1);
        if (np > 0) c.expect(got.s_plus && near_rel(*got.s_plus, sp / np, tol), "s+" + at);
        else c.expect(!got.s_plus, "s+ should be empty" + at);
        if (k == 99) c.expect(got.s_minus && *got.s_minus == 0.0, "s-(100) = 0");
        else if (nm > 0) c.expect(got.s_minus && near_rel(*got.s_minus, sm / nm, tol), "s-" + at);
        else c.expect(!got.s_minus, "s- should be empty" + at);
        c.expect(near_rel(got.R, R, tol) || std::abs(got.R - R) <= 1e-15, "R" + at);
        c.expect(near_rel(got.v, v, tol), "v" + at);
        c.expect(got.S && near_rel(*got.S, S, tol), "S" + at);
        sum_R += got.R;
    }
    // Telescoping: sum_k R(k) = mean over events of ln(p_100 / p_0).
    c.expect(std::abs(sum_R - std::log(1100.0 / 1000.0)) <= 1e-12, "telescoping sum R = " + num(sum_R));

    // Constant price: the hit trade is the only move.
    std::vector<PlannedTrade> flat(100);
    for (int k = 0; k < 99; ++k) flat[k] = {1000, 300, 999, 1001, Role::unknown};
    flat[99] = {1100, 300, 1099, 1100, Role::buyer};
    ScenarioSpec fspec = spec;
    fspec.scripts = {script_event("600000", flat), script_event("600001", flat)};
    const auto f = generate_and_analyze(fspec, "event_study_flat");
    const auto& fs_ = f.prehit.event_study[index_of(PrehitClass::up_bull)];
    c.expect(fs_.n_events == 2, "flat event count");
    for (std::size_t k = 0; k + 1 < fs_.points.size(); ++k)
        c.expect(fs_.points[k].R == 0.0 && fs_.points[k].v == 0.0, "flat R, v at k = " + std::to_string(k + 1));

    std::vector<PrehitEvent> constant;
    for (int e = 0; e < 3; ++e) {
        PrehitEvent ev;
        ev.stock_id = StockId(e == 0 ? "600000" : e == 1 ? "600001" : "600002");
        ev.date = test::ymd(2007, 3, 1);
        ev.velocity_exclusion = VelocityExclusion::zero_duration;
        ev.points.resize(100);
        for (auto& p : ev.points) {
            p.log_size = std::log(300.0);
            p.role = TradeRole::same;
        }
        constant.push_back(ev);
    }
    const auto cr = accumulate_prehit(constant);
    for (const auto& p : cr.event_study[0].points) c.expect(p.R == 0.0 && p.v == 0.0, "constant events R, v");

    c.note("2 scripted events, 100 positions");
    fs::remove_all(a.dir);
    fs::remove_all(f.dir);
    return c;
}

// ---------------------------------------------------------------------------

int cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(std::move(args), out, err);
    if (code != 0) std::cerr << err.str();
    return code;
}

Check criterion8(const Analyzed& a) {
    Check c;
    const auto root = fs::temp_directory_path() / "limitlab_acceptance_threads";
    fs::remove_all(root);
    const std::string input = a.dir.string();
    for (const char* t : {"1", "8"}) {
        const auto out = (root / t).string();
        c.expect(cli({"--threads", t, "hits", input, "--out", out}) == 0, "hits failed");
        c.expect(cli({"--threads", t, "summary", input, "--out", out}) == 0, "summary failed");
        c.expect(cli({"--threads", t, "intraday", input, "--out", out}) == 0, "intraday failed");
        c.expect(cli({"--threads", t, "prehit", input, "--out", out}) == 0, "prehit failed");
        c.expect(cli({"--threads", t, "fit", input, "--target", "duration", "--direction", "up", "--out", out}) == 0,
                 "fit failed");
        c.expect(cli({"--threads", t, "fit", input, "--target", "hit_prob", "--direction", "down", "--out", out}) == 0,
                 "fit failed");
    }
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(root / "1")) {
        const auto other = root / "8" / e.path().filename();
        c.expect(fs::exists(other) && slurp(e.path()) == slurp(other), "differs: " + e.path().filename().string());
        ++files;
    }
    c.expect(files >= 20, "only " + std::to_string(files) + " report files");
    c.note(std::to_string(files) + " report files compared");
    fs::remove_all(root);
    return c;
}

Check criterion9() {
    Check c;
    const auto dec = generate_and_analyze(load_scenario(kData / "velocity_decelerating.json"), "decelerating");
    int classes = 0;
    for (auto cls : kPrehitClasses) {
        const auto& v = dec.prehit.velocity[index_of(cls)];
        if (v.n_events == 0) continue;
        ++classes;
        for (std::size_t m = 1; m < v.V.size(); ++m)
            c.expect(*v.V[m] < *v.V[m - 1], std::string(to_string(cls)) + " V_" + std::to_string(m) + " >= V_" +
                                                 std::to_string(m - 1));
    }
    c.expect(classes > 0, "no class has velocity events");
    c.note(std::to_string(classes) + " classes with events");
    fs::remove_all(dec.dir);
    return c;
}

}  // namespace

int main() {
    int failed = 0;
    auto report = [&](int id, const char* title, const std::function<Check()>& fn) {
        Check c;
        const auto t0 = Clock::now();
        try {
            c = fn();
        } catch (const std::exception& e) {
            c.expect(false, std::string("exception: ") + e.what());
        }
        std::cout << (c.ok() ? "PASS" : "FAIL") << " criterion " << id << ": " << title;
        const auto d = c.detail();
        if (!d.empty()) std::cout << " (" << d << ")";
        std::cout << " [" << num(seconds_since(t0)) << " s]" << std::endl;
        if (!c.ok()) ++failed;
    };

    report(1, "limit price rounding golden table", criterion1);

    Analyzed corpus;
    double corpus_runtime = 0;
    auto ensure_corpus = [&] {
        if (!corpus.dir.empty()) return;
        const auto t0 = Clock::now();
        corpus = generate_and_analyze(load_scenario(kData / "acceptance_corpus.json"), "corpus");
        corpus_runtime = seconds_since(t0);
    };
    report(2, "generated corpus equals its truth manifest", [&] {
        ensure_corpus();
        return criterion2(corpus, corpus_runtime);
    });
    report(3, "truncated-normal r' round trip and monotonicity", criterion3);
    report(4, "MLE consistency", criterion4);
    report(5, "truncated-normal pdf normalization", criterion5);
    report(6, "velocity properties", [&] {
        ensure_corpus();
        return criterion6(corpus);
    });
    report(7, "event-study hand check", criterion7);
    report(8, "reports identical under --threads 1 and 8", [&] {
        ensure_corpus();
        return criterion8(corpus);
    });
    report(9, "decelerating ramps give decreasing V_m", criterion9);

    if (!corpus.dir.empty()) fs::remove_all(corpus.dir);
    std::cout << (failed == 0 ? "ALL PASS" : std::to_string(failed) + " criteria FAILED") << std::endl;
    return failed == 0 ? 0 : 1;
}
