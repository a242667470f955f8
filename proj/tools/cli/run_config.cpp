#include "cli/run_config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace limitlab::cli {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

int parse_positive(std::string_view key, std::string_view value) {
    const auto v = parse_int(value);
    if (!v || *v <= 0 || *v > 1'000'000) throw ConfigError(std::string(key) + " must be a positive integer");
    return static_cast<int>(*v);
}

Seconds parse_clock_time(std::string_view key, std::string_view value) {
    const auto t = parse_time(value);
    if (!t) throw ConfigError(std::string(key) + " must be HH:MM:SS");
    return *t;
}

}  // namespace

std::int64_t parse_fraction_bp(std::string_view text) {
    const auto fail = [&] { return ConfigError("bad fraction '" + std::string(text) + "'"); };
    if (text.empty() || text.front() < '0' || text.front() > '9') throw fail();
    const auto dot = text.find('.');
    const auto whole = parse_int(text.substr(0, dot));
    if (!whole || *whole < 0 || *whole > 1) throw fail();
    std::int64_t bp = *whole * 10000;
    if (dot != std::string_view::npos) {
        const auto frac = text.substr(dot + 1);
        if (frac.empty() || frac.size() > 4) throw fail();
        std::int64_t scale = 1000;
        for (char c : frac) {
            if (c < '0' || c > '9') throw fail();
            bp += (c - '0') * scale;
            scale /= 10;
        }
    }
    return bp;
}

std::string format_fraction_bp(std::int64_t bp) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%lld.%04lld", static_cast<long long>(bp / 10000), static_cast<long long>(bp % 10000));
    std::string s = buf;
    while (s.back() == '0' && s[s.size() - 2] != '.') s.pop_back();
    return s;
}

std::uint64_t fnv1a64(std::string_view data) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void RunConfig::set(std::string_view key, std::string_view value) {
    auto& a = analysis;
    if (key == "tick_cents") a.rule.tick_cents = parse_positive(key, value);
    else if (key == "limit_fraction") a.rule.fraction_bp = parse_fraction_bp(value);
    else if (key == "open_end") a.windows.open_end = parse_clock_time(key, value);
    else if (key == "am_end") a.windows.am_end = parse_clock_time(key, value);
    else if (key == "pm_start") a.windows.pm_start = parse_clock_time(key, value);
    else if (key == "close") a.windows.close = parse_clock_time(key, value);
    else if (key == "clock") {
        if (value == "trading") a.clock = DurationClock::trading;
        else if (value == "wall") a.clock = DurationClock::wall;
        else throw ConfigError("clock must be trading or wall");
    } else if (key == "regime_calendar") {
        a.calendar = RegimeCalendar::parse(value);
        calendar_text = a.calendar.to_string();
    } else if (key == "portfolio_count") a.portfolio_count = parse_positive(key, value);
    else if (key == "intraday_bin_minutes") a.intraday_bin_minutes = parse_positive(key, value);
    else if (key == "event_window") a.prehit.event_window = parse_positive(key, value);
    else if (key == "velocity_subintervals") a.prehit.velocity_subintervals = parse_positive(key, value);
    else if (key == "velocity_start") a.prehit.velocity_start_bp = parse_fraction_bp(value);
    else throw ConfigError("unknown config key '" + std::string(key) + "'");
}

void RunConfig::validate() const {
    const auto& w = analysis.windows;
    if (!(w.first_record < w.open_end && w.open_end < w.am_end && w.am_end < w.pm_start && w.pm_start < w.close))
        throw ConfigError("session windows must be ordered and non-overlapping");
    if (analysis.rule.fraction_bp <= 0 || analysis.rule.fraction_bp >= 10000)
        throw ConfigError("limit_fraction must lie in (0, 1)");
    if (analysis.prehit.velocity_start_bp <= 0 || analysis.prehit.velocity_start_bp >= analysis.rule.fraction_bp)
        throw ConfigError("velocity_start must lie in (0, limit_fraction)");
    const Seconds width = analysis.intraday_bin_minutes * 60;
    if ((w.am_end - w.open_end) % width != 0 || (w.close - w.pm_start) % width != 0)
        throw ConfigError("intraday_bin_minutes must divide both continuous sessions");
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
    const auto& a = analysis;
    return {
        {"tick_cents", std::to_string(a.rule.tick_cents)},
        {"limit_fraction", format_fraction_bp(a.rule.fraction_bp)},
        {"open_end", format_time(a.windows.open_end)},
        {"am_end", format_time(a.windows.am_end)},
        {"pm_start", format_time(a.windows.pm_start)},
        {"close", format_time(a.windows.close)},
        {"clock", a.clock == DurationClock::trading ? "trading" : "wall"},
        {"regime_calendar", calendar_text},
        {"portfolio_count", std::to_string(a.portfolio_count)},
        {"intraday_bin_minutes", std::to_string(a.intraday_bin_minutes)},
        {"event_window", std::to_string(a.prehit.event_window)},
        {"velocity_subintervals", std::to_string(a.prehit.velocity_subintervals)},
        {"velocity_start", format_fraction_bp(a.prehit.velocity_start_bp)},
    };
}

std::string RunConfig::hash() const {
    std::string text;
    for (const auto& [k, v] : entries()) text += k + '=' + v + '\n';
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(text)));
    return buf;
}

void apply_config_text(RunConfig& config, std::string_view text, std::string_view source) {
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        auto line = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(std::string(source) + ":" + std::to_string(line_no) + ": expected key = value");
        try {
            config.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(std::string(source) + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    apply_config_text(config, buf.str(), path.string());
}

void apply_override(RunConfig& config, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) throw ConfigError("--set expects key=value, got '" + std::string(assignment) + "'");
    config.set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

}  // namespace limitlab::cli
