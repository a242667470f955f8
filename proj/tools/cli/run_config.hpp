#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "limitlab/pipeline.hpp"

namespace limitlab::cli {

/// Analysis settings shared by every subcommand. Paths and thread counts
/// are command-line options and do not take part in the hash.
struct RunConfig {
    AnalysisConfig analysis{};
    std::string calendar_text = RegimeCalendar::default_calendar().to_string();

    /// Applies one `key = value` setting. Throws ConfigError for unknown keys
    /// or malformed values.
    void set(std::string_view key, std::string_view value);
    /// Throws ConfigError if the settings are inconsistent.
    void validate() const;

    /// Every key in canonical order with its resolved value.
    std::vector<std::pair<std::string, std::string>> entries() const;
    /// FNV-1a 64 over the canonical "key=value\n" lines, as 16 hex digits.
    std::string hash() const;
};

/// `key = value` lines; blank lines and lines starting with '#' are skipped.
void apply_config_text(RunConfig& config, std::string_view text, std::string_view source);
void apply_config_file(RunConfig& config, const std::filesystem::path& path);
/// "key=value" as given to --set.
void apply_override(RunConfig& config, std::string_view assignment);

/// Decimal fraction ("0.1", "0.05") to basis points; exact, at most 4 decimals.
std::int64_t parse_fraction_bp(std::string_view text);
std::string format_fraction_bp(std::int64_t bp);

std::uint64_t fnv1a64(std::string_view data) noexcept;

}  // namespace limitlab::cli
