#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "limitlab/common.hpp"

namespace limitlab {

inline constexpr int kMaxLobLevels = 5;
inline constexpr Seconds kFirstRecordTime = hms(9, 15);
inline constexpr Seconds kLastRecordTime = hms(15, 0);

/// Best J price levels on each side. A zero price at a level encodes
/// "level absent"; its volume must then be zero as well.
struct LobSnapshot {
    int levels = 3;
    std::array<Cents, kMaxLobLevels> ask_prices{};
    std::array<Shares, kMaxLobLevels> ask_volumes{};
    std::array<Cents, kMaxLobLevels> bid_prices{};
    std::array<Shares, kMaxLobLevels> bid_volumes{};

    std::optional<Cents> best_ask() const noexcept {
        return ask_prices[0] > 0 ? std::optional<Cents>{ask_prices[0]} : std::nullopt;
    }
    std::optional<Cents> best_bid() const noexcept {
        return bid_prices[0] > 0 ? std::optional<Cents>{bid_prices[0]} : std::nullopt;
    }

    /// Empty string when the snapshot satisfies every ladder invariant,
    /// otherwise a description of the first violation. A locked book
    /// (ask == bid) is legal; a crossed one is not.
    std::string validate() const;

    friend bool operator==(const LobSnapshot&, const LobSnapshot&) = default;
};

struct TickRecord {
    StockId stock_id;
    Seconds timestamp = 0;
    Cents trade_price = 0;   // 0 if no trade at this record
    Shares trade_volume = 0; // 0 if no trade
    LobSnapshot lob;

    bool has_trade() const noexcept { return trade_volume > 0; }

    friend bool operator==(const TickRecord&, const TickRecord&) = default;
};

/// Per-stock-day metadata supplied by the sidecar CSV.
struct SessionMetadata {
    Cents prev_close = 0;
    Shares shares_outstanding = 0;
    bool is_ipo_day = false;
    bool is_ex_dividend_day = false;
    std::optional<Cents> next_day_open; // absent: halt followed, or end of sample
};

struct StockDaySession {
    StockId stock_id;
    Date date{};
    Cents prev_close = 0;
    Shares shares_outstanding = 0;
    bool is_ipo_day = false;
    bool is_ex_dividend_day = false;
    std::optional<Cents> next_day_open;
    std::vector<TickRecord> ticks; // sorted by timestamp, non-decreasing

    /// shares_outstanding x prev_close, in cent-shares.
    std::int64_t capitalization() const noexcept { return shares_outstanding * prev_close; }
    /// Last trade price of the day, if any trade happened.
    std::optional<Cents> closing_price() const noexcept;
    /// IPO and ex-dividend days are removed from every statistic.
    bool excluded() const noexcept { return is_ipo_day || is_ex_dividend_day; }
};

using SessionKey = std::pair<StockId, Date>;

struct SessionKeyLess {
    bool operator()(const SessionKey& a, const SessionKey& b) const noexcept {
        if (a.first != b.first) return a.first < b.first;
        return a.second < b.second;
    }
};

using MetadataTable = std::map<SessionKey, SessionMetadata, SessionKeyLess>;

// ---------------------------------------------------------------------------
// Tick CSV format.

/// Column positions resolved from a tick file's header row.
/// J (the number of LOB levels) is inferred from the ask/bid column names.
class ColumnMap {
public:
    /// Throws DataError when mandatory columns are missing or the ladder
    /// columns are inconsistent.
    static ColumnMap from_header(std::string_view header_line);
    /// Header row of the canonical layout for `levels` LOB levels.
    static std::string canonical_header(int levels);

    int levels() const noexcept { return levels_; }
    std::size_t field_count() const noexcept { return field_count_; }

    std::size_t stock_id = 0, date = 0, time = 0, trade_price = 0, trade_volume = 0;
    std::array<std::size_t, kMaxLobLevels> ask_price{}, ask_volume{}, bid_price{}, bid_volume{};

private:
    int levels_ = 0;
    std::size_t field_count_ = 0;
};

struct RecordError {
    std::string file;
    std::size_t row = 0; // 1-based line number in the file, header is row 1
    std::string message;
};

struct SessionError {
    std::string stock_id;
    std::string date;
    std::string message;
};

struct ParseResult {
    std::vector<StockDaySession> sessions; // ordered by (stock_id, date)
    std::vector<RecordError> record_errors;
    std::vector<SessionError> session_errors; // e.g. rows without sidecar metadata
    std::size_t rows_read = 0;                // data rows, excluding the header
    std::size_t rows_valid = 0;
    int levels = 0;
};

/// Parses one tick CSV. Every valid row becomes one TickRecord; malformed
/// rows are reported with their row number and skipped. Rows are grouped
/// into sessions by (stock_id, date) and sorted by timestamp within each
/// session. Stock-days missing from `metadata` are reported as session
/// errors. Throws DataError if the file cannot be read or lacks a header.
ParseResult parse_tick_file(const std::filesystem::path& path, const MetadataTable& metadata);
ParseResult parse_tick_stream(std::istream& in, const std::string& name, const MetadataTable& metadata);

/// Writes the canonical header followed by one row per tick of every
/// session, in order. Parsing canonical output and writing it back
/// reproduces the input byte-for-byte.
void write_tick_csv(std::ostream& out, const std::vector<StockDaySession>& sessions, int levels);
void write_tick_row(std::ostream& out, const TickRecord& tick, const Date& date, int levels);

inline constexpr std::string_view kMetadataHeader =
    "stock_id,date,prev_close,shares_outstanding,is_ipo_day,is_ex_dividend_day,next_day_open";

/// Reads the per-stock-day sidecar. Throws DataError on any malformed row.
MetadataTable parse_metadata_file(const std::filesystem::path& path);
MetadataTable parse_metadata_stream(std::istream& in, const std::string& name);
void write_metadata_row(std::ostream& out, const StockId& stock, const Date& date, const SessionMetadata& meta);

// ---------------------------------------------------------------------------
// Trade aggressor classification.

enum class TradeSide : std::uint8_t { buyer_initiated, seller_initiated, unknown };

std::string_view to_string(TradeSide side) noexcept;

/// Quote rule against the snapshot preceding the trade, then tick test
/// against the previous trade price.
TradeSide classify_trade_direction(const TickRecord& tick, const LobSnapshot* prev_lob,
                                   std::optional<Cents> prev_trade_price) noexcept;

}  // namespace limitlab
