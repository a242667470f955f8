#include "limitlab/market_data.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace limitlab {

namespace {

// Splits on ',' without allocating; `fields` is reused across rows.
void split_csv(std::string_view line, std::vector<std::string_view>& fields) {
    fields.clear();
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::string_view strip_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

std::string validate_ladder(const char* side, const std::array<Cents, kMaxLobLevels>& prices,
                            const std::array<Shares, kMaxLobLevels>& volumes, int levels, bool ascending) {
    Cents last = 0;
    for (int j = 0; j < levels; ++j) {
        if (prices[j] < 0 || volumes[j] < 0) return std::string(side) + " level has a negative field";
        if (prices[j] == 0) {
            if (volumes[j] != 0) return std::string(side) + " level " + std::to_string(j + 1) + " has volume but no price";
            continue;
        }
        if (last != 0 && (ascending ? prices[j] <= last : prices[j] >= last))
            return std::string(side) + " prices not strictly " + (ascending ? "increasing" : "decreasing");
        last = prices[j];
    }
    return {};
}

bool parse_flag(std::string_view text, bool& out) {
    if (text == "0") { out = false; return true; }
    if (text == "1") { out = true; return true; }
    return false;
}

}  // namespace

std::string LobSnapshot::validate() const {
    if (levels < 1 || levels > kMaxLobLevels) return "unsupported number of LOB levels";
    if (auto err = validate_ladder("ask", ask_prices, ask_volumes, levels, true); !err.empty()) return err;
    if (auto err = validate_ladder("bid", bid_prices, bid_volumes, levels, false); !err.empty()) return err;
    if (ask_prices[0] > 0 && bid_prices[0] > 0 && ask_prices[0] < bid_prices[0]) return "crossed book";
    return {};
}

std::optional<Cents> StockDaySession::closing_price() const noexcept {
    for (auto it = ticks.rbegin(); it != ticks.rend(); ++it)
        if (it->has_trade()) return it->trade_price;
    return std::nullopt;
}

// ---------------------------------------------------------------------------

ColumnMap ColumnMap::from_header(std::string_view header_line) {
    std::vector<std::string_view> names;
    split_csv(strip_cr(header_line), names);
    auto find = [&](const std::string& name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return i;
        return std::nullopt;
    };
    auto require = [&](const std::string& name) {
        auto pos = find(name);
        if (!pos) throw DataError("tick header is missing column '" + name + "'");
        return *pos;
    };

    ColumnMap map;
    map.stock_id = require("stock_id");
    map.date = require("date");
    map.time = require("time");
    map.trade_price = require("trade_price");
    map.trade_volume = require("trade_volume");
    int levels = 0;
    while (levels < kMaxLobLevels && find("ask_price_" + std::to_string(levels + 1))) ++levels;
    if (levels == 0) throw DataError("tick header has no ask_price_1 column");
    for (int j = 0; j < levels; ++j) {
        const auto suffix = std::to_string(j + 1);
        map.ask_price[j] = require("ask_price_" + suffix);
        map.ask_volume[j] = require("ask_volume_" + suffix);
        map.bid_price[j] = require("bid_price_" + suffix);
        map.bid_volume[j] = require("bid_volume_" + suffix);
    }
    if (find("ask_price_" + std::to_string(levels + 1)) || find("bid_price_" + std::to_string(levels + 1)))
        throw DataError("tick header declares more than five LOB levels");
    map.levels_ = levels;
    map.field_count_ = names.size();
    return map;
}

std::string ColumnMap::canonical_header(int levels) {
    std::string h = "stock_id,date,time,trade_price,trade_volume";
    for (int j = 1; j <= levels; ++j)
        h += ",ask_price_" + std::to_string(j) + ",ask_volume_" + std::to_string(j);
    for (int j = 1; j <= levels; ++j)
        h += ",bid_price_" + std::to_string(j) + ",bid_volume_" + std::to_string(j);
    return h;
}

ParseResult parse_tick_file(const std::filesystem::path& path, const MetadataTable& metadata) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open tick file " + path.string());
    return parse_tick_stream(in, path.string(), metadata);
}

ParseResult parse_tick_stream(std::istream& in, const std::string& name, const MetadataTable& metadata) {
    ParseResult result;
    std::string line;
    if (!std::getline(in, line)) throw DataError("tick file " + name + " is empty (header row is mandatory)");
    const ColumnMap columns = ColumnMap::from_header(line);
    result.levels = columns.levels();

    std::map<SessionKey, std::vector<TickRecord>, SessionKeyLess> groups;
    std::vector<std::string_view> fields;
    std::size_t row = 1;

    // Cache the last key: canonical input is sorted, so consecutive rows
    // almost always belong to the same session.
    std::string last_stock, last_date;
    std::vector<TickRecord>* current = nullptr;
    StockId current_stock;

    while (std::getline(in, line)) {
        ++row;
        const auto text = strip_cr(line);
        if (text.empty()) continue;
        ++result.rows_read;
        split_csv(text, fields);
        auto fail = [&](std::string message) {
            result.record_errors.push_back({name, row, std::move(message)});
        };
        if (fields.size() != columns.field_count()) {
            fail("expected " + std::to_string(columns.field_count()) + " fields, found " + std::to_string(fields.size()));
            continue;
        }

        const auto stock_text = fields[columns.stock_id];
        const auto date_text = fields[columns.date];
        if (current == nullptr || stock_text != last_stock || date_text != last_date) {
            StockId stock;
            try {
                stock = StockId(stock_text);
            } catch (const DataError& e) {
                fail(e.what());
                continue;
            }
            const auto date = parse_date(date_text);
            if (!date) {
                fail("invalid date '" + std::string(date_text) + "'");
                continue;
            }
            current = &groups[{stock, *date}];
            current_stock = stock;
            last_stock.assign(stock_text);
            last_date.assign(date_text);
        }

        TickRecord tick;
        tick.stock_id = current_stock;
        const auto time = parse_time(fields[columns.time]);
        if (!time) {
            fail("invalid time '" + std::string(fields[columns.time]) + "'");
            continue;
        }
        if (*time < kFirstRecordTime || *time > kLastRecordTime) {
            fail("timestamp " + std::string(fields[columns.time]) + " outside 09:15:00-15:00:00");
            continue;
        }
        tick.timestamp = *time;

        const auto price = parse_yuan(fields[columns.trade_price]);
        const auto volume = parse_int(fields[columns.trade_volume]);
        if (!price || !volume || *volume < 0) {
            fail("invalid trade price or volume");
            continue;
        }
        if ((*price > 0) != (*volume > 0)) {
            fail("trade price and trade volume must both be zero or both positive");
            continue;
        }
        tick.trade_price = *price;
        tick.trade_volume = *volume;

        tick.lob.levels = columns.levels();
        bool ok = true;
        for (int j = 0; j < columns.levels() && ok; ++j) {
            const auto ap = parse_yuan(fields[columns.ask_price[j]]);
            const auto av = parse_int(fields[columns.ask_volume[j]]);
            const auto bp = parse_yuan(fields[columns.bid_price[j]]);
            const auto bv = parse_int(fields[columns.bid_volume[j]]);
            if (!ap || !av || !bp || !bv) {
                fail("invalid LOB field at level " + std::to_string(j + 1));
                ok = false;
                break;
            }
            tick.lob.ask_prices[j] = *ap;
            tick.lob.ask_volumes[j] = *av;
            tick.lob.bid_prices[j] = *bp;
            tick.lob.bid_volumes[j] = *bv;
        }
        if (!ok) continue;
        if (auto err = tick.lob.validate(); !err.empty()) {
            fail(err);
            continue;
        }
        current->push_back(tick);
        ++result.rows_valid;
    }
    if (in.bad()) throw DataError("read error in tick file " + name);

    result.sessions.reserve(groups.size());
    for (auto& [key, ticks] : groups) {
        const auto meta = metadata.find(key);
        if (meta == metadata.end()) {
            result.session_errors.push_back({key.first.str(), format_date(key.second), "no sidecar metadata"});
            continue;
        }
        if (meta->second.prev_close <= 0) {
            result.session_errors.push_back({key.first.str(), format_date(key.second), "prev_close must be positive"});
            continue;
        }
        StockDaySession session;
        session.stock_id = key.first;
        session.date = key.second;
        session.prev_close = meta->second.prev_close;
        session.shares_outstanding = meta->second.shares_outstanding;
        session.is_ipo_day = meta->second.is_ipo_day;
        session.is_ex_dividend_day = meta->second.is_ex_dividend_day;
        session.next_day_open = meta->second.next_day_open;
        std::stable_sort(ticks.begin(), ticks.end(),
                         [](const TickRecord& a, const TickRecord& b) { return a.timestamp < b.timestamp; });
        session.ticks = std::move(ticks);
        result.sessions.push_back(std::move(session));
    }
    return result;
}

void write_tick_row(std::ostream& out, const TickRecord& tick, const Date& date, int levels) {
    std::string row;
    row.reserve(64 + 24 * levels);
    row += tick.stock_id.view();
    row += ',';
    row += format_date(date);
    row += ',';
    row += format_time(tick.timestamp);
    row += ',';
    row += format_yuan(tick.trade_price);
    row += ',';
    row += std::to_string(tick.trade_volume);
    for (int j = 0; j < levels; ++j) {
        row += ',';
        row += format_yuan(tick.lob.ask_prices[j]);
        row += ',';
        row += std::to_string(tick.lob.ask_volumes[j]);
    }
    for (int j = 0; j < levels; ++j) {
        row += ',';
        row += format_yuan(tick.lob.bid_prices[j]);
        row += ',';
        row += std::to_string(tick.lob.bid_volumes[j]);
    }
    row += '\n';
    out << row;
}

void write_tick_csv(std::ostream& out, const std::vector<StockDaySession>& sessions, int levels) {
    out << ColumnMap::canonical_header(levels) << '\n';
    for (const auto& s : sessions)
        for (const auto& t : s.ticks) write_tick_row(out, t, s.date, levels);
}

// ---------------------------------------------------------------------------

MetadataTable parse_metadata_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open metadata file " + path.string());
    return parse_metadata_stream(in, path.string());
}

MetadataTable parse_metadata_stream(std::istream& in, const std::string& name) {
    MetadataTable table;
    std::string line;
    if (!std::getline(in, line) || strip_cr(line) != kMetadataHeader)
        throw DataError("metadata file " + name + " must start with header: " + std::string(kMetadataHeader));
    std::vector<std::string_view> f;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        const auto text = strip_cr(line);
        if (text.empty()) continue;
        split_csv(text, f);
        const auto where = name + ":" + std::to_string(row) + ": ";
        if (f.size() != 7) throw DataError(where + "expected 7 fields");
        const StockId stock{f[0]};
        const auto date = parse_date(f[1]);
        if (!date) throw DataError(where + "invalid date");
        SessionMetadata meta;
        const auto prev_close = parse_yuan(f[2]);
        const auto shares = parse_int(f[3]);
        if (!prev_close || *prev_close <= 0) throw DataError(where + "prev_close must be a positive price");
        if (!shares || *shares < 0) throw DataError(where + "invalid shares_outstanding");
        meta.prev_close = *prev_close;
        meta.shares_outstanding = *shares;
        if (!parse_flag(f[4], meta.is_ipo_day) || !parse_flag(f[5], meta.is_ex_dividend_day))
            throw DataError(where + "flags must be 0 or 1");
        if (!f[6].empty()) {
            const auto open = parse_yuan(f[6]);
            if (!open || *open <= 0) throw DataError(where + "invalid next_day_open");
            meta.next_day_open = *open;
        }
        if (!table.emplace(SessionKey{stock, *date}, meta).second)
            throw DataError(where + "duplicate stock-day");
    }
    return table;
}

void write_metadata_row(std::ostream& out, const StockId& stock, const Date& date, const SessionMetadata& meta) {
    out << stock.view() << ',' << format_date(date) << ',' << format_yuan(meta.prev_close) << ','
        << meta.shares_outstanding << ',' << (meta.is_ipo_day ? 1 : 0) << ',' << (meta.is_ex_dividend_day ? 1 : 0)
        << ',' << (meta.next_day_open ? format_yuan(*meta.next_day_open) : std::string{}) << '\n';
}

// ---------------------------------------------------------------------------

std::string_view to_string(TradeSide side) noexcept {
    switch (side) {
        case TradeSide::buyer_initiated: return "buyer_initiated";
        case TradeSide::seller_initiated: return "seller_initiated";
        case TradeSide::unknown: break;
    }
    return "unknown";
}

TradeSide classify_trade_direction(const TickRecord& tick, const LobSnapshot* prev_lob,
                                   std::optional<Cents> prev_trade_price) noexcept {
    const Cents price = tick.trade_price;
    if (prev_lob != nullptr) {
        if (auto ask = prev_lob->best_ask(); ask && price >= *ask) return TradeSide::buyer_initiated;
        if (auto bid = prev_lob->best_bid(); bid && price <= *bid) return TradeSide::seller_initiated;
    }
    if (prev_trade_price) {
        if (price > *prev_trade_price) return TradeSide::buyer_initiated;
        if (price < *prev_trade_price) return TradeSide::seller_initiated;
    }
    return TradeSide::unknown;
}

}  // namespace limitlab
