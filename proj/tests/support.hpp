#pragma once

#include <filesystem>
#include <initializer_list>
#include <optional>
#include <random>
#include <string>

#include "limitlab/common.hpp"
#include "limitlab/market_data.hpp"

namespace limitlab::test {

inline Date ymd(int y, unsigned m, unsigned d) {
    return Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
}

/// Tick with an optional level-1 book.
inline TickRecord tick(Seconds t, Cents price, Shares volume = 100, std::optional<Cents> bid = std::nullopt,
                       std::optional<Cents> ask = std::nullopt, const char* stock = "600000") {
    TickRecord r;
    r.stock_id = StockId(stock);
    r.timestamp = t;
    r.trade_price = price;
    r.trade_volume = price > 0 ? volume : 0;
    r.lob.levels = 1;
    if (bid) {
        r.lob.bid_prices[0] = *bid;
        r.lob.bid_volumes[0] = 100;
    }
    if (ask) {
        r.lob.ask_prices[0] = *ask;
        r.lob.ask_volumes[0] = 100;
    }
    return r;
}

inline StockDaySession session(std::initializer_list<TickRecord> ticks, Cents prev_close = 1000,
                               std::optional<Cents> next_open = std::nullopt, const char* stock = "600000",
                               Date date = ymd(2007, 3, 1)) {
    StockDaySession s;
    s.stock_id = StockId(stock);
    s.date = date;
    s.prev_close = prev_close;
    s.shares_outstanding = 1'000'000;
    s.next_day_open = next_open;
    s.ticks = ticks;
    return s;
}

/// Fresh, empty scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    static std::mt19937_64 rng{std::random_device{}()};
    auto dir = std::filesystem::temp_directory_path() / ("limitlab_" + name + "_" + std::to_string(rng() % 1000000007));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace limitlab::test
