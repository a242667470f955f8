#include <sstream>

#include <gtest/gtest.h>

#include "limitlab/market_data.hpp"
#include "support.hpp"

using namespace limitlab;
using test::tick;

namespace {

const char* kHeader1 =
    "stock_id,date,time,trade_price,trade_volume,ask_price_1,ask_volume_1,bid_price_1,bid_volume_1\n";

MetadataTable one_day_meta() {
    std::istringstream in(std::string(kMetadataHeader) + "\n600000,2007-03-01,10.00,1000000,0,0,10.50\n");
    return parse_metadata_stream(in, "meta");
}

}  // namespace

TEST(ParseTicks, ValidRowsBecomeOneSession) {
    std::istringstream in(std::string(kHeader1) +
                          "600000,2007-03-01,09:30:05,10.01,200,10.02,500,10.00,300\n"
                          "600000,2007-03-01,09:25:00,10.00,1000,10.01,100,9.99,100\n"
                          "600000,2007-03-01,09:31:00,0.00,0,10.03,100,10.01,100\n");
    const auto r = parse_tick_stream(in, "t.csv", one_day_meta());
    EXPECT_EQ(r.rows_read, 3u);
    EXPECT_EQ(r.rows_valid, 3u);
    EXPECT_TRUE(r.record_errors.empty());
    ASSERT_EQ(r.sessions.size(), 1u);
    const auto& s = r.sessions[0];
    ASSERT_EQ(s.ticks.size(), 3u);
    EXPECT_EQ(s.ticks[0].timestamp, hms(9, 25)); // sorted by time
    EXPECT_EQ(s.ticks[1].trade_price, 1001);
    EXPECT_FALSE(s.ticks[2].has_trade());
    EXPECT_EQ(s.prev_close, 1000);
    EXPECT_EQ(s.next_day_open, 1050);
    EXPECT_EQ(s.closing_price(), 1001); // last trade, quote-only rows carry nothing
}

TEST(ParseTicks, CrossedBookIsOneRecordErrorWithLocation) {
    std::istringstream in(std::string(kHeader1) +
                          "600000,2007-03-01,09:30:05,10.01,200,10.02,500,10.00,300\n"
                          "600000,2007-03-01,09:30:10,10.01,200,10.00,500,10.02,300\n");
    const auto r = parse_tick_stream(in, "t.csv", one_day_meta());
    ASSERT_EQ(r.record_errors.size(), 1u);
    EXPECT_EQ(r.record_errors[0].file, "t.csv");
    EXPECT_EQ(r.record_errors[0].row, 3u);
    EXPECT_EQ(r.rows_valid, 1u);
}

TEST(ParseTicks, MalformedRowsAreSkippedAndCounted) {
    std::istringstream in(std::string(kHeader1) +
                          "600000,2007-03-01,09:30:05,10.01,200,10.02,500\n"         // short row
                          "600000,2007-03-01,16:00:00,10.01,200,10.02,500,10.00,300\n" // after the close
                          "600000,2007-03-01,09:30:05,10.01,0,10.02,500,10.00,300\n"   // price without volume
                          "600000,2007-03-01,09:30:05,10.1,100,10.02,500,10.00,300\n"  // one decimal
                          "60000x,2007-03-01,09:30:05,10.01,100,10.02,500,10.00,300\n");
    const auto r = parse_tick_stream(in, "t.csv", one_day_meta());
    EXPECT_EQ(r.rows_read, 5u);
    EXPECT_EQ(r.rows_valid, 0u);
    EXPECT_EQ(r.record_errors.size(), 5u);
}

TEST(ParseTicks, MissingMetadataIsSessionError) {
    std::istringstream in(std::string(kHeader1) + "600001,2007-03-01,09:30:05,10.01,200,10.02,500,10.00,300\n");
    const auto r = parse_tick_stream(in, "t.csv", one_day_meta());
    EXPECT_TRUE(r.sessions.empty());
    ASSERT_EQ(r.session_errors.size(), 1u);
    EXPECT_EQ(r.session_errors[0].stock_id, "600001");
}

TEST(ParseTicks, HeaderIsMandatory) {
    std::istringstream empty("");
    EXPECT_THROW(parse_tick_stream(empty, "t.csv", {}), DataError);
    std::istringstream bad("a,b,c\n");
    EXPECT_THROW(parse_tick_stream(bad, "t.csv", {}), DataError);
}

TEST(ParseTicks, CanonicalRoundTripIsByteExact) {
    const std::string text = ColumnMap::canonical_header(5) + "\n" +
                             "600000,2007-03-01,09:25:00,10.00,1000,10.01,100,10.02,200,10.03,300,10.04,400,10.05,500,"
                             "9.99,100,9.98,200,9.97,300,9.96,400,9.95,500\n"
                             "600000,2007-03-01,09:30:05,0.00,0,10.01,100,0.00,0,0.00,0,0.00,0,0.00,0,"
                             "9.99,100,9.98,200,0.00,0,0.00,0,0.00,0\n";
    std::istringstream in(text);
    const auto r = parse_tick_stream(in, "t.csv", one_day_meta());
    ASSERT_TRUE(r.record_errors.empty());
    std::ostringstream out;
    write_tick_csv(out, r.sessions, r.levels);
    EXPECT_EQ(out.str(), text);
}

TEST(Metadata, RoundTripAndErrors) {
    std::ostringstream out;
    out << kMetadataHeader << '\n';
    write_metadata_row(out, StockId("600000"), test::ymd(2007, 3, 1), {1000, 5000, false, true, std::nullopt});
    std::istringstream in(out.str());
    const auto t = parse_metadata_stream(in, "m");
    const auto& m = t.at({StockId("600000"), test::ymd(2007, 3, 1)});
    EXPECT_EQ(m.prev_close, 1000);
    EXPECT_TRUE(m.is_ex_dividend_day);
    EXPECT_FALSE(m.next_day_open);

    std::istringstream bad(std::string(kMetadataHeader) + "\n600000,2007-03-01,ten,5000,0,0,\n");
    EXPECT_THROW(parse_metadata_stream(bad, "m"), DataError);
}

TEST(Lob, ValidateLadders) {
    LobSnapshot lob;
    lob.levels = 3;
    lob.ask_prices = {1001, 1002, 1003};
    lob.ask_volumes = {1, 1, 1};
    lob.bid_prices = {1000, 999, 998};
    lob.bid_volumes = {1, 1, 1};
    EXPECT_EQ(lob.validate(), "");
    lob.ask_prices[1] = 1001; // not strictly increasing
    EXPECT_NE(lob.validate(), "");
    lob.ask_prices[1] = 1002;
    lob.bid_prices[0] = 1001; // locked book is legal
    EXPECT_EQ(lob.validate(), "");
    lob.bid_prices[0] = 1002; // crossed
    EXPECT_NE(lob.validate(), "");
}

TEST(TradeDirection, QuoteRuleThenTickTest) {
    const auto quotes = tick(hms(10, 0), 0, 0, 999, 1001);
    EXPECT_EQ(classify_trade_direction(tick(hms(10, 0, 1), 1001), &quotes.lob, 1000), TradeSide::buyer_initiated);
    EXPECT_EQ(classify_trade_direction(tick(hms(10, 0, 1), 1002), &quotes.lob, 1000), TradeSide::buyer_initiated);
    EXPECT_EQ(classify_trade_direction(tick(hms(10, 0, 1), 999), &quotes.lob, 1000), TradeSide::seller_initiated);
    // Inside the spread: tick test decides.
    EXPECT_EQ(classify_trade_direction(tick(hms(10, 0, 1), 1000), &quotes.lob, 999), TradeSide::buyer_initiated);
    EXPECT_EQ(classify_trade_direction(tick(hms(10, 0, 1), 1000), &quotes.lob, 1001), TradeSide::seller_initiated);
    EXPECT_EQ(classify_trade_direction(tick(hms(10, 0, 1), 1000), &quotes.lob, 1000), TradeSide::unknown);
    // No book, no previous trade.
    EXPECT_EQ(classify_trade_direction(tick(hms(10, 0, 1), 1000), nullptr, std::nullopt), TradeSide::unknown);
    const auto ask_only = tick(hms(10, 0), 0, 0, std::nullopt, 1001);
    EXPECT_EQ(classify_trade_direction(tick(hms(10, 0, 1), 999), &ask_only.lob, 1000), TradeSide::seller_initiated);
}
