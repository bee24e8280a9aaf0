#include <gtest/gtest.h>

#include <numeric>
#include <random>
#include <sstream>

#include "lookahead/marketdata.hpp"
#include "test_support.hpp"

using namespace lookahead;
using lookahead::testing::make_market;
using lookahead::testing::make_series;
using lookahead::testing::random_walk;

namespace {

const std::set<std::string> kAapl{"AAPL"};

SeriesMap load(const std::string& text, const std::set<std::string>& universe) {
    std::istringstream in(text);
    return load_price_csv(in, universe);
}

std::size_t error_line(const std::string& text, const std::set<std::string>& universe) {
    try {
        load(text, universe);
    } catch (const DataError& e) {
        return e.line().value_or(0);
    }
    return 0;
}

std::string error_message(const std::string& text, const std::set<std::string>& universe) {
    try {
        load(text, universe);
    } catch (const DataError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST(LoadPriceCsv, ReadsSortedSeries) {
    const auto s = load("ticker,date,adjusted_close\nAAPL,2021-04-01,123.0\nAAPL,2021-04-05,125.9\n", kAapl);
    ASSERT_EQ(s.size(), 1u);
    const auto bars = s.at("AAPL").bars();
    ASSERT_EQ(bars.size(), 2u);
    EXPECT_EQ(bars[0], (PriceBar{Date::parse("2021-04-01"), 123.0}));
    EXPECT_EQ(bars[1], (PriceBar{Date::parse("2021-04-05"), 125.9}));
}

TEST(LoadPriceCsv, SortsOutOfOrderRows) {
    const auto s = load("ticker,date,adjusted_close\nAAPL,2021-04-05,125.9\nAAPL,2021-04-01,123.0\n", kAapl);
    EXPECT_EQ(s.at("AAPL").first_date(), Date::parse("2021-04-01"));
    EXPECT_EQ(s.at("AAPL").last_date(), Date::parse("2021-04-05"));
}

TEST(LoadPriceCsv, RejectsNonPositivePriceWithLineNumber) {
    const std::string text = "ticker,date,adjusted_close\nAAPL,2021-04-01,123.0\nAAPL,2021-04-02,-5.0\n";
    EXPECT_EQ(error_line(text, kAapl), 3u);
    EXPECT_EQ(error_line("ticker,date,adjusted_close\nAAPL,2021-04-01,0\n", kAapl), 2u);
}

TEST(LoadPriceCsv, RejectsMalformedRows) {
    EXPECT_EQ(error_line("ticker,date,adjusted_close\nAAPL,2021-04-01\n", kAapl), 2u);
    EXPECT_EQ(error_line("ticker,date,adjusted_close\nAAPL,2021-04-01,1,2\n", kAapl), 2u);
    EXPECT_EQ(error_line("ticker,date,adjusted_close\nAAPL,04/01/2021,1\n", kAapl), 2u);
    EXPECT_EQ(error_line("ticker,date,adjusted_close\nAAPL,2021-04-01,abc\n", kAapl), 2u);
    EXPECT_EQ(error_line("ticker,date,adjusted_close\nAAPL,2021-04-01,nan\n", kAapl), 2u);
    EXPECT_THROW(load("date,ticker,adjusted_close\n", kAapl), DataError);
    EXPECT_THROW(load("", kAapl), DataError);
}

TEST(LoadPriceCsv, RejectsDuplicateTickerDate) {
    const std::string text = "ticker,date,adjusted_close\nAAPL,2021-04-01,1\nAAPL,2021-04-01,2\n";
    EXPECT_EQ(error_line(text, kAapl), 3u);
}

TEST(LoadPriceCsv, MissingUniverseTickerIsNamed) {
    const std::string text = "ticker,date,adjusted_close\nAAPL,2021-04-01,1\n";
    const auto msg = error_message(text, {"AAPL", "TSLA"});
    EXPECT_NE(msg.find("TSLA"), std::string::npos) << msg;
}

TEST(LoadPriceCsv, IgnoresTickersOutsideUniverseAndToleratesCrlf) {
    const auto s = load("\xEF\xBB\xBFticker,date,adjusted_close\r\nAAPL,2021-04-01,1.5\r\nXYZ,2021-04-01,7\r\n\r\n",
                        kAapl);
    EXPECT_EQ(s.size(), 1u);
    // Rows outside the universe still have to be well-formed.
    EXPECT_EQ(error_line("ticker,date,adjusted_close\nAAPL,2021-04-01,1\nXYZ,2021-04-01,-1\n", kAapl), 3u);
    EXPECT_EQ(s.at("AAPL").bars()[0].adjusted_close, 1.5);
}

TEST(LoadPriceCsv, RoundTripIsIdempotentOnRandomData) {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> tickers(1, 5);
    std::uniform_int_distribution<int> length(1, 40);
    std::uniform_real_distribution<double> price(0.01, 5000.0);
    for (int c = 0; c < 1000; ++c) {
        std::map<std::string, std::vector<double>> closes;
        const auto names = lookahead::testing::ticker_names(static_cast<std::size_t>(tickers(rng)));
        for (const auto& n : names) {
            std::vector<double> v(static_cast<std::size_t>(length(rng)));
            for (auto& x : v) {
                x = price(rng);
            }
            closes[n] = v;
        }
        const auto original = make_series(closes);
        std::ostringstream first;
        write_price_csv(first, original);
        const std::set<std::string> universe(names.begin(), names.end());
        const auto loaded = load(first.str(), universe);
        ASSERT_EQ(loaded, original);
        std::ostringstream second;
        write_price_csv(second, loaded);
        ASSERT_EQ(first.str(), second.str());
    }
}

TEST(FormatDecimal, ShortestFixedRendering) {
    EXPECT_EQ(format_decimal(123.0), "123");
    EXPECT_EQ(format_decimal(125.9), "125.9");
    EXPECT_EQ(format_decimal(0.1), "0.1");
    EXPECT_EQ(format_decimal(1e-7), "0.0000001");
}

TEST(TradingCalendar, IntersectionOfTickerDates) {
    SeriesMap m;
    const auto d = [](const char* s) { return Date::parse(s); };
    m.emplace("A", PriceSeries("A", {{d("2021-04-01"), 1}, {d("2021-04-02"), 1}, {d("2021-04-05"), 1}}));
    m.emplace("B", PriceSeries("B", {{d("2021-04-01"), 1}, {d("2021-04-05"), 1}}));
    const auto cal = build_calendar(m);
    ASSERT_EQ(cal.size(), 2u);
    EXPECT_EQ(cal.days()[0], d("2021-04-01"));
    EXPECT_EQ(cal.days()[1], d("2021-04-05"));
    EXPECT_FALSE(cal.contains(d("2021-04-02")));
    EXPECT_EQ(cal.count_before(d("2021-04-05")), 1u);
    EXPECT_EQ(*cal.first_on_or_after(d("2021-04-02")), 1u);
    EXPECT_EQ(*cal.last_on_or_before(d("2021-04-02")), 0u);
    EXPECT_FALSE(cal.last_on_or_before(d("2021-03-31")).has_value());
}

TEST(TradingCalendar, IdenticalDatesAndDisjointDates) {
    const auto same = build_calendar(make_series({{"A", {1, 2, 3}}, {"B", {4, 5, 6}}}));
    EXPECT_EQ(same.size(), 3u);

    SeriesMap disjoint;
    disjoint.emplace("A", PriceSeries("A", {{Date::parse("2021-04-01"), 1}}));
    disjoint.emplace("B", PriceSeries("B", {{Date::parse("2021-04-02"), 1}}));
    EXPECT_THROW(build_calendar(disjoint), DataError);
    EXPECT_THROW(build_calendar(SeriesMap{}), DataError);
}

TEST(PitSlice, TruncatesAndBlocksFutureAccess) {
    const auto data = make_market({{"AAPL", {1, 2, 3, 4, 5}}});
    const auto days = data.calendar().days();
    const auto slice = pit_slice(data, days[2]);
    ASSERT_EQ(slice.bars("AAPL").size(), 3u);
    EXPECT_EQ(slice.bars("AAPL").back().date, days[2]);
    EXPECT_EQ(slice.calendar_days().size(), 3u);
    EXPECT_THROW((void)slice.bar_on_or_before("AAPL", days[3]), FutureAccessError);
    EXPECT_THROW((void)slice.close_on_or_before("AAPL", days[4]), FutureAccessError);
    EXPECT_THROW((void)slice.bars("MSFT"), std::out_of_range);

    const auto full = pit_slice(data, days.back());
    EXPECT_EQ(full.bars("AAPL").size(), 5u);
    EXPECT_THROW((void)full.bar_on_or_before("AAPL", days[0].plus_days(-1)), InsufficientHistory);
}

TEST(PitSlice, RandomAsOfNeverExposesLaterData) {
    std::mt19937_64 rng(7);
    const auto data = make_market({{"AAPL", random_walk(rng, 300)}, {"MSFT", random_walk(rng, 300)}});
    const auto days = data.calendar().days();
    std::uniform_int_distribution<std::size_t> pick(0, days.size() - 1);
    std::uniform_int_distribution<int> ahead(1, 400);
    for (int c = 0; c < 2000; ++c) {
        const Date as_of = days[pick(rng)].plus_days(pick(rng) % 3);
        const auto slice = pit_slice(data, as_of);
        for (const auto& t : slice.universe()) {
            for (const auto& bar : slice.bars(t)) {
                ASSERT_LE(bar.date, as_of);
            }
            for (const auto& bar : slice.last_bars(t, 10)) {
                ASSERT_LE(bar.date, as_of);
            }
            ASSERT_THROW((void)slice.bar_on_or_before(t, as_of.plus_days(ahead(rng))), FutureAccessError);
        }
        for (const auto& d : slice.calendar_days()) {
            ASSERT_LE(d, as_of);
        }
    }
}

TEST(TotalReturn, Examples) {
    SeriesMap m;
    m.emplace("AAPL", PriceSeries("AAPL", {{Date::parse("2021-04-01"), 100.0}, {Date::parse("2021-09-30"), 110.0}}));
    const MarketData data(m);
    const auto slice = pit_slice(data, Date::parse("2021-09-30"));
    EXPECT_NEAR(total_return(slice, "AAPL", Date::parse("2021-04-01"), Date::parse("2021-09-30")), 0.10, 1e-12);
    EXPECT_EQ(total_return(slice, "AAPL", Date::parse("2021-04-01"), Date::parse("2021-04-01")), 0.0);
    // Last-on-or-before endpoint: 2021-06-15 resolves to the 2021-04-01 bar.
    EXPECT_EQ(total_return(slice, "AAPL", Date::parse("2021-04-01"), Date::parse("2021-06-15")), 0.0);
    EXPECT_THROW(total_return(slice, "AAPL", Date::parse("2021-03-01"), Date::parse("2021-09-30")),
                 InsufficientHistory);
}

TEST(TotalReturn, ConstantSeriesGivesZero) {
    const auto data = make_market({{"AAPL", std::vector<double>(50, 42.0)}});
    const auto days = data.calendar().days();
    const auto slice = pit_slice(data, days.back());
    EXPECT_EQ(total_return(slice, "AAPL", days.front(), days.back()), 0.0);
}

TEST(TotalReturn, CompoundsDailyReturns) {
    std::mt19937_64 rng(99);
    const auto data = make_market({{"AAPL", random_walk(rng, 400, 100.0, 0.03)}});
    const auto days = data.calendar().days();
    std::uniform_int_distribution<std::size_t> pick(0, days.size() - 1);
    for (int c = 0; c < 1200; ++c) {
        auto a = pick(rng);
        auto b = pick(rng);
        if (a > b) {
            std::swap(a, b);
        }
        if (a == b) {
            continue;
        }
        const auto slice = pit_slice(data, days.back());
        const auto daily = daily_returns(slice, "AAPL", days[a], days[b]);
        ASSERT_EQ(daily.size(), b - a);
        double growth = 1.0;
        for (const auto& r : daily) {
            growth *= 1.0 + r.value;
        }
        const double total = total_return(slice, "AAPL", days[a], days[b]);
        ASSERT_NEAR(growth, 1.0 + total, 1e-12 * (1.0 + total));
    }
}

TEST(Sma, MeanOfLastWindowCloses) {
    const auto data = make_market({{"AAPL", {1, 2, 3, 4}}});
    const auto days = data.calendar().days();
    const auto slice = pit_slice(data, days.back());
    EXPECT_DOUBLE_EQ(sma(slice, "AAPL", days.back(), 4), 2.5);
    EXPECT_DOUBLE_EQ(sma(slice, "AAPL", days.back(), 2), 3.5);
    EXPECT_DOUBLE_EQ(sma(slice, "AAPL", days[2], 3), 2.0);
    EXPECT_THROW(sma(slice, "AAPL", days.back(), 5), InsufficientHistory);
}

TEST(Sma, ConstantAndLinearSeries) {
    const auto flat = make_market({{"AAPL", std::vector<double>(120, 7.25)}});
    const auto fd = flat.calendar().days();
    const auto fs = pit_slice(flat, fd.back());
    EXPECT_DOUBLE_EQ(sma(fs, "AAPL", fd.back(), 50), 7.25);
    EXPECT_DOUBLE_EQ(sma(fs, "AAPL", fd.back(), 100), 7.25);

    std::vector<double> rising(200);
    std::iota(rising.begin(), rising.end(), 1.0);
    const auto lin = make_market({{"AAPL", rising}});
    const auto ld = lin.calendar().days();
    const auto ls = pit_slice(lin, ld.back());
    // Window of the last w values of 1..200 has mean 200 - (w - 1) / 2.
    EXPECT_DOUBLE_EQ(sma(ls, "AAPL", ld.back(), 50), 175.5);
    EXPECT_DOUBLE_EQ(sma(ls, "AAPL", ld.back(), 100), 150.5);
    EXPECT_GT(sma(ls, "AAPL", ld.back(), 50), sma(ls, "AAPL", ld.back(), 100));
}

TEST(Sma, MatchesBruteForceMean) {
    std::mt19937_64 rng(5);
    const auto closes = random_walk(rng, 500);
    const auto data = make_market({{"AAPL", closes}});
    const auto days = data.calendar().days();
    std::uniform_int_distribution<std::size_t> pick(0, days.size() - 1);
    std::uniform_int_distribution<std::size_t> window(1, 150);
    for (int c = 0; c < 2000; ++c) {
        const auto i = pick(rng);
        const auto w = window(rng);
        const auto slice = pit_slice(data, days[i]);
        if (w > i + 1) {
            ASSERT_THROW(sma(slice, "AAPL", days[i], w), InsufficientHistory);
            continue;
        }
        long double sum = 0;
        for (std::size_t k = i + 1 - w; k <= i; ++k) {
            sum += closes[k];
        }
        const double expected = static_cast<double>(sum / static_cast<long double>(w));
        ASSERT_NEAR(sma(slice, "AAPL", days[i], w), expected, 1e-12 * expected);
    }
}

TEST(DailyReturns, Examples) {
    const auto data = make_market({{"AAPL", {100.0, 110.0, 99.0}}});
    const auto days = data.calendar().days();
    const auto slice = pit_slice(data, days.back());
    const auto r = daily_returns(slice, "AAPL", days.front(), days.back());
    ASSERT_EQ(r.size(), 2u);
    EXPECT_NEAR(r[0].value, 0.10, 1e-12);
    EXPECT_NEAR(r[1].value, -0.10, 1e-12);
    EXPECT_EQ(r[0].date, days[1]);
    EXPECT_EQ(r[1].date, days[2]);
    EXPECT_THROW(daily_returns(slice, "AAPL", days[1], days[1]), InsufficientHistory);

    const auto flat = make_market({{"AAPL", std::vector<double>(10, 3.0)}});
    const auto fd = flat.calendar().days();
    for (const auto& x : daily_returns(pit_slice(flat, fd.back()), "AAPL", fd.front(), fd.back())) {
        EXPECT_EQ(x.value, 0.0);
    }
}
