#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <sstream>

#include "lookahead/agent.hpp"
#include "lookahead/engine.hpp"

using namespace lookahead;

namespace {

/// Five tickers over `days` weekdays starting 2020-01-01.
SeriesMap synthetic_series(std::size_t days) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> step(0.0004, 0.02);
    std::vector<Date> calendar;
    for (Date d = Date::parse("2020-01-01"); calendar.size() < days; d = d.plus_days(1)) {
        const auto dow = ((d.serial() % 7) + 11) % 7;
        if (dow != 0 && dow != 6) {
            calendar.push_back(d);
        }
    }
    SeriesMap out;
    for (const char* t : {"AAPL", "GOOGL", "MSFT", "NVDA", "TSLA"}) {
        std::vector<PriceBar> bars;
        double p = 100.0;
        for (const auto& d : calendar) {
            bars.push_back({d, p});
            p *= std::exp(step(rng));
        }
        out.emplace(t, PriceSeries(t, std::move(bars)));
    }
    return out;
}

const MarketData& market() {
    static const MarketData data(synthetic_series(500));
    return data;
}

void BM_Backtest(benchmark::State& state) {
    const auto kind = static_cast<StrategyKind>(state.range(0));
    const auto& data = market();
    const auto days = data.calendar().days();
    const PeriodSpec period{"P", days[120], days.back()};
    for (auto _ : state) {
        StrategySource source(kind, {});
        auto r = run_backtest(data, period, source,
                              BacktestOptions{"bm", default_frequency(kind), default_mode(kind), 100000.0});
        benchmark::DoNotOptimize(r.total_return_pct);
    }
    state.SetLabel(std::string(strategy_kind_label(kind)));
}
BENCHMARK(BM_Backtest)->DenseRange(0, 5)->Unit(benchmark::kMicrosecond);

void BM_LoadPriceCsv(benchmark::State& state) {
    std::ostringstream csv;
    write_price_csv(csv, synthetic_series(static_cast<std::size_t>(state.range(0))));
    const auto text = csv.str();
    const std::set<std::string> universe{"AAPL", "GOOGL", "MSFT", "NVDA", "TSLA"};
    for (auto _ : state) {
        std::istringstream in(text);
        auto series = load_price_csv(in, universe);
        benchmark::DoNotOptimize(series.size());
    }
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_LoadPriceCsv)->Arg(500)->Arg(5000)->Unit(benchmark::kMicrosecond);

void BM_BuildPrompt(benchmark::State& state) {
    const auto& data = market();
    const auto slice = pit_slice(data, data.calendar().days().back());
    const PortfolioSummary book{100000.0, {{"AAPL", 0.2}, {"MSFT", 0.2}}};
    for (auto _ : state) {
        auto prompt = build_prompt(make_decision_request(slice, book, 63));
        benchmark::DoNotOptimize(prompt.size());
    }
}
BENCHMARK(BM_BuildPrompt);

}  // namespace
BENCHMARK_MAIN();
