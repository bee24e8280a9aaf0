#include "lookahead/commands.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "lookahead/benchmark.hpp"
#include "lookahead/digest.hpp"

namespace lookahead::cli {

namespace {

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::string format = "text";
    std::string strategy;
    std::string period;
    int verbosity = 0;
};

/// Applies command-line overrides on top of the config file.
BenchmarkConfig effective_config(const Options& opts) {
    auto config = load_benchmark_config(opts.config_path);
    if (opts.seed) {
        config.seed = *opts.seed;
    }
    if (opts.out_dir) {
        config.output_dir = *opts.out_dir;
    }
    return config;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
    }
    out << contents;
}

int cmd_validate(const Options& opts, std::ostream& out, std::ostream& err) {
    BenchmarkConfig config;
    try {
        config = effective_config(opts);
    } catch (const std::exception& e) {
        err << "config: " << e.what() << '\n';
        return kExitConfig;
    }

    bool ok = true;
    if (config.data_sha256) {
        try {
            const auto digest = sha256_file_hex(config.data_path);
            if (digest != *config.data_sha256) {
                err << fmt::format("hash: {} has sha256 {}, config pins {}\n", config.data_path.string(), digest,
                                   *config.data_sha256);
                ok = false;
            }
        } catch (const std::exception& e) {
            err << "data: " << e.what() << '\n';
            return kExitConfig;
        }
    }

    SeriesMap series;
    try {
        const std::set<std::string> universe(config.universe.begin(), config.universe.end());
        series = load_price_csv_file(config.data_path, universe);
    } catch (const std::exception& e) {
        err << "data: " << e.what() << '\n';
        return kExitConfig;
    }

    TradingCalendar calendar;
    try {
        calendar = build_calendar(series);
    } catch (const std::exception& e) {
        err << "calendar: " << e.what() << '\n';
        return kExitConfig;
    }

    std::string needs_most = "buy_hold";
    std::size_t required = 0;
    for (const auto& s : config.strategies) {
        const auto w = required_warmup_days(s.kind, s.config);
        if (w > required) {
            required = w;
            needs_most = s.label;
        }
    }
    for (const auto& period : config.periods) {
        try {
            const auto [first, last] = resolve_period(calendar, period);
            if (first < required) {
                err << fmt::format("warm-up: {} needs {} trading days before {} ({}), data has {}\n", needs_most,
                                   required, calendar.days()[first].iso(), period.label, first);
                ok = false;
            }
        } catch (const std::exception& e) {
            err << "calendar: " << e.what() << '\n';
            ok = false;
        }
    }
    if (!ok) {
        return kExitConfig;
    }
    out << fmt::format("{} tickers, calendar ok, warm-up ok\n", series.size());
    return kExitOk;
}

int cmd_run(const Options& opts, std::ostream& out, std::ostream& err) {
    BenchmarkConfig config;
    std::optional<MarketData> data;
    try {
        config = effective_config(opts);
    } catch (const std::exception& e) {
        err << "config: " << e.what() << '\n';
        return kExitConfig;
    }
    const auto format = parse_report_format(opts.format);
    if (!format) {
        err << "usage: --format must be text, csv or json\n";
        return kExitConfig;
    }

    std::optional<RunPlan> plan;
    if (const auto* s = config.find_strategy(opts.strategy)) {
        plan = plan_for(*s, config.seed);
    } else if (const auto* a = config.find_agent(opts.strategy)) {
        plan = plan_for(*a);
    } else if (const auto kind = parse_strategy_kind(opts.strategy)) {
        plan = plan_for(StrategyEntry{opts.strategy, std::string(strategy_display_name(*kind)),
                                      std::string(strategy_variant(*kind)), *kind, {}},
                        config.seed);
    } else {
        err << fmt::format("usage: unknown strategy or agent '{}'\n", opts.strategy);
        return kExitConfig;
    }
    const auto* period = config.find_period(opts.period);
    if (!period) {
        err << fmt::format("usage: unknown period '{}'\n", opts.period);
        return kExitConfig;
    }

    try {
        data.emplace(load_market_data(config));
    } catch (const std::exception& e) {
        err << "data: " << e.what() << '\n';
        return kExitConfig;
    }

    BacktestResult result;
    try {
        result = run_plan(*data, *period, *plan, config.initial_capital);
    } catch (const std::exception& e) {
        err << fmt::format("run {} {}: {}\n", opts.strategy, opts.period, e.what());
        return kExitRuntime;
    }

    const auto stem = fmt::format("{}_{}", opts.strategy, opts.period);
    const auto json = backtest_result_json(result);
    std::ostringstream trades;
    write_trade_log_csv(trades, result.trades);
    try {
        write_file(config.output_dir / (stem + ".json"), json);
        write_file(config.output_dir / (stem + "_trades.csv"), trades.str());
    } catch (const std::exception& e) {
        err << e.what() << '\n';
        return kExitRuntime;
    }

    switch (*format) {
        case ReportFormat::text:
            out << fmt::format("{} {}: {}%\n", opts.strategy, opts.period, format_signed_2dp(result.total_return_pct));
            break;
        case ReportFormat::json:
            out << json;
            break;
        case ReportFormat::csv:
            out << trades.str();
            break;
    }
    return kExitOk;
}

int cmd_bench(const Options& opts, std::ostream& out, std::ostream& err) {
    BenchmarkConfig config;
    try {
        config = effective_config(opts);
    } catch (const std::exception& e) {
        err << "config: " << e.what() << '\n';
        return kExitConfig;
    }
    const auto format = parse_report_format(opts.format);
    if (!format) {
        err << "usage: --format must be text, csv or json\n";
        return kExitConfig;
    }

    std::optional<MarketData> data;
    std::string digest;
    try {
        data.emplace(load_market_data(config));
        digest = sha256_file_hex(config.data_path);
        if (config.data_sha256 && *config.data_sha256 != digest) {
            err << fmt::format("hash: dataset sha256 {} does not match pinned {}\n", digest, *config.data_sha256);
            return kExitConfig;
        }
    } catch (const std::exception& e) {
        err << "data: " << e.what() << '\n';
        return kExitConfig;
    }

    BenchmarkReport report;
    try {
        report = run_dual_period(config, *data, digest);
    } catch (const std::exception& e) {
        err << "bench: " << e.what() << '\n';
        return kExitRuntime;
    }

    try {
        write_file(config.output_dir / "report.txt", render_report(report, ReportFormat::text));
        write_file(config.output_dir / "report.csv", render_report(report, ReportFormat::csv));
        write_file(config.output_dir / "report.json", render_report(report, ReportFormat::json));
    } catch (const std::exception& e) {
        err << e.what() << '\n';
        return kExitRuntime;
    }
    out << render_report(report, *format);
    for (const auto& r : report.records) {
        if (r.failed()) {
            err << fmt::format("FAILED {}: {}\n", r.strategy_label, *r.failure);
        }
    }
    return report.has_failures() ? kExitRuntime : kExitOk;
}

/// Routes spdlog to `err` for the duration of one CLI invocation.
class ScopedLogger {
public:
    ScopedLogger(int verbosity, std::ostream& err) : previous_(spdlog::default_logger()) {
        auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
        auto logger = std::make_shared<spdlog::logger>("lookahead", sink);
        logger->set_pattern("[%l] %v");
        logger->set_level(verbosity >= 2 ? spdlog::level::debug
                          : verbosity == 1 ? spdlog::level::info
                                           : spdlog::level::warn);
        spdlog::set_default_logger(std::move(logger));
    }
    ~ScopedLogger() { spdlog::set_default_logger(previous_); }

    ScopedLogger(const ScopedLogger&) = delete;
    ScopedLogger& operator=(const ScopedLogger&) = delete;

private:
    std::shared_ptr<spdlog::logger> previous_;
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Dual-period look-ahead bias benchmark for trading agents"};
    app.require_subcommand(1);
    app.fallthrough();
    Options opts;
    app.add_flag("-v,--verbose", opts.verbosity, "Increase log verbosity (repeatable)");

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", opts.config_path, "Benchmark config (JSON)")->required();
        cmd->add_option("--seed", opts.seed, "Random-noise seed (overrides config)");
        cmd->add_option("--out", opts.out_dir, "Output directory (overrides config)");
        cmd->add_option("--format", opts.format, "Output format: text, csv or json");
    };
    auto* validate = app.add_subcommand("validate", "Check data schema, universe, calendar and warm-up depth");
    add_common(validate);
    auto* run = app.add_subcommand("run", "Run one strategy or agent over one period");
    add_common(run);
    run->add_option("--strategy", opts.strategy, "Strategy or agent label")->required();
    run->add_option("--period", opts.period, "Period label")->required();
    auto* bench = app.add_subcommand("bench", "Run the dual-period benchmark and write text/csv/json reports");
    add_common(bench);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitConfig;
    }

    const ScopedLogger logging(opts.verbosity, err);
    if (validate->parsed()) {
        return cmd_validate(opts, out, err);
    }
    if (run->parsed()) {
        return cmd_run(opts, out, err);
    }
    return cmd_bench(opts, out, err);
}

}  // namespace lookahead::cli
