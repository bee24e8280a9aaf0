#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lookahead/agent.hpp"
#include "lookahead/chat_client.hpp"
#include "lookahead/engine.hpp"
#include "lookahead/marketdata.hpp"
#include "lookahead/strategies.hpp"

namespace lookahead {

/// Invalid benchmark configuration (bad key, bad value, missing required entry).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Excess return over buy & hold, in percentage points.
[[nodiscard]] constexpr double alpha(double strategy_return_pct, double benchmark_return_pct) noexcept {
    return strategy_return_pct - benchmark_return_pct;
}

/// Out-of-sample alpha minus in-sample alpha, in percentage points.
[[nodiscard]] constexpr double alpha_decay(double alpha_p1_pp, double alpha_p2_pp) noexcept {
    return alpha_p2_pp - alpha_p1_pp;
}

struct StrategyEntry {
    std::string label;         ///< machine label, e.g. "momentum"
    std::string display_name;  ///< report row name, e.g. "Momentum (3M)"
    std::string variant;
    StrategyKind kind = StrategyKind::buy_hold;
    StrategyConfig config;
};

enum class AgentKind { remote, replay, constant };

struct AgentEntry {
    std::string label;
    std::string display_name;
    std::string variant = "Standard";
    AgentKind kind = AgentKind::remote;
    AgentEndpointConfig endpoint;           ///< remote
    std::filesystem::path fixture_dir;      ///< replay
    WeightMap constant_weights;             ///< constant
    std::size_t history_window_days = 63;
    RebalanceFrequency frequency = RebalanceFrequency::monthly;
};

struct BenchmarkConfig {
    std::filesystem::path data_path;
    std::optional<std::string> data_sha256;  ///< pinned content hash, checked when present
    std::vector<std::string> universe;       ///< ascending symbol order
    std::array<PeriodSpec, 2> periods;
    double initial_capital = 100000.0;
    std::uint64_t seed = 0;                  ///< random-noise seed (overrides per-strategy seeds)
    std::vector<StrategyEntry> strategies;   ///< always contains buy_hold
    std::vector<AgentEntry> agents;
    std::filesystem::path output_dir = "out";
    std::size_t max_parallel = 0;            ///< 0: hardware concurrency

    /// Throws ConfigError on violated invariants.
    void validate() const;
    [[nodiscard]] const StrategyEntry* find_strategy(std::string_view label) const noexcept;
    [[nodiscard]] const AgentEntry* find_agent(std::string_view label) const noexcept;
    [[nodiscard]] const PeriodSpec* find_period(std::string_view label) const noexcept;
    /// Largest warm-up needed by any configured strategy.
    [[nodiscard]] std::size_t max_warmup_days() const noexcept;
};

/// Parses the JSON config text. Relative paths resolve against `base_dir`.
BenchmarkConfig parse_benchmark_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
BenchmarkConfig load_benchmark_config(const std::filesystem::path& path);

/// Canonical JSON of the effective configuration. Contains env-var names, never secrets.
std::string canonical_config_json(const BenchmarkConfig& config);

/// Loads the configured price file for the configured universe.
MarketData load_market_data(const BenchmarkConfig& config);

/// A runnable decision source plus how the engine should drive it.
struct RunPlan {
    std::string label;
    RebalanceFrequency frequency = RebalanceFrequency::monthly;
    PortfolioMode mode = PortfolioMode::holding;
    std::function<std::unique_ptr<DecisionSource>()> make_source;
};

RunPlan plan_for(const StrategyEntry& entry, std::uint64_t seed);
RunPlan plan_for(const AgentEntry& entry);

/// Runs `plan` over `period`.
BacktestResult run_plan(const MarketData& data, const PeriodSpec& period, const RunPlan& plan,
                        double initial_capital);

enum class RecordBlock { quant, agent };

struct AlphaRecord {
    std::string strategy_label;
    std::string display_name;
    std::string variant;
    RecordBlock block = RecordBlock::quant;
    double p1_return_pct = 0.0;
    double p1_alpha_pp = 0.0;
    double p2_return_pct = 0.0;
    double p2_alpha_pp = 0.0;
    double alpha_decay_pp = 0.0;
    std::optional<std::string> failure;  ///< set when a run failed; numeric fields are then meaningless

    [[nodiscard]] bool failed() const noexcept { return failure.has_value(); }
};

/// Builds a record from period returns against the same-period benchmark returns.
AlphaRecord make_alpha_record(std::string label, std::string display_name, std::string variant, RecordBlock block,
                              double p1_return_pct, double p2_return_pct, double benchmark_p1_pct,
                              double benchmark_p2_pct);

struct FallbackEvent {
    std::string label;
    std::string period;
    Date date;
};

struct ReportMetadata {
    std::string engine_version;
    std::string dataset_sha256;
    std::string config_sha256;
    std::uint64_t seed = 0;
    double initial_capital = 0.0;
    std::array<PeriodSpec, 2> periods;  ///< as requested
    struct AgentInfo {
        std::string label;
        std::string kind;
        std::string model;
        std::string base_url;
        double temperature = 0.0;
    };
    std::vector<AgentInfo> agents;
    std::vector<FallbackEvent> fallbacks;
};

struct BenchmarkReport {
    ReportMetadata metadata;
    std::vector<AlphaRecord> records;  ///< quant block in table order, then agents in config order

    [[nodiscard]] bool has_failures() const noexcept;
};

/// Runs every configured strategy and agent over both periods (independent runs may execute
/// concurrently) and reduces them in config order. A failing buy & hold run throws; other
/// failures mark their row.
BenchmarkReport run_dual_period(const BenchmarkConfig& config, const MarketData& data,
                                std::string dataset_sha256 = {});
BenchmarkReport run_dual_period(const BenchmarkConfig& config);

enum class ReportFormat { text, csv, json };

[[nodiscard]] std::optional<ReportFormat> parse_report_format(std::string_view name) noexcept;

/// Two decimals, half away from zero; always signed ("+0.00" for zero).
std::string format_signed_2dp(double value);

inline constexpr std::array<std::string_view, 7> kReportColumns{
    "Model/Strategy", "Variant", "P1 Return (%)", "P1 Alpha (pp)", "P2 Return (%)", "P2 Alpha (pp)",
    "Alpha Decay (pp)"};

/// Rendered cells, one row per record (header excluded).
using ReportTable = std::vector<std::array<std::string, 7>>;

ReportTable report_table(const BenchmarkReport& report);
std::string render_report(const BenchmarkReport& report, ReportFormat format);

std::string render_table_csv(const ReportTable& table);
/// Inverse of render_table_csv. Throws std::invalid_argument on a malformed document.
ReportTable parse_report_csv(std::string_view csv);

}  // namespace lookahead
