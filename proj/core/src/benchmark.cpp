#include "lookahead/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "lookahead/digest.hpp"
#include "lookahead/version.hpp"

namespace lookahead {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void config_fail(const std::string& what) {
    throw ConfigError(what);
}

void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) != allowed.end()) {
            continue;
        }
        if (key == "api_key" || key == "credential" || key == "token" || key == "secret") {
            config_fail(fmt::format("{}: '{}' looks like a secret; configs name an environment variable via "
                                    "'credential_env' instead",
                                    where, key));
        }
        config_fail(fmt::format("{}: unknown key '{}'", where, key));
    }
}

template <typename T>
T get_or(const json& obj, std::string_view key, T fallback, std::string_view where) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
        return fallback;
    }
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        config_fail(fmt::format("{}: '{}' has the wrong type", where, key));
    }
}

std::string require_string(const json& obj, std::string_view key, std::string_view where) {
    const auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) {
        config_fail(fmt::format("{}: '{}' is required and must be a string", where, key));
    }
    return it->get<std::string>();
}

Date require_date(const json& obj, std::string_view key, std::string_view where) {
    const auto text = require_string(obj, key, where);
    const auto d = Date::try_parse(text);
    if (!d) {
        config_fail(fmt::format("{}: '{}' must be YYYY-MM-DD, got '{}'", where, key, text));
    }
    return *d;
}

std::size_t get_count(const json& obj, std::string_view key, std::size_t fallback, std::string_view where) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
        return fallback;
    }
    if (!it->is_number_integer() || it->get<long long>() < 0) {
        config_fail(fmt::format("{}: '{}' must be a non-negative integer", where, key));
    }
    return it->get<std::size_t>();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    if (path.is_relative() && !base.empty()) {
        path = base / path;
    }
    return path.lexically_normal();
}

StrategyEntry parse_strategy(const json& obj, std::size_t index) {
    const std::string where = fmt::format("strategies[{}]", index);
    if (obj.is_string()) {
        const auto kind = parse_strategy_kind(obj.get<std::string>());
        if (!kind) {
            config_fail(fmt::format("{}: unknown strategy '{}'", where, obj.get<std::string>()));
        }
        return StrategyEntry{std::string(strategy_kind_label(*kind)), std::string(strategy_display_name(*kind)),
                             std::string(strategy_variant(*kind)), *kind, {}};
    }
    if (!obj.is_object()) {
        config_fail(where + ": must be a string or an object");
    }
    reject_unknown_keys(obj,
                        {"label", "kind", "name", "variant", "lookback_days", "selection_rounding", "ma_fast",
                         "ma_slow"},
                        where);
    StrategyEntry entry;
    entry.label = require_string(obj, "label", where);
    const auto kind_text = get_or<std::string>(obj, "kind", entry.label, where);
    const auto kind = parse_strategy_kind(kind_text);
    if (!kind) {
        config_fail(fmt::format("{}: unknown strategy kind '{}'", where, kind_text));
    }
    entry.kind = *kind;
    entry.display_name = get_or<std::string>(obj, "name", std::string(strategy_display_name(*kind)), where);
    entry.variant = get_or<std::string>(obj, "variant", std::string(strategy_variant(*kind)), where);
    entry.config.momentum_lookback_days = get_count(obj, "lookback_days", entry.config.momentum_lookback_days, where);
    entry.config.ma_fast = get_count(obj, "ma_fast", entry.config.ma_fast, where);
    entry.config.ma_slow = get_count(obj, "ma_slow", entry.config.ma_slow, where);
    const auto rounding = get_or<std::string>(obj, "selection_rounding", "floor", where);
    if (rounding == "floor") {
        entry.config.selection_rounding = SelectionRounding::floor;
    } else if (rounding == "ceil") {
        entry.config.selection_rounding = SelectionRounding::ceil;
    } else {
        config_fail(fmt::format("{}: selection_rounding must be 'floor' or 'ceil'", where));
    }
    try {
        entry.config.validate();
    } catch (const std::invalid_argument& e) {
        config_fail(fmt::format("{}: {}", where, e.what()));
    }
    return entry;
}

AgentEntry parse_agent(const json& obj, std::size_t index, const std::filesystem::path& base_dir) {
    const std::string where = fmt::format("agents[{}]", index);
    if (!obj.is_object()) {
        config_fail(where + ": must be an object");
    }
    reject_unknown_keys(obj,
                        {"label", "kind", "name", "variant", "history_window_days", "endpoint", "fixture_dir",
                         "weights", "rebalance"},
                        where);
    AgentEntry entry;
    entry.label = require_string(obj, "label", where);
    entry.display_name = get_or<std::string>(obj, "name", entry.label, where);
    entry.variant = get_or<std::string>(obj, "variant", "Standard", where);
    entry.history_window_days = get_count(obj, "history_window_days", 63, where);
    const auto rebalance = get_or<std::string>(obj, "rebalance", "monthly", where);
    const auto frequency = parse_frequency(rebalance);
    if (!frequency) {
        config_fail(fmt::format("{}: rebalance must be once, monthly or daily", where));
    }
    entry.frequency = *frequency;

    const auto kind = get_or<std::string>(obj, "kind", "remote", where);
    if (kind == "remote") {
        entry.kind = AgentKind::remote;
        const auto it = obj.find("endpoint");
        if (it == obj.end() || !it->is_object()) {
            config_fail(where + ": remote agents need an 'endpoint' object");
        }
        const auto& ep = *it;
        const std::string ep_where = where + ".endpoint";
        reject_unknown_keys(ep,
                            {"base_url", "model", "credential_env", "timeout_s", "max_retries", "temperature",
                             "retry_backoff_ms"},
                            ep_where);
        entry.endpoint.base_url = require_string(ep, "base_url", ep_where);
        entry.endpoint.model_name = require_string(ep, "model", ep_where);
        entry.endpoint.credential_env = get_or<std::string>(ep, "credential_env", kDefaultCredentialEnv, ep_where);
        entry.endpoint.timeout_seconds = get_or<double>(ep, "timeout_s", 60.0, ep_where);
        entry.endpoint.max_retries = get_or<int>(ep, "max_retries", 2, ep_where);
        entry.endpoint.temperature = get_or<double>(ep, "temperature", 0.0, ep_where);
        entry.endpoint.retry_backoff = std::chrono::milliseconds(get_or<long long>(ep, "retry_backoff_ms", 500, ep_where));
        try {
            entry.endpoint.validate();
        } catch (const std::invalid_argument& e) {
            config_fail(fmt::format("{}: {}", ep_where, e.what()));
        }
    } else if (kind == "replay") {
        entry.kind = AgentKind::replay;
        entry.fixture_dir = resolve(base_dir, require_string(obj, "fixture_dir", where));
    } else if (kind == "constant") {
        entry.kind = AgentKind::constant;
        const auto it = obj.find("weights");
        if (it == obj.end() || !it->is_object()) {
            config_fail(where + ": constant agents need a 'weights' object");
        }
        for (const auto& [ticker, w] : it->items()) {
            if (!w.is_number()) {
                config_fail(fmt::format("{}: weight for {} must be a number", where, ticker));
            }
            entry.constant_weights[ticker] = w.get<double>();
        }
    } else {
        config_fail(fmt::format("{}: kind must be remote, replay or constant", where));
    }
    return entry;
}

}  // namespace

void BenchmarkConfig::validate() const {
    if (universe.empty()) {
        config_fail("universe must not be empty");
    }
    for (const auto& p : periods) {
        try {
            p.validate();
        } catch (const std::invalid_argument& e) {
            config_fail(e.what());
        }
    }
    if (periods[0].label == periods[1].label) {
        config_fail("the two periods need distinct labels");
    }
    if (!(initial_capital > 0.0) || !std::isfinite(initial_capital)) {
        config_fail("initial_capital must be positive");
    }
    if (!find_strategy("buy_hold") ||
        std::none_of(strategies.begin(), strategies.end(),
                     [](const StrategyEntry& s) { return s.kind == StrategyKind::buy_hold; })) {
        config_fail("the buy_hold benchmark strategy must be present");
    }
    std::set<std::string> labels;
    for (const auto& s : strategies) {
        if (!labels.insert(s.label).second) {
            config_fail(fmt::format("duplicate label '{}'", s.label));
        }
    }
    for (const auto& a : agents) {
        if (!labels.insert(a.label).second) {
            config_fail(fmt::format("duplicate label '{}'", a.label));
        }
    }
}

const StrategyEntry* BenchmarkConfig::find_strategy(std::string_view label) const noexcept {
    for (const auto& s : strategies) {
        if (s.label == label) {
            return &s;
        }
    }
    return nullptr;
}

const AgentEntry* BenchmarkConfig::find_agent(std::string_view label) const noexcept {
    for (const auto& a : agents) {
        if (a.label == label) {
            return &a;
        }
    }
    return nullptr;
}

const PeriodSpec* BenchmarkConfig::find_period(std::string_view label) const noexcept {
    for (const auto& p : periods) {
        if (p.label == label) {
            return &p;
        }
    }
    return nullptr;
}

std::size_t BenchmarkConfig::max_warmup_days() const noexcept {
    std::size_t out = 0;
    for (const auto& s : strategies) {
        out = std::max(out, required_warmup_days(s.kind, s.config));
    }
    return out;
}

BenchmarkConfig parse_benchmark_config(std::string_view json_text, const std::filesystem::path& base_dir) {
    const json doc = json::parse(json_text, nullptr, false, true);
    if (doc.is_discarded() || !doc.is_object()) {
        config_fail("config is not a JSON object");
    }
    reject_unknown_keys(doc,
                        {"data", "universe", "initial_capital", "seed", "periods", "strategies", "agents",
                         "output_dir", "max_parallel"},
                        "config");
    BenchmarkConfig config;

    const auto data = doc.find("data");
    if (data == doc.end()) {
        config_fail("config: 'data' is required");
    }
    if (data->is_string()) {
        config.data_path = resolve(base_dir, data->get<std::string>());
    } else if (data->is_object()) {
        reject_unknown_keys(*data, {"path", "sha256"}, "data");
        config.data_path = resolve(base_dir, require_string(*data, "path", "data"));
        if (data->contains("sha256")) {
            config.data_sha256 = require_string(*data, "sha256", "data");
        }
    } else {
        config_fail("config: 'data' must be a path or an object");
    }

    const auto universe = doc.find("universe");
    if (universe == doc.end() || !universe->is_array()) {
        config_fail("config: 'universe' must be an array of tickers");
    }
    for (const auto& t : *universe) {
        if (!t.is_string() || t.get<std::string>().empty()) {
            config_fail("config: universe entries must be non-empty strings");
        }
        config.universe.push_back(t.get<std::string>());
    }
    std::sort(config.universe.begin(), config.universe.end());
    if (std::adjacent_find(config.universe.begin(), config.universe.end()) != config.universe.end()) {
        config_fail("config: universe has duplicate tickers");
    }

    config.initial_capital = get_or<double>(doc, "initial_capital", 100000.0, "config");
    config.seed = get_or<std::uint64_t>(doc, "seed", 0, "config");
    config.output_dir = resolve(base_dir, get_or<std::string>(doc, "output_dir", "out", "config"));
    config.max_parallel = get_count(doc, "max_parallel", 0, "config");

    const auto periods = doc.find("periods");
    if (periods == doc.end() || !periods->is_array() || periods->size() != 2) {
        config_fail("config: 'periods' must list exactly two periods");
    }
    for (std::size_t i = 0; i < 2; ++i) {
        const auto& p = (*periods)[i];
        const std::string where = fmt::format("periods[{}]", i);
        if (!p.is_object()) {
            config_fail(where + ": must be an object");
        }
        reject_unknown_keys(p, {"label", "start", "end"}, where);
        config.periods[i] = PeriodSpec{require_string(p, "label", where), require_date(p, "start", where),
                                       require_date(p, "end", where)};
    }

    const auto strategies = doc.find("strategies");
    if (strategies == doc.end()) {
        for (auto kind : {StrategyKind::buy_hold, StrategyKind::equal_weight, StrategyKind::momentum,
                          StrategyKind::mean_reversion, StrategyKind::ma_crossover, StrategyKind::random_noise}) {
            config.strategies.push_back(StrategyEntry{std::string(strategy_kind_label(kind)),
                                                      std::string(strategy_display_name(kind)),
                                                      std::string(strategy_variant(kind)), kind, {}});
        }
    } else {
        if (!strategies->is_array()) {
            config_fail("config: 'strategies' must be an array");
        }
        for (std::size_t i = 0; i < strategies->size(); ++i) {
            config.strategies.push_back(parse_strategy((*strategies)[i], i));
        }
    }
    if (!config.find_strategy("buy_hold")) {
        config.strategies.insert(config.strategies.begin(),
                                 StrategyEntry{"buy_hold", std::string(strategy_display_name(StrategyKind::buy_hold)),
                                               std::string(strategy_variant(StrategyKind::buy_hold)),
                                               StrategyKind::buy_hold, {}});
    }
    // Table order: passive, systematic, trend, control.
    std::stable_sort(config.strategies.begin(), config.strategies.end(),
                     [](const StrategyEntry& a, const StrategyEntry& b) { return a.kind < b.kind; });

    if (const auto agents = doc.find("agents"); agents != doc.end()) {
        if (!agents->is_array()) {
            config_fail("config: 'agents' must be an array");
        }
        for (std::size_t i = 0; i < agents->size(); ++i) {
            config.agents.push_back(parse_agent((*agents)[i], i, base_dir));
        }
    }

    config.validate();
    return config;
}

BenchmarkConfig load_benchmark_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        config_fail(fmt::format("cannot read config '{}'", path.string()));
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_benchmark_config(text.str(), path.parent_path());
}

std::string canonical_config_json(const BenchmarkConfig& config) {
    ordered_json doc;
    doc["data"] = {{"file", config.data_path.filename().string()},
                   {"sha256", config.data_sha256 ? json(*config.data_sha256) : json(nullptr)}};
    doc["universe"] = config.universe;
    doc["initial_capital"] = config.initial_capital;
    doc["seed"] = config.seed;
    doc["periods"] = ordered_json::array();
    for (const auto& p : config.periods) {
        doc["periods"].push_back({{"label", p.label}, {"start", p.start.iso()}, {"end", p.end.iso()}});
    }
    doc["strategies"] = ordered_json::array();
    for (const auto& s : config.strategies) {
        doc["strategies"].push_back({{"label", s.label},
                                     {"kind", strategy_kind_label(s.kind)},
                                     {"name", s.display_name},
                                     {"variant", s.variant},
                                     {"lookback_days", s.config.momentum_lookback_days},
                                     {"selection_rounding",
                                      s.config.selection_rounding == SelectionRounding::floor ? "floor" : "ceil"},
                                     {"ma_fast", s.config.ma_fast},
                                     {"ma_slow", s.config.ma_slow}});
    }
    doc["agents"] = ordered_json::array();
    for (const auto& a : config.agents) {
        ordered_json entry{{"label", a.label},
                           {"name", a.display_name},
                           {"variant", a.variant},
                           {"history_window_days", a.history_window_days},
                           {"rebalance", frequency_label(a.frequency)}};
        switch (a.kind) {
            case AgentKind::remote:
                entry["kind"] = "remote";
                entry["endpoint"] = {{"base_url", a.endpoint.base_url},
                                     {"model", a.endpoint.model_name},
                                     {"credential_env", a.endpoint.credential_env},
                                     {"timeout_s", a.endpoint.timeout_seconds},
                                     {"max_retries", a.endpoint.max_retries},
                                     {"temperature", a.endpoint.temperature}};
                break;
            case AgentKind::replay:
                entry["kind"] = "replay";
                entry["fixture_dir"] = a.fixture_dir.filename().string();
                break;
            case AgentKind::constant:
                entry["kind"] = "constant";
                entry["weights"] = ordered_json::object();
                for (const auto& [t, w] : a.constant_weights) {
                    entry["weights"][t] = w;
                }
                break;
        }
        doc["agents"].push_back(std::move(entry));
    }
    return doc.dump();
}

MarketData load_market_data(const BenchmarkConfig& config) {
    const std::set<std::string> universe(config.universe.begin(), config.universe.end());
    return MarketData(load_price_csv_file(config.data_path, universe));
}

RunPlan plan_for(const StrategyEntry& entry, std::uint64_t seed) {
    StrategyConfig cfg = entry.config;
    cfg.noise_seed = seed;
    const auto kind = entry.kind;
    return RunPlan{entry.label, default_frequency(kind), default_mode(kind),
                   [kind, cfg] { return std::make_unique<StrategySource>(kind, cfg); }};
}

RunPlan plan_for(const AgentEntry& entry) {
    RunPlan plan{entry.label, entry.frequency, PortfolioMode::holding, {}};
    switch (entry.kind) {
        case AgentKind::remote:
            plan.make_source = [endpoint = entry.endpoint, window = entry.history_window_days] {
                return std::make_unique<AgentSource>(std::make_unique<RemoteAgent>(endpoint, window));
            };
            break;
        case AgentKind::replay:
            plan.make_source = [dir = entry.fixture_dir, window = entry.history_window_days] {
                return std::make_unique<AgentSource>(std::make_unique<FixtureReplayAgent>(dir, window));
            };
            break;
        case AgentKind::constant:
            plan.make_source = [weights = entry.constant_weights] {
                return std::make_unique<AgentSource>(std::make_unique<ConstantAgent>(weights));
            };
            break;
    }
    return plan;
}

BacktestResult run_plan(const MarketData& data, const PeriodSpec& period, const RunPlan& plan,
                        double initial_capital) {
    auto source = plan.make_source();
    return run_backtest(data, period, *source, BacktestOptions{plan.label, plan.frequency, plan.mode, initial_capital});
}

AlphaRecord make_alpha_record(std::string label, std::string display_name, std::string variant, RecordBlock block,
                              double p1_return_pct, double p2_return_pct, double benchmark_p1_pct,
                              double benchmark_p2_pct) {
    AlphaRecord r;
    r.strategy_label = std::move(label);
    r.display_name = std::move(display_name);
    r.variant = std::move(variant);
    r.block = block;
    r.p1_return_pct = p1_return_pct;
    r.p2_return_pct = p2_return_pct;
    r.p1_alpha_pp = alpha(p1_return_pct, benchmark_p1_pct);
    r.p2_alpha_pp = alpha(p2_return_pct, benchmark_p2_pct);
    r.alpha_decay_pp = alpha_decay(r.p1_alpha_pp, r.p2_alpha_pp);
    return r;
}

bool BenchmarkReport::has_failures() const noexcept {
    return std::any_of(records.begin(), records.end(), [](const AlphaRecord& r) { return r.failed(); });
}

namespace {

struct RowSpec {
    std::string label;
    std::string display_name;
    std::string variant;
    RecordBlock block;
    RunPlan plan;
};

struct RunOutcome {
    std::optional<BacktestResult> result;
    std::string error;
};

}  // namespace

BenchmarkReport run_dual_period(const BenchmarkConfig& config, const MarketData& data, std::string dataset_sha256) {
    config.validate();

    std::vector<RowSpec> rows;
    for (const auto& s : config.strategies) {
        rows.push_back(RowSpec{s.label, s.display_name, s.variant, RecordBlock::quant, plan_for(s, config.seed)});
    }
    for (const auto& a : config.agents) {
        rows.push_back(RowSpec{a.label, a.display_name, a.variant, RecordBlock::agent, plan_for(a)});
    }

    // One task per (row, period); outcomes[2 * row + period].
    std::vector<RunOutcome> outcomes(rows.size() * 2);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t task = next++; task < outcomes.size(); task = next++) {
            const auto& row = rows[task / 2];
            const auto& period = config.periods[task % 2];
            try {
                outcomes[task].result = run_plan(data, period, row.plan, config.initial_capital);
            } catch (const std::exception& e) {
                outcomes[task].error = fmt::format("{} {}: {}", row.label, period.label, e.what());
            }
        }
    };
    std::size_t threads = config.max_parallel ? config.max_parallel : std::thread::hardware_concurrency();
    threads = std::clamp<std::size_t>(threads, 1, outcomes.size());
    {
        std::vector<std::jthread> pool;
        for (std::size_t i = 1; i < threads; ++i) {
            pool.emplace_back(worker);
        }
        worker();
    }

    BenchmarkReport report;
    auto& meta = report.metadata;
    meta.engine_version = kEngineVersion;
    meta.dataset_sha256 = std::move(dataset_sha256);
    meta.config_sha256 = sha256_hex(canonical_config_json(config));
    meta.seed = config.seed;
    meta.initial_capital = config.initial_capital;
    meta.periods = config.periods;
    for (const auto& a : config.agents) {
        ReportMetadata::AgentInfo info{a.label, "", "", "", 0.0};
        switch (a.kind) {
            case AgentKind::remote:
                info.kind = "remote";
                info.model = a.endpoint.model_name;
                info.base_url = a.endpoint.base_url;
                info.temperature = a.endpoint.temperature;
                break;
            case AgentKind::replay:
                info.kind = "replay";
                break;
            case AgentKind::constant:
                info.kind = "constant";
                break;
        }
        meta.agents.push_back(std::move(info));
    }

    std::size_t benchmark_row = 0;
    while (config.strategies[benchmark_row].kind != StrategyKind::buy_hold) {
        ++benchmark_row;
    }
    for (std::size_t p = 0; p < 2; ++p) {
        const auto& outcome = outcomes[2 * benchmark_row + p];
        if (!outcome.result) {
            throw std::runtime_error(fmt::format("benchmark run failed: {}", outcome.error));
        }
    }
    const double bench_p1 = outcomes[2 * benchmark_row].result->total_return_pct;
    const double bench_p2 = outcomes[2 * benchmark_row + 1].result->total_return_pct;

    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& p1 = outcomes[2 * r];
        const auto& p2 = outcomes[2 * r + 1];
        const auto& row = rows[r];
        if (p1.result && p2.result) {
            report.records.push_back(make_alpha_record(row.label, row.display_name, row.variant, row.block,
                                                       p1.result->total_return_pct, p2.result->total_return_pct,
                                                       bench_p1, bench_p2));
            for (const auto* outcome : {&p1, &p2}) {
                for (const auto& d : outcome->result->fallback_dates) {
                    meta.fallbacks.push_back(FallbackEvent{row.label, outcome->result->period.label, d});
                }
            }
        } else {
            AlphaRecord failed;
            failed.strategy_label = row.label;
            failed.display_name = row.display_name;
            failed.variant = row.variant;
            failed.block = row.block;
            std::string why = p1.result ? "" : p1.error;
            if (!p2.result) {
                why += (why.empty() ? "" : "; ") + p2.error;
            }
            failed.failure = why;
            report.records.push_back(std::move(failed));
        }
    }
    return report;
}

BenchmarkReport run_dual_period(const BenchmarkConfig& config) {
    const auto data = load_market_data(config);
    auto digest = sha256_file_hex(config.data_path);
    if (config.data_sha256 && *config.data_sha256 != digest) {
        throw DataError(fmt::format("dataset hash mismatch: config pins {}, file is {}", *config.data_sha256, digest));
    }
    return run_dual_period(config, data, std::move(digest));
}

}  // namespace lookahead
