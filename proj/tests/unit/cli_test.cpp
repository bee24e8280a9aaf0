#include <gtest/gtest.h>

#include <sstream>

#include <json.hpp>

#include "lookahead/commands.hpp"
#include "test_support.hpp"

using lookahead::testing::read_file;
using lookahead::testing::scratch_dir;
using lookahead::testing::synthetic_dir;
using lookahead::testing::write_file;
namespace cli = lookahead::cli;

namespace {

struct Invocation {
    int code = -1;
    std::string out;
    std::string err;
};

Invocation invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "lookahead");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string synthetic_config() {
    return (synthetic_dir() / "bench_config.json").string();
}

/// Copy of the synthetic config in `dir` with `data` pointing at a local price file.
std::filesystem::path config_with(const std::filesystem::path& dir, const std::string& prices,
                                  const std::string& strategies = R"(["buy_hold", "equal_weight"])") {
    write_file(dir / "prices.csv", prices);
    const auto path = dir / "config.json";
    write_file(path, R"({"data": "prices.csv", "universe": ["AAA", "BBB", "CCC"],
        "periods": [{"label": "P1", "start": "2023-01-17", "end": "2023-02-28"},
                    {"label": "P2", "start": "2023-03-01", "end": "2023-04-07"}],
        "strategies": )" + strategies + "}");
    return path;
}

std::string prices_without(const std::string& ticker) {
    std::istringstream in(read_file(synthetic_dir() / "prices.csv"));
    std::string out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind(ticker + ",", 0) != 0) {
            out += line + "\n";
        }
    }
    return out;
}

}  // namespace

TEST(Cli, ValidateReportsOk) {
    const auto r = invoke({"validate", "--config", synthetic_config()});
    EXPECT_EQ(r.code, cli::kExitOk) << r.err;
    EXPECT_EQ(r.out, "3 tickers, calendar ok, warm-up ok\n");
}

TEST(Cli, ValidateNamesMissingTicker) {
    const auto dir = scratch_dir("cli_missing");
    const auto r = invoke({"validate", "--config", config_with(dir, prices_without("CCC")).string()});
    EXPECT_EQ(r.code, cli::kExitConfig);
    EXPECT_NE(r.err.find("CCC"), std::string::npos) << r.err;
}

TEST(Cli, ValidateFlagsWarmupShortfall) {
    const auto dir = scratch_dir("cli_warmup");
    const auto r = invoke({"validate", "--config",
                           config_with(dir, read_file(synthetic_dir() / "prices.csv"), R"(["ma_crossover"])").string()});
    EXPECT_EQ(r.code, cli::kExitConfig);
    EXPECT_NE(r.err.find("warm-up: ma_crossover needs 100 trading days"), std::string::npos) << r.err;
}

TEST(Cli, ValidateRejectsHashMismatchAndBadConfig) {
    const auto dir = scratch_dir("cli_hash");
    write_file(dir / "prices.csv", read_file(synthetic_dir() / "prices.csv"));
    write_file(dir / "config.json", R"({"data": {"path": "prices.csv", "sha256": "00"}, "universe": ["AAA"],
        "periods": [{"label": "P1", "start": "2023-01-17", "end": "2023-02-28"},
                    {"label": "P2", "start": "2023-03-01", "end": "2023-04-07"}]})");
    auto r = invoke({"validate", "--config", (dir / "config.json").string()});
    EXPECT_EQ(r.code, cli::kExitConfig);
    EXPECT_NE(r.err.find("hash:"), std::string::npos) << r.err;

    r = invoke({"validate", "--config", (dir / "missing.json").string()});
    EXPECT_EQ(r.code, cli::kExitConfig);
    EXPECT_NE(r.err.find("config:"), std::string::npos);
}

TEST(Cli, RunWritesResultAndPrintsSummary) {
    const auto out = scratch_dir("cli_run");
    const auto r = invoke({"run", "--config", synthetic_config(), "--strategy", "buy_hold", "--period", "P1", "--out",
                           out.string()});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    EXPECT_EQ(r.out.rfind("buy_hold P1: ", 0), 0u);
    EXPECT_EQ(r.out.back(), '\n');
    const auto json = nlohmann::json::parse(read_file(out / "buy_hold_P1.json"));
    EXPECT_EQ(json["period"]["start"], "2023-01-17");
    EXPECT_TRUE(std::filesystem::exists(out / "buy_hold_P1_trades.csv"));
}

TEST(Cli, RunIsDeterministicForASeed) {
    const auto a = scratch_dir("cli_seed_a");
    const auto b = scratch_dir("cli_seed_b");
    for (const auto& dir : {a, b}) {
        const auto r = invoke({"run", "--config", synthetic_config(), "--strategy", "random_noise", "--period", "P2",
                               "--seed", "7", "--out", dir.string()});
        ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    }
    EXPECT_EQ(read_file(a / "random_noise_P2.json"), read_file(b / "random_noise_P2.json"));
    const auto c = scratch_dir("cli_seed_c");
    invoke({"run", "--config", synthetic_config(), "--strategy", "random_noise", "--period", "P2", "--seed", "8",
            "--out", c.string()});
    EXPECT_NE(read_file(a / "random_noise_P2.json"), read_file(c / "random_noise_P2.json"));
    EXPECT_NE(read_file(a / "random_noise_P2.json").find("\"seed\": 7"), std::string::npos);
}

TEST(Cli, RunRejectsUnknownLabels) {
    const auto out = scratch_dir("cli_unknown");
    auto r = invoke({"run", "--config", synthetic_config(), "--strategy", "warp_drive", "--period", "P1", "--out",
                     out.string()});
    EXPECT_EQ(r.code, cli::kExitConfig);
    EXPECT_NE(r.err.find("warp_drive"), std::string::npos);
    r = invoke({"run", "--config", synthetic_config(), "--strategy", "buy_hold", "--period", "P3", "--out",
                out.string()});
    EXPECT_EQ(r.code, cli::kExitConfig);
}

TEST(Cli, RunEngineFailureIsARuntimeError) {
    const auto dir = scratch_dir("cli_runtime");
    const auto cfg = config_with(dir, read_file(synthetic_dir() / "prices.csv"));
    const auto r = invoke({"run", "--config", cfg.string(), "--strategy", "ma_crossover", "--period", "P1", "--out",
                           (dir / "out").string()});
    EXPECT_EQ(r.code, cli::kExitRuntime);
    EXPECT_NE(r.err.find("trading days"), std::string::npos) << r.err;
}

TEST(Cli, BenchWritesAllRenderings) {
    const auto out = scratch_dir("cli_bench");
    const auto r = invoke({"bench", "--config", synthetic_config(), "--out", out.string(), "--format", "csv"});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    EXPECT_EQ(r.out, read_file(out / "report.csv"));
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 8);
    EXPECT_NE(r.out.find("Buy & Hold,Passive,"), std::string::npos);
    EXPECT_TRUE(std::filesystem::exists(out / "report.txt"));
    EXPECT_TRUE(nlohmann::json::accept(read_file(out / "report.json")));
}

TEST(Cli, BenchMarksUnreachableAgentAndExitsRuntime) {
    const auto dir = scratch_dir("cli_down");
    write_file(dir / "prices.csv", read_file(synthetic_dir() / "prices.csv"));
    write_file(dir / "config.json", R"({"data": "prices.csv", "universe": ["AAA", "BBB", "CCC"],
        "periods": [{"label": "P1", "start": "2023-01-17", "end": "2023-02-28"},
                    {"label": "P2", "start": "2023-03-01", "end": "2023-04-07"}],
        "strategies": ["buy_hold", "equal_weight"],
        "agents": [{"label": "down", "name": "Down", "kind": "remote",
                    "endpoint": {"base_url": "http://127.0.0.1:1/v1", "model": "m", "max_retries": 0,
                                 "timeout_s": 2}}]})");
    const auto r = invoke({"bench", "--config", (dir / "config.json").string(), "--out", (dir / "out").string(),
                           "--format", "csv"});
    EXPECT_EQ(r.code, cli::kExitRuntime);
    EXPECT_NE(r.out.find("Down,Standard,FAILED"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("Equal Weight,Systematic,"), std::string::npos);
    EXPECT_NE(r.err.find("FAILED down"), std::string::npos);
    EXPECT_TRUE(std::filesystem::exists(dir / "out" / "report.json"));
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(invoke({}).code, cli::kExitConfig);
    EXPECT_EQ(invoke({"explode"}).code, cli::kExitConfig);
    EXPECT_EQ(invoke({"validate"}).code, cli::kExitConfig);
    EXPECT_EQ(invoke({"bench", "--config", synthetic_config(), "--format", "xml"}).code, cli::kExitConfig);
    EXPECT_EQ(invoke({"--help"}).code, cli::kExitOk);
}
