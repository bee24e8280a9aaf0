#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>

#include "lookahead/marketdata.hpp"
#include "lookahead/portfolio.hpp"

namespace lookahead {

/// How "top half" / "bottom half" of an n-ticker universe is sized.
enum class SelectionRounding { floor, ceil };

struct StrategyConfig {
    std::size_t momentum_lookback_days = 63;  ///< 3 months at 21 trading days per month
    SelectionRounding selection_rounding = SelectionRounding::floor;
    std::size_t ma_fast = 50;
    std::size_t ma_slow = 100;
    std::uint64_t noise_seed = 0;

    /// Throws std::invalid_argument unless ma_fast < ma_slow and every window is >= 1.
    void validate() const;
};

/// floor(n/2) or ceil(n/2), never less than 1.
[[nodiscard]] std::size_t selection_count(std::size_t n, SelectionRounding rounding) noexcept;

/// 1/n on every ticker.
TargetWeights buy_and_hold_weights(std::span<const std::string> universe);
TargetWeights equal_weights(std::span<const std::string> universe);

/// Trailing `momentum_lookback_days` total return for each ticker as of the slice date,
/// or nullopt when any ticker lacks that much history.
std::optional<std::vector<std::pair<std::string, double>>> trailing_returns(const PitSlice& slice,
                                                                            std::span<const std::string> universe,
                                                                            std::size_t lookback_days);

/// Equal weight over the k best trailing performers; equal weight over all if history is short.
TargetWeights momentum_weights(const PitSlice& slice, std::span<const std::string> universe,
                               const StrategyConfig& config);
/// Equal weight over the k worst trailing performers; equal weight over all if history is short.
TargetWeights mean_reversion_weights(const PitSlice& slice, std::span<const std::string> universe,
                                     const StrategyConfig& config);

/// Equal weight over tickers whose fast SMA is strictly above the slow SMA; all cash if none.
TargetWeights ma_crossover_weights(const PitSlice& slice, std::span<const std::string> universe,
                                   const StrategyConfig& config);

/// The generator behind the random-noise control.
using NoiseRng = std::mt19937_64;

inline constexpr double kNoiseLong = 0.4;
inline constexpr double kNoiseShort = -0.4;

/// One raw per-ticker draw: +0.4 with p=0.4, -0.4 with p=0.4, 0 with p=0.2.
/// Uses the top 53 bits of one engine output as a uniform in [0, 1).
double draw_noise_weight(NoiseRng& rng);

/// Divides every weight by the gross exposure; all-zero input stays all zero.
TargetWeights normalize_gross(const WeightMap& raw);

/// One draw per ticker in ascending symbol order, scaled so gross exposure is 1.
/// An all-zero draw yields all-zero weights.
TargetWeights random_noise_weights(NoiseRng& rng, std::span<const std::string> universe);

enum class StrategyKind { buy_hold, equal_weight, momentum, mean_reversion, ma_crossover, random_noise };

/// Machine label used in configs and on the command line (e.g. "buy_hold").
[[nodiscard]] std::string_view strategy_kind_label(StrategyKind kind) noexcept;
[[nodiscard]] std::optional<StrategyKind> parse_strategy_kind(std::string_view label) noexcept;
/// Human-facing row name (e.g. "Buy & Hold").
[[nodiscard]] std::string_view strategy_display_name(StrategyKind kind) noexcept;
/// Report variant column (Passive, Systematic, Trend, Control).
[[nodiscard]] std::string_view strategy_variant(StrategyKind kind) noexcept;

}  // namespace lookahead
