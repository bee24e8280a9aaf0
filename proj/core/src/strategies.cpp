#include "lookahead/strategies.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace lookahead {

void StrategyConfig::validate() const {
    if (momentum_lookback_days < 1) {
        throw std::invalid_argument("momentum lookback must be at least 1 trading day");
    }
    if (ma_fast < 1 || ma_slow < 1) {
        throw std::invalid_argument("moving-average windows must be at least 1");
    }
    if (!(ma_fast < ma_slow)) {
        throw std::invalid_argument("moving-average fast window must be shorter than the slow window");
    }
}

std::size_t selection_count(std::size_t n, SelectionRounding rounding) noexcept {
    const std::size_t k = rounding == SelectionRounding::floor ? n / 2 : (n + 1) / 2;
    return std::max<std::size_t>(k, 1);
}

namespace {

std::vector<std::string> sorted_universe(std::span<const std::string> universe) {
    std::vector<std::string> out(universe.begin(), universe.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

TargetWeights equal_over(std::span<const std::string> tickers) {
    TargetWeights out;
    if (tickers.empty()) {
        return out;
    }
    const double w = 1.0 / static_cast<double>(tickers.size());
    for (const auto& t : tickers) {
        out.weights[t] = w;
    }
    return out;
}

enum class RankOrder { best_first, worst_first };

TargetWeights rank_select(const PitSlice& slice, std::span<const std::string> universe,
                          const StrategyConfig& config, RankOrder order) {
    const auto tickers = sorted_universe(universe);
    auto ranked = trailing_returns(slice, tickers, config.momentum_lookback_days);
    if (!ranked) {
        return equal_over(tickers);
    }
    // Input is in ascending symbol order, so stable_sort breaks ties by symbol.
    std::stable_sort(ranked->begin(), ranked->end(), [order](const auto& a, const auto& b) {
        return order == RankOrder::best_first ? a.second > b.second : a.second < b.second;
    });
    const std::size_t k = std::min(selection_count(tickers.size(), config.selection_rounding), ranked->size());
    std::vector<std::string> chosen;
    for (std::size_t i = 0; i < k; ++i) {
        chosen.push_back((*ranked)[i].first);
    }
    return equal_over(chosen);
}

}  // namespace

TargetWeights buy_and_hold_weights(std::span<const std::string> universe) {
    if (universe.empty()) {
        throw std::invalid_argument("universe must not be empty");
    }
    return equal_over(sorted_universe(universe));
}

TargetWeights equal_weights(std::span<const std::string> universe) {
    return buy_and_hold_weights(universe);
}

std::optional<std::vector<std::pair<std::string, double>>> trailing_returns(const PitSlice& slice,
                                                                            std::span<const std::string> universe,
                                                                            std::size_t lookback_days) {
    const auto days = slice.calendar_days();
    if (days.size() < lookback_days + 1) {
        return std::nullopt;
    }
    const Date end = days.back();
    const Date start = days[days.size() - 1 - lookback_days];
    std::vector<std::pair<std::string, double>> out;
    out.reserve(universe.size());
    try {
        for (const auto& t : universe) {
            out.emplace_back(t, total_return(slice, t, start, end));
        }
    } catch (const InsufficientHistory&) {
        return std::nullopt;
    }
    return out;
}

TargetWeights momentum_weights(const PitSlice& slice, std::span<const std::string> universe,
                               const StrategyConfig& config) {
    return rank_select(slice, universe, config, RankOrder::best_first);
}

TargetWeights mean_reversion_weights(const PitSlice& slice, std::span<const std::string> universe,
                                     const StrategyConfig& config) {
    return rank_select(slice, universe, config, RankOrder::worst_first);
}

TargetWeights ma_crossover_weights(const PitSlice& slice, std::span<const std::string> universe,
                                   const StrategyConfig& config) {
    const auto tickers = sorted_universe(universe);
    std::vector<std::string> qualifying;
    for (const auto& t : tickers) {
        try {
            const double fast = sma(slice, t, slice.as_of(), config.ma_fast);
            const double slow = sma(slice, t, slice.as_of(), config.ma_slow);
            if (fast > slow) {
                qualifying.push_back(t);
            }
        } catch (const InsufficientHistory&) {
        }
    }
    return equal_over(qualifying);
}

double draw_noise_weight(NoiseRng& rng) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    if (u < 0.4) {
        return kNoiseLong;
    }
    if (u < 0.8) {
        return kNoiseShort;
    }
    return 0.0;
}

TargetWeights normalize_gross(const WeightMap& raw) {
    TargetWeights out{raw};
    const double gross = out.gross();
    if (gross > 0.0) {
        for (auto& [t, w] : out.weights) {
            w /= gross;
        }
    }
    return out;
}

TargetWeights random_noise_weights(NoiseRng& rng, std::span<const std::string> universe) {
    WeightMap draws;
    for (const auto& t : sorted_universe(universe)) {
        draws[t] = draw_noise_weight(rng);
    }
    return normalize_gross(draws);
}

namespace {

struct KindInfo {
    StrategyKind kind;
    std::string_view label;
    std::string_view display;
    std::string_view variant;
};

constexpr std::array<KindInfo, 6> kKinds{{
    {StrategyKind::buy_hold, "buy_hold", "Buy & Hold", "Passive"},
    {StrategyKind::equal_weight, "equal_weight", "Equal Weight", "Systematic"},
    {StrategyKind::momentum, "momentum", "Momentum (3M)", "Systematic"},
    {StrategyKind::mean_reversion, "mean_reversion", "Mean Reversion", "Systematic"},
    {StrategyKind::ma_crossover, "ma_crossover", "MA Crossover", "Trend"},
    {StrategyKind::random_noise, "random_noise", "Random Noise", "Control"},
}};

const KindInfo& info(StrategyKind kind) noexcept {
    return kKinds[static_cast<std::size_t>(kind)];
}

}  // namespace

std::string_view strategy_kind_label(StrategyKind kind) noexcept {
    return info(kind).label;
}

std::optional<StrategyKind> parse_strategy_kind(std::string_view label) noexcept {
    for (const auto& k : kKinds) {
        if (k.label == label) {
            return k.kind;
        }
    }
    return std::nullopt;
}

std::string_view strategy_display_name(StrategyKind kind) noexcept {
    return info(kind).display;
}

std::string_view strategy_variant(StrategyKind kind) noexcept {
    return info(kind).variant;
}

}  // namespace lookahead
