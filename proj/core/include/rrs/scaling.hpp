#pragma once

/// @file scaling.hpp
/// @brief Scaling grid, depth-vs-width strategy selection, speed-accuracy frontiers
/// and power-law fits of error against FLOPs.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rrs {

struct ScaleConfig {
    int depth = 50;
    double width_mult = 1.0;
    int resolution = 224;

    bool operator==(const ScaleConfig&) const = default;
};

/// Width multipliers, depths and resolutions of the published scaling sweep.
struct GridAxes {
    std::vector<double> widths;
    std::vector<int> depths;
    std::vector<int> resolutions;

    static GridAxes published();
};

/// Cartesian product, depth-major then width then resolution. Each axis is
/// deduplicated (first occurrence wins) before the product. Empty axis -> InvalidArgument.
std::vector<ScaleConfig> enumerate_grid(std::span<const double> widths, std::span<const int> depths,
                                        std::span<const int> resolutions);
std::vector<ScaleConfig> enumerate_grid(const GridAxes& axes);

enum class Tristate { yes, no, unknown };

struct TrainingRegime {
    int epochs = 350;
    std::optional<long long> dataset_images;
    Tristate overfitting_expected = Tristate::unknown;
};

enum class StrategyKind { DepthSlowResolution, WidthSlowResolution, RegimeDependent };

std::string_view to_string(StrategyKind kind) noexcept;
std::string_view to_string(Tristate t) noexcept;
std::optional<Tristate> parse_tristate(std::string_view s) noexcept;

inline constexpr int kDefaultResolutionCap = 320;

struct ScalingStrategy {
    StrategyKind kind = StrategyKind::RegimeDependent;
    int resolution_cap = kDefaultResolutionCap;
    /// Set when the evidence does not single out depth or width.
    bool advisory = false;
    std::string rationale;
};

/// >= 350 epochs or expected overfitting: scale depth. <= 10 epochs or no overfitting
/// expected: scale width. Anything else is reported as regime dependent.
ScalingStrategy recommend_strategy(const TrainingRegime& regime);

std::span<const int> depth_ladder() noexcept;
std::span<const double> width_ladder() noexcept;
std::span<const int> resolution_ladder() noexcept;

/// Walks the depth (or width) ladder from base, one rung per step, raising the resolution
/// by at most one ladder notch per step and never above the strategy's cap. The result
/// starts with base and stops early when the ladder is exhausted.
std::vector<ScaleConfig> apply_strategy(const ScaleConfig& base, const ScalingStrategy& strategy, int steps);

struct ParetoPoint {
    std::string model_id;
    double cost = 0.0;
    double quality = 0.0;

    bool operator==(const ParetoPoint&) const = default;
};

/// True when a has cost <= b and quality >= b with at least one strict.
bool dominates(const ParetoPoint& a, const ParetoPoint& b) noexcept;

/// Non-dominated points sorted by cost ascending. Of several identical (cost, quality)
/// points only the first in input order is kept. Throws InvalidArgument on empty input
/// or non-positive cost.
std::vector<ParetoPoint> pareto_frontier(std::span<const ParetoPoint> points);

/// slow.cost / fast.cost.
double speedup(const ParetoPoint& slow, const ParetoPoint& fast);

struct PowerLawFit {
    double exponent = 0.0;
    /// error ~= coefficient * flops^exponent
    double coefficient = 0.0;
    double r_squared = 0.0;
};

struct FlopsErrorSample {
    double flops = 0.0;
    double error = 0.0;
};

/// Least squares of log10(error) on log10(flops).
PowerLawFit powerlaw_fit(std::span<const FlopsErrorSample> samples);

/// Top-1 accuracy in percent to top-1 error in percent.
inline double top1_error(double top1) noexcept { return 100.0 - top1; }

}  // namespace rrs
