#include "rrs/scaling.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

#include "rrs/error.hpp"

namespace rrs {

namespace {

// Depth/resolution ladder realized by the published ResNet-RS family.
constexpr std::array<int, 7> kDepthLadder{50, 101, 152, 200, 270, 350, 420};
constexpr std::array<double, 3> kWidthLadder{1.0, 1.5, 2.0};
constexpr std::array<int, 5> kResolutionLadder{160, 192, 224, 256, 320};

constexpr int kDepthEpochs = 350;
constexpr int kWidthEpochs = 10;

template <typename T>
std::vector<T> dedupe(std::span<const T> values) {
    std::vector<T> out;
    for (const T& v : values) {
        if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    }
    return out;
}

template <typename T>
std::string join(std::span<const T> values) {
    std::ostringstream s;
    s << "[";
    for (std::size_t i = 0; i < values.size(); ++i) s << (i ? "," : "") << values[i];
    s << "]";
    return s.str();
}

int next_resolution(int current, int cap) {
    int next = current;
    for (int r : kResolutionLadder) {
        if (r > current) {
            next = r;
            break;
        }
    }
    return std::min(next, cap);
}

}  // namespace

GridAxes GridAxes::published() {
    return {{0.25, 0.5, 1.0, 1.5, 2.0}, {26, 50, 101, 200, 300, 350, 400}, {128, 160, 224, 320, 448}};
}

std::vector<ScaleConfig> enumerate_grid(std::span<const double> widths, std::span<const int> depths,
                                        std::span<const int> resolutions) {
    if (widths.empty() || depths.empty() || resolutions.empty()) {
        throw InvalidArgument("enumerate_grid: every axis needs at least one value");
    }
    const auto w = dedupe(widths);
    const auto d = dedupe(depths);
    const auto r = dedupe(resolutions);
    std::vector<ScaleConfig> out;
    out.reserve(w.size() * d.size() * r.size());
    for (int depth : d) {
        for (double width : w) {
            for (int res : r) out.push_back({depth, width, res});
        }
    }
    return out;
}

std::vector<ScaleConfig> enumerate_grid(const GridAxes& axes) {
    return enumerate_grid(axes.widths, axes.depths, axes.resolutions);
}

std::string_view to_string(StrategyKind kind) noexcept {
    switch (kind) {
        case StrategyKind::DepthSlowResolution: return "DepthSlowResolution";
        case StrategyKind::WidthSlowResolution: return "WidthSlowResolution";
        case StrategyKind::RegimeDependent: return "RegimeDependent";
    }
    return "unknown";
}

std::string_view to_string(Tristate t) noexcept {
    switch (t) {
        case Tristate::yes: return "yes";
        case Tristate::no: return "no";
        case Tristate::unknown: return "unknown";
    }
    return "unknown";
}

std::optional<Tristate> parse_tristate(std::string_view s) noexcept {
    if (s == "yes") return Tristate::yes;
    if (s == "no") return Tristate::no;
    if (s == "unknown") return Tristate::unknown;
    return std::nullopt;
}

ScalingStrategy recommend_strategy(const TrainingRegime& regime) {
    if (regime.epochs < 1) throw InvalidArgument("recommend_strategy: epochs must be >= 1");
    ScalingStrategy s;
    if (regime.epochs >= kDepthEpochs || regime.overfitting_expected == Tristate::yes) {
        s.kind = StrategyKind::DepthSlowResolution;
        s.rationale = "long training or expected overfitting: scale depth, grow resolution slowly";
    } else if (regime.epochs <= kWidthEpochs || regime.overfitting_expected == Tristate::no) {
        s.kind = StrategyKind::WidthSlowResolution;
        s.rationale = "short training without overfitting: scale width, grow resolution slowly";
    } else {
        s.kind = StrategyKind::RegimeDependent;
        s.advisory = true;
        s.rationale = "intermediate regime: depth and width trade places by resolution; run a small sweep";
    }
    return s;
}

std::span<const int> depth_ladder() noexcept { return kDepthLadder; }
std::span<const double> width_ladder() noexcept { return kWidthLadder; }
std::span<const int> resolution_ladder() noexcept { return kResolutionLadder; }

std::vector<ScaleConfig> apply_strategy(const ScaleConfig& base, const ScalingStrategy& strategy, int steps) {
    if (steps < 0) throw InvalidArgument("apply_strategy: steps must be >= 0");
    if (strategy.resolution_cap < 32) throw InvalidArgument("apply_strategy: resolution_cap must be >= 32");

    std::vector<ScaleConfig> out{base};
    if (steps == 0) return out;

    switch (strategy.kind) {
        case StrategyKind::DepthSlowResolution: {
            auto it = std::find(kDepthLadder.begin(), kDepthLadder.end(), base.depth);
            if (it == kDepthLadder.end()) {
                throw InvalidArgument("apply_strategy: base depth " + std::to_string(base.depth) +
                                      " is not on the depth ladder " + join<int>(kDepthLadder));
            }
            ScaleConfig cur = base;
            for (int i = 0; i < steps && ++it != kDepthLadder.end(); ++i) {
                cur.depth = *it;
                cur.resolution = next_resolution(cur.resolution, strategy.resolution_cap);
                out.push_back(cur);
            }
            break;
        }
        case StrategyKind::WidthSlowResolution: {
            auto it = std::find_if(kWidthLadder.begin(), kWidthLadder.end(),
                                   [&](double w) { return std::abs(w - base.width_mult) < 1e-12; });
            if (it == kWidthLadder.end()) {
                throw InvalidArgument("apply_strategy: base width " + std::to_string(base.width_mult) +
                                      " is not on the width ladder " + join<double>(kWidthLadder));
            }
            ScaleConfig cur = base;
            for (int i = 0; i < steps && ++it != kWidthLadder.end(); ++i) {
                cur.width_mult = *it;
                cur.resolution = next_resolution(cur.resolution, strategy.resolution_cap);
                out.push_back(cur);
            }
            break;
        }
        case StrategyKind::RegimeDependent:
            throw InvalidArgument(
                "apply_strategy: RegimeDependent does not pick an axis; choose depth or width explicitly");
    }
    return out;
}

bool dominates(const ParetoPoint& a, const ParetoPoint& b) noexcept {
    return a.cost <= b.cost && a.quality >= b.quality && (a.cost < b.cost || a.quality > b.quality);
}

std::vector<ParetoPoint> pareto_frontier(std::span<const ParetoPoint> points) {
    if (points.empty()) throw InvalidArgument("pareto_frontier: no points");
    for (const auto& p : points) {
        if (!(p.cost > 0.0)) throw InvalidArgument("pareto_frontier: cost of '" + p.model_id + "' must be > 0");
    }
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (points[a].cost != points[b].cost) return points[a].cost < points[b].cost;
        return points[a].quality > points[b].quality;
    });

    std::vector<ParetoPoint> frontier;
    for (std::size_t idx : order) {
        const auto& p = points[idx];
        if (frontier.empty() || p.quality > frontier.back().quality) frontier.push_back(p);
    }
    return frontier;
}

double speedup(const ParetoPoint& slow, const ParetoPoint& fast) {
    if (!(slow.cost > 0.0) || !(fast.cost > 0.0)) throw InvalidArgument("speedup: costs must be > 0");
    return slow.cost / fast.cost;
}

PowerLawFit powerlaw_fit(std::span<const FlopsErrorSample> samples) {
    if (samples.size() < 2) throw InvalidArgument("powerlaw_fit: need at least 2 samples");
    std::vector<double> x;
    std::vector<double> y;
    for (const auto& s : samples) {
        if (!(s.flops > 0.0) || !(s.error > 0.0)) {
            throw InvalidArgument("powerlaw_fit: flops and error must be positive");
        }
        x.push_back(std::log10(s.flops));
        y.push_back(std::log10(s.error));
    }
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0) throw InvalidArgument("powerlaw_fit: all samples share one FLOPs value");

    PowerLawFit fit;
    fit.exponent = sxy / sxx;
    const double intercept = my - fit.exponent * mx;
    fit.coefficient = std::pow(10.0, intercept);
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (intercept + fit.exponent * x[i]);
        ss_res += r * r;
    }
    // A flat response is fit exactly by slope 0.
    fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return fit;
}

}  // namespace rrs
