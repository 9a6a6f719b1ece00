#pragma once

/// @file schedules.hpp
/// @brief Training-recipe components as deterministic functions: learning-rate
/// schedules, EMA, label smoothing, stochastic depth, per-scale regularization tables.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rrs/scaling.hpp"

namespace rrs {

enum class LrDecay { cosine, stepwise };

std::string_view to_string(LrDecay d) noexcept;

struct SchedulePlan {
    std::int64_t total_steps = 0;
    std::int64_t warmup_steps = 0;
    double peak_lr = 0.1;
    LrDecay decay = LrDecay::cosine;
    /// Stepwise only: step at which each factor starts to apply (cumulative).
    std::vector<std::int64_t> milestones;
    std::vector<double> factors;

    /// Throws InvalidArgument on violated invariants.
    void validate() const;
};

/// Linear warmup 0 -> peak, then cosine decay to 0 or stepwise milestone decay.
double lr_at(std::int64_t step, const SchedulePlan& plan);

/// How the recipe's maximum learning rate is derived from the batch size.
enum class PeakLrMode {
    /// 0.1 / B, read literally.
    verbatim,
    /// 0.1 * B / 256.
    linear_scaling,
};

std::string_view to_string(PeakLrMode m) noexcept;
std::optional<PeakLrMode> parse_peak_lr_mode(std::string_view s) noexcept;
double peak_lr_for_batch(int batch_size, PeakLrMode mode);

inline constexpr int kDefaultWarmupEpochs = 5;

/// Cosine plan with warmup_epochs of linear warmup.
SchedulePlan make_cosine_plan(int epochs, std::int64_t steps_per_epoch, double peak_lr,
                              int warmup_epochs = kDefaultWarmupEpochs);

/// Stepwise plan decaying x0.1 at epochs 30, 60 and 80 (scaled to the epoch count when it is not 90).
SchedulePlan make_stepwise_plan(int epochs, std::int64_t steps_per_epoch, double peak_lr,
                                int warmup_epochs = kDefaultWarmupEpochs);

/// decay * shadow + (1 - decay) * current.
double ema_update(double shadow, double current, double decay);

/// (1 - eps) on the true class plus eps / K everywhere.
std::vector<double> label_smooth(std::size_t class_index, std::size_t num_classes, double epsilon);

/// 1 - (block_index / total_blocks) * final_drop, block_index 1-based.
double stochastic_depth_survival(int block_index, int total_blocks, double final_drop);

struct RegConfig {
    int randaugment_layers = 0;
    int randaugment_magnitude = 0;
    double stochastic_depth_rate = 0.0;
    double dropout_rate = 0.0;
    double label_smoothing = 0.0;
    double weight_decay = 0.0;
    double ema_decay = 0.0;
    int epochs = 0;

    void validate() const;
    bool operator==(const RegConfig&) const = default;
};

/// One row of the published ResNet-RS hyperparameter table.
struct RegPolicyRow {
    int depth;
    int resolution;
    int magnitude;
    double stochastic_depth;
    double dropout;
};

std::span<const RegPolicyRow> reg_policy_rows() noexcept;

/// Exact hyperparameters of a published ResNet-RS model; throws InvalidArgument naming the
/// valid (depth, resolution) pairs otherwise.
RegConfig reg_policy(int depth, int resolution);

/// Dropout rate used for a width multiplier in the scaling sweep.
double grid_dropout(double width_mult);

/// Regularization used for one cell of the scaling sweep at 10, 100 or 350 epochs.
RegConfig grid_reg_policy(const ScaleConfig& config, int epochs);

enum class Regularizer { RA, LS, DO, SD };

std::string_view to_string(Regularizer r) noexcept;
std::optional<Regularizer> parse_regularizer(std::string_view s) noexcept;

/// 4e-5 once dropout or stochastic depth is active, 1e-4 otherwise.
double recommend_weight_decay(const std::set<Regularizer>& active);

/// Magnitude rule for EfficientNets trained at reduced resolution.
int enet_rs_magnitude(int resolution);

struct RecipePreset {
    std::string name;
    std::string description;
    int epochs = 90;
    /// "stepwise", "cosine" or "exponential".
    std::string lr_decay;
    std::string optimizer;
    bool ema = false;
    bool label_smoothing = false;
    bool stochastic_depth = false;
    bool randaugment = false;
    bool dropout_fc = false;
    bool smaller_weight_decay = false;
    bool squeeze_excitation = false;
    bool resnet_d = false;
    /// Concrete regularization values for the preset's reference model; absent when
    /// only the method checklist is known.
    std::optional<RegConfig> reg;
    /// Ladder entries: top-1 reported for the cumulative recipe (ResNet-200 @ 256).
    std::optional<double> reported_top1;
};

/// Named presets: "resnet-2015", "resnet-rs", "efficientnet" plus the cumulative
/// "ladder/NN-..." entries of the additive recipe study (00 is the baseline).
std::map<std::string, RecipePreset> recipe_presets();

/// The additive ladder in order, baseline first.
std::vector<RecipePreset> recipe_ladder();

struct ScheduleRow {
    std::int64_t step;
    double lr;
    double ema_decay;
    double sd_final_rate;
};

/// Rows for step 0, every, 2*every, ... and always the final step.
std::vector<ScheduleRow> schedule_rows(const SchedulePlan& plan, const RegConfig& reg, std::int64_t every = 1);

}  // namespace rrs
