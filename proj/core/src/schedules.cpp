#include "rrs/schedules.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rrs/error.hpp"

namespace rrs {

namespace {

constexpr double kRecipeWeightDecay = 4e-5;
constexpr double kDefaultWeightDecay = 1e-4;
constexpr double kRecipeEma = 0.9999;
constexpr double kRecipeLabelSmoothing = 0.1;
constexpr int kRecipeRandAugmentLayers = 2;
constexpr int kRecipeEpochs = 350;

constexpr std::array<RegPolicyRow, 11> kRegRows{{
    {50, 160, 10, 0.0, 0.25},
    {101, 160, 10, 0.0, 0.25},
    {101, 192, 15, 0.0, 0.25},
    {152, 192, 15, 0.0, 0.25},
    {152, 224, 15, 0.0, 0.25},
    {152, 256, 15, 0.0, 0.25},
    {200, 256, 15, 0.1, 0.25},
    {270, 256, 15, 0.1, 0.25},
    {350, 256, 15, 0.1, 0.25},
    {350, 320, 15, 0.1, 0.4},
    {420, 320, 15, 0.1, 0.4},
}};

struct WidthDropout {
    double width;
    double dropout;
};

constexpr std::array<WidthDropout, 5> kGridDropout{{
    {0.25, 0.0},
    {0.5, 0.1},
    {1.0, 0.25},
    {1.5, 0.6},
    {2.0, 0.75},
}};

bool same(double a, double b) { return std::abs(a - b) < 1e-12; }

RegConfig recipe_base() {
    RegConfig r;
    r.randaugment_layers = kRecipeRandAugmentLayers;
    r.label_smoothing = kRecipeLabelSmoothing;
    r.weight_decay = kRecipeWeightDecay;
    r.ema_decay = kRecipeEma;
    r.epochs = kRecipeEpochs;
    return r;
}

}  // namespace

std::string_view to_string(LrDecay d) noexcept { return d == LrDecay::cosine ? "cosine" : "stepwise"; }

void SchedulePlan::validate() const {
    if (total_steps < 1) throw InvalidArgument("schedule: total_steps must be >= 1");
    if (warmup_steps < 0 || warmup_steps >= total_steps) {
        throw InvalidArgument("schedule: warmup_steps must lie in [0, total_steps)");
    }
    if (!(peak_lr > 0.0)) throw InvalidArgument("schedule: peak_lr must be > 0");
    if (milestones.size() != factors.size()) throw InvalidArgument("schedule: milestones and factors differ in length");
    if (!std::is_sorted(milestones.begin(), milestones.end())) {
        throw InvalidArgument("schedule: milestones must be ascending");
    }
    for (double f : factors) {
        if (!(f > 0.0)) throw InvalidArgument("schedule: decay factors must be > 0");
    }
}

double lr_at(std::int64_t step, const SchedulePlan& plan) {
    plan.validate();
    if (step < 0 || step > plan.total_steps) {
        throw InvalidArgument("lr_at: step " + std::to_string(step) + " outside [0, " +
                              std::to_string(plan.total_steps) + "]");
    }
    if (step < plan.warmup_steps) {
        return plan.peak_lr * static_cast<double>(step) / static_cast<double>(plan.warmup_steps);
    }
    if (plan.decay == LrDecay::cosine) {
        const double progress = static_cast<double>(step - plan.warmup_steps) /
                                static_cast<double>(plan.total_steps - plan.warmup_steps);
        return plan.peak_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
    }
    double lr = plan.peak_lr;
    for (std::size_t i = 0; i < plan.milestones.size(); ++i) {
        if (step >= plan.milestones[i]) lr *= plan.factors[i];
    }
    return lr;
}

std::string_view to_string(PeakLrMode m) noexcept { return m == PeakLrMode::verbatim ? "verbatim" : "linear-scaling"; }

std::optional<PeakLrMode> parse_peak_lr_mode(std::string_view s) noexcept {
    if (s == "verbatim") return PeakLrMode::verbatim;
    if (s == "linear-scaling") return PeakLrMode::linear_scaling;
    return std::nullopt;
}

double peak_lr_for_batch(int batch_size, PeakLrMode mode) {
    if (batch_size < 1) throw InvalidArgument("batch size must be >= 1");
    const double b = static_cast<double>(batch_size);
    return mode == PeakLrMode::verbatim ? 0.1 / b : 0.1 * b / 256.0;
}

SchedulePlan make_cosine_plan(int epochs, std::int64_t steps_per_epoch, double peak_lr, int warmup_epochs) {
    if (epochs < 1 || steps_per_epoch < 1) throw InvalidArgument("epochs and steps_per_epoch must be >= 1");
    if (warmup_epochs < 0) throw InvalidArgument("warmup_epochs must be >= 0");
    SchedulePlan p;
    p.total_steps = std::int64_t{epochs} * steps_per_epoch;
    p.warmup_steps = std::int64_t{warmup_epochs} * steps_per_epoch;
    p.peak_lr = peak_lr;
    p.decay = LrDecay::cosine;
    p.validate();
    return p;
}

SchedulePlan make_stepwise_plan(int epochs, std::int64_t steps_per_epoch, double peak_lr, int warmup_epochs) {
    SchedulePlan p = make_cosine_plan(epochs, steps_per_epoch, peak_lr, warmup_epochs);
    p.decay = LrDecay::stepwise;
    for (int e : {30, 60, 80}) {
        const auto scaled = static_cast<std::int64_t>(std::llround(e * static_cast<double>(epochs) / 90.0));
        p.milestones.push_back(scaled * steps_per_epoch);
        p.factors.push_back(0.1);
    }
    p.validate();
    return p;
}

double ema_update(double shadow, double current, double decay) {
    if (!(decay >= 0.0 && decay <= 1.0)) throw InvalidArgument("ema_update: decay must lie in [0, 1]");
    return decay * shadow + (1.0 - decay) * current;
}

std::vector<double> label_smooth(std::size_t class_index, std::size_t num_classes, double epsilon) {
    if (num_classes == 0 || class_index >= num_classes) throw InvalidArgument("label_smooth: class index out of range");
    if (!(epsilon >= 0.0 && epsilon < 1.0)) throw InvalidArgument("label_smooth: epsilon must lie in [0, 1)");
    const double off = epsilon / static_cast<double>(num_classes);
    std::vector<double> dist(num_classes, off);
    // The true class takes whatever the off-targets leave, so the sum is 1 up to one rounding.
    dist[class_index] = 1.0 - off * static_cast<double>(num_classes - 1);
    return dist;
}

double stochastic_depth_survival(int block_index, int total_blocks, double final_drop) {
    if (total_blocks < 1 || block_index < 1 || block_index > total_blocks) {
        throw InvalidArgument("stochastic_depth_survival: block_index must lie in [1, total_blocks]");
    }
    if (!(final_drop >= 0.0 && final_drop <= 1.0)) {
        throw InvalidArgument("stochastic_depth_survival: final_drop must lie in [0, 1]");
    }
    return 1.0 - static_cast<double>(block_index) / static_cast<double>(total_blocks) * final_drop;
}

void RegConfig::validate() const {
    auto rate = [](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument(std::string("RegConfig: ") + name + " must lie in [0, 1]");
    };
    rate(stochastic_depth_rate, "stochastic_depth_rate");
    rate(dropout_rate, "dropout_rate");
    rate(label_smoothing, "label_smoothing");
    rate(weight_decay, "weight_decay");
    rate(ema_decay, "ema_decay");
    if (randaugment_layers < 0) throw InvalidArgument("RegConfig: randaugment_layers must be >= 0");
    if (randaugment_magnitude < 0 || randaugment_magnitude > 30) {
        throw InvalidArgument("RegConfig: randaugment_magnitude must lie in [0, 30]");
    }
    if (epochs < 1) throw InvalidArgument("RegConfig: epochs must be >= 1");
}

std::span<const RegPolicyRow> reg_policy_rows() noexcept { return kRegRows; }

RegConfig reg_policy(int depth, int resolution) {
    for (const auto& row : kRegRows) {
        if (row.depth == depth && row.resolution == resolution) {
            RegConfig r = recipe_base();
            r.randaugment_magnitude = row.magnitude;
            r.stochastic_depth_rate = row.stochastic_depth;
            r.dropout_rate = row.dropout;
            return r;
        }
    }
    std::ostringstream valid;
    for (std::size_t i = 0; i < kRegRows.size(); ++i) {
        valid << (i ? ", " : "") << "(" << kRegRows[i].depth << ", " << kRegRows[i].resolution << ")";
    }
    throw InvalidArgument("reg_policy: no published hyperparameters for (" + std::to_string(depth) + ", " +
                          std::to_string(resolution) + "); valid pairs: " + valid.str());
}

double grid_dropout(double width_mult) {
    for (const auto& e : kGridDropout) {
        if (same(e.width, width_mult)) return e.dropout;
    }
    throw InvalidArgument("unsupported width multiplier " + std::to_string(width_mult) +
                          "; expected one of 0.25, 0.5, 1.0, 1.5, 2.0");
}

RegConfig grid_reg_policy(const ScaleConfig& config, int epochs) {
    const double dropout = grid_dropout(config.width_mult);
    if (epochs != 10 && epochs != 100 && epochs != 350) {
        throw InvalidArgument("grid_reg_policy: epochs must be 10, 100 or 350");
    }
    RegConfig r;
    r.weight_decay = kRecipeWeightDecay;
    r.ema_decay = kRecipeEma;
    r.epochs = epochs;
    if (epochs != 350) return r;  // flips and crops only

    const int res = config.resolution;
    const bool narrow = same(config.width_mult, 0.25) || same(config.width_mult, 0.5);
    r.randaugment_layers = kRecipeRandAugmentLayers;
    if (narrow || (res >= 64 && res <= 160)) {
        r.randaugment_magnitude = 10;
    } else if (res >= 224 && res <= 320) {
        r.randaugment_magnitude = 15;
    } else {
        r.randaugment_magnitude = 20;
    }
    r.stochastic_depth_rate = (res >= 224 && config.width_mult > 0.25) ? 0.2 : 0.0;
    r.dropout_rate = dropout;
    r.label_smoothing = kRecipeLabelSmoothing;
    return r;
}

std::string_view to_string(Regularizer r) noexcept {
    switch (r) {
        case Regularizer::RA: return "RA";
        case Regularizer::LS: return "LS";
        case Regularizer::DO: return "DO";
        case Regularizer::SD: return "SD";
    }
    return "?";
}

std::optional<Regularizer> parse_regularizer(std::string_view s) noexcept {
    for (auto r : {Regularizer::RA, Regularizer::LS, Regularizer::DO, Regularizer::SD}) {
        if (to_string(r) == s) return r;
    }
    return std::nullopt;
}

double recommend_weight_decay(const std::set<Regularizer>& active) {
    return active.contains(Regularizer::DO) || active.contains(Regularizer::SD) ? kRecipeWeightDecay
                                                                                : kDefaultWeightDecay;
}

int enet_rs_magnitude(int resolution) {
    if (resolution < 1) throw InvalidArgument("enet_rs_magnitude: resolution must be >= 1");
    if (resolution <= 224) return 10;
    if (resolution > 320) return 20;
    return 15;
}

// ---------------------------------------------------------------------------
// presets

std::vector<RecipePreset> recipe_ladder() {
    std::vector<RecipePreset> ladder;

    RecipePreset p;
    p.name = "ladder/00-baseline";
    p.description = "ResNet-200 @ 256, 90 epochs, stepwise decay";
    p.epochs = 90;
    p.lr_decay = "stepwise";
    p.optimizer = "momentum";
    RegConfig reg;
    reg.weight_decay = kDefaultWeightDecay;
    reg.epochs = 90;
    p.reg = reg;
    p.reported_top1 = 79.0;
    ladder.push_back(p);

    struct Step {
        const char* slug;
        const char* description;
        double top1;
        void (*apply)(RecipePreset&);
    };
    const Step steps[] = {
        {"cosine-lr", "+ cosine LR decay", 79.3, [](RecipePreset& r) { r.lr_decay = "cosine"; }},
        {"longer-training", "+ 350 training epochs", 78.8,
         [](RecipePreset& r) {
             r.epochs = kRecipeEpochs;
             r.reg->epochs = kRecipeEpochs;
         }},
        {"ema", "+ EMA of weights", 79.1,
         [](RecipePreset& r) {
             r.ema = true;
             r.reg->ema_decay = kRecipeEma;
         }},
        {"label-smoothing", "+ label smoothing", 80.4,
         [](RecipePreset& r) {
             r.label_smoothing = true;
             r.reg->label_smoothing = kRecipeLabelSmoothing;
         }},
        {"stochastic-depth", "+ stochastic depth", 80.6,
         [](RecipePreset& r) {
             r.stochastic_depth = true;
             r.reg->stochastic_depth_rate = 0.1;
         }},
        {"randaugment", "+ RandAugment", 81.0,
         [](RecipePreset& r) {
             r.randaugment = true;
             r.reg->randaugment_layers = kRecipeRandAugmentLayers;
             r.reg->randaugment_magnitude = 15;
         }},
        {"dropout-fc", "+ dropout on FC", 80.7,
         [](RecipePreset& r) {
             r.dropout_fc = true;
             r.reg->dropout_rate = 0.25;
         }},
        {"smaller-weight-decay", "+ decrease weight decay", 82.2,
         [](RecipePreset& r) {
             r.smaller_weight_decay = true;
             r.reg->weight_decay = kRecipeWeightDecay;
         }},
        {"squeeze-excitation", "+ squeeze-and-excitation", 82.9,
         [](RecipePreset& r) { r.squeeze_excitation = true; }},
        {"resnet-d", "+ ResNet-D", 83.4, [](RecipePreset& r) { r.resnet_d = true; }},
    };

    int index = 1;
    for (const auto& s : steps) {
        s.apply(p);
        std::ostringstream name;
        name << "ladder/" << (index < 10 ? "0" : "") << index << "-" << s.slug;
        p.name = name.str();
        p.description = s.description;
        p.reported_top1 = s.top1;
        ladder.push_back(p);
        ++index;
    }
    return ladder;
}

std::map<std::string, RecipePreset> recipe_presets() {
    std::map<std::string, RecipePreset> out;

    RecipePreset resnet;
    resnet.name = "resnet-2015";
    resnet.description = "original ResNet recipe";
    resnet.epochs = 90;
    resnet.lr_decay = "stepwise";
    resnet.optimizer = "momentum";
    RegConfig plain;
    plain.weight_decay = kDefaultWeightDecay;
    plain.epochs = 90;
    resnet.reg = plain;
    out.emplace(resnet.name, resnet);

    RecipePreset rs;
    rs.name = "resnet-rs";
    rs.description = "ResNet-RS recipe (regularization of ResNet-RS-200 @ 256)";
    rs.epochs = kRecipeEpochs;
    rs.lr_decay = "cosine";
    rs.optimizer = "momentum";
    rs.ema = rs.label_smoothing = rs.stochastic_depth = rs.randaugment = rs.dropout_fc = true;
    rs.smaller_weight_decay = rs.squeeze_excitation = rs.resnet_d = true;
    rs.reg = reg_policy(200, 256);
    out.emplace(rs.name, rs);

    RecipePreset enet = rs;
    enet.name = "efficientnet";
    enet.description = "EfficientNet recipe (method checklist only)";
    enet.lr_decay = "exponential";
    enet.optimizer = "rmsprop";
    enet.reg.reset();
    out.emplace(enet.name, enet);

    for (auto& p : recipe_ladder()) out.emplace(p.name, std::move(p));
    return out;
}

std::vector<ScheduleRow> schedule_rows(const SchedulePlan& plan, const RegConfig& reg, std::int64_t every) {
    plan.validate();
    if (every < 1) throw InvalidArgument("schedule_rows: every must be >= 1");
    std::vector<ScheduleRow> rows;
    rows.reserve(static_cast<std::size_t>(plan.total_steps / every + 2));
    auto emit = [&](std::int64_t step) {
        rows.push_back({step, lr_at(step, plan), reg.ema_decay, reg.stochastic_depth_rate});
    };
    for (std::int64_t s = 0; s <= plan.total_steps; s += every) emit(s);
    if (rows.back().step != plan.total_steps) emit(plan.total_steps);
    return rows;
}

}  // namespace rrs
