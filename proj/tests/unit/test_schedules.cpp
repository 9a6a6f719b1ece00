#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "rrs/error.hpp"
#include "rrs/schedules.hpp"

using namespace rrs;

namespace {

SchedulePlan cosine(std::int64_t total, std::int64_t warmup, double peak) {
    SchedulePlan p;
    p.total_steps = total;
    p.warmup_steps = warmup;
    p.peak_lr = peak;
    return p;
}

}  // namespace

TEST(LrAt, CosineIdentities) {
    const auto p = cosine(1000, 100, 0.4);
    EXPECT_EQ(lr_at(0, p), 0.0);
    EXPECT_DOUBLE_EQ(lr_at(100, p), 0.4);
    EXPECT_NEAR(lr_at(550, p), 0.2, 1e-15);
    EXPECT_NEAR(lr_at(1000, p), 0.0, 1e-15);
    EXPECT_NEAR(lr_at(50, p), 0.2, 1e-15);
    EXPECT_THROW(lr_at(-1, p), InvalidArgument);
    EXPECT_THROW(lr_at(1001, p), InvalidArgument);
}

TEST(LrAt, WarmupContinuityAndMonotoneDecay) {
    for (std::int64_t warmup : {1, 7, 500}) {
        const auto p = cosine(5000, warmup, 1.3);
        const double before = lr_at(warmup - 1, p);
        const double at = lr_at(warmup, p);
        const double slope = p.peak_lr / static_cast<double>(warmup);
        EXPECT_NEAR(at - before, slope, 1e-12);  // the warmup line lands exactly on peak
        EXPECT_NEAR(at, p.peak_lr, 1e-12);
        for (std::int64_t s = warmup + 1; s <= p.total_steps; ++s) ASSERT_LE(lr_at(s, p), lr_at(s - 1, p));
        for (std::int64_t s = 1; s <= warmup; ++s) ASSERT_GT(lr_at(s, p), lr_at(s - 1, p));
    }
}

TEST(LrAt, RiemannSumOfCosinePhase) {
    const auto p = cosine(20000, 1000, 0.8);
    double sum = 0.0;
    for (std::int64_t s = p.warmup_steps; s < p.total_steps; ++s) sum += lr_at(s, p);
    const double expect = 0.5 * p.peak_lr * static_cast<double>(p.total_steps - p.warmup_steps);
    EXPECT_NEAR(sum, expect, p.peak_lr);
}

TEST(LrAt, NoWarmup) {
    const auto p = cosine(10, 0, 1.0);
    EXPECT_DOUBLE_EQ(lr_at(0, p), 1.0);
    EXPECT_NEAR(lr_at(5, p), 0.5, 1e-15);
}

TEST(LrAt, Stepwise) {
    const auto p = make_stepwise_plan(90, 10, 0.1, 5);
    EXPECT_EQ(p.milestones, (std::vector<std::int64_t>{300, 600, 800}));
    EXPECT_DOUBLE_EQ(lr_at(50, p), 0.1);
    EXPECT_DOUBLE_EQ(lr_at(299, p), 0.1);
    EXPECT_NEAR(lr_at(300, p), 0.01, 1e-15);
    EXPECT_NEAR(lr_at(650, p), 0.001, 1e-15);
    EXPECT_NEAR(lr_at(900, p), 0.0001, 1e-15);
    const auto scaled = make_stepwise_plan(180, 1, 0.1, 0);
    EXPECT_EQ(scaled.milestones, (std::vector<std::int64_t>{60, 120, 160}));
}

TEST(SchedulePlan, Validation) {
    EXPECT_THROW(cosine(10, 10, 0.1).validate(), InvalidArgument);
    EXPECT_THROW(cosine(10, 2, 0.0).validate(), InvalidArgument);
    EXPECT_THROW(cosine(0, 0, 0.1).validate(), InvalidArgument);
    EXPECT_THROW(make_cosine_plan(5, 100, 0.1, 5), InvalidArgument);  // warmup would cover everything
}

TEST(PeakLr, BothModes) {
    EXPECT_DOUBLE_EQ(peak_lr_for_batch(1024, PeakLrMode::verbatim), 0.1 / 1024);
    EXPECT_DOUBLE_EQ(peak_lr_for_batch(1024, PeakLrMode::linear_scaling), 0.4);
    EXPECT_DOUBLE_EQ(peak_lr_for_batch(256, PeakLrMode::linear_scaling), 0.1);
    EXPECT_THROW(peak_lr_for_batch(0, PeakLrMode::verbatim), InvalidArgument);
    EXPECT_EQ(parse_peak_lr_mode("linear-scaling"), PeakLrMode::linear_scaling);
    EXPECT_EQ(parse_peak_lr_mode(to_string(PeakLrMode::verbatim)), PeakLrMode::verbatim);
    EXPECT_FALSE(parse_peak_lr_mode("linear").has_value());
}

TEST(Ema, Examples) {
    EXPECT_DOUBLE_EQ(ema_update(3.5, 3.5, 0.9999), 3.5);
    EXPECT_NEAR(ema_update(0.0, 1.0, 0.9999), 0.0001, 1e-16);
    EXPECT_DOUBLE_EQ(ema_update(7.0, -2.0, 0.0), -2.0);
    EXPECT_THROW(ema_update(0, 0, 1.5), InvalidArgument);
}

TEST(EmaProperty, Contraction) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> val(-100.0, 100.0), dec(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double s = val(rng), c = val(rng), d = dec(rng);
        const double next = ema_update(s, c, d);
        EXPECT_NEAR(std::abs(next - c), d * std::abs(s - c), 1e-12 * (1.0 + std::abs(s) + std::abs(c)));
    }
}

TEST(LabelSmooth, Examples) {
    const auto d = label_smooth(3, 1000, 0.1);
    EXPECT_NEAR(d[3], 0.9001, 1e-12);
    EXPECT_NEAR(d[0], 0.0001, 1e-15);
    const auto hot = label_smooth(1, 4, 0.0);
    EXPECT_EQ(hot, (std::vector<double>{0, 1, 0, 0}));
    EXPECT_THROW(label_smooth(4, 4, 0.1), InvalidArgument);
    EXPECT_THROW(label_smooth(0, 4, 1.0), InvalidArgument);
}

TEST(LabelSmoothProperty, ValidDistribution) {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 100; ++i) {
        const std::size_t k = 1 + rng() % 5000;
        const double eps = std::uniform_real_distribution<double>(0.0, 0.999)(rng);
        const auto d = label_smooth(rng() % k, k, eps);
        EXPECT_NEAR(std::accumulate(d.begin(), d.end(), 0.0), 1.0, 1e-12);
        for (double p : d) ASSERT_GE(p, 0.0);
    }
}

TEST(StochasticDepth, LinearRule) {
    for (int i = 1; i <= 10; ++i) EXPECT_DOUBLE_EQ(stochastic_depth_survival(i, 10, 0.0), 1.0);
    EXPECT_NEAR(stochastic_depth_survival(33, 33, 0.1), 0.9, 1e-15);
    EXPECT_NEAR(stochastic_depth_survival(8, 16, 0.1), 0.95, 1e-15);
    double prev = 1.0;
    for (int i = 1; i <= 50; ++i) {
        const double s = stochastic_depth_survival(i, 50, 0.3);
        EXPECT_LE(s, prev);
        prev = s;
    }
    EXPECT_NEAR(prev, 0.7, 1e-15);
    EXPECT_THROW(stochastic_depth_survival(0, 5, 0.1), InvalidArgument);
    EXPECT_THROW(stochastic_depth_survival(6, 5, 0.1), InvalidArgument);
}

TEST(RegPolicy, EveryPublishedRow) {
    struct Row {
        int depth, res, magnitude;
        double sd, dropout;
    };
    // Transcribed independently of the library table.
    const Row rows[] = {{50, 160, 10, 0.0, 0.25},  {101, 160, 10, 0.0, 0.25}, {101, 192, 15, 0.0, 0.25},
                        {152, 192, 15, 0.0, 0.25}, {152, 224, 15, 0.0, 0.25}, {152, 256, 15, 0.0, 0.25},
                        {200, 256, 15, 0.1, 0.25}, {270, 256, 15, 0.1, 0.25}, {350, 256, 15, 0.1, 0.25},
                        {350, 320, 15, 0.1, 0.4},  {420, 320, 15, 0.1, 0.4}};
    EXPECT_EQ(reg_policy_rows().size(), std::size(rows));
    for (const auto& r : rows) {
        const auto c = reg_policy(r.depth, r.res);
        EXPECT_EQ(c.randaugment_layers, 2);
        EXPECT_EQ(c.randaugment_magnitude, r.magnitude);
        EXPECT_DOUBLE_EQ(c.stochastic_depth_rate, r.sd);
        EXPECT_DOUBLE_EQ(c.dropout_rate, r.dropout);
        EXPECT_DOUBLE_EQ(c.label_smoothing, 0.1);
        EXPECT_DOUBLE_EQ(c.weight_decay, 4e-5);
        EXPECT_DOUBLE_EQ(c.ema_decay, 0.9999);
        EXPECT_EQ(c.epochs, 350);
        EXPECT_NO_THROW(c.validate());
    }
    try {
        reg_policy(50, 224);
        FAIL();
    } catch (const InvalidArgument& e) {
        EXPECT_NE(std::string(e.what()).find("(420, 320)"), std::string::npos);
    }
}

TEST(GridRegPolicy, Examples) {
    const auto a = grid_reg_policy({101, 1.0, 128}, 350);
    EXPECT_EQ(a.randaugment_magnitude, 10);
    EXPECT_EQ(a.stochastic_depth_rate, 0.0);
    EXPECT_EQ(a.dropout_rate, 0.25);
    const auto b = grid_reg_policy({200, 2.0, 448}, 350);
    EXPECT_EQ(b.randaugment_magnitude, 20);
    EXPECT_EQ(b.stochastic_depth_rate, 0.2);
    EXPECT_EQ(b.dropout_rate, 0.75);
    const auto c = grid_reg_policy({50, 1.5, 224}, 10);
    EXPECT_EQ(c.randaugment_layers, 0);
    EXPECT_EQ(c.randaugment_magnitude, 0);
    EXPECT_EQ(c.dropout_rate, 0.0);
    EXPECT_EQ(c.stochastic_depth_rate, 0.0);
    EXPECT_EQ(c.label_smoothing, 0.0);
    EXPECT_EQ(c.weight_decay, 4e-5);
}

TEST(GridRegPolicy, MagnitudeIntervalsAndDropoutMap) {
    const std::pair<double, double> dropout[] = {{0.25, 0.0}, {0.5, 0.1}, {1.0, 0.25}, {1.5, 0.6}, {2.0, 0.75}};
    for (const auto& [w, d] : dropout) EXPECT_DOUBLE_EQ(grid_dropout(w), d);
    EXPECT_THROW(grid_dropout(0.75), InvalidArgument);

    for (const auto& [w, d] : dropout) {
        for (int res : {128, 160, 224, 320, 448}) {
            const auto r = grid_reg_policy({101, w, res}, 350);
            int expect = 20;
            if (w == 0.25 || w == 0.5 || (res >= 64 && res <= 160)) expect = 10;
            else if (res >= 224 && res <= 320) expect = 15;
            EXPECT_EQ(r.randaugment_magnitude, expect) << w << " " << res;
            EXPECT_DOUBLE_EQ(r.stochastic_depth_rate, (res >= 224 && w > 0.25) ? 0.2 : 0.0);
            EXPECT_DOUBLE_EQ(r.dropout_rate, d);
            EXPECT_NO_THROW(r.validate());
            for (int e : {10, 100}) EXPECT_NO_THROW(grid_reg_policy({101, w, res}, e).validate());
        }
    }
    EXPECT_THROW(grid_reg_policy({101, 1.0, 224}, 90), InvalidArgument);
}

TEST(WeightDecay, RegularizerAblationWinners) {
    using R = Regularizer;
    // Each row: active regularizers, accuracy at 1e-4, accuracy at 4e-5.
    struct Row {
        std::set<Regularizer> active;
        double at_1e4, at_4e5;
    };
    const Row rows[] = {{{}, 79.7, 78.7},
                        {{R::RA, R::LS}, 82.4, 82.3},
                        {{R::RA, R::LS, R::DO}, 82.2, 82.7},
                        {{}, 82.5, 81.7},
                        {{R::RA, R::LS}, 85.2, 84.9},
                        {{R::RA, R::LS, R::SD, R::DO}, 85.3, 85.5}};
    for (const auto& r : rows) {
        const double winner = r.at_1e4 > r.at_4e5 ? 1e-4 : 4e-5;
        EXPECT_DOUBLE_EQ(recommend_weight_decay(r.active), winner);
    }
    EXPECT_EQ(parse_regularizer("SD"), Regularizer::SD);
    EXPECT_FALSE(parse_regularizer("XX").has_value());
}

TEST(EnetRsMagnitude, ThreeBands) {
    EXPECT_EQ(enet_rs_magnitude(224), 10);
    EXPECT_EQ(enet_rs_magnitude(128), 10);
    EXPECT_EQ(enet_rs_magnitude(225), 15);
    EXPECT_EQ(enet_rs_magnitude(300), 15);
    EXPECT_EQ(enet_rs_magnitude(320), 15);
    EXPECT_EQ(enet_rs_magnitude(321), 20);
    EXPECT_EQ(enet_rs_magnitude(456), 20);
    EXPECT_THROW(enet_rs_magnitude(0), InvalidArgument);
}

TEST(Presets, PresetColumns) {
    const auto presets = recipe_presets();
    const auto& old = presets.at("resnet-2015");
    EXPECT_EQ(old.epochs, 90);
    EXPECT_EQ(old.lr_decay, "stepwise");
    EXPECT_EQ(old.optimizer, "momentum");
    EXPECT_FALSE(old.ema || old.label_smoothing || old.stochastic_depth || old.randaugment || old.dropout_fc ||
                 old.smaller_weight_decay || old.squeeze_excitation || old.resnet_d);

    const auto& rs = presets.at("resnet-rs");
    EXPECT_EQ(rs.epochs, 350);
    EXPECT_EQ(rs.lr_decay, "cosine");
    EXPECT_EQ(rs.optimizer, "momentum");
    EXPECT_TRUE(rs.ema && rs.label_smoothing && rs.stochastic_depth && rs.randaugment && rs.dropout_fc &&
                rs.smaller_weight_decay && rs.squeeze_excitation && rs.resnet_d);
    ASSERT_TRUE(rs.reg.has_value());
    EXPECT_EQ(*rs.reg, reg_policy(200, 256));

    const auto& en = presets.at("efficientnet");
    EXPECT_EQ(en.epochs, 350);
    EXPECT_EQ(en.lr_decay, "exponential");
    EXPECT_EQ(en.optimizer, "rmsprop");
    EXPECT_FALSE(en.reg.has_value());
}

TEST(Presets, AdditiveLadder) {
    const auto ladder = recipe_ladder();
    ASSERT_EQ(ladder.size(), 11u);  // baseline + 10 increments
    const double top1[] = {79.0, 79.3, 78.8, 79.1, 80.4, 80.6, 81.0, 80.7, 82.2, 82.9, 83.4};
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        EXPECT_DOUBLE_EQ(ladder[i].reported_top1.value(), top1[i]);
        ASSERT_TRUE(ladder[i].reg.has_value());
        EXPECT_NO_THROW(ladder[i].reg->validate());
    }
    EXPECT_EQ(ladder.front().lr_decay, "stepwise");
    EXPECT_EQ(ladder.back().name, "ladder/10-resnet-d");
    EXPECT_TRUE(ladder.back().resnet_d);
    EXPECT_DOUBLE_EQ(ladder[7].reg->weight_decay, 1e-4);  // dropout added before decay is lowered
    EXPECT_DOUBLE_EQ(ladder[8].reg->weight_decay, 4e-5);
    const auto presets = recipe_presets();
    for (const auto& p : ladder) EXPECT_TRUE(presets.contains(p.name));
}

TEST(ScheduleRows, EndpointsAndStride) {
    const auto plan = make_cosine_plan(350, 1251, 0.1 / 1024);
    const auto reg = reg_policy(350, 256);
    const auto rows = schedule_rows(plan, reg, 1000);
    EXPECT_EQ(rows.front().step, 0);
    EXPECT_EQ(rows.front().lr, 0.0);
    EXPECT_EQ(rows.back().step, plan.total_steps);
    EXPECT_NEAR(rows.back().lr, 0.0, 1e-20);
    EXPECT_EQ(rows[1].step, 1000);
    EXPECT_EQ(rows.size(), static_cast<std::size_t>(plan.total_steps / 1000 + 2));
    for (const auto& r : rows) {
        EXPECT_DOUBLE_EQ(r.ema_decay, 0.9999);
        EXPECT_DOUBLE_EQ(r.sd_final_rate, 0.1);
    }
    EXPECT_THROW(schedule_rows(plan, reg, 0), InvalidArgument);
}
