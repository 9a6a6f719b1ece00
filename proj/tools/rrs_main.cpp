/// @file rrs_main.cpp
/// @brief Command-line front end for the ResNet-RS toolkit.
///
/// Commands:
///   build         emit the layer graph (or just the spec document) of a model
///   cost          parameter / FLOP / activation / intensity report
///   grid          enumerate the scaling sweep with costs and regularization
///   pareto        frontier, speedup matches and power-law fit over measurements
///   schedule      learning-rate / EMA / stochastic-depth schedule of a recipe
///   strategy      depth-vs-width scaling recommendation and ladder walk
///   augment-demo  apply a sampled RandAugment policy to a PPM raster
///
/// Machine-readable output goes to stdout (JSON, or CSV where noted). --pretty
/// switches to aligned text. Failures print a JSON error object on stderr and exit
/// with 1 (runtime) or 2 (usage).

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rrs/arch_graph.hpp"
#include "rrs/augment.hpp"
#include "rrs/cost_model.hpp"
#include "rrs/error.hpp"
#include "rrs/io.hpp"
#include "rrs/scaling.hpp"
#include "rrs/schedules.hpp"

namespace {

using nlohmann::json;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

/// Thrown for flag combinations CLI11 cannot express declaratively.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void print_error(std::string_view kind, const std::string& message, json extra = json::object()) {
    json err = {{"kind", kind}, {"message", message}};
    err.update(extra);
    std::cerr << json{{"error", err}}.dump() << '\n';
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw rrs::Error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw rrs::Error("cannot write " + path);
    out << contents;
    if (!out) throw rrs::Error("write failed: " + path);
}

std::string fixed(double v, int digits) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

// ---------------------------------------------------------------------------
// model spec flags shared by build and cost

struct SpecFlags {
    std::string spec_path;
    int depth = 50;
    double width = 1.0;
    int resolution = 224;
    double se = 0.0;
    bool resnet_d = false;
    std::vector<int> layout;

    void attach(CLI::App& cmd) {
        auto* file = cmd.add_option("--spec", spec_path, "Model spec JSON document")->check(CLI::ExistingFile);
        std::vector<CLI::Option*> inline_flags{
            cmd.add_option("--depth", depth, "Nominal depth")->capture_default_str(),
            cmd.add_option("--width", width, "Width multiplier")->capture_default_str(),
            cmd.add_option("--res", resolution, "Input resolution")->capture_default_str(),
            cmd.add_option("--se", se, "Squeeze-and-excitation ratio (0 disables)")->capture_default_str(),
            cmd.add_flag("--resnet-d", resnet_d, "Apply the ResNet-D adjustments"),
            cmd.add_option("--layout", layout, "Blocks per stage c2..c5, e.g. 3,4,6,3")
                ->delimiter(',')
                ->expected(4)};
        for (auto* opt : inline_flags) file->excludes(opt);
    }

    rrs::ModelSpec resolve() const {
        if (!spec_path.empty()) return rrs::parse_spec(read_file(spec_path));
        rrs::ModelSpec spec;
        spec.depth = depth;
        spec.width_mult = width;
        spec.resolution = resolution;
        spec.se_ratio = se;
        spec.resnet_d = resnet_d;
        if (!layout.empty()) {
            rrs::StageLayout l;
            std::copy(layout.begin(), layout.end(), l.blocks.begin());
            spec.layout_override = l;
        }
        spec.validate();
        return spec;
    }
};

std::string describe(const rrs::ModelSpec& s) {
    std::ostringstream os;
    os << "depth " << s.depth << ", width " << fixed(s.width_mult, 2) << ", res " << s.resolution
       << (s.resnet_d ? ", ResNet-D" : "") << (s.se_ratio > 0 ? ", SE " + fixed(s.se_ratio, 2) : "");
    return os.str();
}

// ---------------------------------------------------------------------------
// build

struct BuildArgs {
    SpecFlags spec;
    bool emit_spec_only = false;
};

void run_build(const BuildArgs& a, bool pretty) {
    const auto spec = a.spec.resolve();
    if (a.emit_spec_only) {
        std::cout << rrs::emit_spec(spec) << '\n';
        return;
    }
    const auto graph = rrs::build_model(spec);
    if (!pretty) {
        std::cout << rrs::graph_to_json(graph, 2) << '\n';
        return;
    }
    const auto trace = rrs::shape_trace(graph, spec.resolution);
    const auto layout = spec.layout();
    std::cout << "model   " << describe(spec) << '\n'
              << "layout  [" << layout.blocks[0] << ", " << layout.blocks[1] << ", " << layout.blocks[2] << ", "
              << layout.blocks[3] << "]  (" << layout.total_blocks() << " residual blocks)\n"
              << "nodes   " << graph.nodes.size() << '\n'
              << "\nstage  output\n";
    auto row = [](std::string_view name, const rrs::FeatureShape& s) {
        std::cout << std::left << std::setw(7) << name << s.h << "x" << s.w << "x" << s.c << '\n';
    };
    row("stem", trace.stem);
    for (int i = 0; i < 4; ++i) row("c" + std::to_string(i + 2), trace.stages[static_cast<std::size_t>(i)]);
}

// ---------------------------------------------------------------------------
// cost

struct CostArgs {
    SpecFlags spec;
    int batch = 1;
    int bytes = 2;
};

void run_cost(const CostArgs& a, bool pretty) {
    const auto report = rrs::cost_report(a.spec.resolve(), a.batch, a.bytes);
    if (!pretty) {
        std::cout << rrs::cost_report_to_json(report, 2) << '\n';
        return;
    }
    std::cout << "model        " << describe(report.spec) << '\n'
              << "params       " << fixed(static_cast<double>(report.params) / 1e6, 2) << " M\n"
              << "flops        " << fixed(static_cast<double>(report.flops) / 1e9, 2) << " B per image\n"
              << "activations  " << fixed(static_cast<double>(report.activation_bytes_total) / 1e9, 3)
              << " GB total, " << fixed(static_cast<double>(report.activation_bytes_peak) / 1e6, 1)
              << " MB peak (batch " << report.batch << ", " << report.bytes_per_element << " B/elem)\n"
              << "intensity    " << fixed(report.operational_intensity, 2) << " FLOP/byte\n";
}

// ---------------------------------------------------------------------------
// grid

struct GridArgs {
    std::vector<double> widths;
    std::vector<int> depths;
    std::vector<int> resolutions;
    std::optional<int> epochs;
    bool no_cost = false;
};

void run_grid(const GridArgs& a, bool pretty) {
    auto axes = rrs::GridAxes::published();
    if (!a.widths.empty()) axes.widths = a.widths;
    if (!a.depths.empty()) axes.depths = a.depths;
    if (!a.resolutions.empty()) axes.resolutions = a.resolutions;
    const auto grid = rrs::enumerate_grid(axes);

    std::ostringstream out;
    const char sep = pretty ? ' ' : ',';
    auto cell = [&](const std::string& s, int w) {
        if (pretty) out << std::left << std::setw(w) << s;
        else out << s << sep;
    };
    std::vector<std::pair<std::string, int>> header{{"depth", 7}, {"width_mult", 12}, {"resolution", 12}};
    if (!a.no_cost) header.insert(header.end(), {{"params", 12}, {"flops", 15}});
    if (a.epochs) {
        header.insert(header.end(), {{"ra_magnitude", 14},
                                     {"stochastic_depth", 18},
                                     {"dropout", 9},
                                     {"label_smoothing", 17},
                                     {"weight_decay", 14}});
    }
    for (const auto& [name, w] : header) cell(name, w);
    std::string text;
    auto end_line = [&] {
        text = out.str();
        if (!pretty) text.pop_back();
        std::cout << text << '\n';
        out.str({});
    };
    end_line();
    for (const auto& cfg : grid) {
        cell(std::to_string(cfg.depth), 7);
        std::ostringstream wm;
        wm << cfg.width_mult;
        cell(wm.str(), 12);
        cell(std::to_string(cfg.resolution), 12);
        if (!a.no_cost) {
            const auto graph = rrs::build_model(rrs::ModelSpec::resnet_rs(cfg.depth, cfg.resolution, cfg.width_mult));
            cell(std::to_string(rrs::param_count(graph)), 12);
            cell(std::to_string(rrs::flop_count(graph, cfg.resolution)), 15);
        }
        if (a.epochs) {
            const auto reg = rrs::grid_reg_policy(cfg, *a.epochs);
            std::ostringstream sd, dr, ls, wd;
            sd << reg.stochastic_depth_rate;
            dr << reg.dropout_rate;
            ls << reg.label_smoothing;
            wd << reg.weight_decay;
            cell(std::to_string(reg.randaugment_magnitude), 14);
            cell(sd.str(), 18);
            cell(dr.str(), 9);
            cell(ls.str(), 17);
            cell(wd.str(), 14);
        }
        end_line();
    }
}

// ---------------------------------------------------------------------------
// pareto

struct ParetoArgs {
    std::string data;
    std::string table = "table7";
    std::string cost = "tpu_ms";
    std::string reference_prefix = "EfficientNet";
    double tolerance = 0.1;
    std::string fit_family = "ResNet-RS";
    double fit_max_flops = 40.0;
    std::string format = "json";
};

void run_pareto(const ParetoArgs& a, bool pretty) {
    const auto rows = a.data.empty() ? rrs::reference_table(a.table) : rrs::load_measurements(a.data);
    const auto metric = *rrs::parse_cost_metric(a.cost);
    const auto points = rrs::to_pareto_points(rows, metric);
    if (points.empty()) throw rrs::InvalidArgument("no row carries the cost metric '" + a.cost + "'");
    const auto frontier = rrs::pareto_frontier(points);
    const auto matches = rrs::match_speedups(rows, metric, a.reference_prefix, a.tolerance);

    std::vector<rrs::FlopsErrorSample> samples;
    for (const auto& r : rows) {
        if (r.model_id.starts_with(a.fit_family) && r.flops_b <= a.fit_max_flops) {
            samples.push_back({r.flops_b, rrs::top1_error(r.top1)});
        }
    }
    std::optional<rrs::PowerLawFit> fit;
    if (samples.size() >= 2) fit = rrs::powerlaw_fit(samples);

    if (a.format == "csv" && !pretty) {
        std::cout << "model_id," << a.cost << ",top1\n";
        for (const auto& p : frontier) std::cout << p.model_id << ',' << p.cost << ',' << p.quality << '\n';
        return;
    }
    if (pretty) {
        std::cout << "frontier (" << a.cost << ")\n";
        for (const auto& p : frontier) {
            std::cout << "  " << std::left << std::setw(24) << p.model_id << std::right << std::setw(10) << p.cost
                      << std::setw(8) << fixed(p.quality, 1) << '\n';
        }
        std::cout << "\nspeedups at matched accuracy (" << a.reference_prefix << " vs cheapest match)\n";
        for (const auto& m : matches) {
            std::cout << "  " << std::left << std::setw(24) << m.reference << std::setw(24) << m.match << std::right
                      << std::setw(7) << fixed(m.speedup, 2) << "x\n";
        }
        if (fit) {
            std::cout << "\npower-law fit over " << samples.size() << ' ' << a.fit_family
                      << " rows: error = " << fixed(fit->coefficient, 3) << " * GFLOPs^" << fixed(fit->exponent, 4)
                      << "  (r^2 " << fixed(fit->r_squared, 4) << ")\n";
        }
        return;
    }
    json out;
    out["kind"] = "pareto";
    out["cost_metric"] = a.cost;
    out["source"] = a.data.empty() ? "embedded:" + a.table : a.data;
    out["frontier"] = json::array();
    for (const auto& p : frontier) {
        out["frontier"].push_back({{"model_id", p.model_id}, {"cost", p.cost}, {"quality", p.quality}});
    }
    out["speedups"] = json::array();
    for (const auto& m : matches) {
        out["speedups"].push_back({{"reference", m.reference},
                                   {"match", m.match},
                                   {"reference_cost", m.reference_cost},
                                   {"match_cost", m.match_cost},
                                   {"reference_top1", m.reference_top1},
                                   {"match_top1", m.match_top1},
                                   {"speedup", m.speedup}});
    }
    if (fit) {
        out["powerlaw"] = {{"family", a.fit_family},
                           {"max_flops_b", a.fit_max_flops},
                           {"samples", samples.size()},
                           {"exponent", fit->exponent},
                           {"coefficient", fit->coefficient},
                           {"r_squared", fit->r_squared}};
    } else {
        out["powerlaw"] = nullptr;
    }
    std::cout << out.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// schedule

struct ScheduleArgs {
    std::string preset = "resnet-rs";
    int batch = 1024;
    std::optional<int> epochs;
    std::int64_t steps_per_epoch = 1251;
    int warmup_epochs = rrs::kDefaultWarmupEpochs;
    std::string lr_mode = "verbatim";
    bool lr_mode_given = false;
    std::optional<int> depth;
    std::optional<int> resolution;
    std::int64_t every = 1;
    std::string dump;
};

void run_schedule(const ScheduleArgs& a, bool pretty) {
    const auto presets = rrs::recipe_presets();
    const auto it = presets.find(a.preset);
    if (it == presets.end()) throw UsageError("unknown preset '" + a.preset + "'");
    const auto& preset = it->second;
    if (preset.lr_decay != "cosine" && preset.lr_decay != "stepwise") {
        throw rrs::InvalidArgument("preset '" + preset.name + "' uses " + preset.lr_decay +
                                   " decay, which has no schedule generator");
    }
    if (a.depth.has_value() != a.resolution.has_value()) throw UsageError("--depth and --res must be given together");

    rrs::RegConfig reg = preset.reg.value_or(rrs::RegConfig{});
    if (!preset.reg && preset.ema) reg.ema_decay = 0.9999;
    if (a.depth) reg = rrs::reg_policy(*a.depth, *a.resolution);

    const int epochs = a.epochs.value_or(preset.epochs);
    const auto mode = *rrs::parse_peak_lr_mode(a.lr_mode);
    const double peak = rrs::peak_lr_for_batch(a.batch, mode);
    if (!a.lr_mode_given) {
        std::cerr << "note: peak LR mode '" << rrs::to_string(mode) << "' gives " << peak << " at batch " << a.batch
                  << "; pass --lr-mode linear-scaling for 0.1*B/256\n";
    }
    const auto plan = preset.lr_decay == "cosine"
                          ? rrs::make_cosine_plan(epochs, a.steps_per_epoch, peak, a.warmup_epochs)
                          : rrs::make_stepwise_plan(epochs, a.steps_per_epoch, peak, a.warmup_epochs);
    const auto rows = rrs::schedule_rows(plan, reg, a.every);
    const auto csv = rrs::schedule_csv(rows);

    if (a.dump.empty() && !pretty) {
        std::cout << csv;
        return;
    }
    if (!a.dump.empty()) write_file(a.dump, csv);
    if (pretty) {
        std::cout << "preset        " << preset.name << " (" << preset.description << ")\n"
                  << "decay         " << preset.lr_decay << ", " << epochs << " epochs x " << a.steps_per_epoch
                  << " steps, warmup " << plan.warmup_steps << " steps\n"
                  << "peak lr       " << peak << " (" << rrs::to_string(mode) << ", batch " << a.batch << ")\n"
                  << "ema decay     " << reg.ema_decay << '\n'
                  << "sd final rate " << reg.stochastic_depth_rate << '\n'
                  << "rows          " << rows.size() << (a.dump.empty() ? "" : " -> " + a.dump) << '\n';
        return;
    }
    json out = {{"kind", "schedule"},
                {"preset", preset.name},
                {"decay", preset.lr_decay},
                {"epochs", epochs},
                {"steps_per_epoch", a.steps_per_epoch},
                {"total_steps", plan.total_steps},
                {"warmup_steps", plan.warmup_steps},
                {"batch", a.batch},
                {"lr_mode", std::string(rrs::to_string(mode))},
                {"peak_lr", peak},
                {"reg", json::parse(rrs::reg_config_to_json(reg))},
                {"rows", rows.size()},
                {"first_lr", rows.front().lr},
                {"last_lr", rows.back().lr},
                {"dump", a.dump}};
    std::cout << out.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// strategy

struct StrategyArgs {
    int epochs = 350;
    std::string overfit = "unknown";
    std::optional<long long> dataset_images;
    int base_depth = 50;
    double base_width = 1.0;
    int base_res = 160;
    int steps = 0;
};

void run_strategy(const StrategyArgs& a, bool pretty) {
    rrs::TrainingRegime regime;
    regime.epochs = a.epochs;
    regime.dataset_images = a.dataset_images;
    regime.overfitting_expected = *rrs::parse_tristate(a.overfit);
    const auto strategy = rrs::recommend_strategy(regime);
    std::vector<rrs::ScaleConfig> sequence;
    if (a.steps > 0) sequence = rrs::apply_strategy({a.base_depth, a.base_width, a.base_res}, strategy, a.steps);

    if (pretty) {
        std::cout << "strategy        " << rrs::to_string(strategy.kind) << (strategy.advisory ? " (advisory)" : "")
                  << '\n'
                  << "resolution cap  " << strategy.resolution_cap << '\n'
                  << "rationale       " << strategy.rationale << '\n';
        if (!sequence.empty()) {
            std::cout << "\nstep  depth  width  res\n";
            for (std::size_t i = 0; i < sequence.size(); ++i) {
                std::cout << std::left << std::setw(6) << i << std::setw(7) << sequence[i].depth << std::setw(7)
                          << fixed(sequence[i].width_mult, 2) << sequence[i].resolution << '\n';
            }
        }
        return;
    }
    json seq = json::array();
    for (const auto& c : sequence) {
        seq.push_back({{"depth", c.depth}, {"width_mult", c.width_mult}, {"resolution", c.resolution}});
    }
    json out = {{"kind", "strategy"},
                {"regime",
                 {{"epochs", a.epochs},
                  {"overfitting_expected", a.overfit},
                  {"dataset_images", a.dataset_images ? json(*a.dataset_images) : json(nullptr)}}},
                {"strategy",
                 {{"kind", std::string(rrs::to_string(strategy.kind))},
                  {"resolution_cap", strategy.resolution_cap},
                  {"advisory", strategy.advisory},
                  {"rationale", strategy.rationale}}},
                {"sequence", seq}};
    std::cout << out.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// augment-demo

struct AugmentArgs {
    std::string in;
    std::string out;
    int layers = 2;
    int magnitude = 10;
    std::uint64_t seed = 0;
    int size = 64;
    std::vector<std::string> ops;
};

void run_augment(const AugmentArgs& a, bool pretty) {
    const rrs::Raster input = a.in.empty() ? rrs::test_pattern(a.size, a.size) : rrs::read_ppm(a.in);
    rrs::AugmentPolicy policy;
    policy.num_layers = a.layers;
    policy.magnitude = a.magnitude;
    policy.seed = a.seed;
    if (!a.ops.empty()) policy.op_set = a.ops;
    const auto ops = rrs::sample_policy_instance(policy);
    const auto output = rrs::apply(input, ops);
    if (!a.out.empty()) rrs::write_ppm(a.out, output);
    const auto checksum = rrs::fnv1a64(rrs::encode_ppm(output));

    std::ostringstream hex;
    hex << std::hex << std::setw(16) << std::setfill('0') << checksum;
    if (pretty) {
        std::cout << "raster    " << output.width << "x" << output.height << '\n'
                  << "policy    N=" << policy.num_layers << " M=" << policy.magnitude << " seed=" << policy.seed
                  << '\n';
        for (const auto& op : ops) std::cout << "  " << std::left << std::setw(14) << op.name << op.param << '\n';
        std::cout << "checksum  " << hex.str() << '\n';
        return;
    }
    json jops = json::array();
    for (const auto& op : ops) jops.push_back({{"name", op.name}, {"param", op.param}});
    json out = {{"kind", "augment"},
                {"width", output.width},
                {"height", output.height},
                {"num_layers", policy.num_layers},
                {"magnitude", policy.magnitude},
                {"seed", policy.seed},
                {"ops", jops},
                {"output_fnv1a64", hex.str()},
                {"out", a.out}};
    std::cout << out.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ResNet-RS architecture, cost, scaling and recipe toolkit", "rrs"};
    app.require_subcommand(1);
    app.fallthrough();
    bool pretty = false;
    app.add_flag("--pretty", pretty, "Human-readable tables instead of JSON/CSV");
    app.set_version_flag("--version", "rrs 0.1.0");

    BuildArgs build;
    auto* build_cmd = app.add_subcommand("build", "Emit the layer graph of a model as JSON");
    build.spec.attach(*build_cmd);
    build_cmd->add_flag("--emit-spec", build.emit_spec_only, "Print the model spec document only");

    CostArgs cost;
    auto* cost_cmd = app.add_subcommand("cost", "Parameter, FLOP, activation and intensity report");
    cost.spec.attach(*cost_cmd);
    cost_cmd->add_option("--batch", cost.batch, "Batch size for activation memory")->capture_default_str();
    cost_cmd->add_option("--bytes", cost.bytes, "Bytes per activation element")
        ->check(CLI::IsMember({2, 4}))
        ->capture_default_str();

    GridArgs grid;
    auto* grid_cmd = app.add_subcommand("grid", "Enumerate the scaling sweep as CSV");
    grid_cmd->add_option("--widths", grid.widths, "Width multipliers")->delimiter(',');
    grid_cmd->add_option("--depths", grid.depths, "Depths")->delimiter(',');
    grid_cmd->add_option("--resolutions", grid.resolutions, "Resolutions")->delimiter(',');
    grid_cmd->add_option("--epochs", grid.epochs, "Add regularization columns for 10, 100 or 350 epochs")
        ->check(CLI::IsMember({10, 100, 350}));
    grid_cmd->add_flag("--no-cost", grid.no_cost, "Skip the params/flops columns");

    ParetoArgs pareto;
    auto* pareto_cmd = app.add_subcommand("pareto", "Speed-accuracy frontier and speedup analysis");
    auto* data_opt = pareto_cmd->add_option("--data", pareto.data, "Measurements CSV")->check(CLI::ExistingFile);
    pareto_cmd->add_option("--table", pareto.table, "Embedded table when --data is absent")
        ->check(CLI::IsMember({"table7", "table4"}))
        ->excludes(data_opt)
        ->capture_default_str();
    pareto_cmd->add_option("--cost", pareto.cost, "Cost metric")
        ->check(CLI::IsMember({"tpu_ms", "v100_s", "flops_b"}))
        ->capture_default_str();
    pareto_cmd->add_option("--reference", pareto.reference_prefix, "Model-id prefix of the reference family")
        ->capture_default_str();
    pareto_cmd->add_option("--tolerance", pareto.tolerance, "Top-1 slack when matching accuracy")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    pareto_cmd->add_option("--fit-family", pareto.fit_family, "Model-id prefix used for the power-law fit")
        ->capture_default_str();
    pareto_cmd->add_option("--fit-max-flops", pareto.fit_max_flops, "Largest GFLOPs included in the fit")
        ->capture_default_str();
    pareto_cmd->add_option("--format", pareto.format, "json or csv (frontier only)")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();

    ScheduleArgs sched;
    auto* sched_cmd = app.add_subcommand("schedule", "Dump a recipe's LR/EMA/stochastic-depth schedule");
    sched_cmd->add_option("--preset", sched.preset, "Recipe preset name")->capture_default_str();
    sched_cmd->add_option("--batch", sched.batch, "Global batch size")->check(CLI::PositiveNumber)->capture_default_str();
    sched_cmd->add_option("--epochs", sched.epochs, "Training epochs (defaults to the preset's)")
        ->check(CLI::PositiveNumber);
    sched_cmd->add_option("--steps-per-epoch", sched.steps_per_epoch, "Optimizer steps per epoch")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sched_cmd->add_option("--warmup-epochs", sched.warmup_epochs, "Linear warmup length in epochs")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    auto* lr_mode_opt = sched_cmd->add_option("--lr-mode", sched.lr_mode, "Peak LR rule: verbatim or linear-scaling")
                            ->check(CLI::IsMember({"verbatim", "linear-scaling"}))
                            ->capture_default_str();
    sched_cmd->add_option("--depth", sched.depth, "Take regularization from this published model");
    sched_cmd->add_option("--res", sched.resolution, "Resolution of that model");
    sched_cmd->add_option("--every", sched.every, "Emit every Nth step (the last step is always kept)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sched_cmd->add_option("--dump", sched.dump, "Write the CSV here and print a JSON summary");

    StrategyArgs strat;
    auto* strat_cmd = app.add_subcommand("strategy", "Recommend a scaling strategy for a training regime");
    strat_cmd->add_option("--epochs", strat.epochs, "Training epochs")->check(CLI::PositiveNumber)->capture_default_str();
    strat_cmd->add_option("--overfit", strat.overfit, "Is overfitting expected: yes, no or unknown")
        ->check(CLI::IsMember({"yes", "no", "unknown"}))
        ->capture_default_str();
    strat_cmd->add_option("--dataset-images", strat.dataset_images, "Training set size");
    strat_cmd->add_option("--base-depth", strat.base_depth, "Starting depth")->capture_default_str();
    strat_cmd->add_option("--base-width", strat.base_width, "Starting width multiplier")->capture_default_str();
    strat_cmd->add_option("--base-res", strat.base_res, "Starting resolution")->capture_default_str();
    strat_cmd->add_option("--steps", strat.steps, "Ladder steps to walk")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();

    AugmentArgs aug;
    auto* aug_cmd = app.add_subcommand("augment-demo", "Apply a sampled RandAugment policy to a PPM image");
    auto* in_opt = aug_cmd->add_option("--in", aug.in, "Input P6 PPM (default: built-in test pattern)")
                       ->check(CLI::ExistingFile);
    aug_cmd->add_option("--out", aug.out, "Output P6 PPM");
    aug_cmd->add_option("--layers", aug.layers, "Number of ops N")->capture_default_str();
    aug_cmd->add_option("--magnitude", aug.magnitude, "Magnitude M in [0, 30]")->capture_default_str();
    aug_cmd->add_option("--seed", aug.seed, "Sampling seed")->capture_default_str();
    aug_cmd->add_option("--size", aug.size, "Test pattern side length")
        ->check(CLI::Range(1, 4096))
        ->excludes(in_opt)
        ->capture_default_str();
    aug_cmd->add_option("--ops", aug.ops, "Restrict the op set")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("usage", e.what());
        return kExitUsage;
    }
    sched.lr_mode_given = lr_mode_opt->count() > 0;

    try {
        if (*build_cmd) run_build(build, pretty);
        else if (*cost_cmd) run_cost(cost, pretty);
        else if (*grid_cmd) run_grid(grid, pretty);
        else if (*pareto_cmd) run_pareto(pareto, pretty);
        else if (*sched_cmd) run_schedule(sched, pretty);
        else if (*strat_cmd) run_strategy(strat, pretty);
        else if (*aug_cmd) run_augment(aug, pretty);
    } catch (const UsageError& e) {
        print_error("usage", e.what());
        return kExitUsage;
    } catch (const rrs::SpecError& e) {
        print_error("spec", e.what(), {{"field", e.field_path()}});
        return kExitRuntime;
    } catch (const rrs::ParseError& e) {
        json where = {{"row", e.row()}};
        if (!e.column().empty()) where["column"] = e.column();
        print_error("parse", e.what(), where);
        return kExitRuntime;
    } catch (const rrs::UnknownLayoutError& e) {
        print_error("unknown_layout", e.what());
        return kExitRuntime;
    } catch (const rrs::ShapeError& e) {
        print_error("shape", e.what());
        return kExitRuntime;
    } catch (const rrs::InvalidArgument& e) {
        print_error("invalid_argument", e.what());
        return kExitRuntime;
    } catch (const std::exception& e) {
        print_error("runtime", e.what());
        return kExitRuntime;
    }
    return 0;
}
