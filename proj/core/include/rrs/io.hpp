#pragma once

/// @file io.hpp
/// @brief Serialization: model-spec JSON documents, measurement CSVs, embedded
/// reference tables and JSON renderings of graphs, cost reports and frontiers.
///
/// Model spec document (schema "1"):
///   {"schema": "1", "depth": 50, "width_mult": 1.0, "resolution": 160,
///    "resnet_d": true, "se_ratio": 0.25, "layout_override": [3, 4, 6, 3]}
/// layout_override is optional; every other field is required and unknown fields
/// are rejected.
///
/// Measurement CSV header (an optional trailing tpu_mem_gb column is accepted):
///   model_id,resolution,params_m,flops_b,v100_s,tpu_ms,top1
/// Lines starting with '#' are comments. Empty optional cells mean "not measured".

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rrs/arch_graph.hpp"
#include "rrs/cost_model.hpp"
#include "rrs/scaling.hpp"
#include "rrs/schedules.hpp"

namespace rrs {

inline constexpr std::string_view kSpecSchemaVersion = "1";
inline constexpr std::string_view kMeasurementHeader = "model_id,resolution,params_m,flops_b,v100_s,tpu_ms,top1";
inline constexpr std::string_view kMemoryColumn = "tpu_mem_gb";
inline constexpr std::string_view kScheduleHeader = "step,lr,ema_decay,sd_final_rate";

/// Throws SpecError carrying the JSON pointer of the offending field.
ModelSpec parse_spec(std::string_view text);
std::string emit_spec(const ModelSpec& spec, int indent = 2);

struct MeasurementRow {
    std::string model_id;
    int resolution = 0;
    double params_m = 0.0;
    double flops_b = 0.0;
    std::optional<double> v100_s;
    std::optional<double> tpu_ms;
    double top1 = 0.0;
    /// Training memory per accelerator; only present in the memory comparison table.
    std::optional<double> tpu_mem_gb;

    /// "<model_id>@<resolution>", unique within the published tables.
    std::string label() const;
    bool operator==(const MeasurementRow&) const = default;
};

/// Throws ParseError with the 1-based line number and column name.
std::vector<MeasurementRow> parse_measurements(std::string_view csv_text);
std::vector<MeasurementRow> load_measurements(const std::filesystem::path& path);

/// Raw CSV text of an embedded reference table: "table7" (speed-accuracy details of
/// the ResNet-RS Pareto curve) or "table4" (latency and memory comparison).
std::string_view embedded_table(std::string_view name);
std::vector<MeasurementRow> reference_table(std::string_view name);

/// 64-bit FNV-1a, used to pin embedded resources.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

enum class CostMetric { tpu_ms, v100_s, flops_b };

std::string_view to_string(CostMetric m) noexcept;
std::optional<CostMetric> parse_cost_metric(std::string_view s) noexcept;

/// Rows lacking the metric are skipped. model_id of each point is the row label.
std::vector<ParetoPoint> to_pareto_points(std::span<const MeasurementRow> rows, CostMetric metric);

/// Pairs each reference-family row with the cheapest other row whose accuracy is at
/// least reference top-1 minus tolerance.
struct SpeedupMatch {
    std::string reference;
    std::string match;
    double reference_cost = 0.0;
    double match_cost = 0.0;
    double reference_top1 = 0.0;
    double match_top1 = 0.0;
    double speedup = 0.0;
};

std::vector<SpeedupMatch> match_speedups(std::span<const MeasurementRow> rows, CostMetric metric,
                                         std::string_view reference_prefix = "EfficientNet",
                                         double top1_tolerance = 0.1);

/// JSON renderings (compact when indent < 0).
std::string graph_to_json(const ModelGraph& graph, int indent = -1);
std::string cost_report_to_json(const CostReport& report, int indent = -1);
std::string reg_config_to_json(const RegConfig& reg, int indent = -1);

std::string schedule_csv(std::span<const ScheduleRow> rows);

}  // namespace rrs
