#include "rrs/io.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "embedded_tables.hpp"
#include "json.hpp"
#include "rrs/error.hpp"

namespace rrs {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// spec documents

const json& require(const json& doc, const char* key) {
    auto it = doc.find(key);
    if (it == doc.end()) throw SpecError(std::string("/") + key, "required field is missing");
    return *it;
}

int require_int(const json& doc, const char* key) {
    const json& v = require(doc, key);
    if (!v.is_number_integer()) throw SpecError(std::string("/") + key, "expected an integer");
    const auto value = v.get<long long>();
    if (value < std::numeric_limits<int>::min() || value > std::numeric_limits<int>::max()) {
        throw SpecError(std::string("/") + key, "integer out of range");
    }
    return static_cast<int>(value);
}

double require_number(const json& doc, const char* key) {
    const json& v = require(doc, key);
    if (!v.is_number()) throw SpecError(std::string("/") + key, "expected a number");
    return v.get<double>();
}

bool require_bool(const json& doc, const char* key) {
    const json& v = require(doc, key);
    if (!v.is_boolean()) throw SpecError(std::string("/") + key, "expected a boolean");
    return v.get<bool>();
}

json spec_json(const ModelSpec& spec) {
    json j;
    j["schema"] = std::string(kSpecSchemaVersion);
    j["depth"] = spec.depth;
    j["width_mult"] = spec.width_mult;
    j["resolution"] = spec.resolution;
    j["resnet_d"] = spec.resnet_d;
    j["se_ratio"] = spec.se_ratio;
    if (spec.layout_override) j["layout_override"] = spec.layout_override->blocks;
    return j;
}

std::string dump(const json& j, int indent) { return j.dump(indent); }

// ---------------------------------------------------------------------------
// CSV

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

double parse_number(std::string_view cell, std::size_t row, std::string_view column) {
    double value = 0.0;
    const auto* end = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
    if (cell.empty() || ec != std::errc{} || ptr != end || !std::isfinite(value)) {
        throw ParseError(row, std::string(column), "malformed number '" + std::string(cell) + "'");
    }
    return value;
}

double positive(double v, std::size_t row, std::string_view column) {
    if (!(v > 0.0)) throw ParseError(row, std::string(column), "value must be positive");
    return v;
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc{} ? std::string(buf, ptr) : std::to_string(v);
}

json shape_json(const FeatureShape& s) { return {{"h", s.h}, {"w", s.w}, {"c", s.c}}; }

}  // namespace

ModelSpec parse_spec(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SpecError("", std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw SpecError("", "model spec must be a JSON object");

    static constexpr std::array<std::string_view, 7> kKnown{"schema",   "depth",    "width_mult",     "resolution",
                                                            "resnet_d", "se_ratio", "layout_override"};
    for (const auto& [key, _] : doc.items()) {
        if (std::find(kKnown.begin(), kKnown.end(), key) == kKnown.end()) throw SpecError("/" + key, "unknown field");
    }
    const json& version = require(doc, "schema");
    if (!version.is_string()) throw SpecError("/schema", "expected a string");
    if (version.get<std::string>() != kSpecSchemaVersion) {
        throw SpecError("/schema", "unsupported schema version '" + version.get<std::string>() + "'");
    }

    ModelSpec spec;
    spec.depth = require_int(doc, "depth");
    spec.width_mult = require_number(doc, "width_mult");
    spec.resolution = require_int(doc, "resolution");
    spec.resnet_d = require_bool(doc, "resnet_d");
    spec.se_ratio = require_number(doc, "se_ratio");
    if (auto it = doc.find("layout_override"); it != doc.end()) {
        if (!it->is_array() || it->size() != 4) throw SpecError("/layout_override", "expected an array of 4 integers");
        StageLayout layout;
        for (std::size_t i = 0; i < 4; ++i) {
            const auto path = "/layout_override/" + std::to_string(i);
            if (!(*it)[i].is_number_integer()) throw SpecError(path, "expected an integer");
            const auto b = (*it)[i].get<long long>();
            if (b < 1 || b > 100000) throw SpecError(path, "block count must be >= 1");
            layout.blocks[i] = static_cast<int>(b);
        }
        spec.layout_override = layout;
    }

    if (spec.resolution < 32) throw SpecError("/resolution", "must be >= 32");
    if (!(spec.width_mult > 0.0)) throw SpecError("/width_mult", "must be > 0");
    if (!(spec.se_ratio >= 0.0 && spec.se_ratio <= 1.0)) throw SpecError("/se_ratio", "must lie in [0, 1]");
    if (!spec.layout_override) {
        try {
            (void)block_layout(spec.depth);
        } catch (const UnknownLayoutError& e) {
            throw SpecError("/depth", e.what());
        }
    }
    return spec;
}

std::string emit_spec(const ModelSpec& spec, int indent) { return dump(spec_json(spec), indent); }

std::string MeasurementRow::label() const { return model_id + "@" + std::to_string(resolution); }

std::vector<MeasurementRow> parse_measurements(std::string_view text) {
    std::vector<MeasurementRow> rows;
    std::vector<std::string_view> header;
    bool has_memory = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        const auto line = trim(text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos));
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;

        if (header.empty()) {
            header = split(line);
            const auto expected = split(kMeasurementHeader);
            const bool base_ok = header.size() >= expected.size() &&
                                 std::equal(expected.begin(), expected.end(), header.begin());
            has_memory = header.size() == expected.size() + 1 && header.back() == kMemoryColumn;
            if (!base_ok || (header.size() != expected.size() && !has_memory)) {
                throw ParseError(line_no, "", "unexpected header; expected '" + std::string(kMeasurementHeader) +
                                                  "' optionally followed by '" + std::string(kMemoryColumn) + "'");
            }
            continue;
        }

        const auto cells = split(line);
        if (cells.size() != header.size()) {
            throw ParseError(line_no, "", "expected " + std::to_string(header.size()) + " cells, found " +
                                              std::to_string(cells.size()));
        }
        auto optional_cost = [&](std::size_t i) -> std::optional<double> {
            if (cells[i].empty()) return std::nullopt;
            return positive(parse_number(cells[i], line_no, header[i]), line_no, header[i]);
        };

        MeasurementRow r;
        if (cells[0].empty()) throw ParseError(line_no, "model_id", "model_id must not be empty");
        r.model_id = std::string(cells[0]);
        const double res = parse_number(cells[1], line_no, header[1]);
        if (res != std::floor(res) || res < 1 || res > 100000) {
            throw ParseError(line_no, "resolution", "expected a positive integer");
        }
        r.resolution = static_cast<int>(res);
        r.params_m = positive(parse_number(cells[2], line_no, header[2]), line_no, header[2]);
        r.flops_b = positive(parse_number(cells[3], line_no, header[3]), line_no, header[3]);
        r.v100_s = optional_cost(4);
        r.tpu_ms = optional_cost(5);
        r.top1 = parse_number(cells[6], line_no, header[6]);
        if (!(r.top1 > 0.0 && r.top1 < 100.0)) throw ParseError(line_no, "top1", "top-1 must lie in (0, 100)");
        if (has_memory) r.tpu_mem_gb = optional_cost(7);
        rows.push_back(std::move(r));
    }
    if (header.empty()) throw ParseError(1, "", "empty input: missing header");
    if (rows.empty()) throw ParseError(line_no, "", "no data rows");
    return rows;
}

std::vector<MeasurementRow> load_measurements(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_measurements(buf.str());
}

std::string_view embedded_table(std::string_view name) {
    if (name == "table7") return embedded::kTable7Csv;
    if (name == "table4") return embedded::kTable4Csv;
    throw InvalidArgument("unknown embedded table '" + std::string(name) + "'; expected table7 or table4");
}

std::vector<MeasurementRow> reference_table(std::string_view name) { return parse_measurements(embedded_table(name)); }

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string_view to_string(CostMetric m) noexcept {
    switch (m) {
        case CostMetric::tpu_ms: return "tpu_ms";
        case CostMetric::v100_s: return "v100_s";
        case CostMetric::flops_b: return "flops_b";
    }
    return "?";
}

std::optional<CostMetric> parse_cost_metric(std::string_view s) noexcept {
    for (auto m : {CostMetric::tpu_ms, CostMetric::v100_s, CostMetric::flops_b}) {
        if (to_string(m) == s) return m;
    }
    return std::nullopt;
}

namespace {
std::optional<double> metric_of(const MeasurementRow& r, CostMetric m) {
    switch (m) {
        case CostMetric::tpu_ms: return r.tpu_ms;
        case CostMetric::v100_s: return r.v100_s;
        case CostMetric::flops_b: return r.flops_b;
    }
    return std::nullopt;
}
}  // namespace

std::vector<ParetoPoint> to_pareto_points(std::span<const MeasurementRow> rows, CostMetric metric) {
    std::vector<ParetoPoint> points;
    for (const auto& r : rows) {
        if (auto c = metric_of(r, metric)) points.push_back({r.label(), *c, r.top1});
    }
    return points;
}

std::vector<SpeedupMatch> match_speedups(std::span<const MeasurementRow> rows, CostMetric metric,
                                         std::string_view reference_prefix, double top1_tolerance) {
    std::vector<SpeedupMatch> out;
    for (const auto& ref : rows) {
        if (!ref.model_id.starts_with(reference_prefix)) continue;
        const auto ref_cost = metric_of(ref, metric);
        if (!ref_cost) continue;
        const MeasurementRow* best = nullptr;
        for (const auto& cand : rows) {
            if (cand.model_id.starts_with(reference_prefix)) continue;
            const auto c = metric_of(cand, metric);
            if (!c || cand.top1 < ref.top1 - top1_tolerance - 1e-9) continue;
            if (!best || *c < *metric_of(*best, metric)) best = &cand;
        }
        if (!best) continue;
        const double match_cost = *metric_of(*best, metric);
        out.push_back({ref.label(), best->label(), *ref_cost, match_cost, ref.top1, best->top1,
                       speedup({ref.label(), *ref_cost, ref.top1}, {best->label(), match_cost, best->top1})});
    }
    return out;
}

std::string graph_to_json(const ModelGraph& graph, int indent) {
    json j;
    j["kind"] = "graph";
    if (graph.spec) j["spec"] = spec_json(*graph.spec);
    j["input_channels"] = graph.input_channels;
    json nodes = json::array();
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
        const auto& n = graph.nodes[i];
        json node = {{"index", i},
                     {"kind", std::string(to_string(n.kind))},
                     {"name", n.name},
                     {"kernel", {n.kernel.h, n.kernel.w}},
                     {"stride", {n.stride.h, n.stride.w}},
                     {"in_channels", n.in_channels},
                     {"out_channels", n.out_channels},
                     {"stage", n.stage_id},
                     {"block", n.block_id},
                     {"residual_eligible", n.residual_eligible},
                     {"inputs", n.inputs}};
        if (n.kind == LayerKind::se) node["se_hidden"] = n.se_hidden;
        nodes.push_back(std::move(node));
    }
    j["nodes"] = std::move(nodes);
    j["residual_blocks"] = residual_block_count(graph);
    if (graph.spec) {
        const auto trace = shape_trace(graph, graph.spec->resolution);
        j["stage_shapes"] = {{"resolution", graph.spec->resolution},
                             {"stem", shape_json(trace.stem)},
                             {"c2", shape_json(trace.stages[0])},
                             {"c3", shape_json(trace.stages[1])},
                             {"c4", shape_json(trace.stages[2])},
                             {"c5", shape_json(trace.stages[3])}};
    }
    return dump(j, indent);
}

std::string cost_report_to_json(const CostReport& r, int indent) {
    json j;
    j["kind"] = "cost_report";
    j["spec"] = spec_json(r.spec);
    j["batch"] = r.batch;
    j["bytes_per_element"] = r.bytes_per_element;
    j["params"] = r.params;
    j["flops"] = r.flops;
    j["activation_bytes_total"] = r.activation_bytes_total;
    j["activation_bytes_peak"] = r.activation_bytes_peak;
    j["operational_intensity"] = r.operational_intensity;
    return dump(j, indent);
}

std::string reg_config_to_json(const RegConfig& reg, int indent) {
    json j = {{"randaugment_layers", reg.randaugment_layers},
              {"randaugment_magnitude", reg.randaugment_magnitude},
              {"stochastic_depth_rate", reg.stochastic_depth_rate},
              {"dropout_rate", reg.dropout_rate},
              {"label_smoothing", reg.label_smoothing},
              {"weight_decay", reg.weight_decay},
              {"ema_decay", reg.ema_decay},
              {"epochs", reg.epochs}};
    return dump(j, indent);
}

std::string schedule_csv(std::span<const ScheduleRow> rows) {
    std::string out(kScheduleHeader);
    out += '\n';
    for (const auto& r : rows) {
        out += std::to_string(r.step);
        out += ',';
        out += format_double(r.lr);
        out += ',';
        out += format_double(r.ema_decay);
        out += ',';
        out += format_double(r.sd_final_rate);
        out += '\n';
    }
    return out;
}

}  // namespace rrs
