#include "rrs/cost_model.hpp"

#include <algorithm>

#include "rrs/error.hpp"

namespace rrs {

namespace {

using i64 = std::int64_t;

i64 kernel_area(const LayerNode& n) { return i64{n.kernel.h} * n.kernel.w; }

FeatureShape input_shape(const ModelGraph& g, const std::vector<FeatureShape>& shapes, int src, int resolution) {
    if (src == kGraphInput) return {resolution, resolution, g.input_channels};
    return shapes[static_cast<std::size_t>(src)];
}

void check_batch(int batch, int bytes_per_element) {
    if (batch < 1) throw InvalidArgument("batch must be >= 1");
    if (bytes_per_element != 2 && bytes_per_element != 4) throw InvalidArgument("bytes_per_element must be 2 or 4");
}

}  // namespace

i64 node_params(const LayerNode& n) {
    const i64 cin = n.in_channels;
    const i64 cout = n.out_channels;
    switch (n.kind) {
        case LayerKind::conv: return kernel_area(n) * cin * cout;
        case LayerKind::depthwise_conv: return kernel_area(n) * cout;
        case LayerKind::norm: return 2 * cout;
        case LayerKind::dense: return cin * cout + cout;
        case LayerKind::se: {
            const i64 h = n.se_hidden;
            return cout * h + h + h * cout + cout;
        }
        default: return 0;
    }
}

i64 node_flops(const LayerNode& n, const FeatureShape& in, const FeatureShape& out) {
    const i64 out_pixels = i64{out.h} * out.w;
    switch (n.kind) {
        case LayerKind::conv: return 2 * out_pixels * n.out_channels * kernel_area(n) * n.in_channels;
        case LayerKind::depthwise_conv: return 2 * out_pixels * n.out_channels * kernel_area(n);
        case LayerKind::dense: return 2 * i64{n.in_channels} * n.out_channels;
        case LayerKind::norm: return 2 * out.elements();
        case LayerKind::activation:
        case LayerKind::residual_add: return out.elements();
        case LayerKind::avg_pool:
        case LayerKind::max_pool: return kernel_area(n) * out.elements();
        case LayerKind::global_avg_pool: return in.elements();
        case LayerKind::se: {
            const i64 c = n.out_channels;
            const i64 h = n.se_hidden;
            return in.elements() + 2 * c * h + 2 * h * c + out.elements();
        }
    }
    return 0;
}

i64 param_count(const ModelGraph& graph) {
    i64 total = 0;
    for (const auto& n : graph.nodes) total += node_params(n);
    return total;
}

i64 flop_count(const ModelGraph& graph, int resolution) {
    const auto shapes = propagate_shapes(graph, resolution);
    i64 total = 0;
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
        const auto& n = graph.nodes[i];
        total += node_flops(n, input_shape(graph, shapes, n.inputs.front(), resolution), shapes[i]);
    }
    return total;
}

ActivationFootprint activation_footprint(const ModelGraph& graph, int resolution, int batch, int bytes_per_element) {
    check_batch(batch, bytes_per_element);
    const auto shapes = propagate_shapes(graph, resolution);
    const i64 scale = i64{batch} * bytes_per_element;

    ActivationFootprint fp;
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
        const i64 out = shapes[i].elements();
        i64 live = out;
        for (int src : graph.nodes[i].inputs) live += input_shape(graph, shapes, src, resolution).elements();
        fp.total_bytes += out * scale;
        fp.peak_bytes = std::max(fp.peak_bytes, live * scale);
    }
    return fp;
}

double operational_intensity(const ModelGraph& graph, int resolution) {
    constexpr i64 kBytes = 2;
    const auto shapes = propagate_shapes(graph, resolution);
    i64 flops = 0;
    i64 elements_moved = 0;
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
        const auto& n = graph.nodes[i];
        flops += node_flops(n, input_shape(graph, shapes, n.inputs.front(), resolution), shapes[i]);
        elements_moved += shapes[i].elements();
        for (int src : n.inputs) elements_moved += input_shape(graph, shapes, src, resolution).elements();
    }
    if (flops == 0) throw InvalidArgument("operational_intensity: graph performs no FLOPs");
    const i64 bytes = (elements_moved + param_count(graph)) * kBytes;
    return static_cast<double>(flops) / static_cast<double>(bytes);
}

CostReport cost_report(const ModelSpec& spec, int batch, int bytes_per_element) {
    check_batch(batch, bytes_per_element);
    const ModelGraph graph = build_model(spec);
    const auto fp = activation_footprint(graph, spec.resolution, batch, bytes_per_element);

    CostReport r;
    r.spec = spec;
    r.batch = batch;
    r.bytes_per_element = bytes_per_element;
    r.params = param_count(graph);
    r.flops = flop_count(graph, spec.resolution);
    r.activation_bytes_total = fp.total_bytes;
    r.activation_bytes_peak = fp.peak_bytes;
    r.operational_intensity = operational_intensity(graph, spec.resolution);
    return r;
}

}  // namespace rrs
