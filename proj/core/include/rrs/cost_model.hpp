#pragma once

/// @file cost_model.hpp
/// @brief Analytic parameter, FLOP, activation-memory and operational-intensity counts.
///
/// Accounting conventions:
///   - one multiply-add is 2 FLOPs (conv, depthwise conv, dense, SE projections);
///   - batch norm is folded scale+shift: 2 FLOPs per element, 2 learnable params per channel
///     (moving statistics are not parameters);
///   - activation and residual add: 1 FLOP per element;
///   - avg/max pooling: kh*kw FLOPs per output element; global pooling 1 FLOP per input element;
///   - SE: global pool (1/elem) + two dense projections with bias + channel rescale (1/elem);
///     the gating nonlinearities on the squeezed vectors are not counted;
///   - convolutions carry no bias.
/// Activation memory ignores compiler padding, fusion and rematerialization.

#include <cstdint>

#include "rrs/arch_graph.hpp"

namespace rrs {

std::int64_t node_params(const LayerNode& node);

/// FLOPs of one node given its (first) input shape and output shape, per image.
std::int64_t node_flops(const LayerNode& node, const FeatureShape& in, const FeatureShape& out);

std::int64_t param_count(const ModelGraph& graph);

/// Per-image FLOPs at a square input resolution.
std::int64_t flop_count(const ModelGraph& graph, int resolution);

struct ActivationFootprint {
    /// Sum over nodes of output elements x batch x bytes_per_element.
    std::int64_t total_bytes = 0;
    /// Largest single node output plus the inputs it reads.
    std::int64_t peak_bytes = 0;
};

/// Requires batch >= 1 and bytes_per_element in {2, 4}.
ActivationFootprint activation_footprint(const ModelGraph& graph, int resolution, int batch, int bytes_per_element);

/// FLOPs per byte moved for a single image at 2 bytes/element, counting every node's
/// input reads and output writes plus all parameter bytes. Throws InvalidArgument on
/// graphs that perform no FLOPs.
double operational_intensity(const ModelGraph& graph, int resolution);

struct CostReport {
    ModelSpec spec;
    int batch = 1;
    int bytes_per_element = 2;
    std::int64_t params = 0;
    std::int64_t flops = 0;
    std::int64_t activation_bytes_total = 0;
    std::int64_t activation_bytes_peak = 0;
    double operational_intensity = 0.0;
};

/// Builds the graph for spec and evaluates every cost at spec.resolution.
CostReport cost_report(const ModelSpec& spec, int batch = 1, int bytes_per_element = 2);

}  // namespace rrs
