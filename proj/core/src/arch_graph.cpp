#include "rrs/arch_graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <utility>

#include "rrs/error.hpp"

namespace rrs {

namespace {

struct LayoutEntry {
    int depth;
    StageLayout layout;
};

// 26 is the only equal-stage bottleneck allocation with 3*sum+2 == 26.
// 300 and 400 are the allocations used in the scaling grid.
constexpr std::array<LayoutEntry, 10> kLayouts{{
    {26, {{2, 2, 2, 2}}},
    {50, {{3, 4, 6, 3}}},
    {101, {{3, 4, 23, 3}}},
    {152, {{3, 8, 36, 3}}},
    {200, {{3, 24, 36, 3}}},
    {270, {{4, 29, 53, 4}}},
    {300, {{4, 36, 54, 4}}},
    {350, {{4, 36, 72, 4}}},
    {400, {{6, 48, 72, 6}}},
    {420, {{4, 44, 87, 4}}},
}};

constexpr std::array<int, 10> kDepths{26, 50, 101, 152, 200, 270, 300, 350, 400, 420};

constexpr int kNumClasses = 1000;
constexpr std::array<int, 4> kStageWidths{64, 128, 256, 512};
constexpr int kExpansion = 4;

std::string supported_depth_list() {
    std::ostringstream out;
    out << "{";
    for (std::size_t i = 0; i < kDepths.size(); ++i) out << (i ? "," : "") << kDepths[i];
    out << "}";
    return out.str();
}

bool preserves_channels(LayerKind kind) {
    switch (kind) {
        case LayerKind::conv:
        case LayerKind::dense:
            return false;
        default:
            return true;
    }
}

bool is_spatial(LayerKind kind) {
    return kind == LayerKind::conv || kind == LayerKind::depthwise_conv || kind == LayerKind::avg_pool ||
           kind == LayerKind::max_pool;
}

std::string node_label(const ModelGraph& g, std::size_t i) {
    const auto& n = g.nodes[i];
    return "node " + std::to_string(i) + (n.name.empty() ? "" : " (" + n.name + ")");
}

}  // namespace

std::string_view to_string(LayerKind kind) noexcept {
    switch (kind) {
        case LayerKind::conv: return "conv";
        case LayerKind::depthwise_conv: return "depthwise_conv";
        case LayerKind::avg_pool: return "avg_pool";
        case LayerKind::max_pool: return "max_pool";
        case LayerKind::norm: return "norm";
        case LayerKind::activation: return "activation";
        case LayerKind::se: return "se";
        case LayerKind::residual_add: return "residual_add";
        case LayerKind::global_avg_pool: return "global_avg_pool";
        case LayerKind::dense: return "dense";
    }
    return "unknown";
}

std::optional<LayerKind> parse_layer_kind(std::string_view name) noexcept {
    for (auto k : {LayerKind::conv, LayerKind::depthwise_conv, LayerKind::avg_pool, LayerKind::max_pool,
                   LayerKind::norm, LayerKind::activation, LayerKind::se, LayerKind::residual_add,
                   LayerKind::global_avg_pool, LayerKind::dense}) {
        if (to_string(k) == name) return k;
    }
    return std::nullopt;
}

std::span<const int> supported_depths() noexcept { return kDepths; }

StageLayout block_layout(int depth) {
    for (const auto& e : kLayouts) {
        if (e.depth == depth) return e.layout;
    }
    throw UnknownLayoutError("unknown layout for depth " + std::to_string(depth) +
                             "; supported depths are " + supported_depth_list() +
                             " (supply layout_override for custom depths)");
}

int se_hidden_width(int block_out_channels, double se_ratio) {
    if (block_out_channels < 1) throw InvalidArgument("se_hidden_width: block_out_channels must be >= 1");
    const double raw = se_ratio * static_cast<double>(block_out_channels);
    // Guard against 0.25 * 2048 landing a hair above 512 after rounding noise.
    const double snapped = std::round(raw);
    const double hidden = std::abs(raw - snapped) < 1e-9 ? snapped : std::ceil(raw);
    return std::max(1, static_cast<int>(hidden));
}

int scale_channels(int base_channels, double width_mult) {
    const auto scaled = static_cast<long long>(std::floor(static_cast<double>(base_channels) * width_mult + 0.5));
    if (scaled < 1) {
        throw InvalidArgument("width_mult " + std::to_string(width_mult) + " rounds " +
                              std::to_string(base_channels) + " channels down to 0");
    }
    return static_cast<int>(scaled);
}

void ModelSpec::validate() const {
    if (resolution < 32) throw InvalidArgument("resolution must be >= 32, got " + std::to_string(resolution));
    if (!(width_mult > 0.0) || !std::isfinite(width_mult)) {
        throw InvalidArgument("width_mult must be a positive finite number");
    }
    if (!(se_ratio >= 0.0 && se_ratio <= 1.0)) throw InvalidArgument("se_ratio must lie in [0, 1]");
    if (layout_override) {
        for (int b : layout_override->blocks) {
            if (b < 1) throw InvalidArgument("layout_override: every stage needs at least one block");
        }
    } else {
        (void)block_layout(depth);
    }
}

StageLayout ModelSpec::layout() const { return layout_override ? *layout_override : block_layout(depth); }

ModelSpec ModelSpec::resnet(int depth, int resolution) {
    ModelSpec s;
    s.depth = depth;
    s.resolution = resolution;
    return s;
}

ModelSpec ModelSpec::resnet_rs(int depth, int resolution, double width_mult) {
    ModelSpec s;
    s.depth = depth;
    s.resolution = resolution;
    s.width_mult = width_mult;
    s.resnet_d = true;
    s.se_ratio = 0.25;
    return s;
}

// ---------------------------------------------------------------------------
// GraphBuilder

GraphBuilder::GraphBuilder(int input_channels) {
    if (input_channels < 1) throw InvalidArgument("input_channels must be >= 1");
    graph_.input_channels = input_channels;
}

void GraphBuilder::set_scope(int stage_id, int block_id, bool residual_eligible) {
    stage_id_ = stage_id;
    block_id_ = block_id;
    residual_eligible_ = residual_eligible;
}

int GraphBuilder::channels_of(int node) const {
    if (node == kGraphInput) return graph_.input_channels;
    if (node < 0 || static_cast<std::size_t>(node) >= graph_.nodes.size()) {
        throw InvalidArgument("GraphBuilder: no node " + std::to_string(node));
    }
    return graph_.nodes[static_cast<std::size_t>(node)].out_channels;
}

int GraphBuilder::push(LayerNode node) {
    node.stage_id = stage_id_;
    node.block_id = block_id_;
    node.residual_eligible = residual_eligible_;
    graph_.nodes.push_back(std::move(node));
    return static_cast<int>(graph_.nodes.size()) - 1;
}

int GraphBuilder::conv(int from, int out_channels, int kernel, int stride, std::string name) {
    LayerNode n;
    n.kind = LayerKind::conv;
    n.name = std::move(name);
    n.kernel = {kernel, kernel};
    n.stride = {stride, stride};
    n.in_channels = channels_of(from);
    n.out_channels = out_channels;
    n.inputs = {from};
    return push(std::move(n));
}

int GraphBuilder::depthwise_conv(int from, int kernel, int stride, std::string name) {
    LayerNode n;
    n.kind = LayerKind::depthwise_conv;
    n.name = std::move(name);
    n.kernel = {kernel, kernel};
    n.stride = {stride, stride};
    n.in_channels = n.out_channels = channels_of(from);
    n.inputs = {from};
    return push(std::move(n));
}

namespace {
LayerNode passthrough(LayerKind kind, std::string name, int channels, int from) {
    LayerNode n;
    n.kind = kind;
    n.name = std::move(name);
    n.in_channels = n.out_channels = channels;
    n.inputs = {from};
    return n;
}
}  // namespace

int GraphBuilder::norm(int from, std::string name) {
    return push(passthrough(LayerKind::norm, std::move(name), channels_of(from), from));
}

int GraphBuilder::activation(int from, std::string name) {
    return push(passthrough(LayerKind::activation, std::move(name), channels_of(from), from));
}

int GraphBuilder::avg_pool(int from, int kernel, int stride, std::string name) {
    auto n = passthrough(LayerKind::avg_pool, std::move(name), channels_of(from), from);
    n.kernel = {kernel, kernel};
    n.stride = {stride, stride};
    return push(std::move(n));
}

int GraphBuilder::max_pool(int from, int kernel, int stride, std::string name) {
    auto n = passthrough(LayerKind::max_pool, std::move(name), channels_of(from), from);
    n.kernel = {kernel, kernel};
    n.stride = {stride, stride};
    return push(std::move(n));
}

int GraphBuilder::se(int from, int hidden, std::string name) {
    auto n = passthrough(LayerKind::se, std::move(name), channels_of(from), from);
    n.se_hidden = hidden;
    return push(std::move(n));
}

int GraphBuilder::add(int lhs, int rhs, std::string name) {
    const int c = channels_of(lhs);
    if (channels_of(rhs) != c) throw InvalidArgument("GraphBuilder::add: channel mismatch");
    auto n = passthrough(LayerKind::residual_add, std::move(name), c, lhs);
    n.inputs = {lhs, rhs};
    return push(std::move(n));
}

int GraphBuilder::global_avg_pool(int from, std::string name) {
    return push(passthrough(LayerKind::global_avg_pool, std::move(name), channels_of(from), from));
}

int GraphBuilder::dense(int from, int out_channels, std::string name) {
    LayerNode n;
    n.kind = LayerKind::dense;
    n.name = std::move(name);
    n.in_channels = channels_of(from);
    n.out_channels = out_channels;
    n.inputs = {from};
    return push(std::move(n));
}

ModelGraph GraphBuilder::finish() && { return std::move(graph_); }

// ---------------------------------------------------------------------------
// build_model

namespace {

int conv_bn(GraphBuilder& b, int from, int out, int kernel, int stride, const std::string& prefix, bool relu) {
    int x = b.conv(from, out, kernel, stride, prefix);
    x = b.norm(x, prefix + "/bn");
    if (relu) x = b.activation(x, prefix + "/relu");
    return x;
}

int stem(GraphBuilder& b, const ModelSpec& spec) {
    b.set_scope(kStemStage, 0, false);
    const double w = spec.width_mult;
    if (spec.resnet_d) {
        int x = conv_bn(b, kGraphInput, scale_channels(32, w), 3, 2, "stem/conv1", true);
        x = conv_bn(b, x, scale_channels(32, w), 3, 1, "stem/conv2", true);
        return conv_bn(b, x, scale_channels(64, w), 3, 1, "stem/conv3", true);
    }
    int x = conv_bn(b, kGraphInput, scale_channels(64, w), 7, 2, "stem/conv1", true);
    return b.max_pool(x, 3, 2, "stem/maxpool");
}

int bottleneck(GraphBuilder& b, const ModelSpec& spec, int from, int stage, int block_id, int index_in_stage,
               int width, int out, int stride) {
    const std::string prefix = "c" + std::to_string(stage) + "/b" + std::to_string(index_in_stage + 1);
    const int in = b.channels_of(from);

    b.set_scope(stage, block_id, true);
    // ResNet-D moves the stride from the first 1x1 to the 3x3.
    const int s1 = spec.resnet_d ? 1 : stride;
    const int s2 = spec.resnet_d ? stride : 1;
    int x = conv_bn(b, from, width, 1, s1, prefix + "/conv1", true);
    x = conv_bn(b, x, width, 3, s2, prefix + "/conv2", true);
    x = conv_bn(b, x, out, 1, 1, prefix + "/conv3", false);
    if (spec.se_ratio > 0.0) x = b.se(x, se_hidden_width(out, spec.se_ratio), prefix + "/se");

    b.set_scope(stage, block_id, false);
    int shortcut = from;
    if (stride != 1 || in != out) {
        if (spec.resnet_d && stride != 1) {
            shortcut = b.avg_pool(shortcut, 2, 2, prefix + "/shortcut/avgpool");
            shortcut = conv_bn(b, shortcut, out, 1, 1, prefix + "/shortcut/conv", false);
        } else {
            shortcut = conv_bn(b, shortcut, out, 1, stride, prefix + "/shortcut/conv", false);
        }
    }
    int y = b.add(x, shortcut, prefix + "/add");
    return b.activation(y, prefix + "/relu");
}

}  // namespace

ModelGraph build_model(const ModelSpec& spec) {
    spec.validate();
    const StageLayout layout = spec.layout();

    GraphBuilder b(3);
    int x = stem(b, spec);

    int block_id = 0;
    for (int s = 0; s < 4; ++s) {
        const int width = scale_channels(kStageWidths[static_cast<std::size_t>(s)], spec.width_mult);
        const int out = scale_channels(kStageWidths[static_cast<std::size_t>(s)] * kExpansion, spec.width_mult);
        for (int i = 0; i < layout.blocks[static_cast<std::size_t>(s)]; ++i) {
            // Without the stem max pool, c2 downsamples in its first block as well.
            const bool downsample = i == 0 && (s > 0 || spec.resnet_d);
            x = bottleneck(b, spec, x, s + 2, ++block_id, i, width, out, downsample ? 2 : 1);
        }
    }

    b.set_scope(kHeadStage, 0, false);
    x = b.global_avg_pool(x, "head/gap");
    b.dense(x, kNumClasses, "head/fc");

    ModelGraph g = std::move(b).finish();
    g.spec = spec;
    check_graph(g, true);
    return g;
}

// ---------------------------------------------------------------------------
// validation and shapes

void check_graph(const ModelGraph& graph, bool require_head) {
    if (graph.input_channels < 1) throw InvalidArgument("graph input_channels must be >= 1");
    const auto& nodes = graph.nodes;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto& n = nodes[i];
        const auto where = node_label(graph, i);
        if (n.out_channels < 1) throw InvalidArgument(where + ": out_channels must be >= 1");
        if (n.inputs.empty()) throw InvalidArgument(where + ": node has no inputs");
        if (n.stride.h < 1 || n.stride.h > 2 || n.stride.w < 1 || n.stride.w > 2) {
            throw InvalidArgument(where + ": stride must be 1 or 2");
        }
        if (n.kernel.h < 1 || n.kernel.w < 1) throw InvalidArgument(where + ": kernel must be positive");
        const std::size_t expected_inputs = n.kind == LayerKind::residual_add ? 2 : 1;
        if (n.inputs.size() != expected_inputs) throw InvalidArgument(where + ": wrong number of inputs");
        for (int src : n.inputs) {
            if (src != kGraphInput && (src < 0 || static_cast<std::size_t>(src) >= i)) {
                throw InvalidArgument(where + ": inputs must refer to earlier nodes");
            }
            const int c = src == kGraphInput ? graph.input_channels : nodes[static_cast<std::size_t>(src)].out_channels;
            if (c != n.in_channels) {
                throw InvalidArgument(where + ": in_channels " + std::to_string(n.in_channels) +
                                      " does not match producer channels " + std::to_string(c));
            }
        }
        if (preserves_channels(n.kind) && n.in_channels != n.out_channels) {
            throw InvalidArgument(where + ": " + std::string(to_string(n.kind)) + " must preserve channels");
        }
        if (n.kind == LayerKind::se && n.se_hidden < 1) throw InvalidArgument(where + ": se_hidden must be >= 1");
        if (n.kind != LayerKind::se && n.se_hidden != 0) throw InvalidArgument(where + ": se_hidden only valid on se");
    }

    if (!require_head) return;
    std::vector<std::size_t> gaps;
    std::vector<std::size_t> denses;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].kind == LayerKind::global_avg_pool) gaps.push_back(i);
        if (nodes[i].kind == LayerKind::dense) denses.push_back(i);
    }
    if (gaps.size() != 1) throw InvalidArgument("graph must contain exactly one global_avg_pool");
    if (denses.size() != 1) throw InvalidArgument("graph must contain exactly one dense classifier");
    const auto& fc = nodes[denses.front()];
    if (denses.front() != nodes.size() - 1 || fc.inputs.front() != static_cast<int>(gaps.front())) {
        throw InvalidArgument("dense classifier must directly follow the global_avg_pool and end the graph");
    }
}

int residual_block_count(const ModelGraph& graph) {
    std::set<int> blocks;
    for (const auto& n : graph.nodes) {
        if (n.residual_eligible && n.block_id > 0) blocks.insert(n.block_id);
    }
    return static_cast<int>(blocks.size());
}

std::size_t count_nodes(const ModelGraph& graph, LayerKind kind) {
    return static_cast<std::size_t>(
        std::count_if(graph.nodes.begin(), graph.nodes.end(), [kind](const LayerNode& n) { return n.kind == kind; }));
}

std::vector<FeatureShape> propagate_shapes(const ModelGraph& graph, int resolution) {
    if (resolution < 32) throw InvalidArgument("resolution must be >= 32, got " + std::to_string(resolution));
    const FeatureShape input{resolution, resolution, graph.input_channels};
    std::vector<FeatureShape> shapes;
    shapes.reserve(graph.nodes.size());
    auto shape_of = [&](int src) { return src == kGraphInput ? input : shapes[static_cast<std::size_t>(src)]; };

    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
        const auto& n = graph.nodes[i];
        if (n.inputs.empty()) throw InvalidArgument(node_label(graph, i) + ": node has no inputs");
        FeatureShape in = shape_of(n.inputs.front());
        FeatureShape out = in;
        out.c = n.out_channels;
        if (is_spatial(n.kind)) {
            out.h = in.h / n.stride.h;
            out.w = in.w / n.stride.w;
        } else if (n.kind == LayerKind::global_avg_pool || n.kind == LayerKind::dense) {
            out.h = out.w = 1;
        } else if (n.kind == LayerKind::residual_add) {
            const FeatureShape other = shape_of(n.inputs.back());
            if (other.h != in.h || other.w != in.w) {
                throw ShapeError(node_label(graph, i) + ": residual operands have different spatial sizes");
            }
        }
        if (out.h < 1 || out.w < 1) {
            throw ShapeError(node_label(graph, i) + ": feature map collapses to zero at resolution " +
                             std::to_string(resolution));
        }
        shapes.push_back(out);
    }
    return shapes;
}

StageShapes shape_trace(const ModelGraph& graph, int resolution) {
    const auto shapes = propagate_shapes(graph, resolution);
    std::array<std::optional<FeatureShape>, 5> last{};
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
        const int stage = graph.nodes[i].stage_id;
        if (stage >= kStemStage && stage <= 5) last[static_cast<std::size_t>(stage - 1)] = shapes[i];
    }
    for (std::size_t s = 0; s < last.size(); ++s) {
        if (!last[s]) throw InvalidArgument("shape_trace: graph has no nodes tagged with stage " + std::to_string(s + 1));
    }
    return StageShapes{*last[0], {*last[1], *last[2], *last[3], *last[4]}};
}

// ---------------------------------------------------------------------------
// probe blocks

ModelGraph make_dense_bottleneck_probe(int in_channels, int out_channels) {
    GraphBuilder b(in_channels);
    const int width = std::max(1, out_channels / kExpansion);
    int x = conv_bn(b, kGraphInput, width, 1, 1, "conv1", true);
    x = conv_bn(b, x, width, 3, 1, "conv2", true);
    conv_bn(b, x, out_channels, 1, 1, "conv3", false);
    return std::move(b).finish();
}

ModelGraph make_depthwise_probe(int in_channels, int out_channels, int expansion) {
    if (expansion < 1) throw InvalidArgument("make_depthwise_probe: expansion must be >= 1");
    GraphBuilder b(in_channels);
    const int width = std::max(1, out_channels / kExpansion) * expansion;
    int x = conv_bn(b, kGraphInput, width, 1, 1, "expand", true);
    x = b.depthwise_conv(x, 3, 1, "dw");
    x = b.norm(x, "dw/bn");
    x = b.activation(x, "dw/relu");
    conv_bn(b, x, out_channels, 1, 1, "project", false);
    return std::move(b).finish();
}

}  // namespace rrs
