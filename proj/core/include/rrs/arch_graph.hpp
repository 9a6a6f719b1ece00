#pragma once

/// @file arch_graph.hpp
/// @brief ResNet / ResNet-D / SE / ResNet-RS computation graphs as plain data.
///
/// A graph is a topologically ordered list of layer nodes. Nodes carry kernel,
/// stride and channel counts only; spatial sizes are resolved on demand for a
/// given input resolution (see propagate_shapes / shape_trace).

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rrs {

/// Number of bottleneck blocks in stages c2, c3, c4 and c5.
struct StageLayout {
    std::array<int, 4> blocks{};

    int total_blocks() const noexcept { return blocks[0] + blocks[1] + blocks[2] + blocks[3]; }
    /// Nominal layer count implied by the allocation: three convs per block plus stem and classifier.
    int implied_depth() const noexcept { return 3 * total_blocks() + 2; }

    bool operator==(const StageLayout&) const = default;
};

/// Declarative description of a model to build.
struct ModelSpec {
    int depth = 50;
    double width_mult = 1.0;
    int resolution = 224;
    bool resnet_d = false;
    /// 0 disables squeeze-and-excitation.
    double se_ratio = 0.0;
    std::optional<StageLayout> layout_override;

    /// Throws InvalidArgument (or UnknownLayoutError) when an invariant is violated.
    void validate() const;
    StageLayout layout() const;

    bool operator==(const ModelSpec&) const = default;

    /// Original ResNet: 7x7 stem, max pool, no SE.
    static ModelSpec resnet(int depth, int resolution = 224);
    /// ResNet-D adjustments plus SE ratio 0.25.
    static ModelSpec resnet_rs(int depth, int resolution, double width_mult = 1.0);
};

enum class LayerKind : std::uint8_t {
    conv,
    depthwise_conv,
    avg_pool,
    max_pool,
    norm,
    activation,
    se,
    residual_add,
    global_avg_pool,
    dense,
};

std::string_view to_string(LayerKind kind) noexcept;
std::optional<LayerKind> parse_layer_kind(std::string_view name) noexcept;

struct Extent2 {
    int h = 1;
    int w = 1;
    bool operator==(const Extent2&) const = default;
};

/// Index used in LayerNode::inputs to refer to the network input.
inline constexpr int kGraphInput = -1;

inline constexpr int kStemStage = 1;
inline constexpr int kHeadStage = 6;

struct LayerNode {
    LayerKind kind = LayerKind::conv;
    std::string name;
    Extent2 kernel{1, 1};
    Extent2 stride{1, 1};
    int in_channels = 0;
    int out_channels = 0;
    /// Squeeze width of an SE node; 0 for every other kind.
    int se_hidden = 0;
    /// 1 = stem, 2..5 = c2..c5, 6 = classifier head.
    int stage_id = 0;
    /// 1-based global bottleneck index, 0 outside residual blocks.
    int block_id = 0;
    /// Node sits on a residual branch that stochastic depth may drop.
    bool residual_eligible = false;
    /// Producer node indices (kGraphInput for the network input).
    std::vector<int> inputs;

    bool operator==(const LayerNode&) const = default;
};

struct ModelGraph {
    int input_channels = 3;
    std::vector<LayerNode> nodes;
    /// Originating spec; absent for hand-built graphs.
    std::optional<ModelSpec> spec;
};

/// Depths with a built-in block allocation.
std::span<const int> supported_depths() noexcept;

/// Block allocation for a nominal depth; throws UnknownLayoutError otherwise.
StageLayout block_layout(int depth);

/// max(1, ceil(se_ratio * block_out_channels)).
int se_hidden_width(int block_out_channels, double se_ratio);

/// Round-half-up of base * width_mult. Throws InvalidArgument if the result is 0.
int scale_channels(int base_channels, double width_mult);

ModelGraph build_model(const ModelSpec& spec);

/// Checks topology and channel continuity. With require_head the graph must end in
/// exactly one global_avg_pool followed by exactly one dense node.
void check_graph(const ModelGraph& graph, bool require_head = true);

/// Number of distinct residual blocks eligible for stochastic depth.
int residual_block_count(const ModelGraph& graph);

std::size_t count_nodes(const ModelGraph& graph, LayerKind kind);

struct FeatureShape {
    int h = 0;
    int w = 0;
    int c = 0;

    std::int64_t elements() const noexcept { return std::int64_t{h} * w * c; }
    bool operator==(const FeatureShape&) const = default;
};

/// Output shape of every node for a square input. Stride arithmetic is floor division.
/// Throws ShapeError when any feature map collapses to zero and InvalidArgument when
/// the resolution is below 32.
std::vector<FeatureShape> propagate_shapes(const ModelGraph& graph, int resolution);

struct StageShapes {
    FeatureShape stem;
    /// c2, c3, c4, c5.
    std::array<FeatureShape, 4> stages;
};

StageShapes shape_trace(const ModelGraph& graph, int resolution);

/// Incremental construction of hand-made graphs (probe blocks, toy models).
class GraphBuilder {
public:
    explicit GraphBuilder(int input_channels);

    int conv(int from, int out_channels, int kernel, int stride = 1, std::string name = {});
    int depthwise_conv(int from, int kernel, int stride = 1, std::string name = {});
    int norm(int from, std::string name = {});
    int activation(int from, std::string name = {});
    int avg_pool(int from, int kernel, int stride, std::string name = {});
    int max_pool(int from, int kernel, int stride, std::string name = {});
    int se(int from, int hidden, std::string name = {});
    int add(int lhs, int rhs, std::string name = {});
    int global_avg_pool(int from, std::string name = {});
    int dense(int from, int out_channels, std::string name = {});

    /// Tags subsequently added nodes.
    void set_scope(int stage_id, int block_id, bool residual_eligible);

    int channels_of(int node) const;
    ModelGraph finish() &&;

private:
    int push(LayerNode node);

    ModelGraph graph_;
    int stage_id_ = 0;
    int block_id_ = 0;
    bool residual_eligible_ = false;
};

/// Dense bottleneck block (1x1 -> 3x3 -> 1x1, width out/4) mapping in_channels to out_channels.
ModelGraph make_dense_bottleneck_probe(int in_channels, int out_channels);

/// Same topology as the dense probe with the 3x3 made depthwise: 1x1 to (out/4)*expansion channels,
/// depthwise 3x3, 1x1 to out_channels. expansion = 1 differs from the dense probe only in the 3x3.
ModelGraph make_depthwise_probe(int in_channels, int out_channels, int expansion = 1);

}  // namespace rrs
