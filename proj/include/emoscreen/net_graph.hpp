#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "emoscreen/nwf.hpp"
#include "emoscreen/tensor.hpp"

namespace emoscreen {

enum class LayerKind {
    InputNormalize,
    ConvStandard,
    ConvDepthwise,
    ConvPointwise,
    Relu6,
    ResidualAdd,
    GlobalAvgPool,
};

const char* layer_kind_name(LayerKind kind);

struct LayerSpec {
    std::string name;
    LayerKind kind = LayerKind::InputNormalize;
    std::vector<std::string> inputs;
    std::string weight_key;  // empty for non-conv layers
    // Convolution parameters (spatial kernel for standard/depthwise layers).
    int kernel_h = 1;
    int kernel_w = 1;
    int stride = 1;
    int padding = 0;
    int out_channels = 0;  // 0 for layers whose channel count follows the input
};

struct TensorShape {
    int height = 0;
    int width = 0;
    int channels = 0;

    bool operator==(const TensorShape&) const = default;
    std::string to_string() const {
        return std::to_string(height) + "x" + std::to_string(width) + "x" +
               std::to_string(channels);
    }
};

struct FeatureVector {
    std::vector<float> values;
    std::string source_layer;

    std::size_t length() const { return values.size(); }
};

// Topologically ordered, acyclic layer graph with a fixed input shape.
class NetworkGraph {
public:
    static NetworkGraph from_json_text(const std::string& json_text);
    static NetworkGraph from_json_file(const std::string& path);

    const std::vector<LayerSpec>& layers() const { return layers_; }
    TensorShape input_shape() const { return input_shape_; }

    std::vector<std::string> list_layers() const;
    bool has_layer(const std::string& name) const;
    const LayerSpec& layer(const std::string& name) const;

    // Output shape of every layer, computed without touching weight values.
    std::map<std::string, TensorShape> propagate_shapes() const;

    // Evaluates all layers in topological order; returns every layer's output.
    std::map<std::string, Tensor> forward(const WeightContainer& weights,
                                          const Tensor& image) const;

    // Evaluates only what the named layer needs, freeing dead activations.
    FeatureVector extract_features(const WeightContainer& weights, const Tensor& image,
                                   const std::string& layer_name) const;

private:
    void validate() const;

    std::vector<LayerSpec> layers_;
    TensorShape input_shape_{224, 224, 3};
    std::map<std::string, std::size_t> index_;
};

// He-scaled deterministic random weights matching the graph's declared shapes.
// Keys: "<layer name>" for kernels, "<layer name>/bias" for biases.
WeightContainer generate_random_weights(const NetworkGraph& graph, std::uint32_t seed);

}  // namespace emoscreen
