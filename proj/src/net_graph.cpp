#include "emoscreen/net_graph.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "emoscreen/conv.hpp"
#include "emoscreen/errors.hpp"

namespace emoscreen {

namespace {

LayerKind kind_from_string(const std::string& s) {
    if (s == "input_normalize") return LayerKind::InputNormalize;
    if (s == "conv_standard") return LayerKind::ConvStandard;
    if (s == "conv_depthwise") return LayerKind::ConvDepthwise;
    if (s == "conv_pointwise") return LayerKind::ConvPointwise;
    if (s == "relu6") return LayerKind::Relu6;
    if (s == "residual_add") return LayerKind::ResidualAdd;
    if (s == "global_avg_pool") return LayerKind::GlobalAvgPool;
    throw data_error("topology: unknown layer kind '" + s + "'");
}

std::size_t expected_inputs(LayerKind kind) {
    switch (kind) {
        case LayerKind::InputNormalize: return 0;
        case LayerKind::ResidualAdd: return 2;
        default: return 1;
    }
}

const NamedTensor& require_tensor(const WeightContainer& weights, const std::string& key,
                                  const std::string& layer_name) {
    auto it = weights.find(key);
    if (it == weights.end()) {
        throw data_error("layer '" + layer_name + "': weight tensor '" + key + "' not found");
    }
    return it->second;
}

ConvWeights bind_standard(const WeightContainer& weights, const LayerSpec& spec,
                          int in_channels) {
    const NamedTensor& kernel = require_tensor(weights, spec.weight_key, spec.name);
    if (kernel.dims.size() != 4) {
        throw data_error("layer '" + spec.name + "': kernel tensor must have rank 4");
    }
    ConvWeights w;
    w.kernel_h = static_cast<int>(kernel.dims[0]);
    w.kernel_w = static_cast<int>(kernel.dims[1]);
    w.in_channels = static_cast<int>(kernel.dims[2]);
    w.out_channels = static_cast<int>(kernel.dims[3]);
    if (w.kernel_h != spec.kernel_h || w.kernel_w != spec.kernel_w ||
        w.in_channels != in_channels || w.out_channels != spec.out_channels) {
        throw data_error("layer '" + spec.name + "': kernel shape mismatch, expected " +
                         std::to_string(spec.kernel_h) + "x" + std::to_string(spec.kernel_w) +
                         "x" + std::to_string(in_channels) + "x" +
                         std::to_string(spec.out_channels));
    }
    w.weights = kernel.values;
    w.stride = spec.stride;
    w.padding = spec.padding;
    auto bias_it = weights.find(spec.weight_key + "/bias");
    if (bias_it != weights.end()) {
        if (bias_it->second.values.size() != static_cast<std::size_t>(w.out_channels)) {
            throw data_error("layer '" + spec.name + "': bias length mismatch");
        }
        w.bias = bias_it->second.values;
    } else {
        w.bias.assign(static_cast<std::size_t>(w.out_channels), 0.0f);
    }
    return w;
}

DepthwiseWeights bind_depthwise(const WeightContainer& weights, const LayerSpec& spec,
                                int in_channels) {
    const NamedTensor& kernel = require_tensor(weights, spec.weight_key, spec.name);
    if (kernel.dims.size() != 3) {
        throw data_error("layer '" + spec.name + "': depthwise tensor must have rank 3");
    }
    DepthwiseWeights w;
    w.kernel_h = static_cast<int>(kernel.dims[0]);
    w.kernel_w = static_cast<int>(kernel.dims[1]);
    w.channels = static_cast<int>(kernel.dims[2]);
    if (w.kernel_h != spec.kernel_h || w.kernel_w != spec.kernel_w || w.channels != in_channels) {
        throw data_error("layer '" + spec.name + "': depthwise kernel shape mismatch, expected " +
                         std::to_string(spec.kernel_h) + "x" + std::to_string(spec.kernel_w) +
                         "x" + std::to_string(in_channels));
    }
    w.weights = kernel.values;
    w.stride = spec.stride;
    w.padding = spec.padding;
    auto bias_it = weights.find(spec.weight_key + "/bias");
    if (bias_it != weights.end()) {
        if (bias_it->second.values.size() != static_cast<std::size_t>(w.channels)) {
            throw data_error("layer '" + spec.name + "': bias length mismatch");
        }
        w.bias = bias_it->second.values;
    } else {
        w.bias.assign(static_cast<std::size_t>(w.channels), 0.0f);
    }
    return w;
}

Tensor input_normalize(const Tensor& image) {
    Tensor out = image;
    for (float& v : out.values()) v = v / 127.5f - 1.0f;
    return out;
}

}  // namespace

const char* layer_kind_name(LayerKind kind) {
    switch (kind) {
        case LayerKind::InputNormalize: return "input_normalize";
        case LayerKind::ConvStandard: return "conv_standard";
        case LayerKind::ConvDepthwise: return "conv_depthwise";
        case LayerKind::ConvPointwise: return "conv_pointwise";
        case LayerKind::Relu6: return "relu6";
        case LayerKind::ResidualAdd: return "residual_add";
        case LayerKind::GlobalAvgPool: return "global_avg_pool";
    }
    return "?";
}

NetworkGraph NetworkGraph::from_json_text(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw data_error(std::string("topology: invalid JSON: ") + e.what());
    }
    NetworkGraph graph;
    try {
        if (doc.contains("input_shape")) {
            const auto& shape = doc.at("input_shape");
            graph.input_shape_ = {shape.at(0).get<int>(), shape.at(1).get<int>(),
                                  shape.at(2).get<int>()};
        }
        for (const auto& entry : doc.at("layers")) {
            LayerSpec spec;
            spec.name = entry.at("name").get<std::string>();
            spec.kind = kind_from_string(entry.at("kind").get<std::string>());
            for (const auto& in : entry.value("inputs", nlohmann::json::array())) {
                spec.inputs.push_back(in.get<std::string>());
            }
            spec.weight_key = entry.value("weight_key", spec.name);
            if (entry.contains("kernel")) {
                spec.kernel_h = entry.at("kernel").at(0).get<int>();
                spec.kernel_w = entry.at("kernel").at(1).get<int>();
            }
            spec.stride = entry.value("stride", 1);
            spec.padding = entry.value("padding", 0);
            spec.out_channels = entry.value("out_channels", 0);
            if (spec.kind != LayerKind::ConvStandard && spec.kind != LayerKind::ConvDepthwise &&
                spec.kind != LayerKind::ConvPointwise) {
                spec.weight_key.clear();
            }
            graph.layers_.push_back(std::move(spec));
        }
    } catch (const nlohmann::json::exception& e) {
        throw data_error(std::string("topology: missing or malformed field: ") + e.what());
    }
    for (std::size_t i = 0; i < graph.layers_.size(); ++i) {
        graph.index_[graph.layers_[i].name] = i;
    }
    graph.validate();
    return graph;
}

NetworkGraph NetworkGraph::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open topology file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

void NetworkGraph::validate() const {
    std::set<std::string> seen;
    for (const auto& spec : layers_) {
        if (!seen.insert(spec.name).second) {
            throw data_error("topology: duplicate layer name '" + spec.name + "'");
        }
        if (spec.inputs.size() != expected_inputs(spec.kind)) {
            throw data_error("topology: layer '" + spec.name + "' (" +
                             layer_kind_name(spec.kind) + ") must have " +
                             std::to_string(expected_inputs(spec.kind)) + " inputs, has " +
                             std::to_string(spec.inputs.size()));
        }
        // Topological-order requirement doubles as the acyclicity check.
        for (const auto& in : spec.inputs) {
            if (!seen.count(in)) {
                throw data_error("topology: layer '" + spec.name + "' input '" + in +
                                 "' does not precede it");
            }
        }
        if (spec.kind == LayerKind::ConvPointwise && (spec.kernel_h != 1 || spec.kernel_w != 1)) {
            throw data_error("topology: pointwise layer '" + spec.name + "' must use 1x1 kernel");
        }
    }
}

std::vector<std::string> NetworkGraph::list_layers() const {
    std::vector<std::string> names;
    names.reserve(layers_.size());
    for (const auto& spec : layers_) names.push_back(spec.name);
    return names;
}

bool NetworkGraph::has_layer(const std::string& name) const { return index_.count(name) > 0; }

const LayerSpec& NetworkGraph::layer(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw data_error("unknown layer '" + name + "'");
    return layers_[it->second];
}

std::map<std::string, TensorShape> NetworkGraph::propagate_shapes() const {
    std::map<std::string, TensorShape> shapes;
    for (const auto& spec : layers_) {
        TensorShape out;
        switch (spec.kind) {
            case LayerKind::InputNormalize:
                out = input_shape_;
                break;
            case LayerKind::ConvStandard:
            case LayerKind::ConvPointwise: {
                const TensorShape& in = shapes.at(spec.inputs[0]);
                out.height = conv_output_dim(in.height, spec.kernel_h, spec.padding, spec.stride);
                out.width = conv_output_dim(in.width, spec.kernel_w, spec.padding, spec.stride);
                out.channels = spec.out_channels;
                break;
            }
            case LayerKind::ConvDepthwise: {
                const TensorShape& in = shapes.at(spec.inputs[0]);
                out.height = conv_output_dim(in.height, spec.kernel_h, spec.padding, spec.stride);
                out.width = conv_output_dim(in.width, spec.kernel_w, spec.padding, spec.stride);
                out.channels = in.channels;
                break;
            }
            case LayerKind::Relu6:
                out = shapes.at(spec.inputs[0]);
                break;
            case LayerKind::ResidualAdd: {
                const TensorShape& a = shapes.at(spec.inputs[0]);
                const TensorShape& b = shapes.at(spec.inputs[1]);
                if (!(a == b)) {
                    throw data_error("layer '" + spec.name + "': residual_add shape mismatch " +
                                     a.to_string() + " vs " + b.to_string());
                }
                out = a;
                break;
            }
            case LayerKind::GlobalAvgPool: {
                const TensorShape& in = shapes.at(spec.inputs[0]);
                out = {1, 1, in.channels};
                break;
            }
        }
        if (out.height < 1 || out.width < 1 || out.channels < 1) {
            throw data_error("layer '" + spec.name + "': degenerate output shape " +
                             out.to_string());
        }
        shapes[spec.name] = out;
    }
    return shapes;
}

namespace {

Tensor evaluate_layer(const LayerSpec& spec, const WeightContainer& weights,
                      const Tensor& image, const std::map<std::string, Tensor>& outputs) {
    auto input_of = [&](std::size_t i) -> const Tensor& { return outputs.at(spec.inputs[i]); };
    switch (spec.kind) {
        case LayerKind::InputNormalize: return input_normalize(image);
        case LayerKind::ConvStandard:
            return conv2d_standard(input_of(0),
                                   bind_standard(weights, spec, input_of(0).channels()));
        case LayerKind::ConvPointwise:
            return conv2d_pointwise(input_of(0),
                                    bind_standard(weights, spec, input_of(0).channels()));
        case LayerKind::ConvDepthwise:
            return conv2d_depthwise(input_of(0),
                                    bind_depthwise(weights, spec, input_of(0).channels()));
        case LayerKind::Relu6: return relu6(input_of(0));
        case LayerKind::ResidualAdd: return residual_add(input_of(0), input_of(1));
        case LayerKind::GlobalAvgPool: return global_avg_pool(input_of(0));
    }
    throw internal_error("unhandled layer kind");
}

}  // namespace

std::map<std::string, Tensor> NetworkGraph::forward(const WeightContainer& weights,
                                                    const Tensor& image) const {
    if (image.height() != input_shape_.height || image.width() != input_shape_.width ||
        image.channels() != input_shape_.channels) {
        throw data_error("forward: image shape " + image.shape_string() +
                         " does not match graph input shape " + input_shape_.to_string());
    }
    std::map<std::string, Tensor> outputs;
    for (const auto& spec : layers_) {
        outputs.emplace(spec.name, evaluate_layer(spec, weights, image, outputs));
    }
    return outputs;
}

FeatureVector NetworkGraph::extract_features(const WeightContainer& weights, const Tensor& image,
                                             const std::string& layer_name) const {
    auto target = index_.find(layer_name);
    if (target == index_.end()) {
        std::string msg = "unknown layer '" + layer_name + "'; available layers:";
        for (const auto& spec : layers_) msg += " " + spec.name;
        throw data_error(msg);
    }
    if (image.height() != input_shape_.height || image.width() != input_shape_.width ||
        image.channels() != input_shape_.channels) {
        throw data_error("extract_features: image shape " + image.shape_string() +
                         " does not match graph input shape " + input_shape_.to_string());
    }

    // Last consumer index per layer, so dead activations can be released early.
    std::map<std::string, std::size_t> last_use;
    for (std::size_t i = 0; i <= target->second; ++i) {
        for (const auto& in : layers_[i].inputs) last_use[in] = i;
    }

    std::map<std::string, Tensor> live;
    for (std::size_t i = 0; i <= target->second; ++i) {
        const LayerSpec& spec = layers_[i];
        Tensor out = evaluate_layer(spec, weights, image, live);
        for (const auto& in : spec.inputs) {
            auto lu = last_use.find(in);
            if (lu != last_use.end() && lu->second == i && in != layer_name) live.erase(in);
        }
        live.emplace(spec.name, std::move(out));
    }

    FeatureVector fv;
    fv.source_layer = layer_name;
    fv.values = live.at(layer_name).values();
    return fv;
}

WeightContainer generate_random_weights(const NetworkGraph& graph, std::uint32_t seed) {
    WeightContainer weights;
    std::mt19937 rng(seed);

    const auto all_shapes = graph.propagate_shapes();
    for (const auto& spec : graph.layers()) {
        int in_channels = 0;
        if (!spec.inputs.empty()) in_channels = all_shapes.at(spec.inputs[0]).channels;

        NamedTensor kernel;
        NamedTensor bias;
        double fan_in = 0.0;
        switch (spec.kind) {
            case LayerKind::ConvStandard:
            case LayerKind::ConvPointwise:
                kernel.dims = {static_cast<std::uint32_t>(spec.kernel_h),
                               static_cast<std::uint32_t>(spec.kernel_w),
                               static_cast<std::uint32_t>(in_channels),
                               static_cast<std::uint32_t>(spec.out_channels)};
                bias.dims = {static_cast<std::uint32_t>(spec.out_channels)};
                fan_in = static_cast<double>(spec.kernel_h) * spec.kernel_w * in_channels;
                break;
            case LayerKind::ConvDepthwise:
                kernel.dims = {static_cast<std::uint32_t>(spec.kernel_h),
                               static_cast<std::uint32_t>(spec.kernel_w),
                               static_cast<std::uint32_t>(in_channels)};
                bias.dims = {static_cast<std::uint32_t>(in_channels)};
                fan_in = static_cast<double>(spec.kernel_h) * spec.kernel_w;
                break;
            default: continue;
        }
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
        kernel.values.resize(kernel.element_count());
        for (float& v : kernel.values) v = static_cast<float>(dist(rng));
        bias.values.assign(bias.element_count(), 0.0f);
        weights.emplace(spec.weight_key, std::move(kernel));
        weights.emplace(spec.weight_key + "/bias", std::move(bias));
    }
    return weights;
}

}  // namespace emoscreen
