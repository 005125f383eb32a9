#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "emoscreen/conv.hpp"
#include "emoscreen/net_graph.hpp"
#include "emoscreen/nwf.hpp"
#include "support.hpp"

using namespace emoscreen;
using testsupport::TempDir;

TEST_SUITE_BEGIN("net_graph");

namespace {

// Independent shape calculator working on the raw JSON, not the graph code.
std::map<std::string, std::array<int, 3>> oracle_shapes(const std::string& topology_path) {
    std::ifstream in(topology_path);
    REQUIRE(in.good());
    nlohmann::json doc = nlohmann::json::parse(in);
    std::map<std::string, std::array<int, 3>> shapes;
    const auto& input = doc.at("input_shape");
    const std::array<int, 3> input_shape = {input.at(0), input.at(1), input.at(2)};
    for (const auto& layer : doc.at("layers")) {
        const std::string kind = layer.at("kind");
        const std::string name = layer.at("name");
        auto in_of = [&](int i) {
            return shapes.at(layer.at("inputs").at(i).get<std::string>());
        };
        auto conv_dim = [](int in, int k, int p, int s) { return (in + 2 * p - k) / s + 1; };
        if (kind == "input_normalize") {
            shapes[name] = input_shape;
        } else if (kind == "conv_standard" || kind == "conv_pointwise") {
            const auto src = in_of(0);
            const int kh = layer.at("kernel").at(0);
            const int kw = layer.at("kernel").at(1);
            const int s = layer.value("stride", 1);
            const int p = layer.value("padding", 0);
            shapes[name] = {conv_dim(src[0], kh, p, s), conv_dim(src[1], kw, p, s),
                            layer.at("out_channels").get<int>()};
        } else if (kind == "conv_depthwise") {
            const auto src = in_of(0);
            const int kh = layer.at("kernel").at(0);
            const int kw = layer.at("kernel").at(1);
            const int s = layer.value("stride", 1);
            const int p = layer.value("padding", 0);
            shapes[name] = {conv_dim(src[0], kh, p, s), conv_dim(src[1], kw, p, s), src[2]};
        } else if (kind == "relu6") {
            shapes[name] = in_of(0);
        } else if (kind == "residual_add") {
            REQUIRE(in_of(0) == in_of(1));
            shapes[name] = in_of(0);
        } else if (kind == "global_avg_pool") {
            shapes[name] = {1, 1, in_of(0)[2]};
        } else {
            FAIL("unknown kind in topology: ", kind);
        }
    }
    return shapes;
}

const char* kToyTopology = R"({
  "input_shape": [4, 4, 3],
  "layers": [
    {"name": "input_normalize", "kind": "input_normalize", "inputs": []},
    {"name": "pw", "kind": "conv_pointwise", "inputs": ["input_normalize"],
     "kernel": [1, 1], "out_channels": 3},
    {"name": "pw_relu", "kind": "relu6", "inputs": ["pw"]},
    {"name": "dw", "kind": "conv_depthwise", "inputs": ["pw_relu"],
     "kernel": [3, 3], "stride": 1, "padding": 1},
    {"name": "proj", "kind": "conv_pointwise", "inputs": ["dw"],
     "kernel": [1, 1], "out_channels": 3},
    {"name": "block_add", "kind": "residual_add", "inputs": ["pw", "proj"]},
    {"name": "pool", "kind": "global_avg_pool", "inputs": ["block_add"]}
  ]
})";

WeightContainer identity_toy_weights() {
    WeightContainer weights;
    NamedTensor pw;
    pw.dims = {1, 1, 3, 3};
    pw.values = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    weights["pw"] = pw;
    weights["proj"] = pw;
    NamedTensor dw;
    dw.dims = {3, 3, 3};
    dw.values.assign(27, 0.0f);
    for (int c = 0; c < 3; ++c) dw.values[(1 * 3 + 1) * 3 + c] = 1.0f;
    weights["dw"] = dw;
    return weights;
}

}  // namespace

TEST_CASE("NWF1 round-trip, single tensor") {
    TempDir tmp("nwf");
    WeightContainer weights;
    NamedTensor t;
    t.dims = {1, 1, 1, 1};
    t.values = {2.0f};
    weights["w"] = t;
    save_weights(weights, tmp.file("w.nwf"));
    const WeightContainer loaded = load_weights(tmp.file("w.nwf"));
    REQUIRE(loaded.size() == 1);
    CHECK(loaded.at("w").dims == std::vector<std::uint32_t>{1, 1, 1, 1});
    CHECK(loaded.at("w").values == std::vector<float>{2.0f});
}

TEST_CASE("NWF1 empty container and error cases") {
    TempDir tmp("nwf_err");
    save_weights({}, tmp.file("empty.nwf"));
    CHECK(load_weights(tmp.file("empty.nwf")).empty());

    {
        std::ofstream bad(tmp.file("bad.nwf"), std::ios::binary);
        bad << "XXXX\x01\x00\x00\x00";
    }
    CHECK_THROWS_AS(load_weights(tmp.file("bad.nwf")), data_error);

    {
        std::ofstream trunc(tmp.file("trunc.nwf"), std::ios::binary);
        trunc << "NWF1\x02\x00\x00";  // count cut short
    }
    CHECK_THROWS_AS(load_weights(tmp.file("trunc.nwf")), data_error);
    CHECK_THROWS_AS(load_weights(tmp.file("missing.nwf")), io_error);
}

TEST_CASE("NWF1 rejects duplicate tensor names") {
    std::stringstream stream;
    // Two tensors both named "a", rank 1, one element.
    const auto put_tensor = [&] {
        const std::uint32_t name_len = 1, rank = 1, dim = 1, bits = 0;
        stream.write(reinterpret_cast<const char*>(&name_len), 4);
        stream << 'a';
        stream.write(reinterpret_cast<const char*>(&rank), 4);
        stream.write(reinterpret_cast<const char*>(&dim), 4);
        stream.write(reinterpret_cast<const char*>(&bits), 4);
    };
    stream << "NWF1";
    const std::uint32_t count = 2;
    stream.write(reinterpret_cast<const char*>(&count), 4);
    put_tensor();
    put_tensor();
    CHECK_THROWS_WITH_AS(read_nwf1(stream), doctest::Contains("duplicate"), data_error);
}

TEST_CASE("single normalize layer maps 127.5 to zero") {
    const NetworkGraph graph = NetworkGraph::from_json_text(R"({
      "input_shape": [2, 2, 1],
      "layers": [{"name": "norm", "kind": "input_normalize", "inputs": []}]
    })");
    const Tensor image(2, 2, 1, 127.5f);
    const auto outputs = graph.forward({}, image);
    for (float v : outputs.at("norm").values()) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("normalize then identity pointwise returns the normalized input") {
    const NetworkGraph graph = NetworkGraph::from_json_text(R"({
      "input_shape": [2, 2, 3],
      "layers": [
        {"name": "norm", "kind": "input_normalize", "inputs": []},
        {"name": "pw", "kind": "conv_pointwise", "inputs": ["norm"],
         "kernel": [1, 1], "out_channels": 3}
      ]
    })");
    WeightContainer weights;
    NamedTensor identity;
    identity.dims = {1, 1, 3, 3};
    identity.values = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    weights["pw"] = identity;

    std::mt19937 rng(9);
    const Tensor image = testsupport::random_tensor(2, 2, 3, rng, 0.0f, 255.0f);
    const auto outputs = graph.forward(weights, image);
    const Tensor& normalized = outputs.at("norm");
    const Tensor& through = outputs.at("pw");
    CHECK(testsupport::max_rel_diff(normalized, through) < 1e-6);
    for (std::size_t i = 0; i < image.size(); ++i) {
        CHECK(normalized.values()[i] ==
              doctest::Approx(image.values()[i] / 127.5f - 1.0f).epsilon(1e-6));
    }
}

TEST_CASE("toy graph forward equals a straight-line re-evaluation with tensor ops") {
    const NetworkGraph graph = NetworkGraph::from_json_text(kToyTopology);
    const WeightContainer weights = generate_random_weights(graph, 77);
    std::mt19937 rng(10);
    const Tensor image = testsupport::random_tensor(4, 4, 3, rng, 0.0f, 255.0f);
    const auto outputs = graph.forward(weights, image);

    // Sequential oracle: apply the ops by hand in file order.
    Tensor norm = image;
    for (float& v : norm.values()) v = v / 127.5f - 1.0f;
    auto conv_of = [&](const std::string& key, int ci, int co) {
        ConvWeights w;
        const NamedTensor& kernel = weights.at(key);
        w.kernel_h = static_cast<int>(kernel.dims[0]);
        w.kernel_w = static_cast<int>(kernel.dims[1]);
        w.in_channels = ci;
        w.out_channels = co;
        w.weights = kernel.values;
        w.bias = weights.at(key + "/bias").values;
        return w;
    };
    const Tensor pw = conv2d_pointwise(norm, conv_of("pw", 3, 3));
    const Tensor pw_relu = relu6(pw);
    DepthwiseWeights dw;
    dw.kernel_h = 3;
    dw.kernel_w = 3;
    dw.channels = 3;
    dw.padding = 1;
    dw.weights = weights.at("dw").values;
    dw.bias = weights.at("dw/bias").values;
    const Tensor dw_out = conv2d_depthwise(pw_relu, dw);
    const Tensor proj = conv2d_pointwise(dw_out, conv_of("proj", 3, 3));
    const Tensor added = residual_add(pw, proj);
    const Tensor pooled = global_avg_pool(added);

    CHECK(testsupport::max_rel_diff(outputs.at("pw"), pw) == 0.0);
    CHECK(testsupport::max_rel_diff(outputs.at("dw"), dw_out) == 0.0);
    CHECK(testsupport::max_rel_diff(outputs.at("block_add"), added) == 0.0);
    CHECK(testsupport::max_rel_diff(outputs.at("pool"), pooled) == 0.0);
}

TEST_CASE("identity weights on a residual chain double the input") {
    const NetworkGraph graph = NetworkGraph::from_json_text(kToyTopology);
    std::mt19937 rng(12);
    // Pixels above 127.5 keep the normalized values inside relu6's linear range.
    const Tensor image = testsupport::random_tensor(4, 4, 3, rng, 130.0f, 255.0f);
    const auto outputs = graph.forward(identity_toy_weights(), image);
    const Tensor& base = outputs.at("pw");
    const Tensor& added = outputs.at("block_add");
    for (std::size_t i = 0; i < base.size(); ++i) {
        CHECK(added.values()[i] == doctest::Approx(2.0f * base.values()[i]).epsilon(1e-6));
    }
}

TEST_CASE("extract_features flattens the named layer and validates names") {
    const NetworkGraph graph = NetworkGraph::from_json_text(kToyTopology);
    const WeightContainer weights = generate_random_weights(graph, 5);
    std::mt19937 rng(13);
    const Tensor image = testsupport::random_tensor(4, 4, 3, rng, 0.0f, 255.0f);

    const FeatureVector fv = graph.extract_features(weights, image, "block_add");
    CHECK(fv.length() == 4 * 4 * 3);
    CHECK(fv.source_layer == "block_add");
    const auto outputs = graph.forward(weights, image);
    CHECK(fv.values == outputs.at("block_add").values());

    CHECK_THROWS_WITH_AS(graph.extract_features(weights, image, "no_such_layer"),
                         doctest::Contains("available layers"), data_error);
}

TEST_CASE("list_layers: empty, single and ordering") {
    CHECK(NetworkGraph::from_json_text(R"({"input_shape":[1,1,1],"layers":[]})")
              .list_layers()
              .empty());
    const auto single = NetworkGraph::from_json_text(
        R"({"input_shape":[1,1,1],"layers":[{"name":"norm","kind":"input_normalize","inputs":[]}]})");
    CHECK(single.list_layers() == std::vector<std::string>{"norm"});

    const NetworkGraph full = NetworkGraph::from_json_file(testsupport::data_dir() +
                                                           "/mobilenet_v2_topology.json");
    const auto names = full.list_layers();
    const auto pos = [&](const std::string& name) {
        return std::find(names.begin(), names.end(), name) - names.begin();
    };
    CHECK(pos("block_11_add") < pos("block_15_add"));
    CHECK(pos("block_15_add") < static_cast<std::ptrdiff_t>(names.size()));
}

TEST_CASE("topology validation errors") {
    CHECK_THROWS_AS(NetworkGraph::from_json_text("{not json"), data_error);
    // duplicate names
    CHECK_THROWS_AS(NetworkGraph::from_json_text(R"({"input_shape":[1,1,1],"layers":[
        {"name":"a","kind":"input_normalize","inputs":[]},
        {"name":"a","kind":"relu6","inputs":["a"]}]})"),
                    data_error);
    // input does not precede the layer
    CHECK_THROWS_AS(NetworkGraph::from_json_text(R"({"input_shape":[1,1,1],"layers":[
        {"name":"r","kind":"relu6","inputs":["later"]},
        {"name":"later","kind":"input_normalize","inputs":[]}]})"),
                    data_error);
    // residual_add input count
    CHECK_THROWS_AS(NetworkGraph::from_json_text(R"({"input_shape":[1,1,1],"layers":[
        {"name":"n","kind":"input_normalize","inputs":[]},
        {"name":"add","kind":"residual_add","inputs":["n"]}]})"),
                    data_error);
}

TEST_CASE("shape propagation matches the JSON oracle on the shipped topology") {
    const std::string path = testsupport::data_dir() + "/mobilenet_v2_topology.json";
    const NetworkGraph graph = NetworkGraph::from_json_file(path);
    const auto want = oracle_shapes(path);
    const auto got = graph.propagate_shapes();
    REQUIRE(got.size() == want.size());
    for (const auto& [name, shape] : want) {
        REQUIRE(got.count(name));
        CHECK(got.at(name).height == shape[0]);
        CHECK(got.at(name).width == shape[1]);
        CHECK(got.at(name).channels == shape[2]);
    }
    // Feature lengths at the two extraction layers of interest.
    const auto b11 = want.at("block_11_add");
    CHECK(b11[0] * b11[1] * b11[2] == 18816);
    const auto b15 = want.at("block_15_add");
    CHECK(b15[0] * b15[1] * b15[2] == 7840);
}

TEST_CASE("binding errors carry the layer name") {
    const NetworkGraph graph = NetworkGraph::from_json_text(kToyTopology);
    WeightContainer weights = generate_random_weights(graph, 5);
    weights.at("dw").dims = {3, 3, 2};  // wrong channel count
    weights.at("dw").values.resize(18);
    std::mt19937 rng(14);
    const Tensor image = testsupport::random_tensor(4, 4, 3, rng, 0.0f, 255.0f);
    CHECK_THROWS_WITH_AS(graph.forward(weights, image), doctest::Contains("'dw'"), data_error);

    WeightContainer missing = generate_random_weights(graph, 5);
    missing.erase("proj");
    CHECK_THROWS_WITH_AS(graph.forward(missing, image), doctest::Contains("'proj'"), data_error);
}

TEST_CASE("forward is deterministic across runs") {
    const NetworkGraph graph = NetworkGraph::from_json_text(kToyTopology);
    const WeightContainer weights = generate_random_weights(graph, 21);
    std::mt19937 rng(15);
    const Tensor image = testsupport::random_tensor(4, 4, 3, rng, 0.0f, 255.0f);
    const auto a = graph.forward(weights, image);
    const auto b = graph.forward(weights, image);
    for (const auto& [name, tensor] : a) {
        CHECK(tensor.values() == b.at(name).values());
    }
    // Same seed, same weights.
    const WeightContainer again = generate_random_weights(graph, 21);
    for (const auto& [name, tensor] : weights) {
        CHECK(tensor.values == again.at(name).values);
    }
}

TEST_SUITE_END();
