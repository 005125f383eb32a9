#include <cstring>
#include <fstream>

#include "emoscreen/classifiers.hpp"
#include "emoscreen/nwf.hpp"

namespace emoscreen {

namespace {

constexpr char kMagic[4] = {'E', 'M', 'S', 'M'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                                static_cast<unsigned char>((v >> 8) & 0xff),
                                static_cast<unsigned char>((v >> 16) & 0xff),
                                static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in, const char* what) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) {
        throw data_error(std::string("model file: truncated while reading ") + what);
    }
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

NamedTensor vec_tensor(const std::vector<float>& v) {
    NamedTensor t;
    t.dims = {static_cast<std::uint32_t>(v.size())};
    t.values = v;
    return t;
}

NamedTensor mat_tensor(const std::vector<std::vector<float>>& rows, std::uint32_t cols) {
    NamedTensor t;
    t.dims = {static_cast<std::uint32_t>(rows.size()), cols};
    t.values.reserve(rows.size() * cols);
    for (const auto& r : rows) t.values.insert(t.values.end(), r.begin(), r.end());
    return t;
}

std::vector<std::vector<float>> mat_rows(const NamedTensor& t, const char* what) {
    if (t.dims.size() != 2) throw data_error(std::string("model file: ") + what + " must be rank 2");
    std::vector<std::vector<float>> rows(t.dims[0]);
    for (std::uint32_t i = 0; i < t.dims[0]; ++i) {
        rows[i].assign(t.values.begin() + static_cast<std::ptrdiff_t>(i) * t.dims[1],
                       t.values.begin() + static_cast<std::ptrdiff_t>(i + 1) * t.dims[1]);
    }
    return rows;
}

const NamedTensor& need(const WeightContainer& payload, const std::string& key) {
    auto it = payload.find(key);
    if (it == payload.end()) throw data_error("model file: missing payload tensor '" + key + "'");
    return it->second;
}

void pack_scaler(WeightContainer& payload, const Standardizer& scaler) {
    payload["scaler/mean"] = vec_tensor(scaler.mean);
    payload["scaler/inv_std"] = vec_tensor(scaler.inv_std);
}

Standardizer unpack_scaler(const WeightContainer& payload) {
    Standardizer s;
    s.mean = need(payload, "scaler/mean").values;
    s.inv_std = need(payload, "scaler/inv_std").values;
    return s;
}

WeightContainer pack_model(const AnyModel& model) {
    WeightContainer payload;
    if (const auto* svm = std::get_if<SvmModel>(&model)) {
        pack_scaler(payload, svm->scaler);
        payload["svm/config"] =
            vec_tensor({svm->C, svm->kernel.gamma, static_cast<float>(svm->kernel.kind),
                        static_cast<float>(svm->machines.size())});
        const std::uint32_t dim = static_cast<std::uint32_t>(svm->scaler.mean.size());
        for (std::size_t m = 0; m < svm->machines.size(); ++m) {
            const BinarySvm& machine = svm->machines[m];
            const std::string prefix = "svm/m" + std::to_string(m) + "/";
            payload[prefix + "sv"] = mat_tensor(machine.support_vectors, dim);
            payload[prefix + "coef"] = vec_tensor(machine.dual_coefs);
            payload[prefix + "meta"] =
                vec_tensor({static_cast<float>(machine.first), static_cast<float>(machine.second),
                            machine.bias, static_cast<float>(machine.equality_residual)});
        }
    } else if (const auto* lda = std::get_if<LdaModel>(&model)) {
        pack_scaler(payload, lda->scaler);
        payload["lda/weights"] =
            mat_tensor(lda->weights, static_cast<std::uint32_t>(lda->scaler.mean.size()));
        payload["lda/offsets"] = vec_tensor(lda->offsets);
    } else if (const auto* knn = std::get_if<KnnModel>(&model)) {
        pack_scaler(payload, knn->scaler);
        payload["knn/points"] =
            mat_tensor(knn->points, static_cast<std::uint32_t>(knn->scaler.mean.size()));
        std::vector<float> labels(knn->point_labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i) {
            labels[i] = static_cast<float>(knn->point_labels[i]);
        }
        payload["knn/labels"] = vec_tensor(labels);
        payload["knn/config"] = vec_tensor({static_cast<float>(knn->k)});
    } else if (const auto* tree = std::get_if<TreeModel>(&model)) {
        std::vector<std::vector<float>> rows;
        rows.reserve(tree->nodes.size());
        for (const TreeNode& n : tree->nodes) {
            rows.push_back({static_cast<float>(n.feature), n.threshold,
                            static_cast<float>(n.left), static_cast<float>(n.right),
                            static_cast<float>(n.leaf_label)});
        }
        payload["tree/nodes"] = mat_tensor(rows, 5);
        payload["tree/config"] =
            vec_tensor({static_cast<float>(tree->max_depth), static_cast<float>(tree->min_leaf)});
    }
    return payload;
}

AnyModel unpack_model(ClassifierKind kind, const std::vector<int>& labels,
                      const WeightContainer& payload) {
    switch (kind) {
        case ClassifierKind::Svm: {
            SvmModel svm;
            svm.labels = labels;
            svm.scaler = unpack_scaler(payload);
            const auto& config = need(payload, "svm/config").values;
            if (config.size() != 4) throw data_error("model file: bad svm/config");
            svm.C = config[0];
            svm.kernel.gamma = config[1];
            svm.kernel.kind = static_cast<KernelSpec::Kind>(static_cast<std::uint32_t>(config[2]));
            const std::size_t machine_count = static_cast<std::size_t>(config[3]);
            for (std::size_t m = 0; m < machine_count; ++m) {
                const std::string prefix = "svm/m" + std::to_string(m) + "/";
                BinarySvm machine;
                machine.support_vectors = mat_rows(need(payload, prefix + "sv"), "svm sv");
                machine.dual_coefs = need(payload, prefix + "coef").values;
                const auto& meta = need(payload, prefix + "meta").values;
                if (meta.size() != 4) throw data_error("model file: bad svm machine meta");
                machine.first = static_cast<int>(meta[0]);
                machine.second = static_cast<int>(meta[1]);
                machine.bias = meta[2];
                machine.equality_residual = meta[3];
                svm.machines.push_back(std::move(machine));
            }
            return svm;
        }
        case ClassifierKind::Lda: {
            LdaModel lda;
            lda.labels = labels;
            lda.scaler = unpack_scaler(payload);
            lda.weights = mat_rows(need(payload, "lda/weights"), "lda weights");
            lda.offsets = need(payload, "lda/offsets").values;
            return lda;
        }
        case ClassifierKind::Knn: {
            KnnModel knn;
            knn.labels = labels;
            knn.scaler = unpack_scaler(payload);
            knn.points = mat_rows(need(payload, "knn/points"), "knn points");
            for (float v : need(payload, "knn/labels").values) {
                knn.point_labels.push_back(static_cast<int>(v));
            }
            const auto& config = need(payload, "knn/config").values;
            if (config.size() != 1) throw data_error("model file: bad knn/config");
            knn.k = static_cast<int>(config[0]);
            return knn;
        }
        case ClassifierKind::Tree: {
            TreeModel tree;
            tree.labels = labels;
            for (const auto& row : mat_rows(need(payload, "tree/nodes"), "tree nodes")) {
                if (row.size() != 5) throw data_error("model file: bad tree node row");
                TreeNode n;
                n.feature = static_cast<int>(row[0]);
                n.threshold = row[1];
                n.left = static_cast<int>(row[2]);
                n.right = static_cast<int>(row[3]);
                n.leaf_label = static_cast<int>(row[4]);
                tree.nodes.push_back(n);
            }
            const auto& config = need(payload, "tree/config").values;
            if (config.size() != 2) throw data_error("model file: bad tree/config");
            tree.max_depth = static_cast<int>(config[0]);
            tree.min_leaf = static_cast<int>(config[1]);
            return tree;
        }
    }
    throw data_error("model file: unknown classifier kind tag");
}

std::vector<int> model_labels(const AnyModel& model) {
    return std::visit([](const auto& m) { return m.labels; }, model);
}

}  // namespace

void save_model(const AnyModel& model, const ModelMeta& meta, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot create model file '" + path + "'");
    out.write(kMagic, 4);
    write_u32(out, kVersion);
    write_u32(out, static_cast<std::uint32_t>(model_kind(model)));
    write_u32(out, meta.has_window ? 1u : 0u);
    write_u32(out, meta.window_start);
    write_u32(out, meta.window_width);

    const std::vector<int> labels = model_labels(model);
    write_u32(out, static_cast<std::uint32_t>(labels.size()));
    for (int label : labels) {
        write_u32(out, static_cast<std::uint32_t>(label));
        auto it = meta.label_names.find(label);
        const std::string name = it == meta.label_names.end() ? std::string() : it->second;
        write_u32(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
    }
    write_nwf1(pack_model(model), out);
    if (!out) throw io_error("short write to model file '" + path + "'");
}

SavedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open model file '" + path + "'");
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
        throw data_error("model file: bad magic bytes");
    }
    const std::uint32_t version = read_u32(in, "version");
    if (version != kVersion) {
        throw data_error("model file: unsupported format version " + std::to_string(version));
    }
    const std::uint32_t kind_tag = read_u32(in, "kind");
    if (kind_tag > static_cast<std::uint32_t>(ClassifierKind::Tree)) {
        throw data_error("model file: unknown classifier kind tag " + std::to_string(kind_tag));
    }
    SavedModel result;
    result.meta.has_window = read_u32(in, "flags") != 0;
    result.meta.window_start = read_u32(in, "window start");
    result.meta.window_width = read_u32(in, "window width");

    const std::uint32_t label_count = read_u32(in, "label count");
    std::vector<int> labels;
    for (std::uint32_t i = 0; i < label_count; ++i) {
        const int label = static_cast<int>(read_u32(in, "label"));
        labels.push_back(label);
        const std::uint32_t name_len = read_u32(in, "label name length");
        std::string name(name_len, '\0');
        if (name_len > 0 && !in.read(name.data(), name_len)) {
            throw data_error("model file: truncated label name");
        }
        if (!name.empty()) result.meta.label_names[label] = name;
    }
    const WeightContainer payload = read_nwf1(in);
    result.model = unpack_model(static_cast<ClassifierKind>(kind_tag), labels, payload);
    return result;
}

}  // namespace emoscreen
