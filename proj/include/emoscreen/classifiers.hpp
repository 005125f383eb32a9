#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "emoscreen/errors.hpp"

namespace emoscreen {

struct LabeledDataset {
    std::vector<std::vector<float>> features;
    std::vector<int> labels;

    std::size_t size() const { return features.size(); }
    int dimension() const { return features.empty() ? 0 : static_cast<int>(features[0].size()); }
    std::vector<int> label_set() const;  // sorted unique labels
    // Checks consistent dims, finite values and >= min_classes distinct labels.
    void validate(int min_classes = 2) const;
};

// Per-dimension z-score transform fitted on training data. Dimensions with
// zero variance pass through shifted to 0.
struct Standardizer {
    std::vector<float> mean;
    std::vector<float> inv_std;

    static Standardizer fit(const LabeledDataset& data);
    std::vector<float> apply(std::span<const float> x) const;
};

struct KernelSpec {
    enum class Kind : std::uint32_t { Linear = 0, Rbf = 1 };
    Kind kind = Kind::Linear;
    float gamma = 0.0f;  // RBF only; <= 0 means 1/dimension at fit time
};

// One soft-margin machine for the unordered class pair (first, second);
// y = +1 for `first`. Decision f(x) = sum coef_i K(sv_i, x) + bias.
struct BinarySvm {
    int first = 0;
    int second = 0;
    std::vector<std::vector<float>> support_vectors;
    std::vector<float> dual_coefs;  // alpha_i * y_i, each in [-C, C]
    float bias = 0.0f;
    double equality_residual = 0.0;  // |sum alpha_i y_i| on the stored coefs
};

struct SvmModel {
    std::vector<int> labels;
    KernelSpec kernel;
    float C = 1.0f;
    Standardizer scaler;
    std::vector<BinarySvm> machines;  // pairs (i, j), i < j, in label order
};

struct LdaModel {
    std::vector<int> labels;
    Standardizer scaler;
    // Discriminant delta_c(x) = w_c . x + offset_c (pooled covariance already folded in).
    std::vector<std::vector<float>> weights;
    std::vector<float> offsets;
};

struct KnnModel {
    std::vector<int> labels;
    Standardizer scaler;
    std::vector<std::vector<float>> points;  // standardized training vectors
    std::vector<int> point_labels;
    int k = 5;
};

struct TreeNode {
    int feature = -1;        // -1 marks a leaf
    float threshold = 0.0f;  // go left when x[feature] <= threshold
    int left = -1;
    int right = -1;
    int leaf_label = 0;
};

struct TreeModel {
    std::vector<int> labels;
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    int max_depth = 8;
    int min_leaf = 2;
};

SvmModel svm_fit(const LabeledDataset& data, KernelSpec kernel = {}, double C = 1.0);
int svm_predict(const SvmModel& model, std::span<const float> x);
// One-vs-one vote fractions per class (sums to 1), in model.labels order.
std::vector<double> svm_scores(const SvmModel& model, std::span<const float> x);

LdaModel lda_fit(const LabeledDataset& data);
int lda_predict(const LdaModel& model, std::span<const float> x);

KnnModel knn_fit(const LabeledDataset& data, int k = 5);
int knn_predict(const KnnModel& model, std::span<const float> x);

TreeModel tree_fit(const LabeledDataset& data, int max_depth = 8, int min_leaf = 2);
int tree_predict(const TreeModel& model, std::span<const float> x);

enum class ClassifierKind : std::uint32_t { Svm = 0, Lda = 1, Knn = 2, Tree = 3 };
const char* classifier_kind_name(ClassifierKind kind);
ClassifierKind classifier_kind_from_name(const std::string& name);

using AnyModel = std::variant<SvmModel, LdaModel, KnnModel, TreeModel>;

ClassifierKind model_kind(const AnyModel& model);
int model_predict(const AnyModel& model, std::span<const float> x);

// Extra fields carried alongside the classifier in the model file.
struct ModelMeta {
    std::map<int, std::string> label_names;
    bool has_window = false;
    std::uint32_t window_start = 0;  // 0-based frame index
    std::uint32_t window_width = 0;
};

// EMSM container: magic, format version, classifier kind tag, label map,
// then all payload tensors as an embedded NWF1 sub-block.
void save_model(const AnyModel& model, const ModelMeta& meta, const std::string& path);
struct SavedModel {
    AnyModel model;
    ModelMeta meta;
};
SavedModel load_model(const std::string& path);

}  // namespace emoscreen
