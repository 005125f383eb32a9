#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "emoscreen/analytics.hpp"
#include "emoscreen/classifiers.hpp"
#include "emoscreen/cost.hpp"
#include "emoscreen/face_detect.hpp"
#include "emoscreen/net_graph.hpp"
#include "emoscreen/tensor.hpp"

namespace emoscreen {

inline constexpr std::uint32_t kDefaultSeed = 12345;
inline constexpr int kDefaultWindowWidth = 60;

// Reference detection accuracies (%) published for this screening task;
// shown alongside our results in reports, never asserted.
inline constexpr double kReferenceAccuracyLda = 60.0;
inline constexpr double kReferenceAccuracySvm = 73.3;
inline constexpr double kReferenceAccuracyKnn = 60.0;
inline constexpr double kReferenceAccuracyTree = 40.0;
// Published 5-fold CV error (%) of the block_11_add + SVM emotion recognizer
// on a lab-posed benchmark; display-only as well.
inline constexpr double kReferenceEmotionCvErrorPct = 11.1;
double reference_accuracy(ClassifierKind kind);

struct ParticipantRecord {
    std::string id;
    int moca = -1;  // -1 when the manifest only carries a group override
    std::optional<Group> group_override;
    std::string frames_dir;  // one of frames_dir / matrix_csv per record
    std::string matrix_csv;
    double fps = 30.0;

    Group group() const;
};

struct CohortDataset {
    std::vector<ParticipantRecord> records;

    std::size_t size() const { return records.size(); }
    std::vector<Group> groups() const;
};

// JSONL manifest, one participant per line; relative paths are resolved
// against the manifest's directory.
CohortDataset load_cohort_manifest(const std::string& path);

// Lines of "path,label"; relative paths resolved against the manifest dir.
struct LabeledFrame {
    std::string path;
    EmotionLabel label;
};
std::vector<LabeledFrame> load_labeled_frames(const std::string& path);

struct SplitSpec {
    enum class Mode { Fraction, FixedCounts };
    Mode mode = Mode::Fraction;
    double fraction = 0.75;  // train share
    int train_healthy = 0, train_impaired = 0;
    int test_healthy = 0, test_impaired = 0;
    std::uint32_t seed = kDefaultSeed;

    static SplitSpec make_fraction(double p, std::uint32_t seed);
    static SplitSpec make_fixed_counts(int train_healthy, int train_impaired, int test_healthy,
                                       int test_impaired, std::uint32_t seed);
    std::string describe() const;
};

struct SplitResult {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// Disjoint, exhaustive, reproducible under seed; stratified by group in
// fixed-counts mode. `groups` may be empty in fraction mode.
SplitResult split_dataset(std::size_t count, const std::vector<Group>& groups,
                          const SplitSpec& spec);

// ---- Emotion recognition composition --------------------------------------

struct RecognitionComponents {
    Cascade cascade;
    DetectParams detect_params;
    int face_height = 224;
    int face_width = 224;
    // face crop (face_height x face_width x 3) -> deep feature vector
    std::function<std::vector<float>(const Tensor&)> extract;
    // feature vector -> distribution over the 6 canonical emotions
    std::function<std::vector<double>(const std::vector<float>&)> classify;
    bool hard_label = false;
};

// Wires graph + weights + extraction layer into an extract callback.
std::function<std::vector<float>(const Tensor&)> make_feature_extractor(
    const NetworkGraph& graph, const WeightContainer& weights, const std::string& layer_name);

// svm_scores mapped onto the canonical 6-emotion distribution (model labels
// are emotion indices; absent emotions get probability 0).
std::vector<double> emotion_distribution(const SvmModel& model, const std::vector<float>& features);

// Per frame: largest detected face (or a one-hot "other" column when no face
// is found), crop + resize, feature extraction, classification.
EvolutionMatrix run_emotion_recognition(const std::vector<Tensor>& frames,
                                        const std::string& participant_id,
                                        const RecognitionComponents& components);

// ---- MCI screening stage ---------------------------------------------------

struct MciOptions {
    int window_width = kDefaultWindowWidth;
    std::optional<FrameWindow> fixed_window;  // skip selection when set
    KernelSpec svm_kernel;
    double svm_c = 1.0;
    int knn_k = 5;
    int tree_max_depth = 8;
    int tree_min_leaf = 2;
};

struct MciModel {
    AnyModel classifier;
    FrameWindow window;

    ModelMeta meta() const;
};

// Truncates all matrices to the common minimum frame count (warns on stderr
// when counts differ), selects the max-difference window over the retained
// emotions and trains the chosen classifier on the window features.
// Window selection sees only what is passed in; leak-free by construction.
MciModel train_mci(const std::vector<EvolutionMatrix>& matrices, const std::vector<Group>& groups,
                   ClassifierKind kind, const MciOptions& options = {});

struct EvaluationReport {
    ClassifierKind kind = ClassifierKind::Svm;
    double accuracy_pct = 0.0;
    // confusion[true][predicted], indexed by Group.
    std::array<std::array<int, 2>, 2> confusion{{{0, 0}, {0, 0}}};
    int total = 0;
    int correct = 0;
    std::string split_description;
    std::uint32_t seed = 0;
    double train_ms = 0.0;
    double eval_ms = 0.0;
};

EvaluationReport evaluate_mci(const MciModel& model, const std::vector<EvolutionMatrix>& matrices,
                              const std::vector<Group>& groups);

// Occurrence series for both groups and all 6 emotions (healthy first),
// truncated to the cohort-wide minimum frame count.
std::vector<OccurrenceSeries> cohort_occurrence(const std::vector<EvolutionMatrix>& matrices,
                                                const std::vector<Group>& groups);

// Summed |healthy - impaired| occurrence difference over the retained
// emotions, per frame. Input must come from cohort_occurrence().
std::vector<double> cohort_difference_score(const std::vector<OccurrenceSeries>& series);

// ---- Generic classifier protocol helpers -----------------------------------

AnyModel fit_classifier(const LabeledDataset& data, ClassifierKind kind,
                        const MciOptions& options);

// Fold index per sample: shuffled within each class, dealt round-robin with a
// cursor carried across classes, so fold sizes differ by at most 1 globally
// while staying stratified.
std::vector<int> stratified_folds(const std::vector<int>& labels, int folds, std::uint32_t seed);

// Stratified k-fold mean error rate, deterministic under seed.
double cross_validate(const LabeledDataset& data, ClassifierKind kind, int folds,
                      std::uint32_t seed, const MciOptions& options = {});

// ---- Analytic cost report ---------------------------------------------------

struct LayerCost {
    std::string name;
    LayerKind kind = LayerKind::ConvStandard;
    int k = 1, c_in = 0, c_out = 0, h_out = 0, w_out = 0;
    std::uint64_t macs = 0;
};

// Depthwise layer paired with the pointwise layer consuming it (directly or
// through an activation), compared against the equivalent standard conv.
struct SeparableUnitCost {
    std::string depthwise_layer;
    std::string pointwise_layer;
    CostReport report;
    double closed_form_ratio = 0.0;  // 1/c_o + 1/k^2
};

struct GraphCostReport {
    std::vector<LayerCost> layers;              // conv layers only, graph order
    std::vector<SeparableUnitCost> separable_units;
    std::uint64_t total_macs = 0;               // all conv layers
    std::uint64_t total_macs_to_layer = 0;      // up to & including the extraction layer
    std::string extraction_layer;
};

GraphCostReport cost_report(const NetworkGraph& graph, const std::string& extraction_layer);

}  // namespace emoscreen
