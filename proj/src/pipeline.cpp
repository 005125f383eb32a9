#include "emoscreen/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <set>

#include <json.hpp>

#include "emoscreen/image_io.hpp"

namespace emoscreen {

double reference_accuracy(ClassifierKind kind) {
    switch (kind) {
        case ClassifierKind::Svm: return kReferenceAccuracySvm;
        case ClassifierKind::Lda: return kReferenceAccuracyLda;
        case ClassifierKind::Knn: return kReferenceAccuracyKnn;
        case ClassifierKind::Tree: return kReferenceAccuracyTree;
    }
    return 0.0;
}

Group ParticipantRecord::group() const {
    if (group_override) return *group_override;
    if (moca < 0) throw data_error("participant '" + id + "': neither MoCA score nor group given");
    return assign_group(moca);
}

std::vector<Group> CohortDataset::groups() const {
    std::vector<Group> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.group());
    return out;
}

CohortDataset load_cohort_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open cohort manifest '" + path + "'");
    const std::filesystem::path base = std::filesystem::path(path).parent_path();
    auto resolve = [&](const std::string& p) {
        if (p.empty() || std::filesystem::path(p).is_absolute()) return p;
        return (base / p).string();
    };

    CohortDataset cohort;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(line);
            ParticipantRecord record;
            record.id = doc.at("id").get<std::string>();
            if (doc.contains("moca")) record.moca = doc.at("moca").get<int>();
            if (doc.contains("group")) {
                const std::string g = doc.at("group").get<std::string>();
                if (g == "healthy") {
                    record.group_override = Group::Healthy;
                } else if (g == "impaired") {
                    record.group_override = Group::Impaired;
                } else {
                    throw data_error("group must be healthy|impaired, got '" + g + "'");
                }
            }
            record.frames_dir = resolve(doc.value("frames_dir", ""));
            record.matrix_csv = resolve(doc.value("matrix_csv", ""));
            record.fps = doc.value("fps", 30.0);
            if (record.frames_dir.empty() && record.matrix_csv.empty()) {
                throw data_error("record needs frames_dir or matrix_csv");
            }
            if (!record.frames_dir.empty() && !record.matrix_csv.empty()) {
                throw data_error("record must not set both frames_dir and matrix_csv");
            }
            cohort.records.push_back(std::move(record));
        } catch (const nlohmann::json::exception& e) {
            throw data_error("manifest '" + path + "' line " + std::to_string(line_no) + ": " +
                             e.what());
        } catch (const data_error& e) {
            throw data_error("manifest '" + path + "' line " + std::to_string(line_no) + ": " +
                             e.what());
        }
    }
    if (cohort.records.empty()) throw data_error("manifest '" + path + "': no records");
    return cohort;
}

std::vector<LabeledFrame> load_labeled_frames(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open frame manifest '" + path + "'");
    const std::filesystem::path base = std::filesystem::path(path).parent_path();
    std::vector<LabeledFrame> frames;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.rfind(',');
        if (comma == std::string::npos) {
            throw data_error("frame manifest '" + path + "' line " + std::to_string(line_no) +
                             ": expected 'path,label'");
        }
        LabeledFrame frame;
        frame.path = line.substr(0, comma);
        if (!std::filesystem::path(frame.path).is_absolute()) {
            frame.path = (base / frame.path).string();
        }
        frame.label = emotion_from_name(line.substr(comma + 1));
        frames.push_back(std::move(frame));
    }
    if (frames.empty()) throw data_error("frame manifest '" + path + "': no entries");
    return frames;
}

SplitSpec SplitSpec::make_fraction(double p, std::uint32_t seed) {
    if (!(p > 0.0 && p < 1.0)) throw data_error("split fraction must be in (0, 1)");
    SplitSpec spec;
    spec.mode = Mode::Fraction;
    spec.fraction = p;
    spec.seed = seed;
    return spec;
}

SplitSpec SplitSpec::make_fixed_counts(int train_healthy, int train_impaired, int test_healthy,
                                       int test_impaired, std::uint32_t seed) {
    if (train_healthy < 0 || train_impaired < 0 || test_healthy < 0 || test_impaired < 0) {
        throw data_error("split counts must be non-negative");
    }
    SplitSpec spec;
    spec.mode = Mode::FixedCounts;
    spec.train_healthy = train_healthy;
    spec.train_impaired = train_impaired;
    spec.test_healthy = test_healthy;
    spec.test_impaired = test_impaired;
    spec.seed = seed;
    return spec;
}

std::string SplitSpec::describe() const {
    if (mode == Mode::Fraction) {
        return "fraction(" + std::to_string(fraction) + ", seed " + std::to_string(seed) + ")";
    }
    return "fixed_counts(" + std::to_string(train_healthy) + "," + std::to_string(train_impaired) +
           "," + std::to_string(test_healthy) + "," + std::to_string(test_impaired) + ", seed " +
           std::to_string(seed) + ")";
}

SplitResult split_dataset(std::size_t count, const std::vector<Group>& groups,
                          const SplitSpec& spec) {
    SplitResult result;
    std::mt19937 rng(spec.seed);
    if (spec.mode == SplitSpec::Mode::Fraction) {
        std::vector<std::size_t> idx(count);
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng);
        const std::size_t train_count =
            static_cast<std::size_t>(std::llround(spec.fraction * static_cast<double>(count)));
        if (train_count == 0 || train_count >= count) {
            throw data_error("split fraction leaves an empty side");
        }
        result.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(train_count));
        result.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(train_count), idx.end());
        return result;
    }

    if (groups.size() != count) throw data_error("split: group labels required");
    std::vector<std::size_t> healthy;
    std::vector<std::size_t> impaired;
    for (std::size_t i = 0; i < count; ++i) {
        (groups[i] == Group::Healthy ? healthy : impaired).push_back(i);
    }
    const std::size_t want_h = static_cast<std::size_t>(spec.train_healthy + spec.test_healthy);
    const std::size_t want_i = static_cast<std::size_t>(spec.train_impaired + spec.test_impaired);
    if (want_h != healthy.size() || want_i != impaired.size()) {
        throw data_error("split counts infeasible: cohort has " + std::to_string(healthy.size()) +
                         " healthy / " + std::to_string(impaired.size()) + " impaired, spec wants " +
                         std::to_string(want_h) + " / " + std::to_string(want_i));
    }
    std::shuffle(healthy.begin(), healthy.end(), rng);
    std::shuffle(impaired.begin(), impaired.end(), rng);
    result.train.assign(healthy.begin(), healthy.begin() + spec.train_healthy);
    result.train.insert(result.train.end(), impaired.begin(),
                        impaired.begin() + spec.train_impaired);
    result.test.assign(healthy.begin() + spec.train_healthy, healthy.end());
    result.test.insert(result.test.end(), impaired.begin() + spec.train_impaired, impaired.end());
    std::sort(result.train.begin(), result.train.end());
    std::sort(result.test.begin(), result.test.end());
    return result;
}

std::function<std::vector<float>(const Tensor&)> make_feature_extractor(
    const NetworkGraph& graph, const WeightContainer& weights, const std::string& layer_name) {
    if (!graph.has_layer(layer_name)) {
        std::string msg = "unknown layer '" + layer_name + "'; available layers:";
        for (const auto& name : graph.list_layers()) msg += " " + name;
        throw data_error(msg);
    }
    return [&graph, &weights, layer_name](const Tensor& face) {
        return graph.extract_features(weights, face, layer_name).values;
    };
}

std::vector<double> emotion_distribution(const SvmModel& model,
                                         const std::vector<float>& features) {
    const std::vector<double> scores = svm_scores(model, features);
    std::vector<double> dist(kEmotionCount, 0.0);
    for (std::size_t i = 0; i < model.labels.size(); ++i) {
        const int label = model.labels[i];
        if (label < 0 || label >= kEmotionCount) {
            throw data_error("emotion model label " + std::to_string(label) +
                             " outside the canonical 6-emotion set");
        }
        dist[label] = scores[i];
    }
    return dist;
}

EvolutionMatrix run_emotion_recognition(const std::vector<Tensor>& frames,
                                        const std::string& participant_id,
                                        const RecognitionComponents& components) {
    if (frames.empty()) throw data_error("recognition: no frames for '" + participant_id + "'");
    EvolutionMatrix matrix(participant_id, static_cast<int>(frames.size()));
    for (std::size_t f = 0; f < frames.size(); ++f) {
        try {
            const Tensor gray = to_gray(frames[f]);
            const auto detections =
                detect_faces(gray, components.cascade, components.detect_params);
            const auto face = largest_detection(detections);
            if (!face) {
                // No-face policy: record the frame as "other".
                std::vector<double> dist(kEmotionCount, 0.0);
                dist[static_cast<int>(EmotionLabel::Other)] = 1.0;
                matrix.set_column(static_cast<int>(f), dist);
                continue;
            }
            const Tensor crop = crop_and_resize(frames[f], *face, components.face_height,
                                                components.face_width);
            const std::vector<float> features = components.extract(crop);
            std::vector<double> dist = components.classify(features);
            if (dist.size() != kEmotionCount) {
                throw data_error("classifier returned " + std::to_string(dist.size()) +
                                 " probabilities, expected 6");
            }
            if (components.hard_label) {
                int best = 0;
                for (int e = 1; e < kEmotionCount; ++e) {
                    if (dist[e] > dist[best]) best = e;
                }
                std::fill(dist.begin(), dist.end(), 0.0);
                dist[best] = 1.0;
            }
            matrix.set_column(static_cast<int>(f), dist);
        } catch (const std::exception& e) {
            throw data_error("participant '" + participant_id + "' frame " +
                             std::to_string(f + 1) + ": " + e.what());
        }
    }
    matrix.validate();
    return matrix;
}

namespace {

int common_frames(const std::vector<EvolutionMatrix>& matrices) {
    if (matrices.empty()) throw data_error("no evolution matrices given");
    int min_frames = matrices.front().frames();
    int max_frames = min_frames;
    for (const auto& m : matrices) {
        min_frames = std::min(min_frames, m.frames());
        max_frames = std::max(max_frames, m.frames());
    }
    if (min_frames != max_frames) {
        std::cerr << "warning: unequal frame counts (" << min_frames << ".." << max_frames
                  << "), truncating to " << min_frames << "\n";
    }
    return min_frames;
}

std::vector<EvolutionMatrix> truncated(const std::vector<EvolutionMatrix>& matrices, int frames) {
    std::vector<EvolutionMatrix> out = matrices;
    for (auto& m : out) m.truncate(frames);
    return out;
}

std::vector<EvolutionMatrix> group_subset(const std::vector<EvolutionMatrix>& matrices,
                                          const std::vector<Group>& groups, Group want) {
    std::vector<EvolutionMatrix> out;
    for (std::size_t i = 0; i < matrices.size(); ++i) {
        if (groups[i] == want) out.push_back(matrices[i]);
    }
    return out;
}

}  // namespace

std::vector<OccurrenceSeries> cohort_occurrence(const std::vector<EvolutionMatrix>& matrices,
                                                const std::vector<Group>& groups) {
    if (matrices.size() != groups.size()) throw data_error("matrix/group count mismatch");
    const int frames = common_frames(matrices);
    const std::vector<EvolutionMatrix> all = truncated(matrices, frames);
    const std::vector<EvolutionMatrix> healthy = group_subset(all, groups, Group::Healthy);
    const std::vector<EvolutionMatrix> impaired = group_subset(all, groups, Group::Impaired);
    if (healthy.empty() || impaired.empty()) {
        throw data_error("cohort needs at least one participant in each group");
    }
    std::vector<OccurrenceSeries> series;
    for (int e = 0; e < kEmotionCount; ++e) {
        series.push_back(occurrence_series(healthy, Group::Healthy, e));
    }
    for (int e = 0; e < kEmotionCount; ++e) {
        series.push_back(occurrence_series(impaired, Group::Impaired, e));
    }
    return series;
}

std::vector<double> cohort_difference_score(const std::vector<OccurrenceSeries>& series) {
    if (series.size() != 2 * kEmotionCount) {
        throw data_error("difference score expects 12 occurrence series");
    }
    std::vector<double> total(series.front().values.size(), 0.0);
    for (int e : retained_emotions()) {
        const std::vector<double> diff = group_difference(series[e], series[kEmotionCount + e]);
        for (std::size_t f = 0; f < total.size(); ++f) total[f] += diff[f];
    }
    return total;
}

AnyModel fit_classifier(const LabeledDataset& data, ClassifierKind kind,
                        const MciOptions& options) {
    switch (kind) {
        case ClassifierKind::Svm: return svm_fit(data, options.svm_kernel, options.svm_c);
        case ClassifierKind::Lda: return lda_fit(data);
        case ClassifierKind::Knn: return knn_fit(data, options.knn_k);
        case ClassifierKind::Tree:
            return tree_fit(data, options.tree_max_depth, options.tree_min_leaf);
    }
    throw internal_error("unhandled classifier kind");
}

ModelMeta MciModel::meta() const {
    ModelMeta meta;
    meta.label_names[static_cast<int>(Group::Healthy)] = group_name(Group::Healthy);
    meta.label_names[static_cast<int>(Group::Impaired)] = group_name(Group::Impaired);
    meta.has_window = true;
    meta.window_start = static_cast<std::uint32_t>(window.start);
    meta.window_width = static_cast<std::uint32_t>(window.width);
    return meta;
}

MciModel train_mci(const std::vector<EvolutionMatrix>& matrices, const std::vector<Group>& groups,
                   ClassifierKind kind, const MciOptions& options) {
    if (matrices.empty() || matrices.size() != groups.size()) {
        throw data_error("train_mci: empty cohort or matrix/group count mismatch");
    }
    const int frames = common_frames(matrices);
    const std::vector<EvolutionMatrix> all = truncated(matrices, frames);

    MciModel result;
    if (options.fixed_window) {
        result.window = *options.fixed_window;
        if (result.window.start < 0 || result.window.start + result.window.width > frames) {
            throw data_error("train_mci: fixed window outside the frame range");
        }
    } else {
        const int width = std::min(options.window_width, frames);
        const auto series = cohort_occurrence(all, groups);
        result.window = select_window(cohort_difference_score(series), width);
    }

    LabeledDataset data;
    for (std::size_t i = 0; i < all.size(); ++i) {
        data.features.push_back(mci_feature_vector(all[i], result.window));
        data.labels.push_back(static_cast<int>(groups[i]));
    }
    result.classifier = fit_classifier(data, kind, options);
    return result;
}

EvaluationReport evaluate_mci(const MciModel& model, const std::vector<EvolutionMatrix>& matrices,
                              const std::vector<Group>& groups) {
    if (matrices.empty() || matrices.size() != groups.size()) {
        throw data_error("evaluate_mci: empty cohort or matrix/group count mismatch");
    }
    EvaluationReport report;
    report.kind = model_kind(model.classifier);
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < matrices.size(); ++i) {
        EvolutionMatrix m = matrices[i];
        if (model.window.start + model.window.width > m.frames()) {
            throw data_error("evaluate_mci: participant '" + m.participant_id() +
                             "' has fewer frames than the model window needs");
        }
        const std::vector<float> features = mci_feature_vector(m, model.window);
        const int predicted = model_predict(model.classifier, features);
        const int truth = static_cast<int>(groups[i]);
        report.confusion[truth][predicted] += 1;
        report.total += 1;
        if (predicted == truth) report.correct += 1;
    }
    report.eval_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                               start)
                         .count();
    report.accuracy_pct = 100.0 * report.correct / report.total;
    return report;
}

std::vector<int> stratified_folds(const std::vector<int>& labels, int folds,
                                  std::uint32_t seed) {
    if (folds < 2) throw data_error("stratified_folds: folds must be >= 2");
    if (static_cast<std::size_t>(folds) > labels.size()) {
        throw data_error("stratified_folds: more folds than samples");
    }
    std::set<int> label_set(labels.begin(), labels.end());
    std::mt19937 rng(seed);
    std::vector<int> fold_of(labels.size(), -1);
    int cursor = 0;
    for (int label : label_set) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == label) members.push_back(i);
        }
        std::shuffle(members.begin(), members.end(), rng);
        for (std::size_t i : members) {
            fold_of[i] = cursor;
            cursor = (cursor + 1) % folds;
        }
    }
    return fold_of;
}

double cross_validate(const LabeledDataset& data, ClassifierKind kind, int folds,
                      std::uint32_t seed, const MciOptions& options) {
    data.validate(2);
    const std::vector<int> fold_of = stratified_folds(data.labels, folds, seed);

    double error_sum = 0.0;
    for (int fold = 0; fold < folds; ++fold) {
        LabeledDataset train;
        std::vector<std::size_t> test_idx;
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (fold_of[i] == fold) {
                test_idx.push_back(i);
            } else {
                train.features.push_back(data.features[i]);
                train.labels.push_back(data.labels[i]);
            }
        }
        const AnyModel model = fit_classifier(train, kind, options);
        int wrong = 0;
        for (std::size_t i : test_idx) {
            if (model_predict(model, data.features[i]) != data.labels[i]) ++wrong;
        }
        error_sum += test_idx.empty() ? 0.0 : static_cast<double>(wrong) / test_idx.size();
    }
    return error_sum / folds;
}

GraphCostReport cost_report(const NetworkGraph& graph, const std::string& extraction_layer) {
    if (!extraction_layer.empty() && !graph.has_layer(extraction_layer)) {
        throw data_error("cost report: unknown layer '" + extraction_layer + "'");
    }
    const auto shapes = graph.propagate_shapes();
    GraphCostReport report;
    report.extraction_layer = extraction_layer;

    bool before_extraction = true;
    std::map<std::string, std::size_t> depthwise_index;  // dw layer -> LayerCost slot
    std::map<std::string, std::string> forwarded;        // activation output -> dw layer

    for (const auto& spec : graph.layers()) {
        const bool is_conv = spec.kind == LayerKind::ConvStandard ||
                             spec.kind == LayerKind::ConvDepthwise ||
                             spec.kind == LayerKind::ConvPointwise;
        if (is_conv) {
            const TensorShape in = shapes.at(spec.inputs[0]);
            const TensorShape out = shapes.at(spec.name);
            LayerCost cost;
            cost.name = spec.name;
            cost.kind = spec.kind;
            cost.k = spec.kernel_h;
            cost.c_in = in.channels;
            cost.c_out = out.channels;
            cost.h_out = out.height;
            cost.w_out = out.width;
            switch (spec.kind) {
                case LayerKind::ConvStandard:
                    cost.macs = cost_standard(cost.k, cost.c_in, cost.c_out, cost.h_out,
                                              cost.w_out);
                    break;
                case LayerKind::ConvDepthwise:
                    cost.macs = cost_depthwise(cost.k, cost.c_in, cost.h_out, cost.w_out);
                    depthwise_index[spec.name] = report.layers.size();
                    break;
                case LayerKind::ConvPointwise:
                    cost.macs = cost_pointwise(cost.c_in, cost.c_out, cost.h_out, cost.w_out);
                    break;
                default: break;
            }
            report.total_macs += cost.macs;
            if (before_extraction) report.total_macs_to_layer += cost.macs;

            // Pair a pointwise with the depthwise feeding it (through relu6).
            if (spec.kind == LayerKind::ConvPointwise) {
                auto source = depthwise_index.find(spec.inputs[0]);
                std::string dw_name;
                if (source != depthwise_index.end()) {
                    dw_name = spec.inputs[0];
                } else {
                    auto fwd = forwarded.find(spec.inputs[0]);
                    if (fwd != forwarded.end()) dw_name = fwd->second;
                }
                if (!dw_name.empty()) {
                    const LayerCost& dw = report.layers[depthwise_index.at(dw_name)];
                    SeparableUnitCost unit;
                    unit.depthwise_layer = dw_name;
                    unit.pointwise_layer = spec.name;
                    unit.report = cost_separable(dw.k, dw.c_in, cost.c_out, cost.h_out,
                                                 cost.w_out);
                    unit.closed_form_ratio = cost_ratio(dw.k, cost.c_out);
                    report.separable_units.push_back(std::move(unit));
                }
            }
            report.layers.push_back(std::move(cost));
        } else if (spec.kind == LayerKind::Relu6 && !spec.inputs.empty() &&
                   depthwise_index.count(spec.inputs[0])) {
            forwarded[spec.name] = spec.inputs[0];
        }
        if (spec.name == extraction_layer) before_extraction = false;
    }
    if (extraction_layer.empty()) report.total_macs_to_layer = report.total_macs;
    return report;
}

}  // namespace emoscreen
