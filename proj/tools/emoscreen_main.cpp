#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "emoscreen/chart.hpp"
#include "emoscreen/conv.hpp"
#include "emoscreen/image_io.hpp"
#include "emoscreen/numfmt.hpp"
#include "emoscreen/pipeline.hpp"
#include "emoscreen/synth.hpp"

namespace fs = std::filesystem;
using namespace emoscreen;

namespace {

struct CommonNetOptions {
    std::string topology;
    std::string weights;
    std::int64_t random_weights_seed = -1;
    std::string layer = "block_11_add";
};

void add_net_options(CLI::App* cmd, CommonNetOptions& opts) {
    cmd->add_option("--topology", opts.topology, "Network topology JSON")->required();
    auto* w = cmd->add_option("--weights", opts.weights, "NWF1 weight container");
    cmd->add_option("--random-weights", opts.random_weights_seed,
                    "Generate He-scaled random weights from this seed instead of a file")
        ->excludes(w);
    cmd->add_option("--layer", opts.layer, "Feature extraction layer")
        ->capture_default_str();
}

WeightContainer resolve_weights(const CommonNetOptions& opts, const NetworkGraph& graph) {
    if (!opts.weights.empty()) return load_weights(opts.weights);
    if (opts.random_weights_seed >= 0) {
        return generate_random_weights(graph, static_cast<std::uint32_t>(opts.random_weights_seed));
    }
    throw data_error("give --weights FILE or --random-weights SEED");
}

struct CascadeOptions {
    std::string path;
    bool builtin_test = false;
    DetectParams params;
};

void add_cascade_options(CLI::App* cmd, CascadeOptions& opts) {
    auto* c = cmd->add_option("--cascade", opts.path, "Cascade JSON file");
    cmd->add_flag("--test-cascade", opts.builtin_test, "Use the built-in bright-square cascade")
        ->excludes(c);
    cmd->add_option("--scale-factor", opts.params.scale_factor, "Window scale step (> 1)")
        ->capture_default_str();
    cmd->add_option("--min-size", opts.params.min_size, "Minimum window side in pixels")
        ->capture_default_str();
    cmd->add_option("--step", opts.params.step, "Slide step in pixels at base scale")
        ->capture_default_str();
}

Cascade resolve_cascade(const CascadeOptions& opts) {
    if (opts.builtin_test) return make_test_cascade();
    if (!opts.path.empty()) return load_cascade(opts.path);
    throw data_error("give --cascade FILE or --test-cascade");
}

struct ClassifierOptions {
    std::string kernel = "linear";
    double svm_c = 1.0;
    double gamma = 0.0;
    int knn_k = 5;
    int tree_max_depth = 8;
    int tree_min_leaf = 2;
    int window_width = kDefaultWindowWidth;
};

void add_classifier_options(CLI::App* cmd, ClassifierOptions& opts, bool with_window) {
    cmd->add_option("--kernel", opts.kernel, "SVM kernel: linear|rbf")->capture_default_str();
    cmd->add_option("--svm-c", opts.svm_c, "SVM regularization C")->capture_default_str();
    cmd->add_option("--gamma", opts.gamma, "RBF gamma (default 1/dimension)");
    cmd->add_option("--knn-k", opts.knn_k, "kNN neighbor count")->capture_default_str();
    cmd->add_option("--tree-depth", opts.tree_max_depth, "Decision tree max depth")
        ->capture_default_str();
    cmd->add_option("--min-leaf", opts.tree_min_leaf, "Decision tree min leaf size")
        ->capture_default_str();
    if (with_window) {
        cmd->add_option("--window-width", opts.window_width, "Screening window width in frames")
            ->capture_default_str();
    }
}

MciOptions to_mci_options(const ClassifierOptions& opts) {
    MciOptions mci;
    mci.window_width = opts.window_width;
    if (opts.kernel == "rbf") {
        mci.svm_kernel.kind = KernelSpec::Kind::Rbf;
    } else if (opts.kernel != "linear") {
        throw data_error("unknown kernel '" + opts.kernel + "' (expected linear|rbf)");
    }
    mci.svm_kernel.gamma = static_cast<float>(opts.gamma);
    mci.svm_c = opts.svm_c;
    mci.knn_k = opts.knn_k;
    mci.tree_max_depth = opts.tree_max_depth;
    mci.tree_min_leaf = opts.tree_min_leaf;
    return mci;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw io_error("cannot create output directory '" + dir + "'");
}

// Loads every participant's evolution matrix; records with frames_dir need
// the full recognition stack, matrix_csv records load directly.
std::vector<EvolutionMatrix> cohort_matrices(const CohortDataset& cohort,
                                             const RecognitionComponents* components) {
    std::vector<EvolutionMatrix> matrices;
    for (const auto& record : cohort.records) {
        if (!record.matrix_csv.empty()) {
            matrices.push_back(load_matrix_csv(record.matrix_csv, record.id));
        } else {
            if (components == nullptr) {
                throw data_error("participant '" + record.id +
                                 "' has frames_dir; this command needs --topology/--cascade/"
                                 "--emotion-model to run recognition");
            }
            matrices.push_back(run_emotion_recognition(load_frames(record.frames_dir), record.id,
                                                       *components));
        }
    }
    return matrices;
}

LabeledDataset load_feature_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open feature file '" + path + "'");
    LabeledDataset data;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string cell;
        std::vector<float> features;
        bool first = true;
        int label = 0;
        while (std::getline(row, cell, ',')) {
            if (first) {
                label = static_cast<int>(parse_double(cell));
                first = false;
            } else {
                features.push_back(static_cast<float>(parse_double(cell)));
            }
        }
        if (features.empty()) {
            throw data_error("feature file '" + path + "' line " + std::to_string(line_no) +
                             ": expected 'label,f1,f2,...'");
        }
        data.labels.push_back(label);
        data.features.push_back(std::move(features));
    }
    return data;
}

// ---- subcommand bodies -----------------------------------------------------

int run_detect_face(const std::string& image_path, const CascadeOptions& cascade_opts,
                    const std::string& out_dir, bool write_crop) {
    ensure_dir(out_dir);
    const Tensor image = load_pnm(image_path);
    const Cascade cascade = resolve_cascade(cascade_opts);
    const auto detections = detect_faces(to_gray(image), cascade, cascade_opts.params);

    std::ofstream csv(fs::path(out_dir) / "detections.csv");
    csv << "x,y,w,h,scale,score\n";
    for (const auto& det : detections) {
        csv << det.x << ',' << det.y << ',' << det.w << ',' << det.h << ','
            << format_double(det.scale) << ',' << format_double(det.score) << '\n';
    }
    std::cout << detections.size() << " detection(s) -> "
              << (fs::path(out_dir) / "detections.csv").string() << "\n";
    if (write_crop) {
        const auto face = largest_detection(detections);
        if (!face) throw data_error("no face detected, nothing to crop");
        save_ppm(crop_and_resize(image, *face), (fs::path(out_dir) / "face.ppm").string());
        std::cout << "largest face crop -> " << (fs::path(out_dir) / "face.ppm").string() << "\n";
    }
    return 0;
}

int run_extract_features(const std::string& image_path, const CommonNetOptions& net,
                         bool list_layers, const std::string& out_dir) {
    const NetworkGraph graph = NetworkGraph::from_json_file(net.topology);
    if (list_layers) {
        for (const auto& name : graph.list_layers()) std::cout << name << "\n";
        return 0;
    }
    ensure_dir(out_dir);
    const WeightContainer weights = resolve_weights(net, graph);
    Tensor image = load_pnm(image_path);
    const TensorShape want = graph.input_shape();
    if (image.channels() == 1 && want.channels == 3) {
        image = crop_and_resize(image, {0, 0, image.width(), image.height()}, want.height,
                                want.width);
    } else if (image.height() != want.height || image.width() != want.width) {
        image = resize_bilinear(image, want.height, want.width);
    }
    const FeatureVector fv = graph.extract_features(weights, image, net.layer);
    const fs::path out = fs::path(out_dir) / "features.csv";
    std::ofstream f(out);
    for (float v : fv.values) f << format_double(v) << '\n';
    std::cout << "layer " << net.layer << ": " << fv.length() << " features -> " << out.string()
              << "\n";
    return 0;
}

RecognitionComponents make_components(const NetworkGraph& graph, const WeightContainer& weights,
                                      const std::string& layer, const Cascade& cascade,
                                      const DetectParams& params, const SvmModel& emotion_model,
                                      bool hard_label) {
    RecognitionComponents components;
    components.cascade = cascade;
    components.detect_params = params;
    components.face_height = graph.input_shape().height;
    components.face_width = graph.input_shape().width;
    components.extract = make_feature_extractor(graph, weights, layer);
    components.classify = [&emotion_model](const std::vector<float>& features) {
        return emotion_distribution(emotion_model, features);
    };
    components.hard_label = hard_label;
    return components;
}

std::vector<float> frame_features(const Tensor& image, const NetworkGraph& graph,
                                  const WeightContainer& weights, const std::string& layer,
                                  const Cascade* cascade, const DetectParams& params) {
    const TensorShape want = graph.input_shape();
    Tensor face(1, 1, 1);
    if (cascade != nullptr) {
        const auto detections = detect_faces(to_gray(image), *cascade, params);
        const auto det = largest_detection(detections);
        if (det) {
            face = crop_and_resize(image, *det, want.height, want.width);
        } else {
            face = crop_and_resize(image, {0, 0, image.width(), image.height()}, want.height,
                                   want.width);
        }
    } else {
        face = crop_and_resize(image, {0, 0, image.width(), image.height()}, want.height,
                               want.width);
    }
    return graph.extract_features(weights, face, layer).values;
}

int run_train_emotion(const std::string& manifest_path, const CommonNetOptions& net,
                      const CascadeOptions& cascade_opts, bool no_detect,
                      const ClassifierOptions& cls, double holdout, int repeats,
                      std::uint32_t seed, const std::string& out_model) {
    const NetworkGraph graph = NetworkGraph::from_json_file(net.topology);
    const WeightContainer weights = resolve_weights(net, graph);
    Cascade cascade;
    const Cascade* cascade_ptr = nullptr;
    if (!no_detect) {
        cascade = resolve_cascade(cascade_opts);
        cascade_ptr = &cascade;
    }
    const auto labeled = load_labeled_frames(manifest_path);

    LabeledDataset data;
    for (const auto& frame : labeled) {
        data.features.push_back(frame_features(load_pnm(frame.path), graph, weights, net.layer,
                                               cascade_ptr, cascade_opts.params));
        data.labels.push_back(static_cast<int>(frame.label));
    }

    const MciOptions options = to_mci_options(cls);
    if (holdout > 0.0) {
        double accuracy_sum = 0.0;
        for (int r = 0; r < repeats; ++r) {
            const SplitSpec spec = SplitSpec::make_fraction(1.0 - holdout, seed + r);
            const SplitResult split = split_dataset(data.size(), {}, spec);
            LabeledDataset train;
            for (std::size_t i : split.train) {
                train.features.push_back(data.features[i]);
                train.labels.push_back(data.labels[i]);
            }
            const SvmModel model = svm_fit(train, options.svm_kernel, options.svm_c);
            int correct = 0;
            for (std::size_t i : split.test) {
                if (svm_predict(model, data.features[i]) == data.labels[i]) ++correct;
            }
            const double acc = 100.0 * correct / static_cast<double>(split.test.size());
            accuracy_sum += acc;
            std::cout << "run " << (r + 1) << ": holdout accuracy " << format_fixed(acc, 1)
                      << "%\n";
        }
        std::cout << "mean holdout accuracy " << format_fixed(accuracy_sum / repeats, 1) << "%\n";
    }

    const SvmModel model = svm_fit(data, options.svm_kernel, options.svm_c);
    int correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (svm_predict(model, data.features[i]) == data.labels[i]) ++correct;
    }
    std::cout << "train accuracy " << format_fixed(100.0 * correct / data.size(), 1) << "% on "
              << data.size() << " frames\n";

    ModelMeta meta;
    for (int label : model.labels) meta.label_names[label] = emotion_name(label);
    save_model(model, meta, out_model);
    std::cout << "emotion model -> " << out_model << "\n";
    return 0;
}

int run_recognize(const std::string& frames_dir, const CommonNetOptions& net,
                  const CascadeOptions& cascade_opts, const std::string& model_path,
                  bool hard_label, const std::string& out_csv) {
    const NetworkGraph graph = NetworkGraph::from_json_file(net.topology);
    const WeightContainer weights = resolve_weights(net, graph);
    const Cascade cascade = resolve_cascade(cascade_opts);
    const SavedModel saved = load_model(model_path);
    const auto* svm = std::get_if<SvmModel>(&saved.model);
    if (svm == nullptr) throw data_error("emotion model must be an SVM model");

    const RecognitionComponents components = make_components(
        graph, weights, net.layer, cascade, cascade_opts.params, *svm, hard_label);
    const std::string id = fs::path(frames_dir).filename().string();
    const EvolutionMatrix matrix =
        run_emotion_recognition(load_frames(frames_dir), id.empty() ? "participant" : id,
                                components);
    save_matrix_csv(matrix, out_csv);
    std::cout << "evolution matrix 6x" << matrix.frames() << " -> " << out_csv << "\n";
    return 0;
}

int run_compare_groups(const std::string& manifest_path, int window_width,
                       const std::string& out_dir) {
    ensure_dir(out_dir);
    const CohortDataset cohort = load_cohort_manifest(manifest_path);
    const std::vector<EvolutionMatrix> matrices = cohort_matrices(cohort, nullptr);
    const std::vector<Group> groups = cohort.groups();

    const auto series = cohort_occurrence(matrices, groups);
    export_occurrence_csv(series, (fs::path(out_dir) / "occurrence.csv").string());
    render_occurrence_svg(series, (fs::path(out_dir) / "occurrence.svg").string());

    const std::vector<double> diff = cohort_difference_score(series);
    const FrameWindow window =
        select_window(diff, std::min<int>(window_width, static_cast<int>(diff.size())));
    std::cout << "occurrence series -> " << (fs::path(out_dir) / "occurrence.csv").string()
              << ", " << (fs::path(out_dir) / "occurrence.svg").string() << "\n";
    std::cout << "largest-difference window: frames " << (window.start + 1) << ".."
              << (window.end() + 1) << " (width " << window.width << ")\n";
    return 0;
}

int run_train_mci(const std::string& manifest_path, const std::string& classifier,
                  const ClassifierOptions& cls, const std::string& out_model) {
    const CohortDataset cohort = load_cohort_manifest(manifest_path);
    const std::vector<EvolutionMatrix> matrices = cohort_matrices(cohort, nullptr);
    const ClassifierKind kind = classifier_kind_from_name(classifier);
    const MciModel model = train_mci(matrices, cohort.groups(), kind, to_mci_options(cls));
    save_model(model.classifier, model.meta(), out_model);

    const EvaluationReport train_report = evaluate_mci(model, matrices, cohort.groups());
    std::cout << classifier_kind_name(kind) << ": window frames " << (model.window.start + 1)
              << ".." << (model.window.end() + 1) << ", train accuracy "
              << format_fixed(train_report.accuracy_pct, 1) << "%\n";
    std::cout << "screening model -> " << out_model << "\n";
    return 0;
}

void print_report_table(const std::vector<EvaluationReport>& reports) {
    std::cout << "classifier  accuracy%  reference%  confusion [hh hi; ih ii]\n";
    for (const auto& r : reports) {
        std::cout << classifier_kind_name(r.kind) << "\t    " << format_fixed(r.accuracy_pct, 1)
                  << "\t       " << format_fixed(reference_accuracy(r.kind), 1) << "\t   ["
                  << r.confusion[0][0] << ' ' << r.confusion[0][1] << "; " << r.confusion[1][0]
                  << ' ' << r.confusion[1][1] << "]  (" << r.correct << "/" << r.total << ", train "
                  << format_fixed(r.train_ms, 0) << " ms)\n";
    }
}

int run_evaluate_mci(const std::string& manifest_path, const std::string& classifier,
                     const std::string& split_counts, double split_fraction, bool paper_mode,
                     std::uint32_t seed, const ClassifierOptions& cls,
                     const std::string& out_dir) {
    ensure_dir(out_dir);
    const CohortDataset cohort = load_cohort_manifest(manifest_path);
    const std::vector<EvolutionMatrix> matrices = cohort_matrices(cohort, nullptr);
    const std::vector<Group> groups = cohort.groups();

    SplitSpec spec;
    if (!split_counts.empty()) {
        int a = 0, b = 0, c = 0, d = 0;
        if (std::sscanf(split_counts.c_str(), "%d,%d,%d,%d", &a, &b, &c, &d) != 4) {
            throw data_error("--split-counts wants 'trainH,trainI,testH,testI'");
        }
        spec = SplitSpec::make_fixed_counts(a, b, c, d, seed);
    } else {
        spec = SplitSpec::make_fraction(split_fraction, seed);
    }
    const SplitResult split = split_dataset(cohort.size(), groups, spec);

    auto subset_matrices = [&](const std::vector<std::size_t>& idx) {
        std::vector<EvolutionMatrix> out;
        for (std::size_t i : idx) out.push_back(matrices[i]);
        return out;
    };
    auto subset_groups = [&](const std::vector<std::size_t>& idx) {
        std::vector<Group> out;
        for (std::size_t i : idx) out.push_back(groups[i]);
        return out;
    };
    const auto train_m = subset_matrices(split.train);
    const auto train_g = subset_groups(split.train);
    const auto test_m = subset_matrices(split.test);
    const auto test_g = subset_groups(split.test);

    MciOptions options = to_mci_options(cls);
    if (paper_mode) {
        // Window chosen on the full cohort, train and test alike.
        const auto series = cohort_occurrence(matrices, groups);
        int frames = matrices.front().frames();
        for (const auto& m : matrices) frames = std::min(frames, m.frames());
        options.fixed_window = select_window(
            cohort_difference_score(series), std::min(options.window_width, frames));
    }

    std::vector<ClassifierKind> kinds;
    if (classifier == "all") {
        kinds = {ClassifierKind::Lda, ClassifierKind::Svm, ClassifierKind::Knn,
                 ClassifierKind::Tree};
    } else {
        kinds = {classifier_kind_from_name(classifier)};
    }

    std::vector<EvaluationReport> reports;
    for (ClassifierKind kind : kinds) {
        const auto start = std::chrono::steady_clock::now();
        const MciModel model = train_mci(train_m, train_g, kind, options);
        const double train_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                .count();
        EvaluationReport report = evaluate_mci(model, test_m, test_g);
        report.split_description = spec.describe();
        report.seed = seed;
        report.train_ms = train_ms;
        reports.push_back(report);
    }

    const fs::path csv_path = fs::path(out_dir) / "report.csv";
    std::ofstream csv(csv_path);
    csv << "classifier,accuracy_pct,correct,total,reference_pct\n";
    for (const auto& r : reports) {
        csv << classifier_kind_name(r.kind) << ',' << format_double(r.accuracy_pct) << ','
            << r.correct << ',' << r.total << ',' << format_double(reference_accuracy(r.kind))
            << '\n';
    }
    std::cout << "split " << spec.describe() << ": train " << split.train.size() << " / test "
              << split.test.size() << (paper_mode ? " (window from full cohort)" : "") << "\n";
    print_report_table(reports);
    std::cout << "report -> " << csv_path.string() << "\n";
    return 0;
}

int run_cross_validate(const std::string& manifest_path, const std::string& features_path,
                       const std::string& classifier, int folds, std::uint32_t seed,
                       const ClassifierOptions& cls) {
    const MciOptions options = to_mci_options(cls);
    LabeledDataset data;
    if (!features_path.empty()) {
        data = load_feature_csv(features_path);
    } else {
        const CohortDataset cohort = load_cohort_manifest(manifest_path);
        const std::vector<EvolutionMatrix> matrices = cohort_matrices(cohort, nullptr);
        const std::vector<Group> groups = cohort.groups();
        // Window from the full dataset; CV here validates the classifier stage.
        const MciModel probe = train_mci(matrices, groups, ClassifierKind::Tree, options);
        for (std::size_t i = 0; i < matrices.size(); ++i) {
            EvolutionMatrix m = matrices[i];
            data.features.push_back(mci_feature_vector(m, probe.window));
            data.labels.push_back(static_cast<int>(groups[i]));
        }
    }
    const ClassifierKind kind = classifier_kind_from_name(classifier);
    const double error = cross_validate(data, kind, folds, seed, options);
    std::cout << folds << "-fold CV error rate (" << classifier_kind_name(kind)
              << "): " << format_fixed(100.0 * error, 1) << "%  (reference emotion-stage CV: "
              << format_fixed(kReferenceEmotionCvErrorPct, 1) << "%)\n";
    return 0;
}

int run_cost_report(const std::string& topology_path, const std::string& layer,
                    const std::string& out_dir) {
    const NetworkGraph graph = NetworkGraph::from_json_file(topology_path);
    const GraphCostReport report = cost_report(graph, layer);

    std::cout << "layer\tkind\tk\tc_in\tc_out\th_out\tw_out\tMACs\n";
    for (const auto& l : report.layers) {
        std::cout << l.name << '\t' << layer_kind_name(l.kind) << '\t' << l.k << '\t' << l.c_in
                  << '\t' << l.c_out << '\t' << l.h_out << '\t' << l.w_out << '\t' << l.macs
                  << '\n';
    }
    std::cout << "\nseparable unit (depthwise+pointwise)\tM_d\tM_p\tM_s\tM_c-equivalent\tratio"
                 "\t1/c_o+1/k^2\n";
    for (const auto& u : report.separable_units) {
        std::cout << u.depthwise_layer << "+" << u.pointwise_layer << '\t'
                  << u.report.depthwise_macs << '\t' << u.report.pointwise_macs << '\t'
                  << u.report.separable_macs << '\t' << u.report.standard_macs << '\t'
                  << format_fixed(u.report.ratio, 6) << '\t'
                  << format_fixed(u.closed_form_ratio, 6) << '\n';
    }
    std::cout << "\ntotal MACs (all conv layers): " << report.total_macs << "\n";
    if (!layer.empty()) {
        std::cout << "total MACs up to " << layer << ": " << report.total_macs_to_layer << "\n";
    }

    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        const fs::path csv_path = fs::path(out_dir) / "cost_report.csv";
        std::ofstream csv(csv_path);
        csv << "layer,kind,k,c_in,c_out,h_out,w_out,macs\n";
        for (const auto& l : report.layers) {
            csv << l.name << ',' << layer_kind_name(l.kind) << ',' << l.k << ',' << l.c_in << ','
                << l.c_out << ',' << l.h_out << ',' << l.w_out << ',' << l.macs << '\n';
        }
        std::cout << "cost report -> " << csv_path.string() << "\n";
    }
    return 0;
}

int run_synth_cohort(int healthy, int impaired, int frames, double noise, std::uint32_t seed,
                     int emit_frames, const std::string& out_dir) {
    ensure_dir(out_dir);
    SynthParams params;
    params.healthy = healthy;
    params.impaired = impaired;
    params.frames = frames;
    params.noise = noise;
    params.seed = seed;
    const SynthCohort cohort = generate_synthetic_cohort(params);
    write_synthetic_cohort(cohort, out_dir, emit_frames);
    std::cout << "synthetic cohort: " << healthy << " healthy + " << impaired << " impaired, "
              << frames << " frames, noise " << format_double(noise) << ", seed " << seed
              << " -> " << (fs::path(out_dir) / "cohort.jsonl").string() << "\n";
    if (emit_frames > 0) {
        std::cout << "frame sequences for the first " << emit_frames << " participant(s) -> "
                  << (fs::path(out_dir) / "frames").string() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"emoscreen: facial-emotion based cognitive impairment screening toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // global --seed may follow the subcommand

    std::uint32_t seed = kDefaultSeed;
    app.add_option("--seed", seed, "Global random seed")
        ->envname("EMOSCREEN_SEED")
        ->capture_default_str();

    // detect-face
    auto* detect = app.add_subcommand("detect-face", "Locate faces in one image");
    std::string detect_image, detect_out = "out";
    bool detect_crop = false;
    CascadeOptions detect_cascade;
    detect->add_option("--image", detect_image, "PGM/PPM image")->required();
    add_cascade_options(detect, detect_cascade);
    detect->add_option("-o,--out", detect_out, "Output directory")->capture_default_str();
    detect->add_flag("--crop", detect_crop, "Also write the largest face crop (224x224 PPM)");

    // extract-features
    auto* extract = app.add_subcommand("extract-features", "Run the network on one image");
    std::string extract_image, extract_out = "out";
    bool extract_list = false;
    CommonNetOptions extract_net;
    extract->add_option("--image", extract_image, "PGM/PPM image");
    add_net_options(extract, extract_net);
    extract->add_flag("--list-layers", extract_list, "Print layer names and exit");
    extract->add_option("-o,--out", extract_out, "Output directory")->capture_default_str();

    // train-emotion
    auto* train_emotion = app.add_subcommand("train-emotion", "Fit the emotion SVM on deep features");
    std::string te_manifest, te_out = "emotion_model.emsm";
    bool te_no_detect = false;
    double te_holdout = 0.0;
    int te_repeats = 1;
    CommonNetOptions te_net;
    CascadeOptions te_cascade;
    ClassifierOptions te_cls;
    train_emotion->add_option("--frames-manifest", te_manifest, "CSV lines of path,label")
        ->required();
    add_net_options(train_emotion, te_net);
    add_cascade_options(train_emotion, te_cascade);
    train_emotion->add_flag("--no-detect", te_no_detect, "Skip face detection, use whole frames");
    add_classifier_options(train_emotion, te_cls, false);
    train_emotion->add_option("--holdout", te_holdout, "Held-out fraction for accuracy reporting");
    train_emotion->add_option("--repeats", te_repeats, "Holdout repetitions")
        ->capture_default_str();
    train_emotion->add_option("-o,--out", te_out, "Model file")->capture_default_str();

    // recognize
    auto* recognize = app.add_subcommand("recognize", "Frames -> emotion evolution matrix CSV");
    std::string rec_frames, rec_model, rec_out = "matrix.csv";
    bool rec_hard = false;
    CommonNetOptions rec_net;
    CascadeOptions rec_cascade;
    recognize->add_option("--frames", rec_frames, "Directory of PGM/PPM frames")->required();
    add_net_options(recognize, rec_net);
    add_cascade_options(recognize, rec_cascade);
    recognize->add_option("--emotion-model", rec_model, "Trained emotion SVM (.emsm)")->required();
    recognize->add_flag("--hard-label", rec_hard, "One-hot argmax columns instead of vote shares");
    recognize->add_option("-o,--out", rec_out, "Output CSV")->capture_default_str();

    // compare-groups
    auto* compare = app.add_subcommand("compare-groups",
                                       "Occurrence curves and max-difference window per group");
    std::string cg_manifest, cg_out = "out";
    int cg_window = kDefaultWindowWidth;
    compare->add_option("--manifest", cg_manifest, "Cohort manifest (JSONL)")->required();
    compare->add_option("--window-width", cg_window, "Window width in frames")
        ->capture_default_str();
    compare->add_option("-o,--out", cg_out, "Output directory")->capture_default_str();

    // train-mci
    auto* tm = app.add_subcommand("train-mci", "Train the screening classifier on a cohort");
    std::string tm_manifest, tm_classifier = "svm", tm_out = "mci_model.emsm";
    ClassifierOptions tm_cls;
    tm->add_option("--manifest", tm_manifest, "Cohort manifest (JSONL)")->required();
    tm->add_option("--classifier", tm_classifier, "svm|lda|knn|tree")->capture_default_str();
    add_classifier_options(tm, tm_cls, true);
    tm->add_option("-o,--out", tm_out, "Model file")->capture_default_str();

    // evaluate-mci
    auto* em = app.add_subcommand("evaluate-mci",
                                  "Split a cohort, train all classifiers, report accuracies");
    std::string em_manifest, em_classifier = "all", em_counts, em_out = "out";
    double em_fraction = 0.75;
    bool em_paper_mode = false;
    ClassifierOptions em_cls;
    em->add_option("--manifest", em_manifest, "Cohort manifest (JSONL)")->required();
    em->add_option("--classifier", em_classifier, "all|svm|lda|knn|tree")->capture_default_str();
    em->add_option("--split-counts", em_counts, "trainH,trainI,testH,testI (e.g. 18,28,7,8)");
    em->add_option("--split-fraction", em_fraction, "Train fraction when counts not given")
        ->capture_default_str();
    em->add_flag("--paper-mode", em_paper_mode,
                 "Select the window on the full cohort (train+test) instead of train only");
    add_classifier_options(em, em_cls, true);
    em->add_option("-o,--out", em_out, "Output directory")->capture_default_str();

    // cross-validate
    auto* cv = app.add_subcommand("cross-validate", "Stratified k-fold error rate");
    std::string cv_manifest, cv_features, cv_classifier = "svm";
    int cv_folds = 5;
    ClassifierOptions cv_cls;
    auto* cv_m = cv->add_option("--manifest", cv_manifest, "Cohort manifest (JSONL)");
    cv->add_option("--features", cv_features, "CSV of label,f1,f2,... rows")->excludes(cv_m);
    cv->add_option("--classifier", cv_classifier, "svm|lda|knn|tree")->capture_default_str();
    cv->add_option("--folds", cv_folds, "Fold count")->capture_default_str();
    add_classifier_options(cv, cv_cls, true);

    // cost-report
    auto* cost = app.add_subcommand("cost-report", "Analytic MAC counts for a topology");
    std::string cost_topology, cost_layer = "block_11_add", cost_out;
    cost->add_option("--topology", cost_topology, "Network topology JSON")->required();
    cost->add_option("--layer", cost_layer, "Extraction layer for the partial total")
        ->capture_default_str();
    cost->add_option("-o,--out", cost_out, "Output directory for cost_report.csv");

    // synth-cohort
    auto* synth = app.add_subcommand("synth-cohort", "Generate a synthetic screening cohort");
    int sc_healthy = 25, sc_impaired = 36, sc_frames = 320, sc_emit = 0;
    double sc_noise = 0.0;
    std::string sc_out = "synth";
    synth->add_option("--healthy", sc_healthy, "Healthy participant count")->capture_default_str();
    synth->add_option("--impaired", sc_impaired, "Impaired participant count")
        ->capture_default_str();
    synth->add_option("--frames", sc_frames, "Frames per participant")->capture_default_str();
    synth->add_option("--noise", sc_noise, "Group overlap in [0,1]")->capture_default_str();
    synth->add_option("--emit-frames", sc_emit, "Also write PGM frames for the first K participants");
    synth->add_option("-o,--out", sc_out, "Output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*detect) return run_detect_face(detect_image, detect_cascade, detect_out, detect_crop);
        if (*extract) {
            if (!extract_list && extract_image.empty()) {
                throw data_error("give --image FILE (or --list-layers)");
            }
            return run_extract_features(extract_image, extract_net, extract_list, extract_out);
        }
        if (*train_emotion) {
            return run_train_emotion(te_manifest, te_net, te_cascade, te_no_detect, te_cls,
                                     te_holdout, te_repeats, seed, te_out);
        }
        if (*recognize) {
            return run_recognize(rec_frames, rec_net, rec_cascade, rec_model, rec_hard, rec_out);
        }
        if (*compare) return run_compare_groups(cg_manifest, cg_window, cg_out);
        if (*tm) return run_train_mci(tm_manifest, tm_classifier, tm_cls, tm_out);
        if (*em) {
            return run_evaluate_mci(em_manifest, em_classifier, em_counts, em_fraction,
                                    em_paper_mode, seed, em_cls, em_out);
        }
        if (*cv) {
            if (cv_manifest.empty() && cv_features.empty()) {
                throw data_error("give --manifest FILE or --features FILE");
            }
            return run_cross_validate(cv_manifest, cv_features, cv_classifier, cv_folds, seed,
                                      cv_cls);
        }
        if (*cost) return run_cost_report(cost_topology, cost_layer, cost_out);
        if (*synth) {
            return run_synth_cohort(sc_healthy, sc_impaired, sc_frames, sc_noise, seed, sc_emit,
                                    sc_out);
        }
    } catch (const data_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 1;
}
