#include <doctest.h>

#include <fstream>
#include <random>
#include <algorithm>
#include <set>

#include "emoscreen/image_io.hpp"
#include "emoscreen/pipeline.hpp"
#include "emoscreen/synth.hpp"
#include "support.hpp"

using namespace emoscreen;
using testsupport::TempDir;

TEST_SUITE_BEGIN("pipeline");

TEST_CASE("manifest: records, overrides, path resolution, errors") {
    TempDir tmp("manifest");
    {
        std::ofstream m(tmp.file("cohort.jsonl"));
        m << R"({"id":"a","moca":27,"matrix_csv":"a.csv"})" << "\n";
        m << R"({"id":"b","moca":21,"frames_dir":"frames/b","fps":25})" << "\n";
        m << R"({"id":"c","group":"impaired","matrix_csv":"c.csv"})" << "\n";
    }
    const CohortDataset cohort = load_cohort_manifest(tmp.file("cohort.jsonl"));
    REQUIRE(cohort.size() == 3);
    CHECK(cohort.records[0].group() == Group::Healthy);
    CHECK(cohort.records[1].group() == Group::Impaired);
    CHECK(cohort.records[2].group() == Group::Impaired);
    CHECK(cohort.records[0].matrix_csv == tmp.file("a.csv"));
    CHECK(cohort.records[1].frames_dir == tmp.file("frames/b"));
    CHECK(cohort.records[1].fps == 25.0);

    {
        std::ofstream m(tmp.file("bad.jsonl"));
        m << R"({"id":"a","moca":27})" << "\n";  // neither frames_dir nor matrix_csv
    }
    CHECK_THROWS_AS(load_cohort_manifest(tmp.file("bad.jsonl")), data_error);
    CHECK_THROWS_AS(load_cohort_manifest(tmp.file("missing.jsonl")), io_error);
}

TEST_CASE("split: fixed counts 61 -> 46/15") {
    std::vector<Group> groups;
    for (int i = 0; i < 25; ++i) groups.push_back(Group::Healthy);
    for (int i = 0; i < 36; ++i) groups.push_back(Group::Impaired);
    const SplitSpec spec = SplitSpec::make_fixed_counts(18, 28, 7, 8, 9);
    const SplitResult split = split_dataset(61, groups, spec);
    CHECK(split.train.size() == 46);
    CHECK(split.test.size() == 15);

    int train_h = 0, train_i = 0, test_h = 0, test_i = 0;
    for (std::size_t i : split.train) (groups[i] == Group::Healthy ? train_h : train_i)++;
    for (std::size_t i : split.test) (groups[i] == Group::Healthy ? test_h : test_i)++;
    CHECK(train_h == 18);
    CHECK(train_i == 28);
    CHECK(test_h == 7);
    CHECK(test_i == 8);

    // Disjoint, exhaustive.
    std::set<std::size_t> seen(split.train.begin(), split.train.end());
    for (std::size_t i : split.test) CHECK(seen.insert(i).second);
    CHECK(seen.size() == 61);

    CHECK_THROWS_AS(split_dataset(61, groups, SplitSpec::make_fixed_counts(20, 28, 7, 8, 9)),
                    data_error);
}

TEST_CASE("split: fraction 0.75 of 980 gives 735/245 and is seed-reproducible") {
    const SplitSpec spec = SplitSpec::make_fraction(0.75, 4);
    const SplitResult a = split_dataset(980, {}, spec);
    CHECK(a.train.size() == 735);
    CHECK(a.test.size() == 245);
    const SplitResult b = split_dataset(980, {}, spec);
    CHECK(a.train == b.train);
    CHECK(a.test == b.test);
    const SplitResult c = split_dataset(980, {}, SplitSpec::make_fraction(0.75, 5));
    CHECK(a.train != c.train);
    CHECK_THROWS_AS(SplitSpec::make_fraction(1.5, 1), data_error);
}

TEST_CASE("cross_validate: separable data -> zero error; fold sizes differ by <= 1") {
    LabeledDataset data;
    for (int i = 0; i < 23; ++i) {
        data.features.push_back({static_cast<float>(i < 11 ? -5.0 - i : 5.0 + i)});
        data.labels.push_back(i < 11 ? 0 : 1);
    }
    for (ClassifierKind kind : {ClassifierKind::Svm, ClassifierKind::Lda, ClassifierKind::Knn,
                                ClassifierKind::Tree}) {
        MciOptions options;
        options.knn_k = 3;
        CHECK(cross_validate(data, kind, 5, 1, options) == 0.0);
    }
    CHECK_THROWS_AS(cross_validate(data, ClassifierKind::Svm, 1, 1), data_error);
}

TEST_CASE("stratified folds partition the dataset with sizes differing by <= 1") {
    std::mt19937 rng(123);
    for (int round = 0; round < 25; ++round) {
        const int n = 7 + static_cast<int>(rng() % 60);
        const int folds = 2 + static_cast<int>(rng() % 5);
        if (folds > n) continue;
        const int classes = 2 + static_cast<int>(rng() % 3);
        std::vector<int> labels(n);
        for (int i = 0; i < n; ++i) labels[i] = static_cast<int>(rng() % classes);
        const std::vector<int> fold_of = stratified_folds(labels, folds, rng());

        std::vector<int> sizes(folds, 0);
        for (int f : fold_of) {
            REQUIRE(f >= 0);
            REQUIRE(f < folds);
            sizes[f] += 1;
        }
        const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
        CHECK(*hi - *lo <= 1);
    }
    CHECK(cross_validate(
              []() {
                  LabeledDataset d;
                  for (int i = 0; i < 17; ++i) {
                      d.features.push_back({static_cast<float>(i)});
                      d.labels.push_back(i % 2);
                  }
                  return d;
              }(),
              ClassifierKind::Knn, 5, 3, MciOptions{.knn_k = 1}) ==
          cross_validate(
              []() {
                  LabeledDataset d;
                  for (int i = 0; i < 17; ++i) {
                      d.features.push_back({static_cast<float>(i)});
                      d.labels.push_back(i % 2);
                  }
                  return d;
              }(),
              ClassifierKind::Knn, 5, 3, MciOptions{.knn_k = 1}));
}

TEST_CASE("synthetic cohort: shapes, groups, determinism") {
    SynthParams params;
    params.healthy = 5;
    params.impaired = 7;
    params.frames = 50;
    params.seed = 77;
    const SynthCohort a = generate_synthetic_cohort(params);
    REQUIRE(a.records.size() == 12);
    REQUIRE(a.matrices.size() == 12);
    int healthy = 0;
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        if (a.records[i].group() == Group::Healthy) ++healthy;
        a.matrices[i].validate();
        CHECK(a.matrices[i].frames() == 50);
    }
    CHECK(healthy == 5);

    const SynthCohort b = generate_synthetic_cohort(params);
    for (std::size_t i = 0; i < a.matrices.size(); ++i) {
        for (int f = 0; f < 50; ++f) CHECK(a.matrices[i].argmax(f) == b.matrices[i].argmax(f));
    }
}

TEST_CASE("train_mci on a separable synthetic cohort reaches 100% SVM accuracy") {
    SynthParams params;
    params.healthy = 12;
    params.impaired = 16;
    params.seed = 5;
    params.noise = 0.0;
    const SynthCohort cohort = generate_synthetic_cohort(params);
    const std::vector<Group> groups = cohort.groups();

    const MciModel model = train_mci(cohort.matrices, groups, ClassifierKind::Svm);
    const EvaluationReport report = evaluate_mci(model, cohort.matrices, groups);
    CHECK(report.accuracy_pct == 100.0);
    CHECK(report.total == 28);
    // The anger burst (frames 200-250) must pull the window into its range.
    CHECK(model.window.start + model.window.width >= 200);
    CHECK(model.window.start <= 250);
}

TEST_CASE("memorization case: train and evaluate on one participant per class") {
    SynthParams params;
    params.healthy = 1;
    params.impaired = 1;
    params.frames = 80;
    params.seed = 3;
    const SynthCohort cohort = generate_synthetic_cohort(params);
    MciOptions options;
    options.knn_k = 1;
    const MciModel model =
        train_mci(cohort.matrices, cohort.groups(), ClassifierKind::Knn, options);
    const EvaluationReport report = evaluate_mci(model, cohort.matrices, cohort.groups());
    CHECK(report.accuracy_pct == 100.0);
}

TEST_CASE("evaluation accuracy equals the confusion-matrix trace") {
    SynthParams params;
    params.healthy = 10;
    params.impaired = 12;
    params.noise = 0.8;  // hard problem, forces some errors
    params.seed = 11;
    const SynthCohort cohort = generate_synthetic_cohort(params);
    const MciModel model = train_mci(cohort.matrices, cohort.groups(), ClassifierKind::Tree);
    const EvaluationReport r = evaluate_mci(model, cohort.matrices, cohort.groups());
    const int trace = r.confusion[0][0] + r.confusion[1][1];
    int row_sums[2] = {r.confusion[0][0] + r.confusion[0][1],
                       r.confusion[1][0] + r.confusion[1][1]};
    CHECK(trace == r.correct);
    CHECK(row_sums[0] == 10);
    CHECK(row_sums[1] == 12);
    CHECK(r.accuracy_pct == doctest::Approx(100.0 * trace / 22.0));
}

TEST_CASE("window selection sees only training data in default mode") {
    SynthParams params;
    params.healthy = 10;
    params.impaired = 10;
    params.seed = 21;
    const SynthCohort cohort = generate_synthetic_cohort(params);
    const std::vector<Group> groups = cohort.groups();

    // Adversarial alternative test set with a huge fake difference in the
    // first frames; must not move the training-only window.
    SynthCohort adversarial = cohort;
    for (std::size_t i = 0; i < adversarial.matrices.size(); ++i) {
        for (int f = 0; f < 60; ++f) {
            std::vector<double> col(kEmotionCount, 0.0);
            col[groups[i] == Group::Healthy ? 0 : 2] = 1.0;
            adversarial.matrices[i].set_column(f, col);
        }
    }

    const MciModel on_train = train_mci(cohort.matrices, groups, ClassifierKind::Svm);
    const MciModel on_train_again = train_mci(cohort.matrices, groups, ClassifierKind::Svm);
    CHECK(on_train.window.start == on_train_again.window.start);

    // Like the --paper-mode flag: feeding the adversarial matrices into selection moves
    // the window into the fake region; keeping them out does not.
    const MciModel with_adversarial =
        train_mci(adversarial.matrices, groups, ClassifierKind::Svm);
    CHECK(with_adversarial.window.start == 0);
    CHECK(on_train.window.start > 60);
}

TEST_CASE("unequal frame counts are truncated to the minimum") {
    SynthParams params;
    params.healthy = 4;
    params.impaired = 4;
    params.frames = 100;
    params.seed = 8;
    SynthCohort cohort = generate_synthetic_cohort(params);
    cohort.matrices[2].truncate(70);
    MciOptions options;
    options.window_width = 50;
    const MciModel model =
        train_mci(cohort.matrices, cohort.groups(), ClassifierKind::Tree, options);
    CHECK(model.window.start + model.window.width <= 70);
}

TEST_CASE("run_emotion_recognition: no-face frames become one-hot 'other'") {
    RecognitionComponents components;
    components.cascade = make_test_cascade();
    components.face_height = 8;
    components.face_width = 8;
    components.extract = [](const Tensor&) { return std::vector<float>{0.0f}; };
    components.classify = [](const std::vector<float>&) {
        return std::vector<double>{1, 0, 0, 0, 0, 0};
    };
    const std::vector<Tensor> frames(3, Tensor(60, 60, 1, 50.0f));  // flat: no detection
    const EvolutionMatrix matrix = run_emotion_recognition(frames, "p", components);
    REQUIRE(matrix.frames() == 3);
    for (int f = 0; f < 3; ++f) {
        CHECK(matrix.at(static_cast<int>(EmotionLabel::Other), f) == 1.0);
        CHECK(matrix.argmax(f) == static_cast<int>(EmotionLabel::Other));
    }
}

TEST_CASE("run_emotion_recognition: planted faces with a stub 'happy' classifier") {
    std::mt19937 rng(91);
    std::vector<Tensor> frames;
    std::uniform_real_distribution<float> noise(-3.0f, 3.0f);
    for (int f = 0; f < 4; ++f) {
        Tensor frame(100, 100, 1, 30.0f);
        for (float& v : frame.values()) v += noise(rng);
        for (int y = 40; y < 60; ++y) {
            for (int x = 40; x < 60; ++x) frame.at(y, x, 0) = 200.0f + noise(rng);
        }
        frames.push_back(std::move(frame));
    }
    RecognitionComponents components;
    components.cascade = make_test_cascade();
    components.face_height = 16;
    components.face_width = 16;
    int extract_calls = 0;
    components.extract = [&extract_calls](const Tensor& face) {
        ++extract_calls;
        CHECK(face.height() == 16);
        CHECK(face.channels() == 3);
        return std::vector<float>{face.at(8, 8, 0)};
    };
    components.classify = [](const std::vector<float>&) {
        return std::vector<double>{1, 0, 0, 0, 0, 0};  // always happy
    };
    const EvolutionMatrix matrix = run_emotion_recognition(frames, "p", components);
    CHECK(extract_calls == 4);
    for (int f = 0; f < 4; ++f) CHECK(matrix.at(0, f) == 1.0);
}

TEST_CASE("full synthetic recognition run equals composing the stages by hand") {
    std::mt19937 rng(92);
    std::uniform_real_distribution<float> noise(-2.0f, 2.0f);
    std::vector<Tensor> frames;
    for (int f = 0; f < 3; ++f) {
        Tensor frame(100, 100, 1, 30.0f);
        for (float& v : frame.values()) v += noise(rng);
        const float brightness = 150.0f + 25.0f * f;
        for (int y = 40; y < 60; ++y) {
            for (int x = 38 + f; x < 58 + f; ++x) frame.at(y, x, 0) = brightness;
        }
        frames.push_back(std::move(frame));
    }
    RecognitionComponents components;
    components.cascade = make_test_cascade();
    components.face_height = 12;
    components.face_width = 12;
    components.extract = [](const Tensor& face) {
        std::vector<float> out;
        for (int y = 0; y < face.height(); y += 4) {
            for (int x = 0; x < face.width(); x += 4) out.push_back(face.at(y, x, 0));
        }
        return out;
    };
    components.classify = [](const std::vector<float>& features) {
        double mean = 0.0;
        for (float v : features) mean += v;
        mean /= static_cast<double>(features.size());
        std::vector<double> dist(kEmotionCount, 0.0);
        dist[mean > 160.0 ? 0 : 2] = 1.0;  // bright -> happy, dim -> sad
        return dist;
    };
    const EvolutionMatrix matrix = run_emotion_recognition(frames, "p", components);

    // Stage-by-stage oracle for each frame.
    for (int f = 0; f < 3; ++f) {
        const auto detections = detect_faces(frames[f], components.cascade,
                                             components.detect_params);
        REQUIRE_FALSE(detections.empty());
        const auto face = largest_detection(detections);
        const Tensor crop = crop_and_resize(frames[f], *face, 12, 12);
        const std::vector<float> features = components.extract(crop);
        const std::vector<double> dist = components.classify(features);
        for (int e = 0; e < kEmotionCount; ++e) CHECK(matrix.at(e, f) == dist[e]);
    }
}

TEST_CASE("cost_report: single standard layer has ratio 1 (no separable unit)") {
    const NetworkGraph graph = NetworkGraph::from_json_text(R"({
      "input_shape": [8, 8, 3],
      "layers": [
        {"name": "norm", "kind": "input_normalize", "inputs": []},
        {"name": "conv", "kind": "conv_standard", "inputs": ["norm"],
         "kernel": [3, 3], "padding": 1, "out_channels": 4}
      ]
    })");
    const GraphCostReport report = cost_report(graph, "conv");
    REQUIRE(report.layers.size() == 1);
    CHECK(report.layers[0].macs == cost_standard(3, 3, 4, 8, 8));
    CHECK(report.separable_units.empty());
    CHECK(report.total_macs == report.layers[0].macs);
}

TEST_CASE("cost_report: separable block at 14x14x96 matches the closed-form ratio") {
    const NetworkGraph graph = NetworkGraph::from_json_text(R"({
      "input_shape": [14, 14, 96],
      "layers": [
        {"name": "norm", "kind": "input_normalize", "inputs": []},
        {"name": "dw", "kind": "conv_depthwise", "inputs": ["norm"],
         "kernel": [3, 3], "padding": 1},
        {"name": "dw_relu", "kind": "relu6", "inputs": ["dw"]},
        {"name": "pw", "kind": "conv_pointwise", "inputs": ["dw_relu"],
         "kernel": [1, 1], "out_channels": 96}
      ]
    })");
    const GraphCostReport report = cost_report(graph, "pw");
    REQUIRE(report.separable_units.size() == 1);
    const SeparableUnitCost& unit = report.separable_units[0];
    CHECK(unit.report.separable_macs ==
          unit.report.depthwise_macs + unit.report.pointwise_macs);
    CHECK(std::abs(unit.report.ratio - (1.0 / 96.0 + 1.0 / 9.0)) < 1e-12);
    CHECK(std::abs(unit.closed_form_ratio - unit.report.ratio) < 1e-12);
}

TEST_CASE("cost_report totals are additive over layers, in any order") {
    const NetworkGraph graph = NetworkGraph::from_json_file(testsupport::data_dir() +
                                                            "/mobilenet_v2_topology.json");
    const GraphCostReport report = cost_report(graph, "block_11_add");
    std::uint64_t sum = 0;
    for (const auto& l : report.layers) sum += l.macs;
    CHECK(sum == report.total_macs);
    std::vector<std::uint64_t> macs;
    for (const auto& l : report.layers) macs.push_back(l.macs);
    std::mt19937 rng(7);
    std::shuffle(macs.begin(), macs.end(), rng);
    std::uint64_t shuffled_sum = 0;
    for (std::uint64_t m : macs) shuffled_sum += m;
    CHECK(shuffled_sum == report.total_macs);
    CHECK(report.total_macs_to_layer <= report.total_macs);
    // Every separable unit in the shipped topology obeys the closed form.
    REQUIRE_FALSE(report.separable_units.empty());
    for (const auto& unit : report.separable_units) {
        CHECK(std::abs(unit.report.ratio - unit.closed_form_ratio) < 1e-12);
    }
}

TEST_CASE("pipeline end-to-end determinism under a fixed seed") {
    SynthParams params;
    params.healthy = 8;
    params.impaired = 9;
    params.noise = 0.4;
    params.seed = 1234;
    const SynthCohort c1 = generate_synthetic_cohort(params);
    const SynthCohort c2 = generate_synthetic_cohort(params);
    const MciModel m1 = train_mci(c1.matrices, c1.groups(), ClassifierKind::Svm);
    const MciModel m2 = train_mci(c2.matrices, c2.groups(), ClassifierKind::Svm);
    CHECK(m1.window.start == m2.window.start);
    const EvaluationReport r1 = evaluate_mci(m1, c1.matrices, c1.groups());
    const EvaluationReport r2 = evaluate_mci(m2, c2.matrices, c2.groups());
    CHECK(r1.accuracy_pct == r2.accuracy_pct);
    CHECK(r1.confusion == r2.confusion);
}

TEST_SUITE_END();
