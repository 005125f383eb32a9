#include "emoscreen/analytics.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <fstream>
#include <sstream>

#include "emoscreen/numfmt.hpp"

namespace emoscreen {

namespace {

constexpr const char* kEmotionNames[kEmotionCount] = {"happy", "neutral",  "sad",
                                                      "angry", "surprise", "other"};

}  // namespace

const char* emotion_name(EmotionLabel e) { return kEmotionNames[static_cast<int>(e)]; }

const char* emotion_name(int index) {
    if (index < 0 || index >= kEmotionCount) {
        throw data_error("emotion index out of range: " + std::to_string(index));
    }
    return kEmotionNames[index];
}

EmotionLabel emotion_from_name(const std::string& name) {
    for (int i = 0; i < kEmotionCount; ++i) {
        if (name == kEmotionNames[i]) return static_cast<EmotionLabel>(i);
    }
    throw data_error("unknown emotion '" + name +
                     "' (expected happy|neutral|sad|angry|surprise|other)");
}

std::array<int, 5> retained_emotions() {
    return {static_cast<int>(EmotionLabel::Happy), static_cast<int>(EmotionLabel::Neutral),
            static_cast<int>(EmotionLabel::Sad), static_cast<int>(EmotionLabel::Angry),
            static_cast<int>(EmotionLabel::Other)};
}

const char* group_name(Group g) { return g == Group::Healthy ? "healthy" : "impaired"; }

Group assign_group(int moca) {
    if (moca < 0 || moca > 30) {
        throw data_error("MoCA score out of range 0-30: " + std::to_string(moca));
    }
    if (moca >= 25) return Group::Healthy;
    if (moca >= 20) return Group::Impaired;
    throw data_error("MoCA score " + std::to_string(moca) +
                     " below the screened bands (healthy 25-30, impaired 20-24)");
}

void StimulusTimeline::validate() const {
    if (times.size() != stimuli.size()) {
        throw data_error("timeline: time/stimulus count mismatch");
    }
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1])) {
            throw data_error("timeline: times must be strictly increasing");
        }
    }
}

EvolutionMatrix::EvolutionMatrix(std::string participant_id, int frame_count)
    : id_(std::move(participant_id)), frames_(frame_count) {
    if (frame_count < 1) throw data_error("evolution matrix needs at least 1 frame");
    data_.assign(static_cast<std::size_t>(kEmotionCount) * frame_count, 0.0);
}

double EvolutionMatrix::at(int emotion, int frame) const {
    return data_[static_cast<std::size_t>(emotion) * frames_ + frame];
}

void EvolutionMatrix::set(int emotion, int frame, double value) {
    data_[static_cast<std::size_t>(emotion) * frames_ + frame] = value;
}

std::vector<double> EvolutionMatrix::column(int frame) const {
    std::vector<double> col(kEmotionCount);
    for (int e = 0; e < kEmotionCount; ++e) col[e] = at(e, frame);
    return col;
}

void EvolutionMatrix::set_column(int frame, const std::vector<double>& distribution) {
    if (distribution.size() != kEmotionCount) {
        throw data_error("evolution matrix column must have 6 entries");
    }
    for (int e = 0; e < kEmotionCount; ++e) set(e, frame, distribution[e]);
}

int EvolutionMatrix::argmax(int frame) const {
    int best = 0;
    for (int e = 1; e < kEmotionCount; ++e) {
        if (at(e, frame) > at(best, frame)) best = e;
    }
    return best;
}

void EvolutionMatrix::validate(double tol) const {
    for (int f = 0; f < frames_; ++f) {
        double sum = 0.0;
        for (int e = 0; e < kEmotionCount; ++e) {
            const double v = at(e, f);
            if (!(v >= 0.0) || !std::isfinite(v)) {
                throw data_error("matrix '" + id_ + "': negative or non-finite entry at frame " +
                                 std::to_string(f + 1));
            }
            sum += v;
        }
        if (std::abs(sum - 1.0) > tol) {
            throw data_error("matrix '" + id_ + "': column " + std::to_string(f + 1) +
                             " sums to " + format_double(sum) + ", expected 1");
        }
    }
}

void EvolutionMatrix::truncate(int frames) {
    if (frames < 1 || frames > frames_) throw data_error("truncate: bad frame count");
    if (frames == frames_) return;
    std::vector<double> next(static_cast<std::size_t>(kEmotionCount) * frames);
    for (int e = 0; e < kEmotionCount; ++e) {
        for (int f = 0; f < frames; ++f) {
            next[static_cast<std::size_t>(e) * frames + f] = at(e, f);
        }
    }
    data_ = std::move(next);
    frames_ = frames;
}

EvolutionMatrix build_evolution_matrix(const std::string& participant_id,
                                       const std::vector<std::vector<double>>& columns) {
    if (columns.empty()) throw data_error("build_evolution_matrix: needs at least 1 column");
    EvolutionMatrix matrix(participant_id, static_cast<int>(columns.size()));
    for (std::size_t f = 0; f < columns.size(); ++f) {
        matrix.set_column(static_cast<int>(f), columns[f]);
    }
    matrix.validate();
    return matrix;
}

void save_matrix_csv(const EvolutionMatrix& matrix, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot create matrix file '" + path + "'");
    out << "frame";
    for (int e = 0; e < kEmotionCount; ++e) out << ',' << kEmotionNames[e];
    out << '\n';
    for (int f = 0; f < matrix.frames(); ++f) {
        out << (f + 1);
        for (int e = 0; e < kEmotionCount; ++e) out << ',' << format_double(matrix.at(e, f));
        out << '\n';
    }
    if (!out) throw io_error("short write to matrix file '" + path + "'");
}

EvolutionMatrix load_matrix_csv(const std::string& path, const std::string& participant_id) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open matrix file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw data_error("matrix file '" + path + "': empty");
    std::string expected = "frame";
    for (int e = 0; e < kEmotionCount; ++e) expected += std::string(",") + kEmotionNames[e];
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != expected) {
        throw data_error("matrix file '" + path + "': bad header, expected '" + expected + "'");
    }
    std::vector<std::vector<double>> columns;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(row, cell, ',')) cells.push_back(cell);
        if (cells.size() != kEmotionCount + 1) {
            throw data_error("matrix file '" + path + "': row with " +
                             std::to_string(cells.size()) + " cells");
        }
        std::vector<double> col(kEmotionCount);
        for (int e = 0; e < kEmotionCount; ++e) col[e] = parse_double(cells[e + 1]);
        columns.push_back(std::move(col));
    }
    return build_evolution_matrix(participant_id, columns);
}

OccurrenceSeries occurrence_series(const std::vector<EvolutionMatrix>& group_matrices,
                                   Group group, int emotion) {
    if (group_matrices.empty()) throw data_error("occurrence_series: empty group");
    if (emotion < 0 || emotion >= kEmotionCount) {
        throw data_error("occurrence_series: emotion index out of range");
    }
    int frames = group_matrices.front().frames();
    for (const auto& m : group_matrices) frames = std::min(frames, m.frames());

    OccurrenceSeries series;
    series.emotion = emotion;
    series.group = group;
    series.group_size = static_cast<int>(group_matrices.size());
    series.values.resize(frames);
    for (int f = 0; f < frames; ++f) {
        int count = 0;
        for (const auto& m : group_matrices) {
            if (m.argmax(f) == emotion) ++count;
        }
        series.values[f] = static_cast<double>(count) / series.group_size;
    }
    return series;
}

std::vector<double> group_difference(const OccurrenceSeries& a, const OccurrenceSeries& b) {
    if (a.values.size() != b.values.size()) {
        throw data_error("group_difference: series lengths differ");
    }
    std::vector<double> diff(a.values.size());
    for (std::size_t f = 0; f < diff.size(); ++f) diff[f] = std::abs(a.values[f] - b.values[f]);
    return diff;
}

FrameWindow select_window(const std::vector<double>& frame_scores, int width) {
    if (width <= 0) throw data_error("select_window: width must be positive");
    const int n = static_cast<int>(frame_scores.size());
    if (width > n) throw data_error("select_window: width exceeds frame count");
    double best = -std::numeric_limits<double>::infinity();
    int best_start = 0;
    for (int start = 0; start + width <= n; ++start) {
        double sum = 0.0;
        for (int f = start; f < start + width; ++f) sum += frame_scores[f];
        if (sum > best) {  // strict: ties keep the earliest window
            best = sum;
            best_start = start;
        }
    }
    return {best_start, width};
}

std::vector<float> mci_feature_vector(const EvolutionMatrix& matrix, const FrameWindow& window) {
    if (window.start < 0 || window.width <= 0 || window.start + window.width > matrix.frames()) {
        throw data_error("mci_feature_vector: window [" + std::to_string(window.start + 1) + "," +
                         std::to_string(window.end() + 1) + "] outside 1-" +
                         std::to_string(matrix.frames()));
    }
    std::vector<float> features;
    features.reserve(5 * static_cast<std::size_t>(window.width));
    for (int e : retained_emotions()) {
        for (int f = window.start; f < window.start + window.width; ++f) {
            features.push_back(static_cast<float>(matrix.at(e, f)));
        }
    }
    return features;
}

}  // namespace emoscreen
