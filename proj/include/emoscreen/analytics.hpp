#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "emoscreen/errors.hpp"

namespace emoscreen {

// Canonical emotion order; fixed across files, matrices and reports.
inline constexpr int kEmotionCount = 6;
enum class EmotionLabel : int { Happy = 0, Neutral = 1, Sad = 2, Angry = 3, Surprise = 4, Other = 5 };

const char* emotion_name(EmotionLabel e);
const char* emotion_name(int index);
EmotionLabel emotion_from_name(const std::string& name);

// The five emotions kept for screening features (surprise excluded).
std::array<int, 5> retained_emotions();

enum class Group : int { Healthy = 0, Impaired = 1 };
const char* group_name(Group g);

// MoCA banding: 25-30 healthy, 20-24 impaired; scores below 20 are outside
// the screened bands and rejected.
Group assign_group(int moca);

// Frame timestamps with stimulus identifiers; carried as metadata only.
struct StimulusTimeline {
    std::vector<double> times;
    std::vector<std::string> stimuli;

    void validate() const;
};

// 6 x n column-stochastic matrix of per-frame emotion distributions.
class EvolutionMatrix {
public:
    EvolutionMatrix() = default;
    EvolutionMatrix(std::string participant_id, int frame_count);

    const std::string& participant_id() const { return id_; }
    int frames() const { return frames_; }

    double at(int emotion, int frame) const;
    void set(int emotion, int frame, double value);
    std::vector<double> column(int frame) const;
    void set_column(int frame, const std::vector<double>& distribution);

    // Emotion with the highest probability at `frame`; ties -> lowest index.
    int argmax(int frame) const;

    // Verifies every column is a distribution (sums to 1 +- tol, non-negative).
    void validate(double tol = 1e-9) const;

    // Drops trailing frames beyond `frames`.
    void truncate(int frames);

private:
    std::string id_;
    int frames_ = 0;
    std::vector<double> data_;  // row-major 6 x frames
};

// Stacks per-frame distributions into a 6 x n matrix (column order = frame order).
EvolutionMatrix build_evolution_matrix(const std::string& participant_id,
                                       const std::vector<std::vector<double>>& columns);

// Evolution matrix CSV: header "frame,happy,neutral,sad,angry,surprise,other".
void save_matrix_csv(const EvolutionMatrix& matrix, const std::string& path);
EvolutionMatrix load_matrix_csv(const std::string& path, const std::string& participant_id);

// Per-frame occurrence U = N/T of one emotion within one group (argmax counts).
struct OccurrenceSeries {
    int emotion = 0;
    Group group = Group::Healthy;
    std::vector<double> values;
    int group_size = 0;
};

OccurrenceSeries occurrence_series(const std::vector<EvolutionMatrix>& group_matrices,
                                   Group group, int emotion);

// Per-frame absolute difference |a - b| of two equal-length series.
std::vector<double> group_difference(const OccurrenceSeries& a, const OccurrenceSeries& b);

struct FrameWindow {
    int start = 0;  // 0-based first frame
    int width = 0;

    int end() const { return start + width - 1; }
};

// Contiguous window of `width` maximizing the summed per-frame score;
// ties resolved toward the earliest window.
FrameWindow select_window(const std::vector<double>& frame_scores, int width);

// Retained-emotion rows restricted to the window, flattened row-major
// (emotion-major); length = 5 * window width.
std::vector<float> mci_feature_vector(const EvolutionMatrix& matrix, const FrameWindow& window);

}  // namespace emoscreen
