#pragma once

#include <optional>
#include <string>
#include <vector>

#include "emoscreen/tensor.hpp"

namespace emoscreen {

// Cumulative-sum grid with a zero row/column; rectangle sums in 4 lookups.
class IntegralImage {
public:
    explicit IntegralImage(const Tensor& gray);

    int source_height() const { return height_; }
    int source_width() const { return width_; }

    // Sum of pixels in [x, x+w) x [y, y+h). Exact for integer-valued pixels.
    double rect_sum(int x, int y, int w, int h) const;
    // Same over squared pixel values (for window variance).
    double rect_sum_sq(int x, int y, int w, int h) const;

    double at(int y, int x) const { return sums_[static_cast<std::size_t>(y) * (width_ + 1) + x]; }

private:
    int height_ = 0;
    int width_ = 0;
    std::vector<double> sums_;
    std::vector<double> sq_sums_;
};

// Axis-aligned rectangle in unit-window coordinates with a weight.
struct HaarRect {
    double x = 0, y = 0, w = 0, h = 0;
    double weight = 0;
};

struct HaarStump {
    std::vector<HaarRect> rects;  // >= 2
    double threshold = 0;
    double left_value = 0;   // emitted when feature < threshold
    double right_value = 0;  // emitted otherwise
};

struct CascadeStage {
    double stage_threshold = 0;
    std::vector<HaarStump> stumps;
};

struct Cascade {
    int base_width = 24;
    int base_height = 24;
    std::vector<CascadeStage> stages;

    void validate() const;
};

Cascade load_cascade(const std::string& path);
Cascade cascade_from_json_text(const std::string& json_text);
void save_cascade(const Cascade& cascade, const std::string& path);

// Simple two-stage contrast cascade that fires on a bright square over a
// darker surround; used by tests and the synthetic data path.
Cascade make_test_cascade();

struct WindowBox {
    int x = 0, y = 0, w = 0, h = 0;
};

struct Detection {
    int x = 0, y = 0, w = 0, h = 0;
    double scale = 1.0;
    double score = 0.0;
};

struct CascadeResult {
    bool accepted = false;
    double score = 0.0;  // stage-sum of the last evaluated stage
};

struct DetectParams {
    double scale_factor = 1.25;
    int min_size = 24;
    int step = 2;
    double merge_iou = 0.3;
};

// Evaluates stages in order over a variance-normalized window; rejects on the
// first stage whose stump sum falls below its threshold.
CascadeResult evaluate_cascade(const IntegralImage& ii, const Cascade& cascade,
                               const WindowBox& window);

// Multi-scale sliding-window scan with IoU-based merging of accepted windows.
// Result is ordered by score (desc), then y, then x.
std::vector<Detection> detect_faces(const Tensor& gray, const Cascade& cascade,
                                    const DetectParams& params = {});

// Largest detection; ties broken by topmost then leftmost box.
std::optional<Detection> largest_detection(const std::vector<Detection>& detections);

double box_iou(const Detection& a, const Detection& b);

// Crops the detection box and bilinearly resizes to out_h x out_w (default
// 224x224), replicating grayscale input to 3 channels.
Tensor crop_and_resize(const Tensor& image, const Detection& det, int out_h = 224,
                       int out_w = 224);

}  // namespace emoscreen
