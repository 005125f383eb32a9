#include "emoscreen/face_detect.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "emoscreen/conv.hpp"
#include "emoscreen/errors.hpp"

namespace emoscreen {

IntegralImage::IntegralImage(const Tensor& gray) {
    if (gray.channels() != 1) {
        throw data_error("integral_image requires a single-channel image, got " +
                         gray.shape_string());
    }
    height_ = gray.height();
    width_ = gray.width();
    const std::size_t stride = static_cast<std::size_t>(width_) + 1;
    sums_.assign(stride * (height_ + 1), 0.0);
    sq_sums_.assign(stride * (height_ + 1), 0.0);
    for (int y = 0; y < height_; ++y) {
        double row = 0.0;
        double row_sq = 0.0;
        for (int x = 0; x < width_; ++x) {
            const double v = gray.at(y, x, 0);
            row += v;
            row_sq += v * v;
            sums_[(y + 1) * stride + (x + 1)] = sums_[y * stride + (x + 1)] + row;
            sq_sums_[(y + 1) * stride + (x + 1)] = sq_sums_[y * stride + (x + 1)] + row_sq;
        }
    }
}

double IntegralImage::rect_sum(int x, int y, int w, int h) const {
    const std::size_t stride = static_cast<std::size_t>(width_) + 1;
    return sums_[(y + h) * stride + (x + w)] - sums_[y * stride + (x + w)] -
           sums_[(y + h) * stride + x] + sums_[y * stride + x];
}

double IntegralImage::rect_sum_sq(int x, int y, int w, int h) const {
    const std::size_t stride = static_cast<std::size_t>(width_) + 1;
    return sq_sums_[(y + h) * stride + (x + w)] - sq_sums_[y * stride + (x + w)] -
           sq_sums_[(y + h) * stride + x] + sq_sums_[y * stride + x];
}

void Cascade::validate() const {
    if (base_width <= 0 || base_height <= 0) throw data_error("cascade: base window must be positive");
    if (stages.empty()) throw data_error("cascade: needs at least 1 stage");
    for (const auto& stage : stages) {
        if (stage.stumps.empty()) throw data_error("cascade: every stage needs at least 1 stump");
        for (const auto& stump : stage.stumps) {
            if (stump.rects.size() < 2) {
                throw data_error("cascade: every stump needs at least 2 rectangles");
            }
            for (const auto& r : stump.rects) {
                if (r.x < 0 || r.y < 0 || r.w <= 0 || r.h <= 0 || r.x + r.w > 1.0 + 1e-9 ||
                    r.y + r.h > 1.0 + 1e-9) {
                    throw data_error("cascade: rectangle outside the unit window");
                }
            }
        }
    }
}

Cascade cascade_from_json_text(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw data_error(std::string("cascade: invalid JSON: ") + e.what());
    }
    Cascade cascade;
    try {
        cascade.base_width = doc.at("base_window").at(0).get<int>();
        cascade.base_height = doc.at("base_window").at(1).get<int>();
        for (const auto& stage_doc : doc.at("stages")) {
            CascadeStage stage;
            stage.stage_threshold = stage_doc.at("stage_threshold").get<double>();
            for (const auto& stump_doc : stage_doc.at("stumps")) {
                HaarStump stump;
                stump.threshold = stump_doc.at("threshold").get<double>();
                stump.left_value = stump_doc.at("left_value").get<double>();
                stump.right_value = stump_doc.at("right_value").get<double>();
                for (const auto& r : stump_doc.at("rectangles")) {
                    stump.rects.push_back({r.at(0).get<double>(), r.at(1).get<double>(),
                                           r.at(2).get<double>(), r.at(3).get<double>(),
                                           r.at(4).get<double>()});
                }
                stage.stumps.push_back(std::move(stump));
            }
            cascade.stages.push_back(std::move(stage));
        }
    } catch (const nlohmann::json::exception& e) {
        throw data_error(std::string("cascade: missing or malformed field: ") + e.what());
    }
    cascade.validate();
    return cascade;
}

Cascade load_cascade(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open cascade file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return cascade_from_json_text(buf.str());
}

void save_cascade(const Cascade& cascade, const std::string& path) {
    cascade.validate();
    nlohmann::json doc;
    doc["base_window"] = {cascade.base_width, cascade.base_height};
    doc["stages"] = nlohmann::json::array();
    for (const auto& stage : cascade.stages) {
        nlohmann::json stage_doc;
        stage_doc["stage_threshold"] = stage.stage_threshold;
        stage_doc["stumps"] = nlohmann::json::array();
        for (const auto& stump : stage.stumps) {
            nlohmann::json stump_doc;
            stump_doc["threshold"] = stump.threshold;
            stump_doc["left_value"] = stump.left_value;
            stump_doc["right_value"] = stump.right_value;
            stump_doc["rectangles"] = nlohmann::json::array();
            for (const auto& r : stump.rects) {
                stump_doc["rectangles"].push_back({r.x, r.y, r.w, r.h, r.weight});
            }
            stage_doc["stumps"].push_back(std::move(stump_doc));
        }
        doc["stages"].push_back(std::move(stage_doc));
    }
    std::ofstream out(path);
    if (!out) throw io_error("cannot create cascade file '" + path + "'");
    out << doc.dump(1) << "\n";
    if (!out) throw io_error("short write to cascade file '" + path + "'");
}

Cascade make_test_cascade() {
    Cascade cascade;
    cascade.base_width = 24;
    cascade.base_height = 24;

    // Stage 1: bright center quarter against the full window.
    HaarStump center;
    center.rects.push_back({0.0, 0.0, 1.0, 1.0, -1.0});
    center.rects.push_back({0.25, 0.25, 0.5, 0.5, 4.0});
    center.threshold = 0.8;
    center.left_value = 0.0;
    center.right_value = 1.0;
    cascade.stages.push_back({0.5, {center}});

    // Stage 2: horizontal and vertical balance; centered targets pass both.
    HaarStump horiz;
    horiz.rects.push_back({0.0, 0.0, 0.5, 1.0, 1.0});
    horiz.rects.push_back({0.5, 0.0, 0.5, 1.0, -1.0});
    horiz.threshold = 0.5;
    horiz.left_value = 1.0;  // pass when |left-right| imbalance is small
    horiz.right_value = 0.0;
    HaarStump vert;
    vert.rects.push_back({0.0, 0.0, 1.0, 0.5, 1.0});
    vert.rects.push_back({0.0, 0.5, 1.0, 0.5, -1.0});
    vert.threshold = 0.5;
    vert.left_value = 1.0;
    vert.right_value = 0.0;
    cascade.stages.push_back({1.5, {horiz, vert}});
    return cascade;
}

namespace {

struct ScaledRect {
    int x, y, w, h;
    double weight;
};

// Rounds stump rectangles to pixels for the window size and re-weights the
// first rectangle so the weighted areas sum to zero; flat windows then score
// exactly 0 instead of amplifying rounding residue.
std::vector<ScaledRect> scale_rects(const HaarStump& stump, int win_w, int win_h) {
    std::vector<ScaledRect> out;
    out.reserve(stump.rects.size());
    for (const auto& r : stump.rects) {
        ScaledRect s;
        s.x = static_cast<int>(std::lround(r.x * win_w));
        s.y = static_cast<int>(std::lround(r.y * win_h));
        s.w = std::max(1, static_cast<int>(std::lround(r.w * win_w)));
        s.h = std::max(1, static_cast<int>(std::lround(r.h * win_h)));
        s.w = std::min(s.w, win_w - s.x);
        s.h = std::min(s.h, win_h - s.y);
        s.weight = r.weight;
        out.push_back(s);
    }
    double weighted_area = 0.0;
    for (std::size_t i = 1; i < out.size(); ++i) {
        weighted_area += out[i].weight * out[i].w * out[i].h;
    }
    const double area0 = static_cast<double>(out[0].w) * out[0].h;
    if (area0 > 0.0) out[0].weight = -weighted_area / area0;
    return out;
}

double evaluate_window(const IntegralImage& ii, const Cascade& cascade, const WindowBox& win,
                       bool& accepted) {
    const double area = static_cast<double>(win.w) * win.h;
    const double mean = ii.rect_sum(win.x, win.y, win.w, win.h) / area;
    const double var = ii.rect_sum_sq(win.x, win.y, win.w, win.h) / area - mean * mean;
    const double sigma = std::max(std::sqrt(std::max(var, 0.0)), 1.0);
    const double norm = area * sigma;

    double stage_sum = 0.0;
    for (const auto& stage : cascade.stages) {
        stage_sum = 0.0;
        for (const auto& stump : stage.stumps) {
            double raw = 0.0;
            for (const auto& r : scale_rects(stump, win.w, win.h)) {
                raw += r.weight * ii.rect_sum(win.x + r.x, win.y + r.y, r.w, r.h);
            }
            const double feature = raw / norm;
            stage_sum += feature < stump.threshold ? stump.left_value : stump.right_value;
        }
        if (stage_sum < stage.stage_threshold) {
            accepted = false;
            return stage_sum;
        }
    }
    accepted = true;
    return stage_sum;
}

}  // namespace

CascadeResult evaluate_cascade(const IntegralImage& ii, const Cascade& cascade,
                               const WindowBox& window) {
    cascade.validate();
    if (window.x < 0 || window.y < 0 || window.w <= 0 || window.h <= 0 ||
        window.x + window.w > ii.source_width() || window.y + window.h > ii.source_height()) {
        throw data_error("evaluate_cascade: window out of image bounds");
    }
    CascadeResult result;
    result.score = evaluate_window(ii, cascade, window, result.accepted);
    return result;
}

double box_iou(const Detection& a, const Detection& b) {
    const int x0 = std::max(a.x, b.x);
    const int y0 = std::max(a.y, b.y);
    const int x1 = std::min(a.x + a.w, b.x + b.w);
    const int y1 = std::min(a.y + a.h, b.y + b.h);
    const double inter =
        static_cast<double>(std::max(0, x1 - x0)) * static_cast<double>(std::max(0, y1 - y0));
    const double uni = static_cast<double>(a.w) * a.h + static_cast<double>(b.w) * b.h - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

std::vector<Detection> detect_faces(const Tensor& gray, const Cascade& cascade,
                                    const DetectParams& params) {
    cascade.validate();
    if (params.scale_factor <= 1.0) {
        throw data_error("detect_faces: scale_factor must be > 1");
    }
    const IntegralImage ii(gray);

    std::vector<Detection> accepted;
    for (double scale = 1.0;; scale *= params.scale_factor) {
        const int win_w = static_cast<int>(std::lround(cascade.base_width * scale));
        const int win_h = static_cast<int>(std::lround(cascade.base_height * scale));
        if (win_w > gray.width() || win_h > gray.height()) break;
        if (win_w < params.min_size || win_h < params.min_size) continue;
        const int step = std::max(1, static_cast<int>(std::lround(params.step * scale)));
        for (int y = 0; y + win_h <= gray.height(); y += step) {
            for (int x = 0; x + win_w <= gray.width(); x += step) {
                bool ok = false;
                const double score = evaluate_window(ii, cascade, {x, y, win_w, win_h}, ok);
                if (ok) accepted.push_back({x, y, win_w, win_h, scale, score});
            }
        }
    }

    // Greedy IoU clustering, then per-cluster box averaging.
    std::sort(accepted.begin(), accepted.end(), [](const Detection& a, const Detection& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.y != b.y) return a.y < b.y;
        if (a.x != b.x) return a.x < b.x;
        return a.w < b.w;
    });
    std::vector<std::vector<Detection>> clusters;
    for (const auto& det : accepted) {
        bool placed = false;
        for (auto& cluster : clusters) {
            for (const auto& member : cluster) {
                if (box_iou(member, det) > params.merge_iou) {
                    cluster.push_back(det);
                    placed = true;
                    break;
                }
            }
            if (placed) break;
        }
        if (!placed) clusters.push_back({det});
    }

    std::vector<Detection> merged;
    for (const auto& cluster : clusters) {
        double sx = 0, sy = 0, sw = 0, sh = 0, sscale = 0, best = 0;
        for (const auto& det : cluster) {
            sx += det.x;
            sy += det.y;
            sw += det.w;
            sh += det.h;
            sscale += det.scale;
            best = std::max(best, det.score);
        }
        const double n = static_cast<double>(cluster.size());
        Detection out;
        out.x = static_cast<int>(std::lround(sx / n));
        out.y = static_cast<int>(std::lround(sy / n));
        out.w = static_cast<int>(std::lround(sw / n));
        out.h = static_cast<int>(std::lround(sh / n));
        out.scale = sscale / n;
        out.score = best;
        out.x = std::clamp(out.x, 0, gray.width() - 1);
        out.y = std::clamp(out.y, 0, gray.height() - 1);
        out.w = std::min(out.w, gray.width() - out.x);
        out.h = std::min(out.h, gray.height() - out.y);
        merged.push_back(out);
    }
    std::sort(merged.begin(), merged.end(), [](const Detection& a, const Detection& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });
    return merged;
}

std::optional<Detection> largest_detection(const std::vector<Detection>& detections) {
    if (detections.empty()) return std::nullopt;
    const Detection* best = &detections.front();
    for (const auto& det : detections) {
        const long long area = static_cast<long long>(det.w) * det.h;
        const long long best_area = static_cast<long long>(best->w) * best->h;
        if (area > best_area || (area == best_area && (det.y < best->y ||
                                                       (det.y == best->y && det.x < best->x)))) {
            best = &det;
        }
    }
    return *best;
}

Tensor crop_and_resize(const Tensor& image, const Detection& det, int out_h, int out_w) {
    if (det.w <= 0 || det.h <= 0) throw data_error("crop_and_resize: degenerate box");
    if (det.x < 0 || det.y < 0 || det.x + det.w > image.width() ||
        det.y + det.h > image.height()) {
        throw data_error("crop_and_resize: box outside image bounds");
    }
    Tensor crop(det.h, det.w, image.channels());
    for (int y = 0; y < det.h; ++y) {
        for (int x = 0; x < det.w; ++x) {
            for (int c = 0; c < image.channels(); ++c) {
                crop.at(y, x, c) = image.at(det.y + y, det.x + x, c);
            }
        }
    }
    Tensor resized = resize_bilinear(crop, out_h, out_w);
    if (resized.channels() == 3) return resized;
    if (resized.channels() != 1) {
        throw data_error("crop_and_resize: expected 1- or 3-channel image");
    }
    Tensor rgb(out_h, out_w, 3);
    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            const float v = resized.at(y, x, 0);
            rgb.at(y, x, 0) = v;
            rgb.at(y, x, 1) = v;
            rgb.at(y, x, 2) = v;
        }
    }
    return rgb;
}

}  // namespace emoscreen
