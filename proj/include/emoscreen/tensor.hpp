#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "emoscreen/errors.hpp"

namespace emoscreen {

// Dense rank-3 feature map, row-major (height, width, channels), f32 storage.
class Tensor {
public:
    Tensor() = default;

    Tensor(int height, int width, int channels, float fill = 0.0f)
        : height_(height), width_(width), channels_(channels) {
        if (height <= 0 || width <= 0 || channels <= 0) {
            throw data_error("Tensor dims must be positive, got " + shape_string());
        }
        values_.assign(static_cast<std::size_t>(height) * width * channels, fill);
    }

    Tensor(int height, int width, int channels, std::vector<float> values)
        : height_(height), width_(width), channels_(channels), values_(std::move(values)) {
        if (height <= 0 || width <= 0 || channels <= 0) {
            throw data_error("Tensor dims must be positive, got " + shape_string());
        }
        if (values_.size() != static_cast<std::size_t>(height) * width * channels) {
            throw data_error("Tensor value count " + std::to_string(values_.size()) +
                             " does not match shape " + shape_string());
        }
    }

    int height() const { return height_; }
    int width() const { return width_; }
    int channels() const { return channels_; }
    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }

    float& at(int y, int x, int c) { return values_[index(y, x, c)]; }
    float at(int y, int x, int c) const { return values_[index(y, x, c)]; }

    const std::vector<float>& values() const { return values_; }
    std::vector<float>& values() { return values_; }
    const float* data() const { return values_.data(); }
    float* data() { return values_.data(); }

    bool same_shape(const Tensor& other) const {
        return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
    }

    std::string shape_string() const {
        return std::to_string(height_) + "x" + std::to_string(width_) + "x" +
               std::to_string(channels_);
    }

private:
    std::size_t index(int y, int x, int c) const {
        return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
    }

    int height_ = 0;
    int width_ = 0;
    int channels_ = 0;
    std::vector<float> values_;
};

}  // namespace emoscreen
