#pragma once

#include <vector>

#include "emoscreen/tensor.hpp"

namespace emoscreen {

// Kernel bank for standard (and 1x1 pointwise) convolution.
// Weights are indexed (d, j, c_in, c_out) row-major; bias has out_channels entries.
struct ConvWeights {
    int kernel_h = 0;
    int kernel_w = 0;
    int in_channels = 0;
    int out_channels = 0;
    std::vector<float> weights;  // kernel_h * kernel_w * in_channels * out_channels
    std::vector<float> bias;     // out_channels
    int stride = 1;
    int padding = 0;

    float w(int d, int j, int ci, int co) const {
        return weights[(((static_cast<std::size_t>(d) * kernel_w) + j) * in_channels + ci) *
                           out_channels +
                       co];
    }
    void validate() const;
};

// One kernel_h x kernel_w filter per channel (channel multiplier 1).
// Weights are indexed (d, j, c) row-major; bias has `channels` entries.
struct DepthwiseWeights {
    int kernel_h = 0;
    int kernel_w = 0;
    int channels = 0;
    std::vector<float> weights;  // kernel_h * kernel_w * channels
    std::vector<float> bias;     // channels
    int stride = 1;
    int padding = 0;

    float w(int d, int j, int c) const {
        return weights[(static_cast<std::size_t>(d) * kernel_w + j) * channels + c];
    }
    void validate() const;
};

// Spatial size of a convolution output: floor((in + 2*padding - kernel) / stride) + 1.
int conv_output_dim(int in, int kernel, int padding, int stride);

Tensor conv2d_standard(const Tensor& input, const ConvWeights& w);
Tensor conv2d_depthwise(const Tensor& input, const DepthwiseWeights& w);
// Per-pixel channel mixing; requires kernel_h == kernel_w == 1.
Tensor conv2d_pointwise(const Tensor& input, const ConvWeights& w);

Tensor relu6(const Tensor& input);
Tensor residual_add(const Tensor& a, const Tensor& b);
Tensor global_avg_pool(const Tensor& input);
// Half-pixel-centered bilinear resampling, clamped at borders.
Tensor resize_bilinear(const Tensor& input, int out_h, int out_w);
// Channel-wise softmax (optional op, kept for baseline comparison paths).
Tensor softmax(const Tensor& input);

}  // namespace emoscreen
