#include "emoscreen/conv.hpp"

#include <algorithm>
#include <cmath>

namespace emoscreen {

void ConvWeights::validate() const {
    if (kernel_h <= 0 || kernel_w <= 0 || in_channels <= 0 || out_channels <= 0) {
        throw data_error("ConvWeights dims must be positive");
    }
    if (stride <= 0) throw data_error("ConvWeights stride must be positive");
    if (padding < 0) throw data_error("ConvWeights padding must be non-negative");
    const auto expect = static_cast<std::size_t>(kernel_h) * kernel_w * in_channels * out_channels;
    if (weights.size() != expect) {
        throw data_error("ConvWeights weight count " + std::to_string(weights.size()) +
                         ", expected " + std::to_string(expect));
    }
    if (bias.size() != static_cast<std::size_t>(out_channels)) {
        throw data_error("ConvWeights bias count " + std::to_string(bias.size()) + ", expected " +
                         std::to_string(out_channels));
    }
}

void DepthwiseWeights::validate() const {
    if (kernel_h <= 0 || kernel_w <= 0 || channels <= 0) {
        throw data_error("DepthwiseWeights dims must be positive");
    }
    if (stride <= 0) throw data_error("DepthwiseWeights stride must be positive");
    if (padding < 0) throw data_error("DepthwiseWeights padding must be non-negative");
    const auto expect = static_cast<std::size_t>(kernel_h) * kernel_w * channels;
    if (weights.size() != expect) {
        throw data_error("DepthwiseWeights weight count " + std::to_string(weights.size()) +
                         ", expected " + std::to_string(expect));
    }
    if (bias.size() != static_cast<std::size_t>(channels)) {
        throw data_error("DepthwiseWeights bias count " + std::to_string(bias.size()) +
                         ", expected " + std::to_string(channels));
    }
}

int conv_output_dim(int in, int kernel, int padding, int stride) {
    return (in + 2 * padding - kernel) / stride + 1;
}

namespace {

void check_output_dims(int oh, int ow, const Tensor& input, int kh, int kw) {
    if (oh < 1 || ow < 1) {
        throw data_error("convolution output dims non-positive for input " +
                         input.shape_string() + " with kernel " + std::to_string(kh) + "x" +
                         std::to_string(kw));
    }
}

}  // namespace

Tensor conv2d_standard(const Tensor& input, const ConvWeights& w) {
    w.validate();
    if (input.channels() != w.in_channels) {
        throw data_error("conv2d_standard channel mismatch: input has " +
                         std::to_string(input.channels()) + " channels, weights expect " +
                         std::to_string(w.in_channels));
    }
    const int oh = conv_output_dim(input.height(), w.kernel_h, w.padding, w.stride);
    const int ow = conv_output_dim(input.width(), w.kernel_w, w.padding, w.stride);
    check_output_dims(oh, ow, input, w.kernel_h, w.kernel_w);

    Tensor out(oh, ow, w.out_channels);
    const int co_n = w.out_channels;
    const int ci_n = w.in_channels;

    // Each output pixel accumulates over (d, j, ci) in a fixed order, so results are
    // bit-identical to a sequential run regardless of thread count.
#pragma omp parallel for schedule(static)
    for (int oy = 0; oy < oh; ++oy) {
        std::vector<double> acc(static_cast<std::size_t>(co_n));
        for (int ox = 0; ox < ow; ++ox) {
            for (int co = 0; co < co_n; ++co) acc[co] = w.bias[co];
            for (int d = 0; d < w.kernel_h; ++d) {
                const int iy = oy * w.stride + d - w.padding;
                if (iy < 0 || iy >= input.height()) continue;
                for (int j = 0; j < w.kernel_w; ++j) {
                    const int ix = ox * w.stride + j - w.padding;
                    if (ix < 0 || ix >= input.width()) continue;
                    const float* in_px = input.data() +
                                         (static_cast<std::size_t>(iy) * input.width() + ix) * ci_n;
                    const float* w_base =
                        w.weights.data() +
                        (static_cast<std::size_t>(d) * w.kernel_w + j) * ci_n * co_n;
                    for (int ci = 0; ci < ci_n; ++ci) {
                        const double v = in_px[ci];
                        const float* w_row = w_base + static_cast<std::size_t>(ci) * co_n;
                        for (int co = 0; co < co_n; ++co) {
                            acc[co] += v * static_cast<double>(w_row[co]);
                        }
                    }
                }
            }
            float* out_px = out.data() + (static_cast<std::size_t>(oy) * ow + ox) * co_n;
            for (int co = 0; co < co_n; ++co) out_px[co] = static_cast<float>(acc[co]);
        }
    }
    return out;
}

Tensor conv2d_depthwise(const Tensor& input, const DepthwiseWeights& w) {
    w.validate();
    if (input.channels() != w.channels) {
        throw data_error("conv2d_depthwise channel mismatch: input has " +
                         std::to_string(input.channels()) + " channels, weights expect " +
                         std::to_string(w.channels));
    }
    const int oh = conv_output_dim(input.height(), w.kernel_h, w.padding, w.stride);
    const int ow = conv_output_dim(input.width(), w.kernel_w, w.padding, w.stride);
    check_output_dims(oh, ow, input, w.kernel_h, w.kernel_w);

    Tensor out(oh, ow, w.channels);
    const int c_n = w.channels;

#pragma omp parallel for schedule(static)
    for (int oy = 0; oy < oh; ++oy) {
        std::vector<double> acc(static_cast<std::size_t>(c_n));
        for (int ox = 0; ox < ow; ++ox) {
            for (int c = 0; c < c_n; ++c) acc[c] = w.bias[c];
            for (int d = 0; d < w.kernel_h; ++d) {
                const int iy = oy * w.stride + d - w.padding;
                if (iy < 0 || iy >= input.height()) continue;
                for (int j = 0; j < w.kernel_w; ++j) {
                    const int ix = ox * w.stride + j - w.padding;
                    if (ix < 0 || ix >= input.width()) continue;
                    const float* in_px =
                        input.data() + (static_cast<std::size_t>(iy) * input.width() + ix) * c_n;
                    const float* w_px =
                        w.weights.data() + (static_cast<std::size_t>(d) * w.kernel_w + j) * c_n;
                    for (int c = 0; c < c_n; ++c) {
                        acc[c] += static_cast<double>(in_px[c]) * static_cast<double>(w_px[c]);
                    }
                }
            }
            float* out_px = out.data() + (static_cast<std::size_t>(oy) * ow + ox) * c_n;
            for (int c = 0; c < c_n; ++c) out_px[c] = static_cast<float>(acc[c]);
        }
    }
    return out;
}

Tensor conv2d_pointwise(const Tensor& input, const ConvWeights& w) {
    if (w.kernel_h != 1 || w.kernel_w != 1) {
        throw data_error("conv2d_pointwise requires a 1x1 kernel, got " +
                         std::to_string(w.kernel_h) + "x" + std::to_string(w.kernel_w));
    }
    w.validate();
    if (input.channels() != w.in_channels) {
        throw data_error("conv2d_pointwise channel mismatch: input has " +
                         std::to_string(input.channels()) + " channels, weights expect " +
                         std::to_string(w.in_channels));
    }
    const int oh = conv_output_dim(input.height(), 1, w.padding, w.stride);
    const int ow = conv_output_dim(input.width(), 1, w.padding, w.stride);
    check_output_dims(oh, ow, input, 1, 1);

    Tensor out(oh, ow, w.out_channels);
    const int ci_n = w.in_channels;
    const int co_n = w.out_channels;

#pragma omp parallel for schedule(static)
    for (int oy = 0; oy < oh; ++oy) {
        std::vector<double> acc(static_cast<std::size_t>(co_n));
        for (int ox = 0; ox < ow; ++ox) {
            const int iy = oy * w.stride - w.padding;
            const int ix = ox * w.stride - w.padding;
            for (int co = 0; co < co_n; ++co) acc[co] = w.bias[co];
            if (iy >= 0 && iy < input.height() && ix >= 0 && ix < input.width()) {
                const float* in_px =
                    input.data() + (static_cast<std::size_t>(iy) * input.width() + ix) * ci_n;
                for (int ci = 0; ci < ci_n; ++ci) {
                    const double v = in_px[ci];
                    const float* w_row = w.weights.data() + static_cast<std::size_t>(ci) * co_n;
                    for (int co = 0; co < co_n; ++co) acc[co] += v * static_cast<double>(w_row[co]);
                }
            }
            float* out_px = out.data() + (static_cast<std::size_t>(oy) * ow + ox) * co_n;
            for (int co = 0; co < co_n; ++co) out_px[co] = static_cast<float>(acc[co]);
        }
    }
    return out;
}

Tensor relu6(const Tensor& input) {
    Tensor out = input;
    for (float& v : out.values()) v = std::min(6.0f, std::max(0.0f, v));
    return out;
}

Tensor residual_add(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) {
        throw data_error("residual_add shape mismatch: " + a.shape_string() + " vs " +
                         b.shape_string());
    }
    Tensor out = a;
    const float* pb = b.data();
    float* po = out.data();
    const std::size_t n = out.size();
    for (std::size_t i = 0; i < n; ++i) po[i] += pb[i];
    return out;
}

Tensor global_avg_pool(const Tensor& input) {
    Tensor out(1, 1, input.channels());
    const int c_n = input.channels();
    std::vector<double> acc(static_cast<std::size_t>(c_n), 0.0);
    const std::size_t px_count = static_cast<std::size_t>(input.height()) * input.width();
    const float* p = input.data();
    for (std::size_t i = 0; i < px_count; ++i) {
        for (int c = 0; c < c_n; ++c) acc[c] += p[i * c_n + c];
    }
    for (int c = 0; c < c_n; ++c) {
        out.at(0, 0, c) = static_cast<float>(acc[c] / static_cast<double>(px_count));
    }
    return out;
}

Tensor resize_bilinear(const Tensor& input, int out_h, int out_w) {
    if (out_h < 1 || out_w < 1) {
        throw data_error("resize_bilinear target dims must be >= 1");
    }
    Tensor out(out_h, out_w, input.channels());
    const int c_n = input.channels();
    const double scale_y = static_cast<double>(input.height()) / out_h;
    const double scale_x = static_cast<double>(input.width()) / out_w;

#pragma omp parallel for schedule(static)
    for (int oy = 0; oy < out_h; ++oy) {
        const double sy = std::clamp((oy + 0.5) * scale_y - 0.5, 0.0,
                                     static_cast<double>(input.height() - 1));
        const int y0 = static_cast<int>(sy);
        const int y1 = std::min(y0 + 1, input.height() - 1);
        const double fy = sy - y0;
        for (int ox = 0; ox < out_w; ++ox) {
            const double sx = std::clamp((ox + 0.5) * scale_x - 0.5, 0.0,
                                         static_cast<double>(input.width() - 1));
            const int x0 = static_cast<int>(sx);
            const int x1 = std::min(x0 + 1, input.width() - 1);
            const double fx = sx - x0;
            for (int c = 0; c < c_n; ++c) {
                const double top = (1.0 - fx) * input.at(y0, x0, c) + fx * input.at(y0, x1, c);
                const double bot = (1.0 - fx) * input.at(y1, x0, c) + fx * input.at(y1, x1, c);
                out.at(oy, ox, c) = static_cast<float>((1.0 - fy) * top + fy * bot);
            }
        }
    }
    return out;
}

Tensor softmax(const Tensor& input) {
    Tensor out = input;
    const int c_n = input.channels();
    const std::size_t px_count = static_cast<std::size_t>(input.height()) * input.width();
    for (std::size_t i = 0; i < px_count; ++i) {
        float* px = out.data() + i * c_n;
        float mx = px[0];
        for (int c = 1; c < c_n; ++c) mx = std::max(mx, px[c]);
        double sum = 0.0;
        for (int c = 0; c < c_n; ++c) sum += std::exp(static_cast<double>(px[c]) - mx);
        for (int c = 0; c < c_n; ++c) {
            px[c] = static_cast<float>(std::exp(static_cast<double>(px[c]) - mx) / sum);
        }
    }
    return out;
}

}  // namespace emoscreen
