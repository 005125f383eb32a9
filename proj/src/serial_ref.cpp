#include "emoscreen/serial_ref.hpp"

#include <algorithm>

namespace emoscreen::ref {

namespace {

// Zero-padded read.
double pixel(const Tensor& t, int y, int x, int c) {
    if (y < 0 || y >= t.height() || x < 0 || x >= t.width()) return 0.0;
    return t.at(y, x, c);
}

}  // namespace

Tensor conv2d_standard(const Tensor& input, const ConvWeights& w) {
    w.validate();
    if (input.channels() != w.in_channels) throw data_error("ref conv channel mismatch");
    const int oh = (input.height() + 2 * w.padding - w.kernel_h) / w.stride + 1;
    const int ow = (input.width() + 2 * w.padding - w.kernel_w) / w.stride + 1;
    if (oh < 1 || ow < 1) throw data_error("ref conv output dims non-positive");
    Tensor out(oh, ow, w.out_channels);
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            for (int co = 0; co < w.out_channels; ++co) {
                double acc = w.bias[co];
                for (int d = 0; d < w.kernel_h; ++d) {
                    for (int j = 0; j < w.kernel_w; ++j) {
                        for (int ci = 0; ci < w.in_channels; ++ci) {
                            acc += static_cast<double>(w.w(d, j, ci, co)) *
                                   pixel(input, oy * w.stride + d - w.padding,
                                         ox * w.stride + j - w.padding, ci);
                        }
                    }
                }
                out.at(oy, ox, co) = static_cast<float>(acc);
            }
        }
    }
    return out;
}

Tensor conv2d_depthwise(const Tensor& input, const DepthwiseWeights& w) {
    w.validate();
    if (input.channels() != w.channels) throw data_error("ref depthwise channel mismatch");
    const int oh = (input.height() + 2 * w.padding - w.kernel_h) / w.stride + 1;
    const int ow = (input.width() + 2 * w.padding - w.kernel_w) / w.stride + 1;
    if (oh < 1 || ow < 1) throw data_error("ref depthwise output dims non-positive");
    Tensor out(oh, ow, w.channels);
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            for (int c = 0; c < w.channels; ++c) {
                double acc = w.bias[c];
                for (int d = 0; d < w.kernel_h; ++d) {
                    for (int j = 0; j < w.kernel_w; ++j) {
                        acc += static_cast<double>(w.w(d, j, c)) *
                               pixel(input, oy * w.stride + d - w.padding,
                                     ox * w.stride + j - w.padding, c);
                    }
                }
                out.at(oy, ox, c) = static_cast<float>(acc);
            }
        }
    }
    return out;
}

Tensor conv2d_pointwise(const Tensor& input, const ConvWeights& w) {
    if (w.kernel_h != 1 || w.kernel_w != 1) throw data_error("ref pointwise kernel must be 1x1");
    return ref::conv2d_standard(input, w);
}

Tensor resize_bilinear(const Tensor& input, int out_h, int out_w) {
    if (out_h < 1 || out_w < 1) throw data_error("ref resize target dims must be >= 1");
    Tensor out(out_h, out_w, input.channels());
    for (int oy = 0; oy < out_h; ++oy) {
        for (int ox = 0; ox < out_w; ++ox) {
            double sy = (oy + 0.5) * input.height() / out_h - 0.5;
            double sx = (ox + 0.5) * input.width() / out_w - 0.5;
            sy = std::clamp(sy, 0.0, static_cast<double>(input.height() - 1));
            sx = std::clamp(sx, 0.0, static_cast<double>(input.width() - 1));
            const int y0 = static_cast<int>(sy);
            const int x0 = static_cast<int>(sx);
            const int y1 = std::min(y0 + 1, input.height() - 1);
            const int x1 = std::min(x0 + 1, input.width() - 1);
            const double fy = sy - y0;
            const double fx = sx - x0;
            for (int c = 0; c < input.channels(); ++c) {
                const double v = (1 - fy) * ((1 - fx) * input.at(y0, x0, c) + fx * input.at(y0, x1, c)) +
                                 fy * ((1 - fx) * input.at(y1, x0, c) + fx * input.at(y1, x1, c));
                out.at(oy, ox, c) = static_cast<float>(v);
            }
        }
    }
    return out;
}

}  // namespace emoscreen::ref
