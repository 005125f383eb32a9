#pragma once

#include "emoscreen/conv.hpp"
#include "emoscreen/tensor.hpp"

namespace emoscreen::ref {

// Straight-loop serial convolutions, written independently of the parallel
// kernels. Used as the correctness oracle in tests and as the baseline in
// conv_bench; not linked into the main library.
Tensor conv2d_standard(const Tensor& input, const ConvWeights& w);
Tensor conv2d_depthwise(const Tensor& input, const DepthwiseWeights& w);
Tensor conv2d_pointwise(const Tensor& input, const ConvWeights& w);
Tensor resize_bilinear(const Tensor& input, int out_h, int out_w);

}  // namespace emoscreen::ref
