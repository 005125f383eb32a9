#pragma once

#include <cstdint>

namespace emoscreen {

// Multiply-accumulate counts for one convolution layer, plus the
// separable-vs-standard ratio. Bias adds and activations are not counted.
struct CostReport {
    std::uint64_t standard_macs = 0;   // M_c
    std::uint64_t depthwise_macs = 0;  // M_d
    std::uint64_t pointwise_macs = 0;  // M_p
    std::uint64_t separable_macs = 0;  // M_s = M_d + M_p
    double ratio = 0.0;                // M_s / M_c
};

// M_c = k^2 * c_i * c_o * h_o * w_o
std::uint64_t cost_standard(int k, int c_i, int c_o, int h_o, int w_o);
// M_d = k^2 * c_i * h_o * w_o
std::uint64_t cost_depthwise(int k, int c_i, int h_o, int w_o);
// M_p = c_i * c_o * h_o * w_o
std::uint64_t cost_pointwise(int c_i, int c_o, int h_o, int w_o);
// Full report for a depthwise-separable block replacing a k x k standard conv.
CostReport cost_separable(int k, int c_i, int c_o, int h_o, int w_o);
// Closed form of the separable/standard ratio: 1/c_o + 1/k^2.
double cost_ratio(int k, int c_o);

}  // namespace emoscreen
