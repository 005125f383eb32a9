#include "emoscreen/cost.hpp"

#include <string>

#include "emoscreen/errors.hpp"

namespace emoscreen {

namespace {

std::uint64_t positive(int v, const char* name) {
    if (v <= 0) {
        throw data_error(std::string("cost model argument ") + name + " must be positive, got " +
                         std::to_string(v));
    }
    return static_cast<std::uint64_t>(v);
}

}  // namespace

std::uint64_t cost_standard(int k, int c_i, int c_o, int h_o, int w_o) {
    const std::uint64_t ku = positive(k, "k");
    return ku * ku * positive(c_i, "c_i") * positive(c_o, "c_o") * positive(h_o, "h_o") *
           positive(w_o, "w_o");
}

std::uint64_t cost_depthwise(int k, int c_i, int h_o, int w_o) {
    const std::uint64_t ku = positive(k, "k");
    return ku * ku * positive(c_i, "c_i") * positive(h_o, "h_o") * positive(w_o, "w_o");
}

std::uint64_t cost_pointwise(int c_i, int c_o, int h_o, int w_o) {
    return positive(c_i, "c_i") * positive(c_o, "c_o") * positive(h_o, "h_o") *
           positive(w_o, "w_o");
}

CostReport cost_separable(int k, int c_i, int c_o, int h_o, int w_o) {
    CostReport r;
    r.standard_macs = cost_standard(k, c_i, c_o, h_o, w_o);
    r.depthwise_macs = cost_depthwise(k, c_i, h_o, w_o);
    r.pointwise_macs = cost_pointwise(c_i, c_o, h_o, w_o);
    r.separable_macs = r.depthwise_macs + r.pointwise_macs;
    r.ratio = static_cast<double>(r.separable_macs) / static_cast<double>(r.standard_macs);
    return r;
}

double cost_ratio(int k, int c_o) {
    positive(k, "k");
    positive(c_o, "c_o");
    return 1.0 / static_cast<double>(c_o) + 1.0 / (static_cast<double>(k) * k);
}

}  // namespace emoscreen
