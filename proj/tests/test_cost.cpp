#include <doctest.h>

#include <cmath>

#include "emoscreen/cost.hpp"
#include "emoscreen/errors.hpp"

using namespace emoscreen;

TEST_SUITE_BEGIN("cost");

// Counts multiply-accumulates by walking the convolution loops directly.
namespace {

std::uint64_t counted_standard_macs(int k, int c_i, int c_o, int h_o, int w_o) {
    std::uint64_t macs = 0;
    for (int y = 0; y < h_o; ++y)
        for (int x = 0; x < w_o; ++x)
            for (int co = 0; co < c_o; ++co)
                for (int d = 0; d < k; ++d)
                    for (int j = 0; j < k; ++j)
                        for (int ci = 0; ci < c_i; ++ci) ++macs;
    return macs;
}

std::uint64_t counted_depthwise_macs(int k, int c, int h_o, int w_o) {
    std::uint64_t macs = 0;
    for (int y = 0; y < h_o; ++y)
        for (int x = 0; x < w_o; ++x)
            for (int ch = 0; ch < c; ++ch)
                for (int d = 0; d < k; ++d)
                    for (int j = 0; j < k; ++j) ++macs;
    return macs;
}

std::uint64_t counted_pointwise_macs(int c_i, int c_o, int h_o, int w_o) {
    std::uint64_t macs = 0;
    for (int y = 0; y < h_o; ++y)
        for (int x = 0; x < w_o; ++x)
            for (int co = 0; co < c_o; ++co)
                for (int ci = 0; ci < c_i; ++ci) ++macs;
    return macs;
}

}  // namespace

TEST_CASE("frozen counting-oracle values for k=3, c_i=2, c_o=4, 2x2 output") {
    CHECK(counted_standard_macs(3, 2, 4, 2, 2) == 288);
    CHECK(counted_depthwise_macs(3, 2, 2, 2) == 72);
    CHECK(counted_pointwise_macs(2, 4, 2, 2) == 32);

    CHECK(cost_standard(3, 2, 4, 2, 2) == 288);
    CHECK(cost_depthwise(3, 2, 2, 2) == 72);
    CHECK(cost_pointwise(2, 4, 2, 2) == 32);
    const CostReport report = cost_separable(3, 2, 4, 2, 2);
    CHECK(report.separable_macs == 104);
    CHECK(report.ratio == doctest::Approx(13.0 / 36.0).epsilon(1e-12));
    CHECK(cost_ratio(3, 4) == doctest::Approx(13.0 / 36.0).epsilon(1e-12));
}

TEST_CASE("cost_ratio trivial substitution") {
    CHECK(cost_ratio(1, 1) == doctest::Approx(2.0));
    CHECK(cost_ratio(3, 96) == doctest::Approx(1.0 / 96.0 + 1.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("cost_ratio for a 14x14x96 layer agrees with counted MACs") {
    const std::uint64_t ms = counted_depthwise_macs(3, 96, 14, 14) +
                             counted_pointwise_macs(96, 96, 14, 14);
    const std::uint64_t mc = counted_standard_macs(3, 96, 96, 14, 14);
    CHECK(std::abs(cost_ratio(3, 96) - static_cast<double>(ms) / mc) < 1e-12);
}

TEST_CASE("M_s = M_d + M_p and the closed-form ratio over a parameter grid") {
    for (int k : {1, 2, 3, 5}) {
        for (int ci : {1, 3, 7}) {
            for (int co : {1, 4, 24}) {
                for (int hw : {1, 5, 14}) {
                    const CostReport r = cost_separable(k, ci, co, hw, hw);
                    CHECK(r.separable_macs == r.depthwise_macs + r.pointwise_macs);
                    CHECK(r.standard_macs == counted_standard_macs(k, ci, co, hw, hw));
                    CHECK(r.depthwise_macs == counted_depthwise_macs(k, ci, hw, hw));
                    CHECK(r.pointwise_macs == counted_pointwise_macs(ci, co, hw, hw));
                    CHECK(std::abs(r.ratio - cost_ratio(k, co)) < 1e-12);
                }
            }
        }
    }
}

TEST_CASE("non-positive arguments are rejected") {
    CHECK_THROWS_AS(cost_standard(0, 1, 1, 1, 1), data_error);
    CHECK_THROWS_AS(cost_depthwise(3, -1, 1, 1), data_error);
    CHECK_THROWS_AS(cost_pointwise(1, 1, 0, 1), data_error);
    CHECK_THROWS_AS(cost_ratio(0, 4), data_error);
}

TEST_SUITE_END();
