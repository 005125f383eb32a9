#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

#include "emoscreen/conv.hpp"
#include "emoscreen/tensor.hpp"

namespace testsupport {

// Self-deleting temp directory per test.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<unsigned> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("emoscreen_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline emoscreen::Tensor random_tensor(int h, int w, int c, std::mt19937& rng, float lo = -1.0f,
                                       float hi = 1.0f) {
    std::uniform_real_distribution<float> dist(lo, hi);
    emoscreen::Tensor t(h, w, c);
    for (float& v : t.values()) v = dist(rng);
    return t;
}

inline emoscreen::ConvWeights random_conv_weights(int kh, int kw, int ci, int co, int stride,
                                                  int padding, std::mt19937& rng) {
    std::uniform_real_distribution<float> dist(-0.5f, 0.5f);
    emoscreen::ConvWeights w;
    w.kernel_h = kh;
    w.kernel_w = kw;
    w.in_channels = ci;
    w.out_channels = co;
    w.stride = stride;
    w.padding = padding;
    w.weights.resize(static_cast<std::size_t>(kh) * kw * ci * co);
    for (float& v : w.weights) v = dist(rng);
    w.bias.resize(co);
    for (float& v : w.bias) v = dist(rng);
    return w;
}

inline emoscreen::DepthwiseWeights random_depthwise_weights(int kh, int kw, int c, int stride,
                                                            int padding, std::mt19937& rng) {
    std::uniform_real_distribution<float> dist(-0.5f, 0.5f);
    emoscreen::DepthwiseWeights w;
    w.kernel_h = kh;
    w.kernel_w = kw;
    w.channels = c;
    w.stride = stride;
    w.padding = padding;
    w.weights.resize(static_cast<std::size_t>(kh) * kw * c);
    for (float& v : w.weights) v = dist(rng);
    w.bias.resize(c);
    for (float& v : w.bias) v = dist(rng);
    return w;
}

inline double max_rel_diff(const emoscreen::Tensor& a, const emoscreen::Tensor& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double va = a.values()[i];
        const double vb = b.values()[i];
        const double scale = std::max({std::abs(va), std::abs(vb), 1e-6});
        worst = std::max(worst, std::abs(va - vb) / scale);
    }
    return worst;
}

// Path to a directory shipped with the repo (topology file etc.).
inline std::string data_dir() {
    if (const char* env = std::getenv("EMOSCREEN_DATA")) return env;
    return "data";
}

}  // namespace testsupport
