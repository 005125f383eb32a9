#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace emoscreen {

struct NamedTensor {
    std::vector<std::uint32_t> dims;
    std::vector<float> values;

    std::size_t element_count() const {
        std::size_t n = 1;
        for (auto d : dims) n *= d;
        return n;
    }
};

// Name -> tensor map backing network weights and model payloads.
// std::map keeps serialization order deterministic.
using WeightContainer = std::map<std::string, NamedTensor>;

// NWF1 container: magic "NWF1", u32 LE tensor count, then per tensor
// u32 name length + name bytes + u32 rank + u32 dims + f32 LE data.
WeightContainer load_weights(const std::string& path);
WeightContainer read_nwf1(std::istream& in);
void save_weights(const WeightContainer& weights, const std::string& path);
void write_nwf1(const WeightContainer& weights, std::ostream& out);

}  // namespace emoscreen
