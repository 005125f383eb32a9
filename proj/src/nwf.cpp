#include "emoscreen/nwf.hpp"

#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "emoscreen/errors.hpp"

namespace emoscreen {

namespace {

constexpr char kMagic[4] = {'N', 'W', 'F', '1'};

std::uint32_t read_u32(std::istream& in, const char* what) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) {
        throw data_error(std::string("NWF1: truncated payload while reading ") + what);
    }
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_u32(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                                static_cast<unsigned char>((v >> 8) & 0xff),
                                static_cast<unsigned char>((v >> 16) & 0xff),
                                static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

float read_f32(std::istream& in) {
    const std::uint32_t bits = read_u32(in, "tensor data");
    float f;
    std::memcpy(&f, &bits, 4);
    return f;
}

void write_f32(std::ostream& out, float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    write_u32(out, bits);
}

}  // namespace

WeightContainer read_nwf1(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
        throw data_error("NWF1: bad magic bytes");
    }
    const std::uint32_t count = read_u32(in, "tensor count");
    WeightContainer weights;
    for (std::uint32_t t = 0; t < count; ++t) {
        const std::uint32_t name_len = read_u32(in, "name length");
        std::string name(name_len, '\0');
        if (name_len > 0 && !in.read(name.data(), name_len)) {
            throw data_error("NWF1: truncated payload while reading tensor name");
        }
        NamedTensor tensor;
        const std::uint32_t rank = read_u32(in, "rank");
        tensor.dims.resize(rank);
        std::size_t n = 1;
        for (std::uint32_t r = 0; r < rank; ++r) {
            tensor.dims[r] = read_u32(in, "dims");
            n *= tensor.dims[r];
        }
        tensor.values.resize(n);
        for (std::size_t i = 0; i < n; ++i) tensor.values[i] = read_f32(in);
        if (weights.count(name)) {
            throw data_error("NWF1: duplicate tensor name '" + name + "'");
        }
        weights.emplace(std::move(name), std::move(tensor));
    }
    return weights;
}

void write_nwf1(const WeightContainer& weights, std::ostream& out) {
    out.write(kMagic, 4);
    if (weights.size() > std::numeric_limits<std::uint32_t>::max()) {
        throw data_error("NWF1: too many tensors");
    }
    write_u32(out, static_cast<std::uint32_t>(weights.size()));
    for (const auto& [name, tensor] : weights) {
        write_u32(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_u32(out, static_cast<std::uint32_t>(tensor.dims.size()));
        std::size_t n = 1;
        for (auto d : tensor.dims) {
            write_u32(out, d);
            n *= d;
        }
        if (tensor.values.size() != n) {
            throw data_error("NWF1: tensor '" + name + "' value count does not match dims");
        }
        for (float v : tensor.values) write_f32(out, v);
    }
}

WeightContainer load_weights(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open weight file '" + path + "'");
    return read_nwf1(in);
}

void save_weights(const WeightContainer& weights, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot create weight file '" + path + "'");
    write_nwf1(weights, out);
    if (!out) throw io_error("short write to weight file '" + path + "'");
}

}  // namespace emoscreen
