#include "ffcvsr/weights_io.hpp"

#include <array>
#include <cstring>
#include <fstream>

#include "ffcvsr/error.hpp"

namespace ffcvsr {

namespace {

void write_u16(std::ostream& os, uint16_t v) {
    const std::array<char, 2> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
    os.write(b.data(), b.size());
}

void write_u32(std::ostream& os, uint32_t v) {
    std::array<char, 4> b;
    for (int i = 0; i < 4; ++i)
        b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b.data(), b.size());
}

uint16_t read_u16(std::istream& is) {
    std::array<unsigned char, 2> b;
    is.read(reinterpret_cast<char*>(b.data()), b.size());
    check(is.good(), "weights file: unexpected end of file");
    return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

uint32_t read_u32(std::istream& is) {
    std::array<unsigned char, 4> b;
    is.read(reinterpret_cast<char*>(b.data()), b.size());
    check(is.good(), "weights file: unexpected end of file");
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<uint32_t>(b[i]) << (8 * i);
    return v;
}

// Host floats are IEEE-754 little-endian on every supported target; data is
// written raw.
static_assert(sizeof(float) == 4);

} // namespace

void save_weights(const ModelWeights& weights, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    check(os.good(), "weights file: cannot open '", path, "' for writing");
    os.write("FFCW", 4);
    write_u32(os, kWeightsFormatVersion);
    write_u32(os, static_cast<uint32_t>(weights.params().size()));
    for (const auto& [name, t] : weights.params()) {
        check(name.size() <= 0xffff, "weights file: parameter name too long: '", name, "'");
        write_u16(os, static_cast<uint16_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        os.put(static_cast<char>(4)); // rank
        const Shape& s = t.shape();
        for (int64_t extent : {s.n, s.c, s.h, s.w})
            write_u32(os, static_cast<uint32_t>(extent));
        os.write(reinterpret_cast<const char*>(t.data()),
                 static_cast<std::streamsize>(t.numel() * sizeof(float)));
    }
    check(os.good(), "weights file: write to '", path, "' failed");
}

ModelWeights load_weights(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    check(is.good(), "weights file: cannot open '", path, "'");
    std::array<char, 4> magic{};
    is.read(magic.data(), magic.size());
    check(is.good() && std::memcmp(magic.data(), "FFCW", 4) == 0,
          "weights file: '", path, "' is not a FFCW weight file");
    const uint32_t version = read_u32(is);
    check(version == kWeightsFormatVersion, "weights file: unsupported format version ",
          version);
    const uint32_t count = read_u32(is);

    ModelWeights weights;
    for (uint32_t e = 0; e < count; ++e) {
        const uint16_t name_len = read_u16(is);
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        check(is.good(), "weights file: unexpected end of file");

        const int rank = is.get();
        check(rank >= 1 && rank <= 4, "weights file: parameter '", name,
              "' has unsupported rank ", rank);
        std::array<int64_t, 4> extents{1, 1, 1, 1};
        for (int i = 0; i < rank; ++i)
            extents[4 - rank + i] = read_u32(is); // left-pad with 1s
        const Shape shape{extents[0], extents[1], extents[2], extents[3]};

        std::vector<float> data(static_cast<size_t>(shape.numel()));
        is.read(reinterpret_cast<char*>(data.data()),
                static_cast<std::streamsize>(data.size() * sizeof(float)));
        check(is.good(), "weights file: unexpected end of file in '", name, "'");
        weights.insert(name, Tensor::from_vector(shape, std::move(data)));
    }
    return weights;
}

ModelWeights load_weights(const std::string& path, const ModelConfig& config) {
    ModelWeights weights = load_weights(path);
    validate_weights(weights, config);
    return weights;
}

} // namespace ffcvsr
