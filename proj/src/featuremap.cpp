#include "mmpm/featuremap.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "mmpm/errors.hpp"

namespace mmpm {

namespace {

constexpr char kMagic[4] = {'M', 'M', 'P', 'M'};

std::uint32_t read_u32le(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_u32le(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

FeatureDims read_header(std::istream& in, const std::filesystem::path& path) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw DataError("feature map '" + path.string() + "': bad magic (expected MMPM)");
    const std::uint32_t h = read_u32le(in);
    const std::uint32_t w = read_u32le(in);
    const std::uint32_t f = read_u32le(in);
    if (!in) throw DataError("feature map '" + path.string() + "': truncated header");
    if (h == 0 || w == 0 || f == 0 || h > 4096 || w > 4096 || f > (1u << 20))
        throw DataError("feature map '" + path.string() + "': implausible dimensions " +
                        FeatureDims{static_cast<int>(h), static_cast<int>(w),
                                    static_cast<int>(f)}
                            .str());
    return {static_cast<int>(h), static_cast<int>(w), static_cast<int>(f)};
}

}  // namespace

std::string FeatureDims::str() const {
    return std::to_string(h) + "x" + std::to_string(w) + "x" + std::to_string(f);
}

FeatureMap FeatureMap::zero(int height, int width, int filters) {
    FeatureMap map;
    map.height = height;
    map.width = width;
    map.filters = filters;
    map.cells = CellMatrix::Zero(height * width, filters);
    return map;
}

FeatureMap read_feature_map(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open feature map '" + path.string() + "'");
    const FeatureDims dims = read_header(in, path);

    FeatureMap map = FeatureMap::zero(dims.h, dims.w, dims.f);
    const std::size_t count = static_cast<std::size_t>(dims.h) * dims.w * dims.f;
    std::vector<unsigned char> raw(count * 4);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!in) throw DataError("feature map '" + path.string() + "': truncated values");

    float* dst = map.cells.data();
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint32_t bits = static_cast<std::uint32_t>(raw[4 * i]) |
                                   (static_cast<std::uint32_t>(raw[4 * i + 1]) << 8) |
                                   (static_cast<std::uint32_t>(raw[4 * i + 2]) << 16) |
                                   (static_cast<std::uint32_t>(raw[4 * i + 3]) << 24);
        const float v = std::bit_cast<float>(bits);
        if (!std::isfinite(v) || v < 0.0f)
            throw DataError("feature map '" + path.string() + "': value " + std::to_string(i) +
                            " is not a finite non-negative response");
        dst[i] = v;
    }
    return map;
}

void write_feature_map(const std::filesystem::path& path, const FeatureMap& map) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write feature map '" + path.string() + "'");
    out.write(kMagic, 4);
    write_u32le(out, static_cast<std::uint32_t>(map.height));
    write_u32le(out, static_cast<std::uint32_t>(map.width));
    write_u32le(out, static_cast<std::uint32_t>(map.filters));
    const std::size_t count = static_cast<std::size_t>(map.cell_count()) * map.filters;
    const float* src = map.cells.data();
    std::vector<unsigned char> raw(count * 4);
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint32_t bits = std::bit_cast<std::uint32_t>(src[i]);
        raw[4 * i] = static_cast<unsigned char>(bits & 0xff);
        raw[4 * i + 1] = static_cast<unsigned char>((bits >> 8) & 0xff);
        raw[4 * i + 2] = static_cast<unsigned char>((bits >> 16) & 0xff);
        raw[4 * i + 3] = static_cast<unsigned char>((bits >> 24) & 0xff);
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw DataError("failed writing feature map '" + path.string() + "'");
}

FeatureDims read_feature_dims(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open feature map '" + path.string() + "'");
    return read_header(in, path);
}

}  // namespace mmpm
