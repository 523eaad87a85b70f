#include "anisoflow/grid_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "anisoflow/errors.hpp"

namespace anisoflow {

namespace {

constexpr char kMagic[4] = {'A', 'M', 'C', 'F'};
constexpr std::size_t kHeaderSize = 10;

void put_u64_le(std::uint8_t* out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint64_t get_u64_le(const std::uint8_t* in) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[i]) << (8 * i);
    return v;
}

}  // namespace

std::vector<std::uint8_t> encode_grid(const SpectralField& field) {
    const Grid& g = field.grid;
    std::vector<std::uint8_t> out(kHeaderSize + 8 * g.size());
    std::memcpy(out.data(), kMagic, 4);
    out[4] = kAmcfVersion;
    out[5] = static_cast<std::uint8_t>(g.dim);
    const auto p = static_cast<std::uint32_t>(g.P);
    for (int i = 0; i < 4; ++i) out[6 + i] = static_cast<std::uint8_t>(p >> (8 * i));
    std::uint8_t* dst = out.data() + kHeaderSize;
    for (double v : field.values) {
        put_u64_le(dst, std::bit_cast<std::uint64_t>(v));
        dst += 8;
    }
    return out;
}

SpectralField decode_grid(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw FormatError(FormatError::Kind::BadMagic, "not an AMCF grid file (bad magic)");
    if (bytes.size() < kHeaderSize)
        throw FormatError(FormatError::Kind::Truncated, "AMCF header truncated");
    if (bytes[4] != kAmcfVersion)
        throw FormatError(FormatError::Kind::BadVersion,
                          "unsupported AMCF version " + std::to_string(static_cast<int>(bytes[4])));
    const int dim = bytes[5];
    std::uint32_t p = 0;
    for (int i = 0; i < 4; ++i) p |= static_cast<std::uint32_t>(bytes[6 + i]) << (8 * i);
    Grid g;
    try {
        g = Grid(dim, static_cast<int>(p));
    } catch (const DomainError& e) {
        throw FormatError(FormatError::Kind::BadHeader, std::string("invalid AMCF header: ") + e.what());
    }
    if (bytes.size() != kHeaderSize + 8 * g.size())
        throw FormatError(FormatError::Kind::Truncated,
                          "AMCF payload length " + std::to_string(bytes.size() - kHeaderSize) + " bytes, expected " +
                              std::to_string(8 * g.size()));
    SpectralField f(g);
    const std::uint8_t* src = bytes.data() + kHeaderSize;
    for (double& v : f.values) {
        v = std::bit_cast<double>(get_u64_le(src));
        src += 8;
    }
    return f;
}

void write_grid(const std::filesystem::path& path, const SpectralField& field) {
    const auto bytes = encode_grid(field);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError(FormatError::Kind::Io, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError(FormatError::Kind::Io, "write failed: " + path.string());
}

SpectralField read_grid(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(FormatError::Kind::Io, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_grid(bytes);
}

}  // namespace anisoflow
