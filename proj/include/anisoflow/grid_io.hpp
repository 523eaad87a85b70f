#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "anisoflow/spectral.hpp"

namespace anisoflow {

/// AMCF1 grid file:
///   bytes 0..3  magic "AMCF"
///   byte  4     version (1)
///   byte  5     dimension (2 or 3)
///   bytes 6..9  P, u32 little-endian
///   then P^d IEEE-754 binary64 values, little-endian, x_1 fastest.
/// The box length is not stored; fields read back live on the unit box.
inline constexpr std::uint8_t kAmcfVersion = 1;

std::vector<std::uint8_t> encode_grid(const SpectralField& field);
/// Throws FormatError with kind BadMagic, BadVersion, BadHeader or Truncated.
SpectralField decode_grid(const std::vector<std::uint8_t>& bytes);

void write_grid(const std::filesystem::path& path, const SpectralField& field);
SpectralField read_grid(const std::filesystem::path& path);

}  // namespace anisoflow
