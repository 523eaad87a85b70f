#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "anisoflow/anisotropy.hpp"
#include "anisoflow/bench.hpp"

namespace anisoflow {

/// Resolved run configuration. Keys of the flat key=value file:
///   anisotropy, dim, P, dt, eps, T, conserve, shape, shape_params,
///   snapshot_every, seed, profile_eps_power
/// Missing keys take the defaults P = 256 (2D) / 128 (3D), eps = 1/P,
/// dt = 1/P^2.
struct RunConfig {
    std::string anisotropy = "iso";
    int dim = 2;
    int P = 256;
    double dt = 0;
    double eps = 0;
    double T = 0.05;
    bool conserve = false;
    std::string shape = "wulff";
    std::string shape_params;
    int snapshot_every = 0;
    std::uint64_t seed = 0;
    double profile_eps_power = 1.0;

    Anisotropy density() const { return Anisotropy::parse(anisotropy, dim); }
    ShapeSpec shape_spec() const { return ShapeSpec::parse(shape, shape_params); }
    /// Canonical key=value listing of every field (defaults filled in).
    std::string to_text() const;
};

/// Parses key=value lines ('#' starts a comment). Unknown keys, malformed
/// values and duplicate keys throw ConfigError; so does a violated
/// stability condition dt <= M eps^2.
RunConfig parse_config(std::string_view text);
/// Splits the text into keys and values without validating them.
std::map<std::string, std::string> parse_entries(std::string_view text);
RunConfig parse_config_file(const std::filesystem::path& path);
/// Same checks on an already split key/value map.
RunConfig resolve_config(const std::map<std::string, std::string>& entries);

}  // namespace anisoflow
