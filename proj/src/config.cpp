#include "anisoflow/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "anisoflow/errors.hpp"
#include "anisoflow/solver.hpp"

namespace anisoflow {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double x = 0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size() || !std::isfinite(x))
        throw ConfigError("config key '" + key + "': not a number: '" + v + "'");
    return x;
}

long to_integer(const std::string& key, const std::string& v) {
    long x = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw ConfigError("config key '" + key + "': not an integer: '" + v + "'");
    return x;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key '" + key + "': expected true/false, got '" + v + "'");
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{"anisotropy", "dim",  "P",     "dt",   "eps", "T", "conserve", "shape",
                                            "shape_params", "snapshot_every", "seed", "profile_eps_power"};
    return keys;
}

}  // namespace

RunConfig resolve_config(const std::map<std::string, std::string>& entries) {
    RunConfig c;
    for (const auto& [k, v] : entries)
        if (!known_keys().count(k)) throw ConfigError("unknown config key '" + k + "'");
    const auto get = [&](const char* k) -> const std::string* {
        const auto it = entries.find(k);
        return it == entries.end() ? nullptr : &it->second;
    };
    if (auto v = get("dim")) c.dim = static_cast<int>(to_integer("dim", *v));
    if (c.dim != 2 && c.dim != 3) throw ConfigError("dim must be 2 or 3");
    c.P = c.dim == 2 ? 256 : 128;
    if (auto v = get("P")) c.P = static_cast<int>(to_integer("P", *v));
    if (c.P < 8 || (c.P & (c.P - 1)) != 0) throw ConfigError("P must be a power of two >= 8");
    if (auto v = get("anisotropy")) c.anisotropy = *v;
    try {
        (void)c.density();
    } catch (const DomainError& e) {
        throw ConfigError(std::string("anisotropy: ") + e.what());
    }
    c.eps = 1.0 / c.P;
    c.dt = 1.0 / (double(c.P) * c.P);
    if (auto v = get("eps")) c.eps = to_double("eps", *v);
    if (auto v = get("dt")) c.dt = to_double("dt", *v);
    if (auto v = get("T")) c.T = to_double("T", *v);
    if (!(c.T > 0)) throw ConfigError("T must be positive");
    if (auto v = get("conserve")) c.conserve = to_bool("conserve", *v);
    if (auto v = get("shape")) c.shape = *v;
    if (auto v = get("shape_params")) c.shape_params = *v;
    (void)c.shape_spec();
    if (auto v = get("snapshot_every")) c.snapshot_every = static_cast<int>(to_integer("snapshot_every", *v));
    if (c.snapshot_every < 0) throw ConfigError("snapshot_every must be >= 0");
    if (auto v = get("seed")) {
        const long s = to_integer("seed", *v);
        if (s < 0) throw ConfigError("seed must be >= 0");
        c.seed = static_cast<std::uint64_t>(s);
    }
    if (auto v = get("profile_eps_power")) c.profile_eps_power = to_double("profile_eps_power", *v);
    if (!(c.profile_eps_power > 0)) throw ConfigError("profile_eps_power must be positive");
    check_cfl(c.dt, c.eps);
    return c;
}

std::map<std::string, std::string> parse_entries(std::string_view text) {
    std::map<std::string, std::string> entries;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        if (!entries.emplace(key, value).second)
            throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    return entries;
}

RunConfig parse_config(std::string_view text) { return resolve_config(parse_entries(text)); }

RunConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return parse_config(s.str());
}

std::string RunConfig::to_text() const {
    std::ostringstream s;
    s.precision(17);
    s << "anisotropy=" << anisotropy << '\n'
      << "dim=" << dim << '\n'
      << "P=" << P << '\n'
      << "dt=" << dt << '\n'
      << "eps=" << eps << '\n'
      << "T=" << T << '\n'
      << "conserve=" << (conserve ? "true" : "false") << '\n'
      << "shape=" << shape << '\n'
      << "shape_params=" << shape_params << '\n'
      << "snapshot_every=" << snapshot_every << '\n'
      << "seed=" << seed << '\n'
      << "profile_eps_power=" << profile_eps_power << '\n';
    return s.str();
}

}  // namespace anisoflow
