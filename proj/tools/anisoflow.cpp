// anisoflow command-line driver.
//
// Exit codes: 0 success, 1 usage/config error, 2 numerical failure,
// 3 verification failures present.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "anisoflow/bench.hpp"
#include "anisoflow/config.hpp"
#include "anisoflow/errors.hpp"
#include "anisoflow/grid_io.hpp"
#include "anisoflow/kernel.hpp"
#include "anisoflow/solver.hpp"
#include "anisoflow/threshold.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace anisoflow;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kExitConfig = 1, kExitNumerical = 2, kExitVerification = 3;

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Collects output files and writes manifest.json next to them.
class Manifest {
public:
    Manifest(fs::path dir, std::string command) : dir_(std::move(dir)) {
        doc_["command"] = std::move(command);
        doc_["version"] = kVersion;
        doc_["started"] = utc_now();
    }
    json& operator[](const char* key) { return doc_[key]; }
    void add(const fs::path& p) { files_.push_back(p); }

    void write() {
        json out = json::array();
        for (const auto& p : files_) {
            if (p.extension() == ".amcf") (void)read_grid(p);  // listed grids must read back
            out.push_back(fs::relative(p, dir_).string());
        }
        doc_["outputs"] = out;
        doc_["finished"] = utc_now();
        std::ofstream(dir_ / "manifest.json") << doc_.dump(2) << '\n';
    }

private:
    fs::path dir_;
    json doc_;
    std::vector<fs::path> files_;
};

fs::path numbered(const fs::path& dir, const char* stem, long step, const char* ext) {
    char name[64];
    std::snprintf(name, sizeof name, "%s_%06ld.%s", stem, step, ext);
    return dir / name;
}

void write_contours(const fs::path& path, const SpectralField& u) {
    std::ofstream out(path);
    out << "chain,closed,x,y\n";
    const auto chains = contour(u);
    for (std::size_t c = 0; c < chains.size(); ++c)
        for (const auto& p : chains[c].points)
            out << c << ',' << (chains[c].closed ? 1 : 0) << ',' << num(p[0]) << ',' << num(p[1]) << '\n';
}

json config_json(const RunConfig& c) {
    json j;
    std::istringstream in(c.to_text());
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        j[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return j;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string config;
    std::vector<std::string> overrides;
    std::string out;
    bool contours = false;
};

int cmd_simulate(const SimulateArgs& args) {
    std::map<std::string, std::string> entries;
    if (!args.config.empty()) {
        std::ifstream in(args.config);
        if (!in) throw ConfigError("cannot open config file " + args.config);
        std::ostringstream s;
        s << in.rdbuf();
        entries = parse_entries(s.str());
    }
    for (const auto& kv : args.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        entries[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    const RunConfig cfg = resolve_config(entries);
    const Anisotropy a = cfg.density();
    const Grid g(cfg.dim, cfg.P);
    const ShapeSpec shape = cfg.shape_spec();
    check_shape(shape, a, g, 4 * cfg.eps);

    const fs::path dir(args.out);
    fs::create_directories(dir);
    Manifest manifest(dir, "simulate");
    manifest["config"] = config_json(cfg);
    manifest["shape"] = shape.describe();
    manifest["distance"] = shape.kind == ShapeSpec::Kind::Wulff ? "anisotropic gauge phi(x - c) - R" : "Euclidean";

    const bool contours = args.contours && cfg.dim == 2;
    const auto snapshot = [&](long step, const SpectralField& u) {
        const auto p = numbered(dir, "snap", step, "amcf");
        write_grid(p, u);
        manifest.add(p);
        if (contours) {
            const auto c = numbered(dir, "contour", step, "csv");
            write_contours(c, u);
            manifest.add(c);
        }
    };

    SpectralField u0 = initialize(g, signed_distance(shape, a, g), cfg.eps, cfg.profile_eps_power);
    snapshot(0, u0);
    SimulationOptions opt;
    opt.dt = cfg.dt;
    opt.eps = cfg.eps;
    opt.T = cfg.T;
    opt.conserve = cfg.conserve;
    opt.keep_snapshots = false;
    long last_written = 0;
    opt.observer = [&](const StepMetrics& m, const SpectralField& u) {
        if (cfg.snapshot_every > 0 && m.step % cfg.snapshot_every == 0) {
            snapshot(m.step, u);
            last_written = m.step;
        }
        return true;
    };
    const SimulationResult res = simulate(a, std::move(u0), opt);
    if (res.steps != last_written) snapshot(res.steps, res.final_field);

    const auto csv = dir / "metrics.csv";
    {
        std::ofstream out(csv);
        out << "step,time,mass,min,max,measure,fitted_radius,multiplier\n";
        for (const auto& m : res.metrics)
            out << m.step << ',' << num(m.time) << ',' << num(m.mass) << ',' << num(m.min) << ',' << num(m.max) << ','
                << num(m.measure) << ',' << num(m.measure > 0 ? fitted_radius_from_measure(m.measure, a) : 0.0) << ','
                << num(m.multiplier) << '\n';
    }
    manifest.add(csv);
    const double m0 = res.metrics.front().mass, m1 = res.metrics.back().mass;
    manifest["summary"] = {{"steps", res.steps},
                           {"time", res.time},
                           {"extinct", res.extinct},
                           {"extinction_time", res.extinct ? json(res.extinction_time) : json(nullptr)},
                           {"relative_mass_drift", m0 != 0 ? std::abs(m1 - m0) / std::abs(m0) : 0.0}};
    manifest.write();
    std::printf("%ld steps to t = %g%s; outputs in %s\n", res.steps, res.time,
                res.extinct ? " (extinct)" : "", dir.string().c_str());
    return 0;
}

// ---------------------------------------------------------------------------

struct CheckRow {
    std::string check, anisotropy, parameter;
    double computed, expected, tolerance;
    bool pass;
};

bool smooth_kind(const Anisotropy& a) {
    return a.kind() == Anisotropy::Kind::Isotropic || a.kind() == Anisotropy::Kind::Table ||
           (a.kind() == Anisotropy::Kind::PowerSum && a.exponent() >= 4.0 / 3.0 - 1e-12);
}

std::vector<CheckRow> verify_one(const Anisotropy& a, std::uint64_t seed) {
    std::vector<CheckRow> rows;
    const std::string id = a.name();
    const int d = a.dim();
    const Grid g(d, d == 2 ? 256 : 64, 16.0);
    const auto k = build_kernel(a, 1.0, g);
    rows.push_back({"mass", id, "t=1", k.mass(), 1.0, 1e-8, std::abs(k.mass() - 1) < 1e-8});

    const Grid gh(d, d == 2 ? 512 : 64, 16.0);
    const auto kh = build_kernel(a, 1.0, gh);
    for (int axis = 0; axis < d; ++axis) {
        Vec p = Vec::Zero(d);
        p(axis) = 1;
        const double exact = hyperplane_integral_exact(a, p), sum = hyperplane_grid_sum(kh, axis);
        const double lo = 1 / (2 * std::sqrt(M_PI) * a.upper_bound()), hi = 1 / (2 * std::sqrt(M_PI) * a.lower_bound());
        rows.push_back({"hyperplane", id, "axis=" + std::to_string(axis + 1), sum, exact, 1e-2,
                        std::abs(sum - exact) <= 1e-2 * exact && sum >= lo * (1 - 1e-12) && sum <= hi * (1 + 1e-12)});
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n;
    if (smooth_kind(a)) {
        int used = 0;
        while (used < 16) {
            Vec p(d);
            for (int i = 0; i < d; ++i) p(i) = n(rng);
            p.normalize();
            if (!a.is_generic(p) || p.cwiseAbs().minCoeff() < 1e-3) continue;
            const Mat exact = second_moment(a, p);
            const double rel = (second_moment_quadrature(a, p) - exact).norm() / exact.norm();
            rows.push_back({"second_moment", id, "direction=" + std::to_string(used), rel, 0.0, 1e-6, rel < 1e-6});
            ++used;
        }
        Mat X(d, d);
        for (int i = 0; i < d * d; ++i) X(i) = n(rng);
        X = (0.5 * (X + X.transpose())).eval();
        Vec p(d);
        for (int i = 0; i < d; ++i) p(i) = 0.3 + 0.2 * i;
        const double f = hamiltonian_F(a, X, p), fm = hamiltonian_F_from_moments(a, X, p);
        rows.push_back({"hamiltonian_F", id, "random X", fm, f, 1e-6, std::abs(fm - f) <= 1e-6 * std::max(1.0, std::abs(f))});
    }

    for (double R : {0.5, 1.0, 2.0, 4.0}) {
        const double I = sphere_average(a, R);
        const auto e = sphere_average_envelope(a, R);
        const bool ok = I > 0 && I >= e.lower * (1 - 1e-12) && I <= e.upper * (1 + 1e-12);
        rows.push_back({"sphere_average", id, "R=" + num(R), I, 0.5 * (e.lower + e.upper), 0.5 * (e.upper - e.lower), ok});
        if (a.kind() == Anisotropy::Kind::Isotropic && d == 2) {
            const double exact = 0.5 * R * std::exp(-R * R / 4);
            rows.push_back({"sphere_average_iso", id, "R=" + num(R), I, exact, 1e-8, std::abs(I - exact) < 1e-8});
        }
    }
    return rows;
}

int cmd_verify_kernel(const std::vector<std::string>& ids, int dim, const std::string& out, std::uint64_t seed) {
    std::vector<CheckRow> rows;
    for (const auto& id : ids) {
        const auto a = Anisotropy::parse(id, dim);
        auto r = verify_one(a, seed);
        rows.insert(rows.end(), r.begin(), r.end());
    }
    std::ostringstream csv;
    csv << "check,anisotropy,parameter,computed,expected,tolerance,pass\n";
    int failed = 0;
    for (const auto& r : rows) {
        csv << r.check << ',' << r.anisotropy << ',' << r.parameter << ',' << num(r.computed) << ',' << num(r.expected)
            << ',' << num(r.tolerance) << ',' << (r.pass ? "true" : "false") << '\n';
        failed += !r.pass;
    }
    if (out.empty() || out == "-") {
        std::cout << csv.str();
    } else {
        std::ofstream(out) << csv.str();
    }
    std::fprintf(stderr, "%zu checks, %d failed\n", rows.size(), failed);
    return failed ? kExitVerification : 0;
}

// ---------------------------------------------------------------------------

struct BmoArgs {
    std::string anisotropy = "iso";
    int dim = 2;
    int P = 256;
    double h = 0;
    long steps = 1;
    std::string shape = "ball";
    std::string shape_params;
    double theta_c = 0;
    int snapshot_every = 1;
    std::string out;
};

int cmd_bmo(const BmoArgs& args) {
    const auto a = Anisotropy::parse(args.anisotropy, args.dim);
    const Grid g(args.dim, args.P);
    if (!(args.h > 0)) throw ConfigError("--step must be positive");
    if (args.steps < 0) throw ConfigError("--steps must be >= 0");
    const auto shape = ShapeSpec::parse(args.shape, args.shape_params);
    check_shape(shape, a, g, 0.0);
    const auto dist = signed_distance(shape, a, g);
    const auto e0 = IndicatorField::from_predicate(g, [&](const double* x) { return dist(x) <= 0; });
    const double theta = threshold_level(args.h, args.theta_c);

    const fs::path dir(args.out);
    fs::create_directories(dir);
    Manifest manifest(dir, "bmo");
    manifest["config"] = {{"anisotropy", args.anisotropy}, {"dim", args.dim},         {"P", args.P},
                          {"h", args.h},                   {"steps", args.steps},     {"shape", shape.describe()},
                          {"theta_c", args.theta_c},       {"theta", theta},          {"snapshot_every", args.snapshot_every}};
    const auto snapshot = [&](long step, const IndicatorField& e) {
        const auto p = numbered(dir, "bmo", step, "amcf");
        write_grid(p, e.to_field());
        manifest.add(p);
    };
    snapshot(0, e0);
    long last = 0;
    const auto run = bmo_evolve(e0, a, args.h, args.steps * args.h, theta, [&](long n, const IndicatorField& e) {
        if (args.snapshot_every > 0 && n % args.snapshot_every == 0) {
            snapshot(n, e);
            last = n;
        }
    });
    if (run.steps != last) snapshot(run.steps, run.final);

    const auto csv = dir / "bmo_metrics.csv";
    {
        std::ofstream out(csv);
        out << "step,time,measure,fitted_radius,inclusion_violations\n";
        for (std::size_t n = 0; n < run.measures.size(); ++n) {
            const double m = run.measures[n];
            // violations are known from step 2 on (they compare consecutive nested inputs)
            const std::string v = n >= 2 && n - 2 < run.inclusion_violations.size()
                                      ? std::to_string(run.inclusion_violations[n - 2])
                                      : std::string();
            out << n << ',' << num(n * args.h) << ',' << num(m) << ','
                << num(m > 0 ? fitted_radius_from_measure(m, a) : 0.0) << ',' << v << '\n';
        }
    }
    manifest.add(csv);
    long violations = 0;
    for (long v : run.inclusion_violations) violations += std::max(0L, v);
    manifest["summary"] = {{"steps", run.steps},
                           {"extinct", run.extinct},
                           {"extinction_step", run.extinct ? json(run.extinction_step) : json(nullptr)},
                           {"inclusion_violations", violations}};
    manifest.write();
    std::printf("%ld BMO steps%s; %ld inclusion violations logged; outputs in %s\n", run.steps,
                run.extinct ? " (extinct)" : "", violations, dir.string().c_str());
    return 0;
}

// ---------------------------------------------------------------------------

struct WulffArgs {
    std::string anisotropy = "l4";
    ShrinkingOptions opt;
    double tolerance = 0.05;
    double extinction_tolerance = 0.10;
    std::string out;
};

int cmd_bench_wulff(const WulffArgs& args) {
    const auto a = Anisotropy::parse(args.anisotropy, 2);
    const auto rep = run_shrinking_wulff(a, args.opt);
    const fs::path dir(args.out);
    fs::create_directories(dir);
    Manifest manifest(dir, "bench-wulff");
    const auto csv = dir / "shrinking.csv";
    {
        std::ofstream out(csv);
        out << "time,radius_sq,exact_sq,rel_error\n";
        for (const auto& r : rep.rows)
            out << num(r.time) << ',' << num(r.radius_sq) << ',' << num(r.exact_sq) << ',' << num(r.rel_error) << '\n';
    }
    manifest.add(csv);
    const double ext_err =
        rep.extinct ? std::abs(rep.extinction_time - rep.expected_extinction) / rep.expected_extinction : 1.0;
    const bool pass = rep.extinct && rep.max_rel_error_window < args.tolerance && ext_err < args.extinction_tolerance;
    manifest["config"] = {{"anisotropy", args.anisotropy}, {"R0", rep.R0}, {"P", rep.P},
                          {"eps", rep.eps},                {"dt", rep.dt}, {"window", {rep.window_lo, rep.window_hi}}};
    manifest["summary"] = {{"max_rel_error_window", rep.max_rel_error_window},
                           {"slope", rep.slope},
                           {"extinct", rep.extinct},
                           {"extinction_time", rep.extinction_time},
                           {"expected_extinction", rep.expected_extinction},
                           {"mass_drift", rep.mass_drift},
                           {"pass", pass}};
    manifest.write();
    std::printf("%s: max rel error %.4f over the window, slope %.4f, t_ext %.5f (expected %.5f): %s\n",
                args.anisotropy.c_str(), rep.max_rel_error_window, rep.slope, rep.extinction_time,
                rep.expected_extinction, pass ? "PASS" : "FAIL");
    return pass ? 0 : kExitVerification;
}

struct ConvergenceArgs {
    std::string anisotropy = "l4";
    ConvergenceOptions opt;
    std::string out;
};

int cmd_convergence(const ConvergenceArgs& args) {
    const auto a = Anisotropy::parse(args.anisotropy, 2);
    const auto rep = run_wulff_convergence(a, args.opt);
    const fs::path dir(args.out);
    fs::create_directories(dir);
    Manifest manifest(dir, "convergence");
    const auto csv = dir / "convergence.csv";
    bool drift_ok = true;
    {
        std::ofstream out(csv);
        out << "eps,dt,l1_error,mass_drift,final_time,steps,steady\n";
        for (const auto& r : rep.rows) {
            out << num(r.eps) << ',' << num(r.dt) << ',' << num(r.l1_error) << ',' << num(r.mass_drift) << ','
                << num(r.final_time) << ',' << r.steps << ',' << (r.steady ? "true" : "false") << '\n';
            drift_ok = drift_ok && r.mass_drift < 1e-3;
        }
    }
    manifest.add(csv);
    const bool pass = drift_ok && rep.slope >= 0.7 && rep.slope <= 1.3;
    manifest["config"] = {{"anisotropy", args.anisotropy}, {"R0", rep.R0}, {"P", rep.P}, {"eps", args.opt.eps_list}};
    manifest["summary"] = {{"slope", rep.slope}, {"monotone", rep.monotone}, {"pass", pass}};
    manifest.write();
    std::printf("%s: log-log slope %.3f, monotone %s: %s\n", args.anisotropy.c_str(), rep.slope,
                rep.monotone ? "yes" : "no", pass ? "PASS" : "FAIL");
    return pass ? 0 : kExitVerification;
}

struct TorusArgs {
    std::string anisotropy = "l1";
    TorusOptions opt;
    std::string out;
};

int cmd_torus(TorusArgs args) {
    const auto a = Anisotropy::parse(args.anisotropy, 3);
    const fs::path dir(args.out);
    args.opt.output_dir = dir;
    const auto rep = run_torus_3d(a, args.opt);
    Manifest manifest(dir, "torus3d");
    for (const auto& p : rep.snapshot_files) manifest.add(p);
    const auto csv = dir / "torus_metrics.csv";
    {
        std::ofstream out(csv);
        out << "step,time,mass,min,max,volume\n";
        for (const auto& m : rep.metrics)
            out << m.step << ',' << num(m.time) << ',' << num(m.mass) << ',' << num(m.min) << ',' << num(m.max) << ','
                << num(m.measure) << '\n';
    }
    manifest.add(csv);
    const bool pass = rep.finite && rep.volume_strictly_decreasing;
    manifest["config"] = {{"anisotropy", args.anisotropy}, {"P", args.opt.P},   {"major", args.opt.major},
                          {"minor", args.opt.minor},       {"T", args.opt.T},   {"snapshot_every", args.opt.snapshot_every}};
    manifest["summary"] = {{"initial_volume", rep.initial_volume},
                           {"finite", rep.finite},
                           {"volume_strictly_decreasing", rep.volume_strictly_decreasing},
                           {"extinct", rep.extinct},
                           {"extinction_time", rep.extinct ? json(rep.extinction_time) : json(nullptr)},
                           {"pass", pass}};
    manifest.write();
    std::printf("torus (%s): %zu steps, volume %.4e -> %.4e%s: %s\n", args.anisotropy.c_str(), rep.metrics.size() - 1,
                rep.initial_volume, rep.metrics.back().measure, rep.extinct ? " (extinct)" : "", pass ? "PASS" : "FAIL");
    return pass ? 0 : kExitVerification;
}

void apply_thread_env() {
    const char* env = std::getenv("ANISOFLOW_THREADS");
    if (!env || !*env) return;
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (*end != '\0' || n < 1) throw ConfigError(std::string("ANISOFLOW_THREADS must be a positive integer, got '") + env + "'");
    set_fft_threads(static_cast<int>(n));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Anisotropic mean curvature flow: kernels, phase-field solver, threshold dynamics"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "phase-field run from a key=value config");
    s->add_option("-c,--config", sim.config, "config file (omit for defaults)");
    s->add_option("--set", sim.overrides, "override a config key (key=value), repeatable");
    s->add_option("-o,--out", sim.out, "output directory")->required();
    s->add_flag("--contours", sim.contours, "also write 1/2-level contour CSVs with each 2D snapshot");

    std::vector<std::string> ids{"iso", "l4", "l4_3", "hex", "cyl", "l1"};
    int vdim = 2;
    std::string vout;
    std::uint64_t vseed = 0;
    auto* v = app.add_subcommand("verify-kernel", "numerical checks of the kernel identities (CSV)");
    v->add_option("-a,--anisotropy", ids, "anisotropies to check")->capture_default_str();
    v->add_option("--dim", vdim, "dimension")->check(CLI::IsMember({2, 3}))->capture_default_str();
    v->add_option("-o,--out", vout, "CSV path (default stdout)");
    v->add_option("--seed", vseed, "seed for the random directions")->capture_default_str();

    BmoArgs bmo;
    auto* b = app.add_subcommand("bmo", "threshold dynamics T_h iterated from a shape");
    b->add_option("-a,--anisotropy", bmo.anisotropy)->capture_default_str();
    b->add_option("--dim", bmo.dim)->check(CLI::IsMember({2, 3}))->capture_default_str();
    b->add_option("-P,--modes", bmo.P, "grid points per axis")->capture_default_str();
    b->add_option("--step", bmo.h, "time step h")->required();
    b->add_option("--steps", bmo.steps)->capture_default_str();
    b->add_option("--shape", bmo.shape, "wulff, ball, torus or file")->capture_default_str();
    b->add_option("--shape-params", bmo.shape_params, "e.g. R=0.2,cx=0");
    b->add_option("--theta-c", bmo.theta_c, "threshold 1/2 + c sqrt(h)")->capture_default_str();
    b->add_option("--snapshot-every", bmo.snapshot_every)->capture_default_str();
    b->add_option("-o,--out", bmo.out, "output directory")->required();

    WulffArgs wulff;
    auto* w = app.add_subcommand("bench-wulff", "shrinking Wulff set against R(t)^2 = R0^2 - 2t");
    w->add_option("-a,--anisotropy", wulff.anisotropy)->capture_default_str();
    w->add_option("--R0", wulff.opt.R0)->capture_default_str();
    w->add_option("-P,--modes", wulff.opt.P)->capture_default_str();
    w->add_option("--eps", wulff.opt.eps, "interface width (default 1/P)");
    w->add_option("--dt", wulff.opt.dt, "time step (default 1/P^2)");
    w->add_option("--tolerance", wulff.tolerance, "relative R^2 error allowed in the window")->capture_default_str();
    w->add_option("-o,--out", wulff.out, "output directory")->required();

    ConvergenceArgs conv;
    auto* cv = app.add_subcommand("convergence", "conserved-flow L1 error to the Wulff set versus eps");
    cv->add_option("-a,--anisotropy", conv.anisotropy)->capture_default_str();
    cv->add_option("--R0", conv.opt.R0)->capture_default_str();
    cv->add_option("-P,--modes", conv.opt.P)->capture_default_str();
    cv->add_option("--eps", conv.opt.eps_list, "interface widths")->capture_default_str();
    cv->add_option("--max-time", conv.opt.max_time)->capture_default_str();
    cv->add_option("-o,--out", conv.out, "output directory")->required();

    TorusArgs torus;
    auto* t = app.add_subcommand("torus3d", "3D torus evolution with AMCF1 snapshots");
    t->add_option("-a,--anisotropy", torus.anisotropy)->capture_default_str();
    t->add_option("-P,--modes", torus.opt.P)->capture_default_str();
    t->add_option("--major", torus.opt.major)->capture_default_str();
    t->add_option("--minor", torus.opt.minor)->capture_default_str();
    t->add_option("--T", torus.opt.T, "duration (default: minor^2)");
    t->add_option("--snapshot-every", torus.opt.snapshot_every)->capture_default_str();
    t->add_option("-o,--out", torus.out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        apply_thread_env();
        if (*s) return cmd_simulate(sim);
        if (*v) {
            if (vdim == 3 && v->get_option("--anisotropy")->count() == 0) std::erase(ids, "hex");  // planar only
            return cmd_verify_kernel(ids, vdim, vout, vseed);
        }
        if (*b) return cmd_bmo(bmo);
        if (*w) return cmd_bench_wulff(wulff);
        if (*cv) return cmd_convergence(conv);
        if (*t) return cmd_torus(torus);
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kExitNumerical;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return kExitConfig;
    } catch (const DomainError& e) {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return kExitConfig;
    } catch (const FormatError& e) {
        std::fprintf(stderr, "grid file error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
    return kExitConfig;
}
