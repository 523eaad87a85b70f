#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "anisoflow/anisotropy.hpp"
#include "anisoflow/solver.hpp"
#include "anisoflow/spectral.hpp"
#include "anisoflow/threshold.hpp"

namespace anisoflow {

struct ShapeSpec {
    enum class Kind { Wulff, Ball, Torus, File };
    Kind kind = Kind::Wulff;
    std::array<double, 3> center{0, 0, 0};
    double radius = 0.25;
    double major = 0.25;  // torus, axis along x_3
    double minor = 0.1;
    std::filesystem::path path;  // AMCF1 indicator (values >= 1/2 inside)

    /// Parses `wulff`, `ball`, `torus` or `file` with a parameter list such as
    /// "R=0.25,cx=0,cy=0" or "major=0.25,minor=0.1" or "path=shape.amcf".
    static ShapeSpec parse(std::string_view kind, std::string_view params);
    std::string describe() const;
};

/// Signed distance (negative inside). Wulff sets use the gauge distance
/// phi(x - c) - R, balls and tori the Euclidean one, file shapes a brute-force
/// Euclidean distance to the nodes across the boundary.
std::function<double(const double*)> signed_distance(const ShapeSpec& s, const Anisotropy& a, const Grid& g);
/// Throws DomainError unless the shape stays at least `margin` inside Q
/// (and ConfigError for degenerate parameters).
void check_shape(const ShapeSpec& s, const Anisotropy& a, const Grid& g, double margin);

IndicatorField wulff_indicator(const Anisotropy& a, double R, std::span<const double> center, const Grid& g);
double measure(const IndicatorField& e);
double l1_error(const IndicatorField& a, const IndicatorField& b);

/// |{phi <= 1}| by quadrature of phi(theta)^{-d} / d over the unit sphere.
double wulff_unit_measure(const Anisotropy& a);
/// R such that |Wulff(R)| equals the measure of e (or the given area).
double fitted_radius(const IndicatorField& e, const Anisotropy& a);
double fitted_radius_from_measure(double m, const Anisotropy& a);

struct Polyline {
    std::vector<std::array<double, 2>> points;
    bool closed = false;
};
/// Marching squares with linear interpolation on the non-periodic node
/// lattice; d = 2 only (DomainError otherwise).
std::vector<Polyline> contour(const SpectralField& u, double level = 0.5);
/// Area enclosed by the closed chains of the level set (|{u >= level}|).
double contour_area(const SpectralField& u, double level = 0.5);
double polygon_area(const Polyline& p);

// ---------------------------------------------------------------------------
// Experiment drivers

struct ShrinkingRow {
    double time;
    double radius_sq;   // fitted
    double exact_sq;    // R0^2 - 2 t
    double rel_error;   // |radius_sq - exact_sq| / exact_sq
};

struct ShrinkingReport {
    std::string anisotropy;
    double R0 = 0, eps = 0, dt = 0;
    int P = 0;
    std::vector<ShrinkingRow> rows;
    bool extinct = false;
    double extinction_time = 0;
    double expected_extinction = 0;
    double max_rel_error_window = 0;  // over [window_lo, window_hi] * run length
    double window_lo = 0.15, window_hi = 0.85;
    double slope = 0;                 // least-squares d(R^2)/dt over the window
    double mass_drift = 0;
};

struct ShrinkingOptions {
    double R0 = 0.25;
    int P = 256;
    double eps = 0;  // 0: 1/P
    double dt = 0;   // 0: 1/P^2
    double window_lo = 0.15;
    double window_hi = 0.85;
    int sample_every = 8;
};

ShrinkingReport run_shrinking_wulff(const Anisotropy& a, const ShrinkingOptions& opt);

struct ConvergenceRow {
    double eps = 0;
    double dt = 0;
    double l1_error = 0;
    double mass_drift = 0;
    double final_time = 0;
    long steps = 0;
    bool steady = false;
};

struct ConvergenceReport {
    std::string anisotropy;
    double R0 = 0;
    int P = 0;
    std::vector<ConvergenceRow> rows;
    double slope = 0;        // least squares of log error vs log eps
    bool monotone = false;   // error decreases with eps
};

struct ConvergenceOptions {
    double R0 = 0.25;
    int P = 512;
    std::vector<double> eps_list{1.0 / 64, 1.0 / 128, 1.0 / 256};
    double dt_factor = 1.0;       // dt = dt_factor * eps^2
    double steady_rate = 1e-4;    // L1 change per unit time
    int steady_window = 100;      // consecutive steps
    double max_time = 0.2;
};

ConvergenceReport run_wulff_convergence(const Anisotropy& a, const ConvergenceOptions& opt);

struct TorusOptions {
    double major = 0.25;
    double minor = 0.1;
    int P = 128;
    double eps = 0;  // 0: 1/P
    double dt = 0;   // 0: 1/P^2
    double T = 0;    // 0: until extinction (capped at minor^2)
    int snapshot_every = 10;
    std::filesystem::path output_dir;  // empty: keep snapshots in memory only
};

struct TorusReport {
    std::string anisotropy;
    std::vector<StepMetrics> metrics;
    std::vector<std::filesystem::path> snapshot_files;
    std::vector<Snapshot> snapshots;
    double initial_volume = 0;
    bool volume_strictly_decreasing = false;
    bool finite = true;
    bool extinct = false;
    double extinction_time = 0;
};

TorusReport run_torus_3d(const Anisotropy& a, const TorusOptions& opt);

double least_squares_slope(std::span<const double> x, std::span<const double> y);

}  // namespace anisoflow
