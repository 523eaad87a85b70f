#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "anisoflow/anisotropy.hpp"
#include "anisoflow/spectral.hpp"

namespace anisoflow {

// Double-well W(s) = s^2 (1-s)^2 / 2 and the optimal profile q(s) = 1/(1+e^s).
inline double double_well(double s) { return 0.5 * s * s * (1 - s) * (1 - s); }
inline double double_well_prime(double s) { return s * (1 - s) * (1 - 2 * s); }
/// sqrt(2 W(s)) = |s (1 - s)|
inline double double_well_root(double s) { return std::abs(s * (1 - s)); }
double profile_q(double s);

/// M = 1 / sup_{[0,1]} W''; W'' = 1 - 6s + 6s^2 peaks at 1 on [0,1].
inline constexpr double kStabilityM = 1.0;
/// Throws ConfigError with the inequality when dt > M eps^2.
void check_cfl(double dt, double eps);

/// u = q(dist(x) / eps^power). `signed_distance` is negative inside.
SpectralField initialize(const Grid& g, const std::function<double(const double* x)>& signed_distance, double eps,
                         double eps_power = 1.0);

/// Exact Fourier diffusion by exp(-4 pi^2 dt phi°(p / L)^2), with the symbol
/// and the FFT plans cached for repeated steps.
class Diffusion {
public:
    Diffusion(const Anisotropy& a, const Grid& g, double dt);
    void apply(SpectralField& u);
    const Grid& grid() const noexcept { return grid_; }
    double dt() const noexcept { return dt_; }
    std::span<const double> symbol() const noexcept { return symbol_; }

private:
    Grid grid_;
    double dt_;
    std::vector<double> symbol_;
    FourierTransform ft_;
    std::vector<Complex> work_;
};

void diffusion_step(SpectralField& u, const Anisotropy& a, double dt);
/// u <- u - (dt / eps^2) W'(u).
void reaction_step(SpectralField& u, double dt, double eps);
/// u <- u - (dt/eps^2) W'(u) + (dt/eps) lambda sqrt(2 W(u)), lambda chosen from
/// the incoming field so that the grid sum of u is unchanged. Returns lambda
/// (0 when the field sits at a well everywhere and the plain step is used).
double conserved_reaction_step(SpectralField& u, double dt, double eps);

struct StepMetrics {
    long step = 0;
    double time = 0;
    double mass = 0;
    double min = 0;
    double max = 0;
    double measure = 0;     // |{u >= 1/2}|
    double multiplier = 0;  // lambda of the conserved step
};

struct Snapshot {
    long step = 0;
    double time = 0;
    SpectralField field;
};

struct SimulationOptions {
    double dt = 0;
    double eps = 0;
    double T = 0;
    bool conserve = false;
    int snapshot_every = 0;  // 0: first and last only
    bool keep_snapshots = true;
    bool reaction_first = false;
    /// Called after every step; returning false stops the run.
    std::function<bool(const StepMetrics&, const SpectralField&)> observer;
};

struct SimulationResult {
    std::vector<StepMetrics> metrics;  // step 0 first
    std::vector<Snapshot> snapshots;
    SpectralField final_field;
    long steps = 0;
    double time = 0;
    bool extinct = false;
    double extinction_time = 0;
    bool stopped_by_observer = false;
};

StepMetrics field_metrics(const SpectralField& u);

/// Split-step scheme: diffusion then (conserved) reaction per step. Stops at T,
/// at extinction (max u < 1/2) or when the observer asks. NaN/Inf or leaving
/// [-0.1, 1.1] throws NumericalError.
SimulationResult simulate(const Anisotropy& a, SpectralField u, const SimulationOptions& opt);

}  // namespace anisoflow
