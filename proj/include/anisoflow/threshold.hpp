#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "anisoflow/anisotropy.hpp"
#include "anisoflow/spectral.hpp"

namespace anisoflow {

/// Characteristic function of a set sampled on the grid (values exactly 0/1).
struct IndicatorField {
    Grid grid;
    std::vector<std::uint8_t> mask;

    IndicatorField() = default;
    explicit IndicatorField(const Grid& g, bool fill = false) : grid(g), mask(g.size(), fill ? 1 : 0) {}

    static IndicatorField from_predicate(const Grid& g, const std::function<bool(const double* x)>& inside);
    /// {u >= level}
    static IndicatorField threshold(const SpectralField& u, double level = 0.5);
    SpectralField to_field() const;
    std::size_t count() const;
    bool empty() const { return count() == 0; }
    bool operator==(const IndicatorField&) const = default;
};

/// Convolution with K_{phi,h} on the unit torus, with the symbol and FFT plans
/// cached. Throws DomainError when the symbol at the outer frequency shell
/// exceeds 1e-12 (h too small for the grid).
class HeatConvolution {
public:
    HeatConvolution(const Anisotropy& a, const Grid& g, double h);
    SpectralField apply(const SpectralField& f);
    SpectralField apply(const IndicatorField& e);
    const Grid& grid() const noexcept { return grid_; }
    double h() const noexcept { return h_; }

private:
    Grid grid_;
    double h_;
    std::vector<double> symbol_;
    FourierTransform ft_;
    std::vector<Complex> work_;
};

/// theta_h = 1/2 + c sqrt(h)
inline double threshold_level(double h, double c = 0.0) { return 0.5 + c * std::sqrt(h); }

/// T_h E = {K_{phi,h} * 1_E >= theta} (ties belong to the set).
IndicatorField bmo_step(const IndicatorField& e, const Anisotropy& a, double h, double theta = 0.5);
IndicatorField bmo_step(const IndicatorField& e, HeatConvolution& conv, double theta = 0.5);

struct BmoRun {
    IndicatorField final;
    long steps = 0;
    bool extinct = false;
    long extinction_step = 0;
    std::vector<double> measures;  // |E_n| for n = 0..steps
    /// For every step n >= 1 whose input is nested in the previous input
    /// (E_n within E_{n-1}), the number of nodes of E_{n+1} outside E_n; a
    /// monotone scheme would give 0. Entries are -1 when the inputs are not
    /// nested.
    std::vector<long> inclusion_violations;
};

/// Iterates floor(t_final / h) steps; stops early once the set is empty.
/// `on_step(n, E_n)` is called after each step when provided.
BmoRun bmo_evolve(const IndicatorField& e, const Anisotropy& a, double h, double t_final, double theta = 0.5,
                  const std::function<void(long, const IndicatorField&)>& on_step = {});

/// Nodes of T_h E outside T_h F for nested inputs E within F (0 for a monotone scheme).
long monotonicity_violations(const IndicatorField& inner, const IndicatorField& outer, const Anisotropy& a, double h,
                             double theta = 0.5);

// ---------------------------------------------------------------------------
// Envelope operators on grayscale functions

inline constexpr int kDefaultLevels = 128;

struct EnvelopePair {
    SpectralField plus;
    SpectralField minus;
    double bin = 0;  // level spacing
};

/// G_h^+ psi = sup { lambda : K_h * 1_{psi >= lambda} >= theta } and
/// G_h^- psi = inf { lambda : K_h * 1_{psi >= lambda} < theta }, with lambda
/// swept over L equally spaced levels on [min psi, max psi].
EnvelopePair g_envelopes(const SpectralField& psi, const Anisotropy& a, double h, double theta = 0.5,
                         int levels = kDefaultLevels);
SpectralField g_plus(const SpectralField& psi, const Anisotropy& a, double h, double theta = 0.5,
                     int levels = kDefaultLevels);
SpectralField g_minus(const SpectralField& psi, const Anisotropy& a, double h, double theta = 0.5,
                      int levels = kDefaultLevels);

/// G_h^+/- at a single node without level quantization: nodes are ordered by
/// psi and the kernel weights accumulated, so every value of psi is a level.
struct ProbeEnvelope {
    double plus = 0;
    double minus = 0;
};

/// Exact discrete G_h^+/- at the node `probe`. `order` must list all node
/// indices sorted by decreasing psi (see sort_by_value).
ProbeEnvelope probe_envelope(const SpectralField& psi, std::span<const std::size_t> order,
                             const SpectralField& kernel_h, std::size_t probe, double theta = 0.5);
std::vector<std::size_t> sort_by_value(const SpectralField& psi);

struct ConsistencyRow {
    double h = 0;
    double g_plus = 0;         // (G_h^+ psi(x) - psi(x)) / h
    double g_minus = 0;        // (G_h^- psi(x) - psi(x)) / h
    double expected = 0;       // F(D^2 psi(x), D psi(x))
    double gap = 0;            // max of |g_plus - expected|, |g_minus - expected|
};

struct ConsistencyReport {
    std::vector<ConsistencyRow> rows;
    bool decreasing = false;   // gap shrinks along the (decreasing) h-list
    bool passed = false;       // decreasing and smallest-h gap <= tolerance
};

/// Compares (G_h^+/- psi(x) - psi(x)) / h against hamiltonian_F at the probe
/// node, using the exact probe envelopes. `gradient`/`hessian` are the
/// derivatives of psi at the probe (they must be supplied: a grid field does
/// not determine them). Throws DomainError for a vanishing gradient.
ConsistencyReport consistency_check(const SpectralField& psi, const Anisotropy& a, std::size_t probe,
                                    const Vec& gradient, const Mat& hessian, std::span<const double> h_list,
                                    double tolerance, double theta = 0.5);

/// Integrates psi' = -W'(psi) / eps^2 over [0, tau] with RK4. The substep
/// count is max(100, ceil(2 tau / eps^2)) so that the step stays inside the
/// stability region of RK4 (|W''| <= 1 on [0, 1]).
double reaction_threshold(double v, double eps, double tau);
SpectralField reaction_threshold(const SpectralField& v, double eps, double tau);
/// Closed-form solution of the same ODE.
double reaction_threshold_exact(double v, double eps, double tau);

}  // namespace anisoflow
