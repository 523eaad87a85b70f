#pragma once

#include <array>
#include <span>
#include <vector>

#include "anisoflow/anisotropy.hpp"
#include "anisoflow/spectral.hpp"

namespace anisoflow {

/// Symbol bound required at the outer frequency shell of a kernel table.
inline constexpr double kNyquistTolerance = 1e-12;

/// exp(-4 pi^2 t phi°(xi)^2), the Fourier symbol of K_{phi,t}.
double heat_symbol(const Anisotropy& a, double t, std::span<const double> xi);

/// Symbol sampled on the stored half spectrum of `g` (physical frequency p / L).
std::vector<double> sample_heat_symbol(const Grid& g, const Anisotropy& a, double t);

/// Largest symbol value on the shell max_i |p_i| = P/2.
double nyquist_symbol(const Grid& g, const Anisotropy& a, double t);

/// Real-space samples of the anisotropic heat kernel K_{phi,t} on a grid,
/// obtained as the inverse transform of the sampled symbol. The box length
/// of the grid sets the physical scale (use L >> sqrt(t)).
class KernelTable {
public:
    const Anisotropy& anisotropy() const noexcept { return aniso_; }
    double time() const noexcept { return t_; }
    const Grid& grid() const noexcept { return field_.grid; }
    const SpectralField& field() const noexcept { return field_; }
    std::span<const double> values() const noexcept { return field_.values; }

    double symbol(std::span<const double> xi) const { return heat_symbol(aniso_, t_, xi); }
    /// Sum of the samples times the cell volume.
    double mass() const { return field_.integral(); }
    /// Largest |symbol(p) - symbol(-p)| on the lattice: zero for a real kernel.
    double imaginary_residue() const noexcept { return imag_residue_; }
    double min() const { return field_.min(); }
    double max() const { return field_.max(); }

private:
    friend KernelTable build_kernel(const Anisotropy& a, double t, const Grid& g);
    KernelTable(Anisotropy a, double t, SpectralField f, double residue)
        : aniso_(std::move(a)), t_(t), field_(std::move(f)), imag_residue_(residue) {}

    Anisotropy aniso_;
    double t_;
    SpectralField field_;
    double imag_residue_;
};

/// Throws DomainError for t <= 0 or when the symbol at the outer frequency
/// shell exceeds kNyquistTolerance (kernel under-resolved).
KernelTable build_kernel(const Anisotropy& a, double t, const Grid& g);

// ---------------------------------------------------------------------------
// Geometric identities of K_phi = K_{phi,1}

/// Fourier-slice quadrature of the integral of K_phi over the hyperplane
/// orthogonal to p: the integral over R of exp(-4 pi^2 s^2 phi°(p)^2).
double hyperplane_integral(const Anisotropy& a, const Vec& p);
/// Closed form 1 / (2 sqrt(pi) phi°(p)).
double hyperplane_integral_exact(const Anisotropy& a, const Vec& p);
/// Real-space sum of the table over the grid hyperplane {x_axis = 0}
/// times h^{d-1}.
double hyperplane_grid_sum(const KernelTable& k, int axis);

/// Half the second moment of K_phi over p-perp, phi°_xixi(p) / (2 sqrt(pi)),
/// from the analytic Hessian.
Mat second_moment(const Anisotropy& a, const Vec& p);
/// Same quantity from quadrature of -(1/8 pi^2) int D^2 K^(s p) ds, with the
/// Hessian of the symbol written out explicitly.
Mat second_moment_quadrature(const Anisotropy& a, const Vec& p);

/// I(R): integral of K_phi over the sphere of radius R, evaluated as
/// R^{d-1} (4 pi)^{-d/2} int_{S^{d-1}} phi°^{-d} exp(-R^2 / (4 phi°^2)).
double sphere_average(const Anisotropy& a, double R);

struct SphereBracket {
    double lower;
    double upper;
};
/// Bracket obtained by substituting Lambda in the lower and lambda in the
/// upper bound of the isotropic formula.
SphereBracket sphere_average_bracket(const Anisotropy& a, double R);
/// Min/max of R^{d-1}|S^{d-1}|(4 pi)^{-d/2} c^{-d} exp(-R^2/(4 c^2)) over
/// c in [lambda, Lambda]; always contains I(R).
SphereBracket sphere_average_envelope(const Anisotropy& a, double R);

struct DecayEnvelope {
    double value = 0;                 // sup (1 + |x|^{d+1+s}) |K(x)|
    double argmax_radius = 0;         // |x| at the sup
    std::array<double, 3> argmax{};   // location of the sup
    double edge_max = 0;              // max |K| on the outer grid shell
};
/// Throws DomainError when s is outside [0,1) or when |K| on the outer shell
/// exceeds `edge_tolerance` (periodization dominates).
DecayEnvelope decay_envelope(const KernelTable& k, double s, double edge_tolerance = 1e-10);

/// F(X, p) = phi°(p) phi°_xixi(p) : X.
double hamiltonian_F(const Anisotropy& a, const Mat& X, const Vec& p);
/// The same operator from its moment definition: (hyperplane integral)^{-1}
/// times half the X-weighted second moment, both by quadrature.
double hamiltonian_F_from_moments(const Anisotropy& a, const Mat& X, const Vec& p);

/// C_{s,m} = 2^{s+m} pi^{m/2} Gamma((s+m)/2) / Gamma(-s/2): F[|x|^s] in R^m
/// is C_{s,m} Pf(1/|2 pi xi|^{m+s}).
double finite_part_constant(double s, int m);

/// h(xi') = integral over the complementary coordinates of
/// exp(-4 pi^2 phi°(xi', xi'')^2). `axes` lists the coordinates spanning V.
double slice_marginal(const Anisotropy& a, std::span<const int> axes, std::span<const double> xi_v);

/// Integral of |x|^s K_phi over the coordinate subspace spanned by `axes`,
/// through its finite-part Fourier representation. 0 < s < 2.
double moment_s(const Anisotropy& a, std::span<const int> axes, double s);

}  // namespace anisoflow
