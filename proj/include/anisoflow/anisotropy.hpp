#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace anisoflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Relative distance to the non-smooth set below which a direction is
/// treated as non-generic for derivative evaluation.
inline constexpr double kAxisTolerance = 1e-8;

/// A symmetric, 1-homogeneous, convex density phi° on R^d (d = 2 or 3)
/// together with its dual phi(x) = sup { x.xi : phi°(xi) <= 1 }.
///
/// Supported families:
///  - isotropic: |xi|
///  - power sums: (sum_i |n_i . xi|^p)^(1/p) over a list of directions n_i
///    (the l^p norm when the directions are the coordinate axes)
///  - cylinder: |(xi_1..xi_{d-1})| + |xi_d|
///  - table (2D only): |xi| f(theta), f the trigonometric interpolant of
///    equally spaced angular samples
///
/// Values are immutable after construction and every member is const.
class Anisotropy {
public:
    enum class Kind { Isotropic, PowerSum, Cylinder, Table };

    static Anisotropy isotropic(int dim);
    /// l^p norm on R^dim, p >= 1.
    static Anisotropy lp(int dim, double p);
    /// (sum_i |n_i . xi|^p)^(1/p); rows of `directions` are the n_i.
    static Anisotropy power_sum(Mat directions, double p, std::string name = {});
    static Anisotropy cylinder(int dim);
    /// Samples of phi° on the unit circle at angles 2 pi k / N. N must be
    /// even and the samples symmetric under k -> k + N/2.
    static Anisotropy table(std::vector<double> samples);

    /// Catalog identifiers: iso, l4, l4_3, hex, cyl, l1.
    static Anisotropy named(std::string_view id, int dim);
    /// Catalog ids plus inline forms `lp:<p>`, `powers:<p>:<x>,<y>[,<z>];...`
    /// and `table:<v0>,<v1>,...`.
    static Anisotropy parse(std::string_view spec, int dim);

    int dim() const noexcept { return dim_; }
    Kind kind() const noexcept { return kind_; }
    const std::string& name() const noexcept { return name_; }
    /// Exponent of a power-sum density (2 for isotropic, 1 for cylinder).
    double exponent() const noexcept { return p_; }

    /// Stored bounds lambda <= phi°(xi)/|xi| <= Lambda.
    double lower_bound() const noexcept { return lambda_; }
    double upper_bound() const noexcept { return Lambda_; }

    /// phi°(xi). Non-finite input throws DomainError.
    double operator()(std::span<const double> xi) const;
    double value(const Vec& xi) const { return (*this)(std::span<const double>(xi.data(), xi.size())); }

    /// True when phi° is twice differentiable at xi (xi != 0 and not within
    /// kAxisTolerance of the non-smooth set).
    bool is_generic(const Vec& xi) const;
    /// True when the gradient is defined at xi.
    bool gradient_defined(const Vec& xi) const;

    Vec gradient(const Vec& xi) const;
    Mat hessian(const Vec& xi) const;

    bool has_analytic_dual() const noexcept;
    /// phi(x) = sup { x.xi : phi°(xi) <= 1 }.
    double dual(std::span<const double> x) const;
    double dual(const Vec& x) const { return dual(std::span<const double>(x.data(), x.size())); }

private:
    Anisotropy() = default;
    void finalize();
    double numeric_dual(std::span<const double> x) const;
    double numeric_dual_2d(double x0, double x1) const;
    double numeric_dual_3d(std::span<const double> x) const;
    void check_finite(std::span<const double> v) const;

    Kind kind_ = Kind::Isotropic;
    int dim_ = 2;
    std::string name_;
    double p_ = 2.0;
    Mat directions_;        // PowerSum rows n_i
    bool axis_aligned_ = false;
    std::vector<double> cos_coef_, sin_coef_;  // Table: f(theta) Fourier series
    double lambda_ = 1.0, Lambda_ = 1.0;
    // Direction mesh with cached phi° values, shared by bound sampling and
    // the numeric dual.
    std::vector<double> mesh_;       // dim_ * mesh_size
    std::vector<double> mesh_value_;

    double table_f(double theta, double* df = nullptr, double* d2f = nullptr) const;
};

}  // namespace anisoflow
