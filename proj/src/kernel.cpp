#include "anisoflow/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "anisoflow/errors.hpp"
#include "anisoflow/quadrature.hpp"

namespace anisoflow {

namespace {

constexpr double pi = std::numbers::pi;
const double sqrt_pi = std::sqrt(pi);

Vec unit(const Vec& p, const char* what) {
    const double n = p.norm();
    if (!(n > 0) || !std::isfinite(n)) throw DomainError(std::string(what) + ": direction must be non-zero");
    return p / n;
}

// Index of the node at -x for the node at k, with the origin at k = P/2.
std::size_t mirror_index(const Grid& g, std::size_t idx) {
    const auto P = static_cast<std::size_t>(g.P);
    std::size_t out = 0, stride = 1;
    for (int i = 0; i < g.dim; ++i) {
        const std::size_t k = idx % P;
        idx /= P;
        out += ((P - k) % P) * stride;
        stride *= P;
    }
    return out;
}

}  // namespace

double heat_symbol(const Anisotropy& a, double t, std::span<const double> xi) {
    const double v = a(xi);
    return std::exp(-4.0 * pi * pi * t * v * v);
}

std::vector<double> sample_heat_symbol(const Grid& g, const Anisotropy& a, double t) {
    if (a.dim() != g.dim) throw DomainError("anisotropy and grid dimensions differ");
    std::vector<double> out(g.spectrum_size());
    const double inv_len = 1.0 / g.length;
    for_each_mode(g, [&](std::size_t idx, const int* p) {
        double xi[3];
        for (int i = 0; i < g.dim; ++i) xi[i] = p[i] * inv_len;
        out[idx] = heat_symbol(a, t, std::span<const double>(xi, g.dim));
    });
    return out;
}

double nyquist_symbol(const Grid& g, const Anisotropy& a, double t) {
    double worst = 0;
    const int n = g.P / 2;
    const double inv_len = 1.0 / g.length;
    // every lattice point on the shell max |p_i| = P/2, both signs
    const int span = g.P + 1;
    const int count = g.dim == 2 ? span * span : span * span * span;
    for (int c = 0; c < count; ++c) {
        int q[3] = {c % span - n, (c / span) % span - n, g.dim == 3 ? c / (span * span) - n : 0};
        int m = 0;
        for (int i = 0; i < g.dim; ++i) m = std::max(m, std::abs(q[i]));
        if (m != n) continue;
        double xi[3];
        for (int i = 0; i < g.dim; ++i) xi[i] = q[i] * inv_len;
        worst = std::max(worst, heat_symbol(a, t, std::span<const double>(xi, g.dim)));
    }
    return worst;
}

KernelTable build_kernel(const Anisotropy& a, double t, const Grid& g) {
    if (!(t > 0) || !std::isfinite(t)) throw DomainError("kernel time must be positive");
    if (a.dim() != g.dim) throw DomainError("anisotropy and grid dimensions differ");
    const double edge = nyquist_symbol(g, a, t);
    if (edge > kNyquistTolerance)
        throw DomainError("kernel under-resolved: symbol " + std::to_string(edge) +
                          " at the outer frequency shell exceeds 1e-12; increase t, P or shrink the box");

    const auto sym = sample_heat_symbol(g, a, t);
    double vol = 1;
    for (int i = 0; i < g.dim; ++i) vol *= g.length;
    std::vector<Complex> coef(g.spectrum_size());
    double residue = 0;
    const double inv_len = 1.0 / g.length;
    for_each_mode(g, [&](std::size_t idx, const int* p) {
        double mxi[3];
        for (int i = 0; i < g.dim; ++i) mxi[i] = -p[i] * inv_len;
        coef[idx] = Complex(sym[idx] / vol, 0.0);
        residue = std::max(residue, std::abs(sym[idx] - heat_symbol(a, t, std::span<const double>(mxi, g.dim))));
    });
    SpectralField f = SpectralField::from_coefficients(g, coef);
    // enforce K(-x) = K(x) bit-for-bit
    std::vector<double> sym_vals(f.values.size());
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        const std::size_t j = mirror_index(g, i);
        sym_vals[i] = 0.5 * (f.values[i] + f.values[j]);  // addition commutes, so exact
    }
    f.values = std::move(sym_vals);
    return KernelTable(a, t, std::move(f), residue);
}

// ---------------------------------------------------------------------------

double hyperplane_integral(const Anisotropy& a, const Vec& p) {
    const Vec u = unit(p, "hyperplane_integral");
    const double c = a.value(u);
    const auto f = [&](double s) { return std::exp(-4.0 * pi * pi * s * s * c * c); };
    return quad::integrate(f, -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
}

double hyperplane_integral_exact(const Anisotropy& a, const Vec& p) {
    const Vec u = unit(p, "hyperplane_integral_exact");
    return 1.0 / (2.0 * sqrt_pi * a.value(u));
}

double hyperplane_grid_sum(const KernelTable& k, int axis) {
    const Grid& g = k.grid();
    if (axis < 0 || axis >= g.dim) throw DomainError("hyperplane axis out of range");
    const auto P = static_cast<std::size_t>(g.P);
    std::size_t stride = 1;
    for (int i = 0; i < axis; ++i) stride *= P;
    double sum = 0;
    const auto vals = k.values();
    for (std::size_t i = 0; i < vals.size(); ++i)
        if ((i / stride) % P == P / 2) sum += vals[i];
    return sum * std::pow(g.spacing(), g.dim - 1);
}

Mat second_moment(const Anisotropy& a, const Vec& p) {
    const Vec u = unit(p, "second_moment");
    return a.hessian(u) / (2.0 * sqrt_pi);
}

Mat second_moment_quadrature(const Anisotropy& a, const Vec& p) {
    const Vec u = unit(p, "second_moment_quadrature");
    if (!a.is_generic(u)) throw DomainError("second moment requires a smooth direction");
    const int d = a.dim();
    // D^2 of exp(-4 pi^2 g^2) = e (64 pi^4 g^2 Dg Dg^T - 8 pi^2 (Dg Dg^T + g D^2 g))
    const auto entry = [&](int r, int c) {
        const auto f = [&](double s) {
            const Vec xi = s * u;
            const double g = a.value(xi);
            const Vec dg = a.gradient(xi);
            const Mat hg = a.hessian(xi);
            const double e = std::exp(-4.0 * pi * pi * g * g);
            const double outer = dg(r) * dg(c);
            return e * (64.0 * pi * pi * pi * pi * g * g * outer - 8.0 * pi * pi * (outer + g * hg(r, c)));
        };
        // the integrand is even in s
        return 2.0 * quad::integrate(f, 0.0, std::numeric_limits<double>::infinity(), 1e-13);
    };
    Mat m(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = r; c < d; ++c) m(r, c) = m(c, r) = entry(r, c);
    // full moment is -(1/4 pi^2) times the slice integral; the identity holds for half of it
    return -m / (8.0 * pi * pi);
}

double sphere_average(const Anisotropy& a, double R) {
    if (!(R > 0) || !std::isfinite(R)) throw DomainError("sphere radius must be positive");
    const int d = a.dim();
    const auto& rule = quad::sphere_rule(d);
    double sum = 0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double c = a(std::span<const double>(rule.points.data() + d * i, d));
        sum += rule.weights[i] * std::pow(c, -d) * std::exp(-R * R / (4.0 * c * c));
    }
    return std::pow(R, d - 1) * std::pow(4.0 * pi, -0.5 * d) * sum;
}

namespace {

double sphere_area(int d) { return d == 2 ? 2.0 * pi : 4.0 * pi; }

double iso_sphere_average(int d, double R, double c) {
    return std::pow(R, d - 1) * sphere_area(d) * std::pow(4.0 * pi, -0.5 * d) * std::pow(c, -d) *
           std::exp(-R * R / (4.0 * c * c));
}

}  // namespace

SphereBracket sphere_average_bracket(const Anisotropy& a, double R) {
    if (!(R > 0)) throw DomainError("sphere radius must be positive");
    return {iso_sphere_average(a.dim(), R, a.upper_bound()), iso_sphere_average(a.dim(), R, a.lower_bound())};
}

SphereBracket sphere_average_envelope(const Anisotropy& a, double R) {
    if (!(R > 0)) throw DomainError("sphere radius must be positive");
    const int d = a.dim();
    const double lo = a.lower_bound(), hi = a.upper_bound();
    // c^{-d} exp(-R^2/4c^2) is unimodal in c with its peak at c = R / sqrt(2d)
    const double peak = std::clamp(R / std::sqrt(2.0 * d), lo, hi);
    const double vl = iso_sphere_average(d, R, lo), vh = iso_sphere_average(d, R, hi);
    const double vp = iso_sphere_average(d, R, peak);
    return {std::min(vl, vh), std::max({vl, vh, vp})};
}

DecayEnvelope decay_envelope(const KernelTable& k, double s, double edge_tolerance) {
    if (!(s >= 0 && s < 1)) throw DomainError("decay exponent s must lie in [0, 1)");
    const Grid& g = k.grid();
    const auto vals = k.values();
    DecayEnvelope out;
    double x[3] = {0, 0, 0};
    const auto P = static_cast<std::size_t>(g.P);
    for (std::size_t i = 0; i < vals.size(); ++i) {
        g.node(i, x);
        double r2 = 0;
        bool shell = false;
        std::size_t rest = i;
        for (int a = 0; a < g.dim; ++a) {
            r2 += x[a] * x[a];
            const std::size_t ka = rest % P;
            rest /= P;
            shell = shell || ka == 0 || ka == P - 1;
        }
        const double av = std::abs(vals[i]);
        if (shell) out.edge_max = std::max(out.edge_max, av);
        const double r = std::sqrt(r2);
        const double w = (1.0 + std::pow(r, g.dim + 1 + s)) * av;
        if (w > out.value) {
            out.value = w;
            out.argmax_radius = r;
            for (int a = 0; a < g.dim; ++a) out.argmax[a] = x[a];
        }
    }
    if (out.edge_max > edge_tolerance)
        throw DomainError("kernel does not decay at the box edge (|K| = " + std::to_string(out.edge_max) +
                          "); enlarge the box");
    return out;
}

double hamiltonian_F(const Anisotropy& a, const Mat& X, const Vec& p) {
    if (!(p.norm() > 0)) throw DomainError("hamiltonian_F: p must be non-zero");
    if (X.rows() != a.dim() || X.cols() != a.dim()) throw DomainError("hamiltonian_F: X has wrong shape");
    return a.value(p) * (a.hessian(p).cwiseProduct(X)).sum();
}

double hamiltonian_F_from_moments(const Anisotropy& a, const Mat& X, const Vec& p) {
    const Vec u = unit(p, "hamiltonian_F_from_moments");
    return (second_moment_quadrature(a, u).cwiseProduct(X)).sum() / hyperplane_integral(a, u);
}

double finite_part_constant(double s, int m) {
    if (!(s > 0 && s < 2)) throw DomainError("finite-part exponent s must lie in (0, 2)");
    return std::pow(2.0, s + m) * std::pow(pi, 0.5 * m) * std::tgamma(0.5 * (s + m)) / std::tgamma(-0.5 * s);
}

namespace {

void check_axes(const Anisotropy& a, std::span<const int> axes) {
    const int d = a.dim();
    if (axes.empty() || static_cast<int>(axes.size()) > d)
        throw DomainError("subspace must be spanned by 1..d coordinate axes");
    std::vector<bool> seen(d, false);
    for (int ax : axes) {
        if (ax < 0 || ax >= d || seen[ax]) throw DomainError("subspace axes must be distinct coordinate indices");
        seen[ax] = true;
    }
}

}  // namespace

double slice_marginal(const Anisotropy& a, std::span<const int> axes, std::span<const double> xi_v) {
    check_axes(a, axes);
    const int d = a.dim(), m = static_cast<int>(axes.size());
    if (static_cast<int>(xi_v.size()) != m) throw DomainError("slice point has wrong dimension");
    std::vector<int> comp;
    for (int i = 0; i < d; ++i)
        if (std::find(axes.begin(), axes.end(), i) == axes.end()) comp.push_back(i);
    double xi[3] = {0, 0, 0};
    for (int i = 0; i < m; ++i) xi[axes[i]] = xi_v[i];
    const auto kernel_at = [&]() {
        const double v = a(std::span<const double>(xi, d));
        return std::exp(-4.0 * pi * pi * v * v);
    };
    if (comp.empty()) return kernel_at();
    const double inf = std::numeric_limits<double>::infinity();
    if (comp.size() == 1) {
        return quad::integrate(
            [&](double t) {
                xi[comp[0]] = t;
                return kernel_at();
            },
            -inf, inf, 1e-12);
    }
    // two complementary coordinates: polar coordinates in the slice
    std::vector<double> th, w;
    quad::composite_gauss(0.0, 2.0 * pi, 16, th, w);
    double sum = 0;
    for (std::size_t j = 0; j < th.size(); ++j) {
        const double c = std::cos(th[j]), s = std::sin(th[j]);
        sum += w[j] * quad::integrate(
                          [&](double r) {
                              xi[comp[0]] = r * c;
                              xi[comp[1]] = r * s;
                              return r * kernel_at();
                          },
                          0.0, inf, 1e-12);
    }
    return sum;
}

double moment_s(const Anisotropy& a, std::span<const int> axes, double s) {
    check_axes(a, axes);
    const double C = finite_part_constant(s, static_cast<int>(axes.size()));
    if (!(C < 0)) throw NumericalError("finite-part constant has the wrong sign");
    const int m = static_cast<int>(axes.size());
    const double h0 = slice_marginal(a, axes, std::vector<double>(m, 0.0));
    // beyond r_cut the marginal is below exp(-64) h(0)
    const double r_cut = 8.0 / (2.0 * pi * a.lower_bound());
    const double r0 = 1e-3;
    const double scale = std::pow(2.0 * pi, -(m + s));

    const auto radial = [&](const double* dir) {
        std::vector<double> pt(m);
        const auto h = [&](double r) {
            for (int i = 0; i < m; ++i) pt[i] = r * dir[i];
            return slice_marginal(a, axes, pt);
        };
        // quadratic model of h - h(0) on [0, r0] (h is even and C^1 with its max at 0)
        const double c0 = h(r0) - h0;
        double v = c0 / (r0 * r0) * std::pow(r0, 2.0 - s) / (2.0 - s);
        v += quad::integrate([&](double r) { return (h(r) - h0) * std::pow(r, -1.0 - s); }, r0, r_cut, 1e-11);
        v += -h0 * std::pow(r_cut, -s) / s;
        return v;
    };

    double total = 0;
    if (m == 1) {
        const double plus = 1.0, minus = -1.0;
        total = radial(&plus) + radial(&minus);
    } else {
        const auto& rule = quad::sphere_rule(m);
        for (std::size_t i = 0; i < rule.size(); ++i) total += rule.weights[i] * radial(rule.points.data() + m * i);
    }
    return C * scale * total;
}

}  // namespace anisoflow
