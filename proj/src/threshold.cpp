#include "anisoflow/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "anisoflow/errors.hpp"
#include "anisoflow/kernel.hpp"
#include "anisoflow/solver.hpp"

namespace anisoflow {

IndicatorField IndicatorField::from_predicate(const Grid& g, const std::function<bool(const double* x)>& inside) {
    IndicatorField e(g);
    double x[3];
    for (std::size_t i = 0; i < g.size(); ++i) {
        g.node(i, x);
        e.mask[i] = inside(x) ? 1 : 0;
    }
    return e;
}

IndicatorField IndicatorField::threshold(const SpectralField& u, double level) {
    IndicatorField e(u.grid);
    for (std::size_t i = 0; i < u.values.size(); ++i) e.mask[i] = u.values[i] >= level ? 1 : 0;
    return e;
}

SpectralField IndicatorField::to_field() const {
    SpectralField f(grid);
    for (std::size_t i = 0; i < mask.size(); ++i) f.values[i] = mask[i];
    return f;
}

std::size_t IndicatorField::count() const {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

HeatConvolution::HeatConvolution(const Anisotropy& a, const Grid& g, double h)
    : grid_(g), h_(h), ft_(g), work_(g.spectrum_size()) {
    if (!(h > 0)) throw DomainError("threshold time step h must be positive");
    const double edge = nyquist_symbol(g, a, h);
    if (edge > kNyquistTolerance)
        throw DomainError("K_{phi,h} is under-resolved on this grid (symbol " + std::to_string(edge) +
                          " at the outer frequency shell); use a larger h or a larger P");
    symbol_ = sample_heat_symbol(g, a, h);
}

SpectralField HeatConvolution::apply(const SpectralField& f) {
    if (!(f.grid == grid_)) throw DomainError("field grid does not match the convolution");
    SpectralField out(grid_);
    ft_.forward(f.values, work_);
    for (std::size_t i = 0; i < work_.size(); ++i) work_[i] *= symbol_[i];
    ft_.inverse(work_, out.values);
    return out;
}

SpectralField HeatConvolution::apply(const IndicatorField& e) { return apply(e.to_field()); }

IndicatorField bmo_step(const IndicatorField& e, HeatConvolution& conv, double theta) {
    return IndicatorField::threshold(conv.apply(e), theta);
}

IndicatorField bmo_step(const IndicatorField& e, const Anisotropy& a, double h, double theta) {
    HeatConvolution conv(a, e.grid, h);
    return bmo_step(e, conv, theta);
}

namespace {

bool nested(const IndicatorField& inner, const IndicatorField& outer) {
    for (std::size_t i = 0; i < inner.mask.size(); ++i)
        if (inner.mask[i] && !outer.mask[i]) return false;
    return true;
}

long outside(const IndicatorField& inner, const IndicatorField& outer) {
    long n = 0;
    for (std::size_t i = 0; i < inner.mask.size(); ++i) n += inner.mask[i] && !outer.mask[i];
    return n;
}

}  // namespace

BmoRun bmo_evolve(const IndicatorField& e, const Anisotropy& a, double h, double t_final, double theta,
                  const std::function<void(long, const IndicatorField&)>& on_step) {
    if (!(h > 0)) throw DomainError("threshold time step h must be positive");
    const long n = static_cast<long>(std::floor(t_final / h + 1e-9));
    BmoRun run;
    run.final = e;
    run.measures.push_back(static_cast<double>(e.count()) * e.grid.cell_volume());
    if (n <= 0) return run;
    HeatConvolution conv(a, e.grid, h);
    IndicatorField prev;
    for (long k = 1; k <= n; ++k) {
        IndicatorField next = bmo_step(run.final, conv, theta);
        if (k >= 2) run.inclusion_violations.push_back(nested(run.final, prev) ? outside(next, run.final) : -1);
        prev = std::move(run.final);
        run.final = std::move(next);
        run.steps = k;
        run.measures.push_back(static_cast<double>(run.final.count()) * e.grid.cell_volume());
        if (on_step) on_step(k, run.final);
        if (run.final.empty()) {
            run.extinct = true;
            run.extinction_step = k;
            break;
        }
    }
    return run;
}

long monotonicity_violations(const IndicatorField& inner, const IndicatorField& outer, const Anisotropy& a, double h,
                             double theta) {
    if (!(inner.grid == outer.grid)) throw DomainError("indicator grids differ");
    if (!nested(inner, outer)) throw DomainError("inputs are not nested");
    HeatConvolution conv(a, inner.grid, h);
    return outside(bmo_step(inner, conv, theta), bmo_step(outer, conv, theta));
}

// ---------------------------------------------------------------------------

EnvelopePair g_envelopes(const SpectralField& psi, const Anisotropy& a, double h, double theta, int levels) {
    if (levels < 2) throw DomainError("level sweep needs at least 2 levels");
    const double lo = psi.min(), hi = psi.max();
    EnvelopePair out{SpectralField(psi.grid, lo), SpectralField(psi.grid, lo), 0.0};
    if (!(hi > lo)) return out;  // constant field
    out.bin = (hi - lo) / (levels - 1);
    HeatConvolution conv(a, psi.grid, h);
    const std::size_t n = psi.values.size();
    // plus: last level with S >= theta; minus: level before the first failure
    std::vector<std::uint8_t> failed(n, 0);
    IndicatorField sup(psi.grid);
    for (int j = 0; j < levels; ++j) {
        const double lam = j == levels - 1 ? hi : lo + j * out.bin;
        for (std::size_t i = 0; i < n; ++i) sup.mask[i] = psi.values[i] >= lam ? 1 : 0;
        const SpectralField s = conv.apply(sup);
        for (std::size_t i = 0; i < n; ++i) {
            if (s.values[i] >= theta) {
                out.plus.values[i] = lam;
                if (!failed[i]) out.minus.values[i] = lam;
            } else {
                failed[i] = 1;
            }
        }
    }
    return out;
}

SpectralField g_plus(const SpectralField& psi, const Anisotropy& a, double h, double theta, int levels) {
    return g_envelopes(psi, a, h, theta, levels).plus;
}

SpectralField g_minus(const SpectralField& psi, const Anisotropy& a, double h, double theta, int levels) {
    return g_envelopes(psi, a, h, theta, levels).minus;
}

std::vector<std::size_t> sort_by_value(const SpectralField& psi) {
    std::vector<std::size_t> order(psi.values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return psi.values[i] > psi.values[j]; });
    return order;
}

ProbeEnvelope probe_envelope(const SpectralField& psi, std::span<const std::size_t> order,
                             const SpectralField& kernel_h, std::size_t probe, double theta) {
    const Grid& g = psi.grid;
    if (!(kernel_h.grid == g)) throw DomainError("kernel grid does not match the field");
    if (order.size() != g.size()) throw DomainError("node order has the wrong length");
    const auto P = static_cast<std::size_t>(g.P);
    // kernel table origin sits at node P/2 on each axis
    std::size_t pk[3] = {0, 0, 0};
    {
        std::size_t r = probe;
        for (int a = 0; a < g.dim; ++a) {
            pk[a] = r % P;
            r /= P;
        }
    }
    const auto weight = [&](std::size_t node) {
        std::size_t idx = 0, stride = 1, r = node;
        for (int a = 0; a < g.dim; ++a) {
            const std::size_t k = r % P;
            r /= P;
            idx += ((pk[a] + P + P / 2 - k) % P) * stride;
            stride *= P;
        }
        return kernel_h.values[idx];
    };
    const double cell = g.cell_volume();
    // S(lambda) on (psi_(k+1), psi_(k)] is the partial sum of the first k
    // weights; ties are grouped so that every level is a node value. Above
    // max psi the set is empty and S = 0 fails the threshold.
    ProbeEnvelope out{psi.values[order.back()], psi.values[order.back()]};
    bool have_plus = false, await_pass = true;
    double sum = 0;
    std::size_t k = 0;
    while (k < order.size()) {
        const double level = psi.values[order[k]];
        while (k < order.size() && psi.values[order[k]] == level) sum += weight(order[k++]) * cell;
        if (sum >= theta) {
            if (!have_plus) out.plus = level;  // sup of passing levels
            have_plus = true;
            if (await_pass) out.minus = level;  // inf of the lowest failing interval
            await_pass = false;
        } else {
            await_pass = true;
        }
    }
    return out;
}

ConsistencyReport consistency_check(const SpectralField& psi, const Anisotropy& a, std::size_t probe,
                                    const Vec& gradient, const Mat& hessian, std::span<const double> h_list,
                                    double tolerance, double theta) {
    if (!(gradient.norm() > 0)) throw DomainError("consistency_check needs a non-vanishing gradient");
    if (probe >= psi.values.size()) throw DomainError("probe node out of range");
    if (h_list.empty()) throw DomainError("empty h list");
    const double expected = hamiltonian_F(a, hessian, gradient);
    const auto order = sort_by_value(psi);
    const double base = psi.values[probe];
    ConsistencyReport rep;
    for (double h : h_list) {
        const KernelTable k = build_kernel(a, h, psi.grid);
        const ProbeEnvelope e = probe_envelope(psi, order, k.field(), probe, theta);
        ConsistencyRow row;
        row.h = h;
        row.g_plus = (e.plus - base) / h;
        row.g_minus = (e.minus - base) / h;
        row.expected = expected;
        row.gap = std::max(std::abs(row.g_plus - expected), std::abs(row.g_minus - expected));
        rep.rows.push_back(row);
    }
    // order rows by decreasing h before judging the trend
    std::sort(rep.rows.begin(), rep.rows.end(), [](const auto& x, const auto& y) { return x.h > y.h; });
    rep.decreasing = true;
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
        if (!(rep.rows[i].gap < rep.rows[i - 1].gap)) rep.decreasing = false;
    rep.passed = rep.decreasing && rep.rows.back().gap <= tolerance;
    return rep;
}

double reaction_threshold(double v, double eps, double tau) {
    if (!(eps > 0) || !(tau > 0)) throw DomainError("reaction_threshold needs eps > 0 and tau > 0");
    const double T = tau / (eps * eps);
    const long n = std::max(100L, static_cast<long>(std::ceil(2.0 * T)));
    const double dt = T / static_cast<double>(n);
    const auto f = [](double s) { return -double_well_prime(s); };
    double s = v;
    for (long i = 0; i < n; ++i) {
        const double k1 = f(s);
        const double k2 = f(s + 0.5 * dt * k1);
        const double k3 = f(s + 0.5 * dt * k2);
        const double k4 = f(s + dt * k3);
        s += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        if (!std::isfinite(s)) throw NumericalError("reaction_threshold diverged");
    }
    return s;
}

SpectralField reaction_threshold(const SpectralField& v, double eps, double tau) {
    SpectralField out(v.grid);
    for (std::size_t i = 0; i < v.values.size(); ++i) out.values[i] = reaction_threshold(v.values[i], eps, tau);
    return out;
}

double reaction_threshold_exact(double v, double eps, double tau) {
    if (v == 0.5) return 0.5;
    // s(1-s)/(1-2s)^2 decays like exp(-t/eps^2) along trajectories
    const double g0 = v * (1 - v) / ((1 - 2 * v) * (1 - 2 * v));
    const double g = g0 * std::exp(-tau / (eps * eps));
    const double root = 1.0 / std::sqrt(1.0 + 4.0 * g);
    return v < 0.5 ? 0.5 * (1 - root) : 0.5 * (1 + root);
}

}  // namespace anisoflow
