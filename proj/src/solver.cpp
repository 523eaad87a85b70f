#include "anisoflow/solver.hpp"

#include <cmath>
#include <sstream>

#include "anisoflow/errors.hpp"
#include "anisoflow/kernel.hpp"

namespace anisoflow {

double profile_q(double s) {
    // split by sign so that neither branch overflows
    if (s >= 0) {
        const double e = std::exp(-s);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(s));
}

void check_cfl(double dt, double eps) {
    if (!(eps > 0) || !std::isfinite(eps)) throw ConfigError("eps must be positive");
    if (!(dt > 0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
    // a relative slack of 1e-12 admits dt = eps^2 written in decimal
    if (dt > kStabilityM * eps * eps * (1 + 1e-12)) {
        std::ostringstream s;
        s << "stability condition violated: dt <= M eps^2 with M = 1 requires dt <= " << eps * eps << ", got dt = "
          << dt;
        throw ConfigError(s.str());
    }
}

SpectralField initialize(const Grid& g, const std::function<double(const double* x)>& signed_distance, double eps,
                         double eps_power) {
    if (!(eps > 0)) throw DomainError("eps must be positive");
    const double width = std::pow(eps, eps_power);
    SpectralField u(g);
    double x[3];
    for (std::size_t i = 0; i < g.size(); ++i) {
        g.node(i, x);
        u.values[i] = profile_q(signed_distance(x) / width);
    }
    return u;
}

Diffusion::Diffusion(const Anisotropy& a, const Grid& g, double dt)
    : grid_(g), dt_(dt), ft_(g), work_(g.spectrum_size()) {
    if (!(dt >= 0)) throw DomainError("diffusion time step must be non-negative");
    symbol_ = sample_heat_symbol(g, a, dt);
}

void Diffusion::apply(SpectralField& u) {
    if (!(u.grid == grid_)) throw DomainError("field grid does not match the diffusion operator");
    ft_.forward(u.values, work_);
    for (std::size_t i = 0; i < work_.size(); ++i) work_[i] *= symbol_[i];
    ft_.inverse(work_, u.values);
}

void diffusion_step(SpectralField& u, const Anisotropy& a, double dt) {
    Diffusion d(a, u.grid, dt);
    d.apply(u);
}

void reaction_step(SpectralField& u, double dt, double eps) {
    check_cfl(dt, eps);
    const double r = dt / (eps * eps);
    for (double& v : u.values) v -= r * double_well_prime(v);
}

double conserved_reaction_step(SpectralField& u, double dt, double eps) {
    check_cfl(dt, eps);
    // fixed summation order keeps the multiplier reproducible
    double num = 0, den = 0;
    for (double v : u.values) {
        num += double_well_prime(v);
        den += double_well_root(v);
    }
    const double r = dt / (eps * eps);
    if (den < 1e-14) {
        for (double& v : u.values) v -= r * double_well_prime(v);
        return 0.0;
    }
    const double lambda = num / (eps * den);
    const double c = dt / eps * lambda;
    for (double& v : u.values) v += -r * double_well_prime(v) + c * double_well_root(v);
    return lambda;
}

StepMetrics field_metrics(const SpectralField& u) {
    StepMetrics m;
    double sum = 0;
    std::size_t inside = 0;
    m.min = u.values.front();
    m.max = u.values.front();
    for (double v : u.values) {
        sum += v;
        m.min = std::min(m.min, v);
        m.max = std::max(m.max, v);
        inside += v >= 0.5;
    }
    const double cell = u.grid.cell_volume();
    m.mass = sum * cell;
    m.measure = static_cast<double>(inside) * cell;
    return m;
}

SimulationResult simulate(const Anisotropy& a, SpectralField u, const SimulationOptions& opt) {
    check_cfl(opt.dt, opt.eps);
    if (!(opt.T >= 0)) throw ConfigError("duration T must be non-negative");
    Diffusion diffusion(a, u.grid, opt.dt);
    SimulationResult res;

    StepMetrics m0 = field_metrics(u);
    res.metrics.push_back(m0);
    if (opt.keep_snapshots) res.snapshots.push_back({0, 0.0, u});

    const long n_steps = static_cast<long>(std::floor(opt.T / opt.dt + 1e-9));
    double lambda = 0;
    for (long n = 1; n <= n_steps; ++n) {
        const auto react = [&] {
            if (opt.conserve)
                lambda = conserved_reaction_step(u, opt.dt, opt.eps);
            else
                reaction_step(u, opt.dt, opt.eps);
        };
        if (opt.reaction_first) {
            react();
            diffusion.apply(u);
        } else {
            diffusion.apply(u);
            react();
        }
        StepMetrics m = field_metrics(u);
        m.step = n;
        m.time = n * opt.dt;
        m.multiplier = lambda;
        if (!std::isfinite(m.mass) || !std::isfinite(m.min) || !std::isfinite(m.max)) {
            std::ostringstream s;
            s << "non-finite field value at step " << n << " (t = " << m.time << ")";
            throw NumericalError(s.str());
        }
        if (m.min < -0.1 || m.max > 1.1) {
            std::ostringstream s;
            s << "field left [-0.1, 1.1] at step " << n << " (min " << m.min << ", max " << m.max << ")";
            throw NumericalError(s.str());
        }
        res.metrics.push_back(m);
        res.steps = n;
        res.time = m.time;
        const bool extinct = m.max < 0.5;
        const bool last = n == n_steps || extinct;
        bool keep_going = true;
        if (opt.observer) keep_going = opt.observer(m, u);
        if (opt.keep_snapshots && (last || !keep_going || (opt.snapshot_every > 0 && n % opt.snapshot_every == 0)))
            res.snapshots.push_back({n, m.time, u});
        if (extinct) {
            res.extinct = true;
            res.extinction_time = m.time;
            break;
        }
        if (!keep_going) {
            res.stopped_by_observer = true;
            break;
        }
    }
    res.final_field = std::move(u);
    return res;
}

}  // namespace anisoflow
