#include "doctest.h"

#include <cmath>
#include <random>

#include "anisoflow/bench.hpp"
#include "anisoflow/errors.hpp"
#include "anisoflow/kernel.hpp"
#include "anisoflow/solver.hpp"

using namespace anisoflow;

TEST_CASE("profile") {
    CHECK(profile_q(0.0) == 0.5);
    CHECK(std::abs(profile_q(-40.0) - 1) < 1e-15);
    CHECK(profile_q(40.0) < 1e-15);
    CHECK(profile_q(-800.0) == 1.0);
    CHECK(profile_q(800.0) == 0.0);
    for (double s = -8; s <= 8; s += 0.37) {
        const double d = 1e-5;
        const double dq = (profile_q(s + d) - profile_q(s - d)) / (2 * d);
        const double q = profile_q(s);
        CHECK(std::abs(dq + q * (1 - q)) < 1e-10);
        CHECK(std::abs(q * (1 - q) - double_well_root(q)) < 1e-15);
    }
}

TEST_CASE("double well") {
    CHECK(double_well_prime(0.25) == doctest::Approx(0.09375).epsilon(1e-15));
    for (double s : {0.0, 0.1, 0.3, 0.5, 0.8})
        CHECK(double_well_prime(1 - s) == doctest::Approx(-double_well_prime(s)).epsilon(1e-14));
    // W'' = 1 - 6s + 6s^2 never exceeds 1/M on [0,1]
    for (double s = 0; s <= 1; s += 1e-3) CHECK(1 - 6 * s + 6 * s * s <= 1.0 / kStabilityM + 1e-15);
}

TEST_CASE("stability condition") {
    CHECK_NOTHROW(check_cfl(1.0 / (256.0 * 256.0), 1.0 / 256));
    CHECK_NOTHROW(check_cfl(1e-6, 1e-3));
    try {
        check_cfl(1e-2, 1e-3);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        CHECK(what.find("dt <= M eps^2") != std::string::npos);
        CHECK(what.find("M = 1") != std::string::npos);
    }
    CHECK_THROWS_AS(check_cfl(1e-6, 0.0), ConfigError);
    CHECK_THROWS_AS(check_cfl(-1.0, 0.1), ConfigError);
}

TEST_CASE("initialize") {
    const Grid g(2, 64);
    const double eps = 1.0 / 64;
    const auto u = initialize(g, [](const double* x) { return x[0] - 0.0; }, eps);
    double x[2];
    for (std::size_t i = 0; i < g.size(); ++i) {
        g.node(i, x);
        if (x[0] == 0.0) CHECK(u.values[i] == 0.5);
        if (x[0] <= -10 * eps) CHECK(u.values[i] > 1 - 1e-4);
    }
    CHECK_THROWS_AS(initialize(g, [](const double*) { return 0.0; }, 0.0), DomainError);
    // exponent override: q(dist / eps^2) is much sharper
    const auto sharp = initialize(g, [](const double* y) { return y[0] - 0.0; }, 0.5, 2.0);
    const auto soft = initialize(g, [](const double* y) { return y[0] - 0.0; }, 0.5, 1.0);
    CHECK(sharp.values[0] > soft.values[0]);

    // l4 Wulff set: {u >= 1/2} has the area of the Wulff set within two cells of perimeter
    const Grid g2(2, 256);
    const auto l4 = Anisotropy::named("l4", 2);
    ShapeSpec w;
    w.radius = 0.25;
    const auto v = initialize(g2, signed_distance(w, l4, g2), 1.0 / 256);
    const double area = field_metrics(v).measure;
    const double exact = wulff_unit_measure(l4) * 0.0625;
    CHECK(std::abs(area - exact) < 2 * 4 * 0.25 * g2.spacing());
}

TEST_CASE("diffusion step") {
    const Grid g(2, 32);
    const auto iso = Anisotropy::named("iso", 2);
    SpectralField u(g);
    double x[2];
    for (std::size_t i = 0; i < g.size(); ++i) {
        g.node(i, x);
        u.values[i] = std::cos(2 * M_PI * x[0]);
    }
    const SpectralField u0 = u;
    const double dt = 3e-3;
    diffusion_step(u, iso, dt);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(u.values[i] - std::exp(-4 * M_PI * M_PI * dt) * u0.values[i]) < 1e-12);

    SpectralField c(g, 0.3);
    diffusion_step(c, Anisotropy::named("l1", 2), 0.01);
    for (double v : c.values) CHECK(std::abs(v - 0.3) < 1e-15);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> d(0, 1);
    SpectralField r(g);
    for (double& v : r.values) v = d(rng);
    const double m = r.integral();
    diffusion_step(r, Anisotropy::named("hex", 2), 0.01);
    CHECK(std::abs(r.integral() - m) < 1e-14);
    CHECK_THROWS_AS(Diffusion(iso, g, 0.01).apply(c = SpectralField(Grid(2, 16))), DomainError);
}

TEST_CASE("reaction step") {
    const Grid g(2, 8);
    for (double s : {0.0, 0.5, 1.0}) {
        SpectralField u(g, s);
        reaction_step(u, 1e-4, 1e-2);
        for (double v : u.values) CHECK(v == s);
    }
    SpectralField q(g, 0.25);
    reaction_step(q, 1e-4, 1e-2);  // dt / eps^2 = 1
    CHECK(q.values[0] == doctest::Approx(0.15625).epsilon(1e-14));
    // monotone scalar map on [0,1] under the stability condition
    double prev = -1;
    for (double s = 0; s <= 1; s += 1e-3) {
        SpectralField u(g, s);
        reaction_step(u, 1e-4, 1e-2);
        CHECK(u.values[0] >= prev);
        prev = u.values[0];
    }
    CHECK_THROWS_AS(reaction_step(q, 1e-2, 1e-3), ConfigError);
}

TEST_CASE("conserved reaction step") {
    const Grid g(2, 64);
    SpectralField half(g, 0.5);
    CHECK(conserved_reaction_step(half, 1e-4, 1e-2) == 0.0);
    for (double v : half.values) CHECK(v == 0.5);

    SpectralField wells(g, 1.0);
    CHECK(conserved_reaction_step(wells, 1e-4, 1e-2) == 0.0);

    // u(-x) = 1 - u(x): W' is odd about 1/2, so lambda vanishes
    SpectralField u(g);
    double x[2];
    for (std::size_t i = 0; i < g.size(); ++i) {
        g.node(i, x);
        u.values[i] = 0.5 + 0.45 * std::sin(2 * M_PI * x[0]) * (1 + 0.5 * std::cos(2 * M_PI * x[1])) / 1.5;
    }
    SpectralField w = u;
    CHECK(std::abs(conserved_reaction_step(w, 1e-4, 1e-2)) < 1e-12);

    // mass drift of a disc profile
    const auto disc = initialize(g, [](const double* y) { return std::hypot(y[0], y[1]) - 0.2; }, 1.0 / 64);
    SpectralField d = disc;
    const double lam = conserved_reaction_step(d, 1.0 / 4096, 1.0 / 64);
    CHECK(lam != 0.0);
    CHECK(std::abs(d.integral() - disc.integral()) < 1e-12 * disc.integral());
}

TEST_CASE("simulate") {
    const auto iso = Anisotropy::named("iso", 2);
    const Grid g(2, 64);
    SimulationOptions opt;
    opt.dt = 1.0 / 4096;
    opt.eps = 1.0 / 64;
    opt.T = 0.02;

    SUBCASE("empty set is extinct after one step") {
        const auto r = simulate(iso, SpectralField(g, 0.0), opt);
        CHECK(r.extinct);
        CHECK(r.steps == 1);
        CHECK(r.extinction_time == doctest::Approx(opt.dt));
    }
    SUBCASE("shrinking disc") {
        const auto u0 = initialize(g, [](const double* y) { return std::hypot(y[0], y[1]) - 0.2; }, opt.eps);
        opt.snapshot_every = 16;
        opt.T = 0.01;
        const auto r = simulate(iso, u0, opt);
        CHECK_FALSE(r.extinct);
        CHECK(r.steps == 40);
        CHECK(r.metrics.size() == 41);
        CHECK(r.snapshots.front().step == 0);
        CHECK(r.snapshots.back().step == 40);
        CHECK(r.snapshots.size() == 4);  // 0, 16, 32, 40
        for (std::size_t i = 1; i < r.metrics.size(); ++i) CHECK(r.metrics[i].mass < r.metrics[i - 1].mass);
        // R(t)^2 = R0^2 - 2t, within a few cells
        const double R = std::sqrt(r.metrics.back().measure / M_PI);
        CHECK(std::abs(R - std::sqrt(0.04 - 2 * r.time)) < 2 * g.spacing());
    }
    SUBCASE("conserved run keeps mass") {
        const auto u0 = initialize(g, [](const double* y) { return std::max(std::abs(y[0]), std::abs(y[1])) - 0.2; }, opt.eps);
        opt.conserve = true;
        const auto r = simulate(iso, u0, opt);
        CHECK(std::abs(r.metrics.back().mass - r.metrics.front().mass) < 1e-10);
    }
    SUBCASE("splitting order changes the result at first order in dt") {
        const auto u0 = initialize(g, [](const double* y) { return std::hypot(y[0], y[1]) - 0.2; }, opt.eps);
        opt.T = 0.005;
        const auto gap = [&](double dt) {
            opt.dt = dt;
            opt.reaction_first = false;
            const auto a = simulate(iso, u0, opt);
            opt.reaction_first = true;
            const auto b = simulate(iso, u0, opt);
            double diff = 0;
            for (std::size_t i = 0; i < g.size(); ++i)
                diff = std::max(diff, std::abs(a.final_field.values[i] - b.final_field.values[i]));
            return diff;
        };
        const double coarse = gap(1.0 / 4096), fine = gap(1.0 / 8192);
        CHECK(fine > 0);
        CHECK(coarse / fine == doctest::Approx(2.0).epsilon(0.15));
    }
    SUBCASE("observer stops the run") {
        const auto u0 = initialize(g, [](const double* y) { return std::hypot(y[0], y[1]) - 0.2; }, opt.eps);
        opt.observer = [](const StepMetrics& m, const SpectralField&) { return m.step < 5; };
        const auto r = simulate(iso, u0, opt);
        CHECK(r.stopped_by_observer);
        CHECK(r.steps == 5);
    }
    SUBCASE("errors") {
        opt.dt = 1e-2;
        CHECK_THROWS_AS(simulate(iso, SpectralField(g, 0.0), opt), ConfigError);
        opt.dt = 1.0 / 4096;
        SpectralField bad(g, 0.0);
        bad.values[3] = std::nan("");
        CHECK_THROWS_AS(simulate(iso, bad, opt), NumericalError);
    }
}
