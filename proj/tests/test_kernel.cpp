#include "doctest.h"

#include <cmath>
#include <random>

#include "anisoflow/errors.hpp"
#include "anisoflow/kernel.hpp"

using namespace anisoflow;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

}  // namespace

TEST_CASE("isotropic kernel is the heat kernel") {
    const Grid g(2, 256, 16.0);
    const auto k = build_kernel(Anisotropy::named("iso", 2), 1.0, g);
    double x[2], err = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        g.node(i, x);
        const double r2 = x[0] * x[0] + x[1] * x[1];
        if (r2 > 0.16) continue;
        err = std::max(err, std::abs(k.values()[i] - std::exp(-r2 / 4) / (4 * M_PI)));
    }
    CHECK(err < 1e-6);
    CHECK(std::abs(k.mass() - 1) < 1e-8);
    CHECK(k.imaginary_residue() < 1e-12);
}

TEST_CASE("kernel invariants") {
    for (const char* id : {"iso", "l4", "l4_3", "hex", "cyl", "l1"}) {
        const Grid g(2, 128, 16.0);
        const auto k = build_kernel(Anisotropy::named(id, 2), 1.0, g);
        CHECK(std::abs(k.mass() - 1) < 1e-8);
        const auto v = k.values();
        const auto P = static_cast<std::size_t>(g.P);
        for (std::size_t i = 0; i < v.size(); ++i) {
            const std::size_t k1 = i % P, k2 = i / P;
            CHECK(v[i] == v[(P - k1) % P + P * ((P - k2) % P)]);
        }
    }
    CHECK(build_kernel(Anisotropy::named("l4", 2), 1.0, Grid(2, 256, 16.0)).min() < 0);
}

TEST_CASE("kernel errors") {
    const auto a = Anisotropy::named("iso", 2);
    CHECK_THROWS_AS(build_kernel(a, 0.0, Grid(2, 64)), DomainError);
    CHECK_THROWS_AS(build_kernel(a, -1.0, Grid(2, 64)), DomainError);
    CHECK_THROWS_AS(build_kernel(a, 1e-6, Grid(2, 64)), DomainError);  // under-resolved
}

TEST_CASE("semigroup") {
    const Grid g(2, 128, 12.0);
    const auto a = Anisotropy::named("l4", 2);
    const auto k1 = build_kernel(a, 0.4, g), k2 = build_kernel(a, 0.6, g), k3 = build_kernel(a, 1.0, g);
    const auto c1 = k1.field().coefficients(), c2 = k2.field().coefficients();
    std::vector<Complex> c(c1.size());
    const double vol = g.length * g.length;
    for_each_mode(g, [&](std::size_t i, const int*) {
        c[i] = c1[i] * c2[i] * vol;
    });
    const auto conv = SpectralField::from_coefficients(g, c);
    double err = 0;
    for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(conv.values[i] - k3.values()[i]));
    CHECK(err < 1e-10);
}

TEST_CASE("hyperplane integrals") {
    const auto iso = Anisotropy::named("iso", 2);
    CHECK(hyperplane_integral(iso, v2(0.6, 0.8)) == doctest::Approx(0.28209479177387814).epsilon(1e-10));
    const auto l4 = Anisotropy::named("l4", 2);
    CHECK(hyperplane_integral(l4, v2(1, 0)) == doctest::Approx(1 / (2 * std::sqrt(M_PI))).epsilon(1e-10));
    CHECK(hyperplane_integral(l4, v2(1, 1)) == doctest::Approx(hyperplane_integral_exact(l4, v2(1, 1))).epsilon(1e-10));
    CHECK_THROWS_AS(hyperplane_integral(l4, v2(0, 0)), DomainError);
    const auto k = build_kernel(l4, 1.0, Grid(2, 256, 16.0));
    CHECK(hyperplane_grid_sum(k, 0) == doctest::Approx(hyperplane_integral_exact(l4, v2(1, 0))).epsilon(1e-2));
}

TEST_CASE("second moments") {
    const auto iso = Anisotropy::named("iso", 2);
    const Mat m = second_moment(iso, v2(0, 1));
    CHECK(m(0, 0) == doctest::Approx(1 / (2 * std::sqrt(M_PI))));
    CHECK(std::abs(m(1, 1)) < 1e-15);
    const Mat q = second_moment_quadrature(iso, v2(0, 1));
    CHECK((q - m).norm() < 1e-8 * m.norm());
    const auto l4 = Anisotropy::named("l4", 3);
    Vec p(3);
    p << 0.3, -0.5, 0.8;
    p.normalize();
    const Mat a = second_moment(l4, p), b = second_moment_quadrature(l4, p);
    CHECK((a - b).norm() < 1e-6 * a.norm());
    CHECK((a * p).norm() < 1e-10);
    CHECK_THROWS_AS(second_moment(Anisotropy::named("l1", 2), v2(1, 0)), DomainError);
}

TEST_CASE("sphere averages") {
    const auto iso = Anisotropy::named("iso", 2);
    for (double R : {0.5, 1.0, 2.0, 4.0})
        CHECK(std::abs(sphere_average(iso, R) - R / 2 * std::exp(-R * R / 4)) < 1e-8);
    const auto l4 = Anisotropy::named("l4", 2);
    const double I = sphere_average(l4, 1.0);
    const auto b = sphere_average_bracket(l4, 1.0);
    CHECK(I > 0);
    CHECK(b.lower <= I);
    CHECK(I <= b.upper);
    for (double R : {0.5, 1.0, 2.0, 4.0}) {
        const auto e = sphere_average_envelope(l4, R);
        const double v = sphere_average(l4, R);
        CHECK(e.lower <= v);
        CHECK(v <= e.upper);
    }
    CHECK_THROWS_AS(sphere_average(l4, 0.0), DomainError);
}

TEST_CASE("decay envelope") {
    const auto iso = Anisotropy::named("iso", 2);
    const auto e = decay_envelope(build_kernel(iso, 1.0, Grid(2, 256, 24.0)), 0.0);
    CHECK(std::isfinite(e.value));
    CHECK_THROWS_AS(decay_envelope(build_kernel(iso, 1.0, Grid(2, 64, 8.0)), 0.0), DomainError);
    CHECK_THROWS_AS(decay_envelope(build_kernel(iso, 1.0, Grid(2, 256, 24.0)), 1.0), DomainError);

    const auto l4 = Anisotropy::named("l4", 2);
    const auto a = decay_envelope(build_kernel(l4, 1.0, Grid(2, 256, 32.0)), 0.5, 1e-4);
    const auto b = decay_envelope(build_kernel(l4, 1.0, Grid(2, 512, 32.0)), 0.5, 1e-4);
    CHECK(b.value < 2 * a.value);
    CHECK(a.value < 2 * b.value);
    CHECK(a.argmax_radius > 0);
}

TEST_CASE("operator F") {
    const auto iso = Anisotropy::named("iso", 3);
    Vec e1 = Vec::Zero(3);
    e1(0) = 1;
    CHECK(hamiltonian_F(iso, Mat::Identity(3, 3), e1) == doctest::Approx(2.0));
    CHECK(hamiltonian_F(iso, Mat::Zero(3, 3), e1) == 0.0);
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n;
    Mat X(3, 3);
    for (int i = 0; i < 9; ++i) X(i) = n(rng);
    X = 0.5 * (X + X.transpose()).eval();
    Vec p(3);
    p << 0.2, 0.3, -0.9;
    p.normalize();
    CHECK(hamiltonian_F(iso, X, p) == doctest::Approx(X.trace() - p.dot(X * p)));
    CHECK_THROWS_AS(hamiltonian_F(iso, X, Vec::Zero(3)), DomainError);

    const auto l4 = Anisotropy::named("l4", 2);
    Mat Y(2, 2);
    Y << 1.0, 0.4, 0.4, -0.3;
    const Vec q = v2(0.7, 0.2);
    CHECK(hamiltonian_F_from_moments(l4, Y, q) == doctest::Approx(hamiltonian_F(l4, Y, q)).epsilon(1e-7));
    // degenerate ellipticity: adding a PSD matrix never decreases F
    Mat psd(2, 2);
    psd << 0.5, 0.1, 0.1, 0.2;
    CHECK(hamiltonian_F(l4, Y + psd, q) >= hamiltonian_F(l4, Y, q));
}

TEST_CASE("moment s") {
    CHECK(finite_part_constant(1.0, 2) < 0);
    CHECK(finite_part_constant(0.5, 1) < 0);
    const auto iso = Anisotropy::named("iso", 2);
    const int both[2] = {0, 1};
    CHECK(moment_s(iso, both, 1.0) == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-6));
    const int first[1] = {0};
    // iso, line: int |x| (4 pi)^{-1} e^{-x^2/4} dx = 2 / (2 pi)^{...}; compare with direct quadrature
    const double line = 2.0 * 2.0 / (4 * M_PI);  // int_R |x| e^{-x^2/4} dx = 4
    CHECK(moment_s(iso, first, 1.0) == doctest::Approx(line).epsilon(1e-6));

    const auto l4 = Anisotropy::named("l4", 2);
    for (double s : {0.3, 1.0, 1.7}) CHECK(moment_s(l4, both, s) > 0);
    const double h0 = slice_marginal(l4, first, std::vector<double>{0.0});
    for (double xi : {0.05, 0.2, 0.7}) {
        const double hp = slice_marginal(l4, first, std::vector<double>{xi});
        const double hm = slice_marginal(l4, first, std::vector<double>{-xi});
        CHECK(hp <= h0);
        CHECK(hp == doctest::Approx(hm).epsilon(1e-12));
    }
    const int bad[2] = {0, 0};
    CHECK_THROWS_AS(moment_s(l4, bad, 1.0), DomainError);
}
