#include "anisoflow/quadrature.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "anisoflow/errors.hpp"

namespace anisoflow::quad {

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    double err = 0;
    const double v =
        boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, tol, &err);
    if (!std::isfinite(v)) throw NumericalError("quadrature produced a non-finite value");
    return v;
}

void composite_gauss(double a, double b, int panels, std::vector<double>& x, std::vector<double>& w) {
    using rule = boost::math::quadrature::gauss<double, 16>;
    const auto& ab = rule::abscissa();
    const auto& wt = rule::weights();
    x.clear();
    w.clear();
    const double width = (b - a) / panels;
    for (int k = 0; k < panels; ++k) {
        const double c = a + (k + 0.5) * width;
        const double h = 0.5 * width;
        // boost stores the non-negative half of a symmetric rule
        for (std::size_t i = 0; i < ab.size(); ++i) {
            if (ab[i] == 0.0) {
                x.push_back(c);
                w.push_back(wt[i] * h);
                continue;
            }
            x.push_back(c - h * ab[i]);
            w.push_back(wt[i] * h);
            x.push_back(c + h * ab[i]);
            w.push_back(wt[i] * h);
        }
    }
}

namespace {

SphereRule make_rule(int dim) {
    constexpr double pi = std::numbers::pi;
    SphereRule r;
    r.dim = dim;
    if (dim == 2) {
        std::vector<double> th, w;
        composite_gauss(0.0, 2.0 * pi, 16, th, w);
        for (std::size_t i = 0; i < th.size(); ++i) {
            r.points.push_back(std::cos(th[i]));
            r.points.push_back(std::sin(th[i]));
            r.weights.push_back(w[i]);
        }
        return r;
    }
    if (dim != 3) throw DomainError("sphere rule dimension must be 2 or 3");
    std::vector<double> z, wz;
    composite_gauss(-1.0, 1.0, 4, z, wz);
    constexpr int n_az = 128;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double s = std::sqrt(std::max(0.0, 1.0 - z[i] * z[i]));
        for (int j = 0; j < n_az; ++j) {
            const double ph = 2.0 * pi * (j + 0.5) / n_az;
            r.points.push_back(s * std::cos(ph));
            r.points.push_back(s * std::sin(ph));
            r.points.push_back(z[i]);
            r.weights.push_back(wz[i] * 2.0 * pi / n_az);
        }
    }
    return r;
}

}  // namespace

const SphereRule& sphere_rule(int dim) {
    static const SphereRule r2 = make_rule(2);
    static const SphereRule r3 = make_rule(3);
    if (dim == 2) return r2;
    if (dim == 3) return r3;
    throw DomainError("sphere rule dimension must be 2 or 3");
}

}  // namespace anisoflow::quad
