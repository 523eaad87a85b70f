#pragma once

#include <functional>
#include <vector>

namespace anisoflow::quad {

/// Adaptive Gauss-Kronrod on [a, b]; b may be +infinity.
double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-10);

/// Node/weight pairs for integrating over S^{d-1}.
struct SphereRule {
    int dim = 2;
    std::vector<double> points;  // dim * n, unit vectors
    std::vector<double> weights;
    std::size_t size() const noexcept { return weights.size(); }
};

/// 2D: composite Gauss-Legendre in the angle (16 panels x 16 nodes).
/// 3D: composite Gauss-Legendre in cos(polar) (64 nodes) x trapezoid in
/// azimuth (128 nodes), 8192 nodes in total.
const SphereRule& sphere_rule(int dim);

/// Gauss-Legendre nodes/weights on [a, b] from `panels` panels of 16 nodes.
void composite_gauss(double a, double b, int panels, std::vector<double>& x, std::vector<double>& w);

}  // namespace anisoflow::quad
