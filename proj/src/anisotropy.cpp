#include "anisoflow/anisotropy.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/tools/minima.hpp>

#include "anisoflow/errors.hpp"

namespace anisoflow {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMesh2d = 1 << 12;
constexpr int kMesh3d = 1 << 14;
constexpr double kBoundMargin = 0.01;
// Below this exponent a power sum is treated as near-crystalline: its
// gradient jumps across the hyperplanes n_i . xi = 0.
constexpr double kNearCrystalline = 1.1;

double sgn(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

std::vector<double> fibonacci_sphere(int n) {
    std::vector<double> pts(3 * static_cast<std::size_t>(n));
    const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
        const double z = 1.0 - (2.0 * i + 1.0) / n;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double th = golden_angle * i;
        pts[3 * i] = r * std::cos(th);
        pts[3 * i + 1] = r * std::sin(th);
        pts[3 * i + 2] = z;
    }
    return pts;
}

std::vector<double> parse_doubles(std::string_view s, char sep) {
    std::vector<double> out;
    std::string item;
    std::istringstream in{std::string(s)};
    while (std::getline(in, item, sep)) {
        if (item.empty()) continue;
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("invalid number '" + item + "' in anisotropy specification");
        }
    }
    return out;
}

}  // namespace

Anisotropy Anisotropy::isotropic(int dim) {
    Anisotropy a;
    a.kind_ = Kind::Isotropic;
    a.dim_ = dim;
    a.name_ = "iso";
    a.p_ = 2.0;
    a.finalize();
    return a;
}

Anisotropy Anisotropy::lp(int dim, double p) {
    Anisotropy a = power_sum(Mat::Identity(dim, dim), p, "lp:" + std::to_string(p));
    return a;
}

Anisotropy Anisotropy::power_sum(Mat directions, double p, std::string name) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("power-sum exponent must be >= 1");
    if (directions.cols() != 2 && directions.cols() != 3)
        throw DomainError("power-sum directions must live in R^2 or R^3");
    if (directions.rows() < directions.cols())
        throw DomainError("power-sum needs at least d directions spanning R^d");
    if (directions.rows() > 16) throw DomainError("power-sum supports at most 16 directions");
    Eigen::FullPivLU<Mat> lu(directions);
    if (lu.rank() < directions.cols()) throw DomainError("power-sum directions do not span R^d");

    Anisotropy a;
    a.kind_ = Kind::PowerSum;
    a.dim_ = static_cast<int>(directions.cols());
    a.p_ = p;
    a.axis_aligned_ = directions.rows() == directions.cols() &&
                      directions.isApprox(Mat::Identity(a.dim_, a.dim_), 0.0);
    a.directions_ = std::move(directions);
    a.name_ = name.empty() ? "powers" : std::move(name);
    a.finalize();
    return a;
}

Anisotropy Anisotropy::cylinder(int dim) {
    Anisotropy a;
    a.kind_ = Kind::Cylinder;
    a.dim_ = dim;
    a.name_ = "cyl";
    a.p_ = 1.0;
    a.finalize();
    return a;
}

Anisotropy Anisotropy::table(std::vector<double> samples) {
    const std::size_t n = samples.size();
    if (n < 4 || n % 2 != 0) throw DomainError("table anisotropy needs an even number (>= 4) of samples");
    for (std::size_t k = 0; k < n; ++k) {
        if (!(samples[k] > 0) || !std::isfinite(samples[k]))
            throw DomainError("table anisotropy samples must be positive and finite");
        if (std::abs(samples[k] - samples[(k + n / 2) % n]) > 1e-12 * samples[k])
            throw DomainError("table anisotropy samples must be symmetric under xi -> -xi");
    }
    Anisotropy a;
    a.kind_ = Kind::Table;
    a.dim_ = 2;
    a.name_ = "table";
    a.p_ = 2.0;
    const std::size_t half = n / 2;
    a.cos_coef_.assign(half + 1, 0.0);
    a.sin_coef_.assign(half + 1, 0.0);
    for (std::size_t m = 0; m <= half; ++m) {
        double c = 0, s = 0;
        for (std::size_t k = 0; k < n; ++k) {
            const double th = 2.0 * kPi * static_cast<double>(k * m % n) / static_cast<double>(n);
            c += samples[k] * std::cos(th);
            s += samples[k] * std::sin(th);
        }
        const double w = (m == 0 || m == half) ? 1.0 / n : 2.0 / n;
        a.cos_coef_[m] = w * c;
        a.sin_coef_[m] = (m == 0 || m == half) ? 0.0 : w * s;
    }
    // Convexity of a 1-homogeneous planar density: f + f'' >= 0.
    for (int k = 0; k < 4096; ++k) {
        const double th = 2.0 * kPi * k / 4096.0;
        double df = 0, d2f = 0;
        const double f = a.table_f(th, &df, &d2f);
        if (f <= 0) throw DomainError("table anisotropy interpolant is not positive");
        if (f + d2f < -1e-12) throw DomainError("table anisotropy interpolant is not convex");
    }
    a.finalize();
    return a;
}

Anisotropy Anisotropy::named(std::string_view id, int dim) {
    if (dim != 2 && dim != 3) throw DomainError("dimension must be 2 or 3");
    if (id == "iso") return isotropic(dim);
    if (id == "l4") {
        auto a = power_sum(Mat::Identity(dim, dim), 4.0, "l4");
        return a;
    }
    if (id == "l4_3") return power_sum(Mat::Identity(dim, dim), 4.0 / 3.0, "l4_3");
    if (id == "l1") return power_sum(Mat::Identity(dim, dim), 1.0, "l1");
    if (id == "cyl") return cylinder(dim);
    if (id == "hex") {
        if (dim != 2) throw DomainError("hex anisotropy is planar (dim = 2)");
        Mat n(3, 2);
        const double r3 = std::sqrt(3.0) / 2.0;
        n << 1.0, 0.0, 0.5, r3, 0.5, -r3;
        return power_sum(std::move(n), 1.001, "hex");
    }
    throw ConfigError("unknown anisotropy '" + std::string(id) + "'");
}

Anisotropy Anisotropy::parse(std::string_view spec, int dim) {
    if (spec.starts_with("lp:")) {
        const auto v = parse_doubles(spec.substr(3), ',');
        if (v.size() != 1) throw ConfigError("lp anisotropy takes one exponent");
        auto a = lp(dim, v[0]);
        return a;
    }
    if (spec.starts_with("powers:")) {
        const auto rest = spec.substr(7);
        const auto colon = rest.find(':');
        if (colon == std::string_view::npos) throw ConfigError("powers anisotropy: expected powers:<p>:<dirs>");
        const auto pv = parse_doubles(rest.substr(0, colon), ',');
        if (pv.size() != 1) throw ConfigError("powers anisotropy: bad exponent");
        std::vector<std::vector<double>> rows;
        std::string item;
        std::istringstream in{std::string(rest.substr(colon + 1))};
        while (std::getline(in, item, ';')) {
            if (item.empty()) continue;
            rows.push_back(parse_doubles(item, ','));
            if (static_cast<int>(rows.back().size()) != dim)
                throw ConfigError("powers anisotropy: direction of wrong dimension");
        }
        Mat n(static_cast<Eigen::Index>(rows.size()), dim);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            Vec r = Eigen::Map<Vec>(rows[i].data(), dim);
            if (r.norm() == 0) throw ConfigError("powers anisotropy: zero direction");
            n.row(static_cast<Eigen::Index>(i)) = r.normalized().transpose();
        }
        return power_sum(std::move(n), pv[0], std::string(spec));
    }
    if (spec.starts_with("table:")) {
        if (dim != 2) throw ConfigError("table anisotropy is planar (dim = 2)");
        auto a = table(parse_doubles(spec.substr(6), ','));
        a.name_ = std::string(spec);
        return a;
    }
    return named(spec, dim);
}

void Anisotropy::finalize() {
    const int n = dim_ == 2 ? kMesh2d : kMesh3d;
    if (dim_ == 2) {
        mesh_.resize(2 * static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) {
            const double th = 2.0 * kPi * k / n;
            mesh_[2 * k] = std::cos(th);
            mesh_[2 * k + 1] = std::sin(th);
        }
    } else {
        mesh_ = fibonacci_sphere(n);
    }
    mesh_value_.resize(static_cast<std::size_t>(n));
    double lo = std::numeric_limits<double>::infinity(), hi = 0;
    for (int k = 0; k < n; ++k) {
        const double v = (*this)(std::span<const double>(&mesh_[static_cast<std::size_t>(dim_) * k], dim_));
        mesh_value_[k] = v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    // the mesh misses the axes and diagonals, where axis-aligned densities peak
    std::vector<double> probe(static_cast<std::size_t>(dim_));
    for (int mask = 1; mask < (1 << dim_); ++mask) {
        const double s = 1.0 / std::sqrt(static_cast<double>(std::popcount(static_cast<unsigned>(mask))));
        for (int i = 0; i < dim_; ++i) probe[i] = (mask >> i & 1) ? s : 0.0;
        const double v = (*this)(std::span<const double>(probe));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    lambda_ = (1.0 - kBoundMargin) * lo;
    Lambda_ = (1.0 + kBoundMargin) * hi;
}

void Anisotropy::check_finite(std::span<const double> v) const {
    if (static_cast<int>(v.size()) != dim_) throw DomainError("vector dimension does not match anisotropy");
    for (double c : v)
        if (!std::isfinite(c)) throw DomainError("non-finite input to anisotropy");
}

double Anisotropy::table_f(double theta, double* df, double* d2f) const {
    double f = 0, f1 = 0, f2 = 0;
    for (std::size_t m = 0; m < cos_coef_.size(); ++m) {
        const double dm = static_cast<double>(m);
        const double c = std::cos(dm * theta), s = std::sin(dm * theta);
        f += cos_coef_[m] * c + sin_coef_[m] * s;
        f1 += dm * (-cos_coef_[m] * s + sin_coef_[m] * c);
        f2 += -dm * dm * (cos_coef_[m] * c + sin_coef_[m] * s);
    }
    if (df) *df = f1;
    if (d2f) *d2f = f2;
    return f;
}

double Anisotropy::operator()(std::span<const double> xi) const {
    check_finite(xi);
    switch (kind_) {
        case Kind::Isotropic: {
            double s = 0;
            for (double c : xi) s += c * c;
            return std::sqrt(s);
        }
        case Kind::Cylinder: {
            double s = 0;
            for (int i = 0; i + 1 < dim_; ++i) s += xi[i] * xi[i];
            return std::sqrt(s) + std::abs(xi[dim_ - 1]);
        }
        case Kind::Table: {
            const double r = std::hypot(xi[0], xi[1]);
            if (r == 0) return 0.0;
            return r * table_f(std::atan2(xi[1], xi[0]));
        }
        case Kind::PowerSum: {
            const auto m = directions_.rows();
            double buf[16];
            double big = 0;
            for (Eigen::Index i = 0; i < m; ++i) {
                double y = 0;
                for (int j = 0; j < dim_; ++j) y += directions_(i, j) * xi[j];
                buf[i] = std::abs(y);
                big = std::max(big, buf[i]);
            }
            if (big == 0) return 0.0;
            if (p_ == 1.0) {
                double s = 0;
                for (Eigen::Index i = 0; i < m; ++i) s += buf[i];
                return s;
            }
            double s = 0;
            for (Eigen::Index i = 0; i < m; ++i) s += std::pow(buf[i] / big, p_);
            return big * std::pow(s, 1.0 / p_);
        }
    }
    return 0.0;
}

bool Anisotropy::gradient_defined(const Vec& xi) const {
    check_finite(std::span<const double>(xi.data(), xi.size()));
    const double n = xi.norm();
    if (n == 0) return false;
    switch (kind_) {
        case Kind::Isotropic:
        case Kind::Table:
            return true;
        case Kind::Cylinder:
            return is_generic(xi);
        case Kind::PowerSum: {
            if (p_ >= kNearCrystalline) return true;
            const Vec y = directions_ * xi;
            return y.cwiseAbs().minCoeff() >= kAxisTolerance * y.cwiseAbs().maxCoeff();
        }
    }
    return false;
}

bool Anisotropy::is_generic(const Vec& xi) const {
    check_finite(std::span<const double>(xi.data(), xi.size()));
    const double n = xi.norm();
    if (n == 0) return false;
    switch (kind_) {
        case Kind::Isotropic:
        case Kind::Table:
            return true;
        case Kind::Cylinder: {
            const double planar = xi.head(dim_ - 1).norm();
            return planar >= kAxisTolerance * n && std::abs(xi[dim_ - 1]) >= kAxisTolerance * n;
        }
        case Kind::PowerSum: {
            if (p_ >= 2.0) return true;
            const Vec y = directions_ * xi;
            return y.cwiseAbs().minCoeff() >= kAxisTolerance * y.cwiseAbs().maxCoeff();
        }
    }
    return false;
}

Vec Anisotropy::gradient(const Vec& xi) const {
    if (!gradient_defined(xi))
        throw DomainError("gradient of '" + name_ + "' undefined at zero or non-generic direction");
    switch (kind_) {
        case Kind::Isotropic:
            return xi / xi.norm();
        case Kind::Cylinder: {
            Vec g = Vec::Zero(dim_);
            g.head(dim_ - 1) = xi.head(dim_ - 1) / xi.head(dim_ - 1).norm();
            g[dim_ - 1] = sgn(xi[dim_ - 1]);
            return g;
        }
        case Kind::Table: {
            const double r = xi.norm();
            const double th = std::atan2(xi[1], xi[0]);
            double df = 0;
            const double f = table_f(th, &df);
            Vec er(2), et(2);
            er << std::cos(th), std::sin(th);
            et << -std::sin(th), std::cos(th);
            (void)r;
            return f * er + df * et;
        }
        case Kind::PowerSum: {
            const Vec y = directions_ * xi;
            const double g = value(xi);
            Vec w(y.size());
            for (Eigen::Index i = 0; i < y.size(); ++i)
                w[i] = sgn(y[i]) * (p_ == 1.0 ? 1.0 : std::pow(std::abs(y[i]) / g, p_ - 1.0));
            return directions_.transpose() * w;
        }
    }
    return Vec::Zero(dim_);
}

Mat Anisotropy::hessian(const Vec& xi) const {
    if (!is_generic(xi))
        throw DomainError("Hessian of '" + name_ + "' undefined at zero or non-generic direction");
    const double r = xi.norm();
    switch (kind_) {
        case Kind::Isotropic: {
            const Vec e = xi / r;
            return (Mat::Identity(dim_, dim_) - e * e.transpose()) / r;
        }
        case Kind::Cylinder: {
            Mat h = Mat::Zero(dim_, dim_);
            const Vec planar = xi.head(dim_ - 1);
            const double pr = planar.norm();
            const Vec e = planar / pr;
            h.topLeftCorner(dim_ - 1, dim_ - 1) =
                (Mat::Identity(dim_ - 1, dim_ - 1) - e * e.transpose()) / pr;
            return h;
        }
        case Kind::Table: {
            const double th = std::atan2(xi[1], xi[0]);
            double df = 0, d2f = 0;
            const double f = table_f(th, &df, &d2f);
            Vec et(2);
            et << -std::sin(th), std::cos(th);
            return (f + d2f) / r * et * et.transpose();
        }
        case Kind::PowerSum: {
            const Vec y = directions_ * xi;
            const double g = value(xi);
            const auto m = y.size();
            Vec w(m);
            Mat inner = Mat::Zero(m, m);
            for (Eigen::Index i = 0; i < m; ++i) {
                const double a = std::abs(y[i]) / g;
                w[i] = sgn(y[i]) * (p_ == 1.0 ? 1.0 : std::pow(a, p_ - 1.0));
                inner(i, i) = p_ == 2.0 ? 1.0 : std::pow(a, p_ - 2.0);
            }
            inner -= w * w.transpose();
            inner *= (p_ - 1.0) / g;
            Mat h = directions_.transpose() * inner * directions_;
            return 0.5 * (h + h.transpose());
        }
    }
    return Mat::Zero(dim_, dim_);
}

bool Anisotropy::has_analytic_dual() const noexcept {
    return kind_ == Kind::Isotropic || kind_ == Kind::Cylinder ||
           (kind_ == Kind::PowerSum && axis_aligned_);
}

double Anisotropy::dual(std::span<const double> x) const {
    check_finite(x);
    switch (kind_) {
        case Kind::Isotropic: {
            double s = 0;
            for (double c : x) s += c * c;
            return std::sqrt(s);
        }
        case Kind::Cylinder: {
            double s = 0;
            for (int i = 0; i + 1 < dim_; ++i) s += x[i] * x[i];
            return std::max(std::sqrt(s), std::abs(x[dim_ - 1]));
        }
        case Kind::PowerSum:
            if (axis_aligned_) {
                double big = 0;
                for (double c : x) big = std::max(big, std::abs(c));
                if (big == 0 || p_ == 1.0) return big;
                const double q = p_ / (p_ - 1.0);
                double s = 0;
                for (double c : x) s += std::pow(std::abs(c) / big, q);
                return big * std::pow(s, 1.0 / q);
            }
            return numeric_dual(x);
        case Kind::Table:
            return numeric_dual(x);
    }
    return 0.0;
}

double Anisotropy::numeric_dual(std::span<const double> x) const {
    bool zero = true;
    for (double c : x) zero = zero && c == 0;
    if (zero) return 0.0;
    return dim_ == 2 ? numeric_dual_2d(x[0], x[1]) : numeric_dual_3d(x);
}

// sup over the unit circle of x.e(theta) / phi°(e(theta)): mesh search, three
// rounds of local mesh refinement, then Brent/golden-section polishing.
double Anisotropy::numeric_dual_2d(double x0, double x1) const {
    const int n = static_cast<int>(mesh_value_.size());
    int best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) {
        const double v = (x0 * mesh_[2 * k] + x1 * mesh_[2 * k + 1]) / mesh_value_[k];
        if (v > best_val) {
            best_val = v;
            best = k;
        }
    }
    auto ratio = [&](double th) {
        const double e[2] = {std::cos(th), std::sin(th)};
        return (x0 * e[0] + x1 * e[1]) / (*this)(std::span<const double>(e, 2));
    };
    double center = 2.0 * kPi * best / n;
    double half = 2.0 * kPi / n;
    constexpr int kLocal = 32;
    for (int round = 0; round < 3; ++round) {
        double c_best = center;
        double v_best = ratio(center);
        for (int j = -kLocal; j <= kLocal; ++j) {
            const double th = center + half * j / kLocal;
            const double v = ratio(th);
            if (v > v_best) {
                v_best = v;
                c_best = th;
            }
        }
        center = c_best;
        half /= kLocal;
        best_val = std::max(best_val, v_best);
    }
    const auto res = boost::math::tools::brent_find_minima(
        [&](double th) { return -ratio(th); }, center - 2 * half, center + 2 * half, 40);
    return std::max(best_val, -res.second);
}

double Anisotropy::numeric_dual_3d(std::span<const double> x) const {
    const int n = static_cast<int>(mesh_value_.size());
    int best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) {
        const double v = (x[0] * mesh_[3 * k] + x[1] * mesh_[3 * k + 1] + x[2] * mesh_[3 * k + 2]) /
                         mesh_value_[k];
        if (v > best_val) {
            best_val = v;
            best = k;
        }
    }
    Eigen::Vector3d e0(mesh_[3 * best], mesh_[3 * best + 1], mesh_[3 * best + 2]);
    Eigen::Vector3d t1 = e0.unitOrthogonal();
    Eigen::Vector3d t2 = e0.cross(t1);
    const Eigen::Vector3d xv(x[0], x[1], x[2]);
    auto ratio = [&](double u, double v) {
        Eigen::Vector3d e = (e0 + u * t1 + v * t2).normalized();
        return xv.dot(e) / (*this)(std::span<const double>(e.data(), 3));
    };
    // Mesh spacing of a Fibonacci lattice ~ sqrt(4 pi / n).
    double half = 2.0 * std::sqrt(4.0 * kPi / n);
    double u = 0, v = 0;
    for (int round = 0; round < 3; ++round) {
        for (int sweep = 0; sweep < 4; ++sweep) {
            auto ru = boost::math::tools::brent_find_minima(
                [&](double s) { return -ratio(s, v); }, u - half, u + half, 40);
            u = ru.first;
            auto rv = boost::math::tools::brent_find_minima(
                [&](double s) { return -ratio(u, s); }, v - half, v + half, 40);
            v = rv.first;
        }
        half *= 0.1;
    }
    return std::max(best_val, ratio(u, v));
}

}  // namespace anisoflow
