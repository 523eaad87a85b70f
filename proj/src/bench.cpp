#include "anisoflow/bench.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "anisoflow/errors.hpp"
#include "anisoflow/grid_io.hpp"
#include "anisoflow/quadrature.hpp"

namespace anisoflow {

namespace {

constexpr double pi = std::numbers::pi;

double parse_number(std::string_view key, std::string_view v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(std::string(v), &used);
        if (used != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("shape parameter '" + std::string(key) + "' is not a number: " + std::string(v));
    }
}

}  // namespace

ShapeSpec ShapeSpec::parse(std::string_view kind, std::string_view params) {
    ShapeSpec s;
    if (kind == "wulff")
        s.kind = Kind::Wulff;
    else if (kind == "ball")
        s.kind = Kind::Ball;
    else if (kind == "torus")
        s.kind = Kind::Torus;
    else if (kind == "file")
        s.kind = Kind::File;
    else
        throw ConfigError("unknown shape '" + std::string(kind) + "' (expected wulff, ball, torus or file)");
    std::size_t pos = 0;
    while (pos < params.size()) {
        std::size_t end = params.find(',', pos);
        if (end == std::string_view::npos) end = params.size();
        const std::string_view item = params.substr(pos, end - pos);
        pos = end + 1;
        if (item.empty()) continue;
        const std::size_t eq = item.find('=');
        if (eq == std::string_view::npos) throw ConfigError("shape parameter without '=': " + std::string(item));
        const std::string_view key = item.substr(0, eq), val = item.substr(eq + 1);
        if (key == "path") {
            s.path = std::string(val);
            continue;
        }
        const double x = parse_number(key, val);
        if (key == "R" || key == "radius")
            s.radius = x;
        else if (key == "cx")
            s.center[0] = x;
        else if (key == "cy")
            s.center[1] = x;
        else if (key == "cz")
            s.center[2] = x;
        else if (key == "major")
            s.major = x;
        else if (key == "minor")
            s.minor = x;
        else
            throw ConfigError("unknown shape parameter '" + std::string(key) + "'");
    }
    if (s.kind == Kind::File && s.path.empty()) throw ConfigError("file shape needs path=<AMCF1 file>");
    return s;
}

std::string ShapeSpec::describe() const {
    std::ostringstream o;
    switch (kind) {
    case Kind::Wulff: o << "wulff R=" << radius; break;
    case Kind::Ball: o << "ball R=" << radius; break;
    case Kind::Torus: o << "torus major=" << major << " minor=" << minor; break;
    case Kind::File: o << "file " << path.string(); break;
    }
    o << " center=(" << center[0] << "," << center[1] << "," << center[2] << ")";
    return o.str();
}

void check_shape(const ShapeSpec& s, const Anisotropy& a, const Grid& g, double margin) {
    if (s.kind == ShapeSpec::Kind::File) return;
    std::array<double, 3> extent{0, 0, 0};
    switch (s.kind) {
    case ShapeSpec::Kind::Wulff:
    case ShapeSpec::Kind::Ball:
        if (!(s.radius > 0)) throw DomainError("shape radius must be positive");
        for (int i = 0; i < g.dim; ++i) {
            if (s.kind == ShapeSpec::Kind::Ball) {
                extent[i] = s.radius;
            } else {
                // support function of {phi <= R} in direction e_i is R phi°(e_i)
                Vec e = Vec::Zero(g.dim);
                e(i) = 1;
                extent[i] = s.radius * a.value(e);
            }
        }
        break;
    case ShapeSpec::Kind::Torus:
        if (g.dim != 3) throw ConfigError("torus shapes need dim = 3");
        if (!(s.minor > 0)) throw DomainError("torus minor radius must be positive (empty interior)");
        if (!(s.major > s.minor)) throw DomainError("torus major radius must exceed the minor radius");
        extent = {s.major + s.minor, s.major + s.minor, s.minor};
        break;
    case ShapeSpec::Kind::File: break;
    }
    for (int i = 0; i < g.dim; ++i)
        if (std::abs(s.center[i]) + extent[i] > 0.5 - margin) {
            std::ostringstream o;
            o << "shape " << s.describe() << " reaches within " << margin << " of the box boundary along axis " << i;
            throw DomainError(o.str());
        }
}

std::function<double(const double*)> signed_distance(const ShapeSpec& s, const Anisotropy& a, const Grid& g) {
    const int d = g.dim;
    const auto c = s.center;
    switch (s.kind) {
    case ShapeSpec::Kind::Wulff:
        return [a, c, d, R = s.radius](const double* x) {
            double y[3];
            for (int i = 0; i < d; ++i) y[i] = x[i] - c[i];
            return a.dual(std::span<const double>(y, d)) - R;
        };
    case ShapeSpec::Kind::Ball:
        return [c, d, R = s.radius](const double* x) {
            double r2 = 0;
            for (int i = 0; i < d; ++i) r2 += (x[i] - c[i]) * (x[i] - c[i]);
            return std::sqrt(r2) - R;
        };
    case ShapeSpec::Kind::Torus:
        if (d != 3) throw ConfigError("torus shapes need dim = 3");
        return [c, R = s.major, r = s.minor](const double* x) {
            const double rho = std::hypot(x[0] - c[0], x[1] - c[1]);
            return std::hypot(rho - R, x[2] - c[2]) - r;
        };
    case ShapeSpec::Kind::File: {
        const SpectralField f = read_grid(s.path);
        if (f.grid.dim != g.dim || f.grid.P != g.P)
            throw ConfigError("shape file grid does not match the run grid");
        // nodes with a neighbour on the other side of the 1/2 level
        const auto P = static_cast<std::size_t>(g.P);
        std::vector<double> boundary;
        std::vector<std::uint8_t> inside(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) inside[i] = f.values[i] >= 0.5;
        double x[3];
        for (std::size_t i = 0; i < g.size(); ++i) {
            std::size_t stride = 1;
            bool edge = false;
            for (int ax = 0; ax < d && !edge; ++ax) {
                const std::size_t k = (i / stride) % P;
                const std::size_t up = k + 1 < P ? i + stride : i - k * stride;
                edge = inside[up] != inside[i];
                stride *= P;
            }
            if (!edge) continue;
            g.node(i, x);
            for (int ax = 0; ax < d; ++ax) boundary.push_back(x[ax]);
        }
        const double half = 0.5 * g.spacing();
        return [boundary = std::move(boundary), inside = std::move(inside), g, d, half](const double* y) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t b = 0; b < boundary.size(); b += d) {
                double r2 = 0;
                for (int ax = 0; ax < d; ++ax) r2 += (y[ax] - boundary[b + ax]) * (y[ax] - boundary[b + ax]);
                best = std::min(best, r2);
            }
            // locate the node of y to read the side
            std::size_t idx = 0, stride = 1;
            for (int ax = 0; ax < d; ++ax) {
                const auto k = static_cast<std::size_t>(std::lround((y[ax] + 0.5 * g.length) / g.spacing())) %
                               static_cast<std::size_t>(g.P);
                idx += k * stride;
                stride *= static_cast<std::size_t>(g.P);
            }
            // boundary nodes sit half a cell from the interface on average
            const double dist = std::sqrt(best) + half;
            return inside[idx] ? -dist : dist;
        };
    }
    }
    throw ConfigError("unsupported shape");
}

IndicatorField wulff_indicator(const Anisotropy& a, double R, std::span<const double> center, const Grid& g) {
    if (!(R > 0)) throw DomainError("Wulff radius must be positive");
    ShapeSpec s;
    s.kind = ShapeSpec::Kind::Wulff;
    s.radius = R;
    for (int i = 0; i < g.dim && i < static_cast<int>(center.size()); ++i) s.center[i] = center[i];
    check_shape(s, a, g, 0.0);
    return IndicatorField::from_predicate(g, [&](const double* x) {
        double y[3];
        for (int i = 0; i < g.dim; ++i) y[i] = x[i] - s.center[i];
        return a.dual(std::span<const double>(y, g.dim)) <= R;
    });
}

double measure(const IndicatorField& e) { return static_cast<double>(e.count()) * e.grid.cell_volume(); }

double l1_error(const IndicatorField& a, const IndicatorField& b) {
    if (!(a.grid == b.grid)) throw DomainError("l1_error: grids differ");
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.mask.size(); ++i) n += a.mask[i] != b.mask[i];
    return static_cast<double>(n) * a.grid.cell_volume();
}

double wulff_unit_measure(const Anisotropy& a) {
    const int d = a.dim();
    const auto& rule = quad::sphere_rule(d);
    double sum = 0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double rho = 1.0 / a.dual(std::span<const double>(rule.points.data() + d * i, d));
        sum += rule.weights[i] * std::pow(rho, d);
    }
    return sum / d;
}

double fitted_radius_from_measure(double m, const Anisotropy& a) {
    if (!(m > 0)) throw DomainError("fitted radius of an empty set");
    return std::pow(m / wulff_unit_measure(a), 1.0 / a.dim());
}

double fitted_radius(const IndicatorField& e, const Anisotropy& a) { return fitted_radius_from_measure(measure(e), a); }

// ---------------------------------------------------------------------------

namespace {

struct Segment {
    long from, to;  // edge ids
    std::array<double, 2> p;  // start point
};

}  // namespace

std::vector<Polyline> contour(const SpectralField& u, double level) {
    const Grid& g = u.grid;
    if (g.dim != 2) throw DomainError("contour extraction is 2D only; export the raw field instead");
    const int P = g.P;
    const auto val = [&](int i, int j) { return u.values[static_cast<std::size_t>(i) + static_cast<std::size_t>(P) * j]; };
    const auto crossing = [&](int i0, int j0, int i1, int j1) -> std::array<double, 2> {
        const double a = val(i0, j0), b = val(i1, j1);
        const double t = (level - a) / (b - a);
        return {g.coordinate(i0) + t * (i1 - i0) * g.spacing(), g.coordinate(j0) + t * (j1 - j0) * g.spacing()};
    };
    // edge ids: bottom edge of node (i,j) -> 2 (j P + i), left edge -> 2 (j P + i) + 1
    const auto hedge = [&](int i, int j) { return 2L * (static_cast<long>(j) * P + i); };
    const auto vedge = [&](int i, int j) { return 2L * (static_cast<long>(j) * P + i) + 1; };

    std::vector<Segment> segs;
    for (int j = 0; j + 1 < P; ++j) {
        for (int i = 0; i + 1 < P; ++i) {
            const int ci[4] = {i, i + 1, i + 1, i};
            const int cj[4] = {j, j, j + 1, j + 1};
            bool in[4];
            int n_in = 0;
            for (int k = 0; k < 4; ++k) n_in += in[k] = val(ci[k], cj[k]) >= level;
            if (n_in == 0 || n_in == 4) continue;
            // counter-clockwise edges: bottom, right, top, left
            const long eid[4] = {hedge(i, j), vedge(i + 1, j), hedge(i, j + 1), vedge(i, j)};
            std::array<double, 2> ep[4];
            int outs[2], ins[2], n_out = 0, n_ins = 0;
            for (int k = 0; k < 4; ++k) {
                const int k1 = (k + 1) % 4;
                if (in[k] == in[k1]) continue;
                ep[k] = crossing(ci[k], cj[k], ci[k1], cj[k1]);
                if (in[k])
                    outs[n_out++] = k;
                else
                    ins[n_ins++] = k;
            }
            if (n_out == 1) {
                segs.push_back({eid[outs[0]], eid[ins[0]], ep[outs[0]]});
                continue;
            }
            // saddle: the cell centre decides whether the inside corners connect
            const double centre = 0.25 * (val(i, j) + val(i + 1, j) + val(i + 1, j + 1) + val(i, j + 1));
            for (int m = 0; m < 2; ++m) {
                const int o = outs[m];
                // next (connected) or previous (separate) in-crossing along the cell boundary
                const int nxt = (o + 1) % 4, prv = (o + 3) % 4;
                const int target = centre >= level ? nxt : prv;
                segs.push_back({eid[o], eid[target], ep[o]});
            }
        }
    }

    std::unordered_map<long, std::size_t> by_from;
    for (std::size_t s = 0; s < segs.size(); ++s) by_from[segs[s].from] = s;
    std::vector<std::uint8_t> used(segs.size(), 0);
    std::vector<Polyline> out;
    // open chains start at segments whose start edge is nobody's end
    std::unordered_map<long, int> ends;
    for (const auto& s : segs) ends[s.to]++;
    const auto follow = [&](std::size_t start) {
        Polyline pl;
        std::size_t s = start;
        while (true) {
            used[s] = 1;
            pl.points.push_back(segs[s].p);
            const auto it = by_from.find(segs[s].to);
            if (it == by_from.end()) {
                // chain leaves the lattice: add the end point
                const long e = segs[s].to;
                const long node = e / 2;
                const int i = static_cast<int>(node % P), j = static_cast<int>(node / P);
                pl.points.push_back(e % 2 == 0 ? crossing(i, j, i + 1, j) : crossing(i, j, i, j + 1));
                break;
            }
            if (it->second == start) {
                pl.closed = true;
                break;
            }
            s = it->second;
            if (used[s]) break;
        }
        out.push_back(std::move(pl));
    };
    for (std::size_t s = 0; s < segs.size(); ++s)
        if (!used[s] && !ends.count(segs[s].from)) follow(s);
    for (std::size_t s = 0; s < segs.size(); ++s)
        if (!used[s]) follow(s);
    return out;
}

double polygon_area(const Polyline& p) {
    double a = 0;
    const std::size_t n = p.points.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& u = p.points[i];
        const auto& v = p.points[(i + 1) % n];
        a += u[0] * v[1] - v[0] * u[1];
    }
    return 0.5 * a;
}

double contour_area(const SpectralField& u, double level) {
    double a = 0;
    for (const auto& pl : contour(u, level))
        if (pl.closed) a += polygon_area(pl);
    return a;
}

double least_squares_slope(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw DomainError("least squares needs at least two points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

// ---------------------------------------------------------------------------

ShrinkingReport run_shrinking_wulff(const Anisotropy& a, const ShrinkingOptions& opt) {
    if (a.dim() != 2) throw ConfigError("the shrinking Wulff benchmark is 2D");
    const Grid g(2, opt.P);
    ShrinkingReport rep;
    rep.anisotropy = a.name();
    rep.R0 = opt.R0;
    rep.P = opt.P;
    rep.eps = opt.eps > 0 ? opt.eps : 1.0 / opt.P;
    rep.dt = opt.dt > 0 ? opt.dt : 1.0 / (double(opt.P) * opt.P);
    rep.window_lo = opt.window_lo;
    rep.window_hi = opt.window_hi;
    rep.expected_extinction = 0.5 * opt.R0 * opt.R0;

    ShapeSpec shape;
    shape.radius = opt.R0;
    check_shape(shape, a, g, 4 * rep.eps);
    SpectralField u0 = initialize(g, signed_distance(shape, a, g), rep.eps);
    const double unit = wulff_unit_measure(a);
    const auto sample = [&](double t, const SpectralField& u) {
        const double area = contour_area(u);
        const double r2 = std::max(area, 0.0) / unit;  // area = |W_1| R^2
        const double exact = opt.R0 * opt.R0 - 2 * t;
        rep.rows.push_back({t, r2, exact, exact > 0 ? std::abs(r2 - exact) / exact : INFINITY});
    };
    sample(0, u0);

    SimulationOptions so;
    so.dt = rep.dt;
    so.eps = rep.eps;
    so.T = 1.5 * rep.expected_extinction;
    so.keep_snapshots = false;
    so.observer = [&](const StepMetrics& m, const SpectralField& u) {
        if (m.step % opt.sample_every == 0 && m.max >= 0.5) sample(m.time, u);
        return true;
    };
    const SimulationResult res = simulate(a, std::move(u0), so);
    rep.extinct = res.extinct;
    rep.extinction_time = res.extinction_time;
    rep.mass_drift = 0;

    const double run = res.extinct ? res.extinction_time : res.time;
    std::vector<double> ts, rs;
    for (const auto& row : rep.rows) {
        if (row.time < opt.window_lo * run || row.time > opt.window_hi * run) continue;
        rep.max_rel_error_window = std::max(rep.max_rel_error_window, row.rel_error);
        ts.push_back(row.time);
        rs.push_back(row.radius_sq);
    }
    if (ts.size() >= 2) rep.slope = least_squares_slope(ts, rs);
    return rep;
}

ConvergenceReport run_wulff_convergence(const Anisotropy& a, const ConvergenceOptions& opt) {
    if (a.dim() != 2) throw ConfigError("the convergence benchmark is 2D");
    const Grid g(2, opt.P);
    ConvergenceReport rep;
    rep.anisotropy = a.name();
    rep.R0 = opt.R0;
    rep.P = opt.P;
    const double origin[2] = {0, 0};
    const IndicatorField exact = wulff_indicator(a, opt.R0, origin, g);
    // disc with the area of Wulff(R0)
    ShapeSpec disc;
    disc.kind = ShapeSpec::Kind::Ball;
    disc.radius = opt.R0 * std::sqrt(wulff_unit_measure(a) / pi);

    for (double eps : opt.eps_list) {
        check_shape(disc, a, g, 4 * eps);
        ConvergenceRow row;
        row.eps = eps;
        row.dt = opt.dt_factor * eps * eps;
        SpectralField u0 = initialize(g, signed_distance(disc, a, g), eps);
        const double m0 = u0.integral();
        std::vector<double> prev = u0.values;
        int calm = 0;
        SimulationOptions so;
        so.dt = row.dt;
        so.eps = eps;
        so.T = opt.max_time;
        so.conserve = true;
        so.keep_snapshots = false;
        so.observer = [&](const StepMetrics&, const SpectralField& u) {
            double change = 0;
            for (std::size_t i = 0; i < prev.size(); ++i) change += std::abs(u.values[i] - prev[i]);
            prev = u.values;
            const double rate = change * g.cell_volume() / row.dt;
            calm = rate < opt.steady_rate ? calm + 1 : 0;
            return calm < opt.steady_window;
        };
        const SimulationResult res = simulate(a, std::move(u0), so);
        row.steady = res.stopped_by_observer;
        row.steps = res.steps;
        row.final_time = res.time;
        row.mass_drift = std::abs(res.final_field.integral() - m0) / m0;
        row.l1_error = l1_error(IndicatorField::threshold(res.final_field), exact);
        rep.rows.push_back(row);
    }
    std::vector<double> le, lx;
    rep.monotone = true;
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        lx.push_back(std::log(rep.rows[i].eps));
        le.push_back(std::log(std::max(rep.rows[i].l1_error, 1e-300)));
        if (i > 0 && (rep.rows[i].eps < rep.rows[i - 1].eps) != (rep.rows[i].l1_error < rep.rows[i - 1].l1_error))
            rep.monotone = false;
    }
    if (rep.rows.size() >= 2) rep.slope = least_squares_slope(lx, le);
    return rep;
}

TorusReport run_torus_3d(const Anisotropy& a, const TorusOptions& opt) {
    if (a.dim() != 3) throw ConfigError("the torus benchmark is 3D");
    const Grid g(3, opt.P);
    const double eps = opt.eps > 0 ? opt.eps : 1.0 / opt.P;
    const double dt = opt.dt > 0 ? opt.dt : 1.0 / (double(opt.P) * opt.P);
    ShapeSpec torus;
    torus.kind = ShapeSpec::Kind::Torus;
    torus.major = opt.major;
    torus.minor = opt.minor;
    check_shape(torus, a, g, 4 * eps);

    TorusReport rep;
    rep.anisotropy = a.name();
    SpectralField u0 = initialize(g, signed_distance(torus, a, g), eps);
    if (!opt.output_dir.empty()) std::filesystem::create_directories(opt.output_dir);

    const auto write = [&](long step, const SpectralField& u) {
        if (opt.output_dir.empty()) return;
        char name[64];
        std::snprintf(name, sizeof name, "torus_%06ld.amcf", step);
        const auto path = opt.output_dir / name;
        write_grid(path, u);
        rep.snapshot_files.push_back(path);
    };
    write(0, u0);

    SimulationOptions so;
    so.dt = dt;
    so.eps = eps;
    so.T = opt.T > 0 ? opt.T : opt.minor * opt.minor;
    so.snapshot_every = opt.snapshot_every;
    so.keep_snapshots = opt.output_dir.empty();
    so.observer = [&](const StepMetrics& m, const SpectralField& u) {
        if (opt.snapshot_every > 0 && m.step % opt.snapshot_every == 0) write(m.step, u);
        return true;
    };
    SimulationResult res = simulate(a, std::move(u0), so);
    if (opt.snapshot_every <= 0 || res.steps % opt.snapshot_every != 0) write(res.steps, res.final_field);
    rep.metrics = std::move(res.metrics);
    rep.snapshots = std::move(res.snapshots);
    rep.extinct = res.extinct;
    rep.extinction_time = res.extinction_time;
    rep.initial_volume = rep.metrics.front().measure;
    rep.volume_strictly_decreasing = rep.metrics.size() >= 2;
    for (std::size_t i = 1; i < rep.metrics.size(); ++i) {
        if (!std::isfinite(rep.metrics[i].mass)) rep.finite = false;
        // once the set is gone the volume stays at zero
        if (rep.metrics[i - 1].measure == 0) break;
        if (!(rep.metrics[i].measure < rep.metrics[i - 1].measure)) rep.volume_strictly_decreasing = false;
    }
    return rep;
}

}  // namespace anisoflow
