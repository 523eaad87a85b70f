#include "anisoflow/spectral.hpp"

#include <algorithm>
#include <numeric>

#include <fftw3.h>

#include "anisoflow/errors.hpp"

namespace anisoflow {

namespace {

bool threads_initialized = false;

// Node 0 sits at -L/2, so exp(2 pi i p.x / L) = (-1)^{sum p} exp(2 pi i p.k / P).
double origin_sign(const Grid& g, const int* p) {
    int s = 0;
    for (int i = 0; i < g.dim; ++i) s += p[i];
    return (s & 1) ? -1.0 : 1.0;
}

}  // namespace

Grid::Grid(int d, int modes, double len) : dim(d), P(modes), length(len) {
    if (dim != 2 && dim != 3) throw DomainError("grid dimension must be 2 or 3");
    if (P < 8 || (P & (P - 1)) != 0) throw DomainError("modes per axis must be a power of two >= 8");
    if (!(length > 0)) throw DomainError("grid box length must be positive");
}

std::size_t Grid::size() const noexcept {
    std::size_t n = 1;
    for (int i = 0; i < dim; ++i) n *= static_cast<std::size_t>(P);
    return n;
}

std::size_t Grid::spectrum_size() const noexcept { return size() / static_cast<std::size_t>(P) * half_modes(); }

double Grid::cell_volume() const noexcept {
    double v = 1;
    for (int i = 0; i < dim; ++i) v *= spacing();
    return v;
}

void Grid::node(std::size_t index, double* x) const noexcept {
    for (int i = 0; i < dim; ++i) {
        x[i] = coordinate(static_cast<int>(index % static_cast<std::size_t>(P)));
        index /= static_cast<std::size_t>(P);
    }
}

int frequency_of(int k, int P) noexcept { return k <= P / 2 ? k : k - P; }

std::vector<int> frequencies(int P) {
    std::vector<int> f(static_cast<std::size_t>(P));
    for (int k = 0; k < P; ++k) f[k] = frequency_of(k, P);
    return f;
}

void set_fft_threads(int n) {
    if (!threads_initialized) {
        fftw_init_threads();
        threads_initialized = true;
    }
    fftw_plan_with_nthreads(std::max(1, n));
}

struct FourierTransform::Impl {
    Grid grid;
    double* real = nullptr;
    fftw_complex* spec = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan inv = nullptr;

    explicit Impl(const Grid& g) : grid(g) {
        real = fftw_alloc_real(g.size());
        spec = fftw_alloc_complex(g.spectrum_size());
        int n[3] = {g.P, g.P, g.P};
        fwd = fftw_plan_dft_r2c(g.dim, n, real, spec, FFTW_ESTIMATE);
        inv = fftw_plan_dft_c2r(g.dim, n, spec, real, FFTW_ESTIMATE);
        if (!fwd || !inv) throw NumericalError("FFTW plan creation failed");
    }
    ~Impl() {
        if (fwd) fftw_destroy_plan(fwd);
        if (inv) fftw_destroy_plan(inv);
        fftw_free(real);
        fftw_free(spec);
    }
};

FourierTransform::FourierTransform(const Grid& grid) : impl_(std::make_unique<Impl>(grid)) {}
FourierTransform::~FourierTransform() = default;
FourierTransform::FourierTransform(FourierTransform&&) noexcept = default;
FourierTransform& FourierTransform::operator=(FourierTransform&&) noexcept = default;

const Grid& FourierTransform::grid() const noexcept { return impl_->grid; }

void FourierTransform::forward(std::span<const double> in, std::span<Complex> out) {
    const Grid& g = impl_->grid;
    if (in.size() != g.size() || out.size() != g.spectrum_size())
        throw DomainError("forward transform: buffer size does not match grid");
    std::copy(in.begin(), in.end(), impl_->real);
    fftw_execute(impl_->fwd);
    const double scale = 1.0 / static_cast<double>(g.size());
    for_each_mode(g, [&](std::size_t i, const int* p) {
        const double s = origin_sign(g, p) * scale;
        out[i] = Complex(impl_->spec[i][0] * s, impl_->spec[i][1] * s);
    });
}

void FourierTransform::inverse(std::span<const Complex> in, std::span<double> out) {
    const Grid& g = impl_->grid;
    if (out.size() != g.size() || in.size() != g.spectrum_size())
        throw DomainError("inverse transform: buffer size does not match grid");
    for_each_mode(g, [&](std::size_t i, const int* p) {
        const double s = origin_sign(g, p);
        impl_->spec[i][0] = s * in[i].real();
        impl_->spec[i][1] = s * in[i].imag();
    });
    fftw_execute(impl_->inv);
    std::copy(impl_->real, impl_->real + g.size(), out.begin());
}

SpectralField::SpectralField(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size()) throw DomainError("field size does not match grid");
}

std::vector<Complex> SpectralField::coefficients() const {
    FourierTransform ft(grid);
    std::vector<Complex> c(grid.spectrum_size());
    ft.forward(values, c);
    return c;
}

SpectralField SpectralField::from_coefficients(const Grid& g, std::span<const Complex> coef) {
    FourierTransform ft(g);
    SpectralField f(g);
    ft.inverse(coef, f.values);
    return f;
}

Complex SpectralField::coefficient_at(const Grid& g, std::span<const Complex> coef, std::span<const int> p) {
    if (static_cast<int>(p.size()) != g.dim) throw DomainError("frequency vector has wrong dimension");
    int q[3] = {0, 0, 0};
    bool conj = p[0] < 0;
    for (int i = 0; i < g.dim; ++i) {
        if (std::abs(p[i]) > g.P / 2) throw DomainError("frequency outside the resolved lattice");
        q[i] = conj ? -p[i] : p[i];
    }
    const auto wrap = [&](int v) { return static_cast<std::size_t>((v % g.P + g.P) % g.P); };
    std::size_t idx = static_cast<std::size_t>(q[0]) +
                      static_cast<std::size_t>(g.half_modes()) * (wrap(q[1]) + (g.dim == 3 ? g.P * wrap(q[2]) : 0));
    return conj ? std::conj(coef[idx]) : coef[idx];
}

double SpectralField::integral() const {
    return std::accumulate(values.begin(), values.end(), 0.0) * grid.cell_volume();
}

double SpectralField::min() const { return *std::min_element(values.begin(), values.end()); }
double SpectralField::max() const { return *std::max_element(values.begin(), values.end()); }

}  // namespace anisoflow
