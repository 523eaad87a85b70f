#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace anisoflow {

using Complex = std::complex<double>;

/// Uniform periodic grid on the box [-L/2, L/2)^d, L = length (1 for the
/// computational domain Q). Node k on each axis sits at -L/2 + k L / P.
/// Storage order is row-major with x_1 fastest: index = k1 + P (k2 + P k3).
struct Grid {
    int dim = 2;
    int P = 256;
    double length = 1.0;

    Grid() = default;
    Grid(int dim, int modes, double length = 1.0);

    std::size_t size() const noexcept;
    /// Number of stored complex coefficients (last axis halved).
    std::size_t spectrum_size() const noexcept;
    int half_modes() const noexcept { return P / 2 + 1; }
    double spacing() const noexcept { return length / P; }
    double cell_volume() const noexcept;
    double coordinate(int k) const noexcept { return -0.5 * length + k * spacing(); }
    /// Node coordinates of a flat index.
    void node(std::size_t index, double* x) const noexcept;

    bool operator==(const Grid&) const = default;
};

/// Signed integer frequency of DFT index k (0..P-1); Nyquist is +P/2.
int frequency_of(int k, int P) noexcept;
/// Axis frequency list in DFT order: 0, 1, ..., P/2, -P/2+1, ..., -1.
std::vector<int> frequencies(int P);

/// Calls fn(spectrum_index, p) for every stored coefficient, p the integer
/// frequency vector (p[0] along x_1, in [0, P/2]).
template <class Fn>
void for_each_mode(const Grid& g, Fn&& fn) {
    const int h = g.half_modes();
    int p[3] = {0, 0, 0};
    std::size_t idx = 0;
    const int n3 = g.dim == 3 ? g.P : 1;
    for (int k3 = 0; k3 < n3; ++k3) {
        p[2] = g.dim == 3 ? frequency_of(k3, g.P) : 0;
        for (int k2 = 0; k2 < g.P; ++k2) {
            p[1] = frequency_of(k2, g.P);
            for (int k1 = 0; k1 < h; ++k1, ++idx) {
                p[0] = k1;
                fn(idx, static_cast<const int*>(p));
            }
        }
    }
}

/// Weight of a stored half-spectrum coefficient in full-spectrum sums: the
/// x_1 = 0 and Nyquist columns appear once, the others twice.
inline double hermitian_weight(int p1, int P) noexcept { return (p1 == 0 || p1 == P / 2) ? 1.0 : 2.0; }

/// Caps the number of threads FFTW may use (applies to plans created later).
void set_fft_threads(int n);

/// Real-to-complex transform pair for one grid. Coefficients refer to the
/// physical coordinates, u(x) = sum_p c_p exp(2 pi i p.x / L), so the forward
/// transform carries the 1/P^d factor (c_0 is the mean) and the phase of the
/// box corner at -L/2.
class FourierTransform {
public:
    explicit FourierTransform(const Grid& grid);
    ~FourierTransform();
    FourierTransform(FourierTransform&&) noexcept;
    FourierTransform& operator=(FourierTransform&&) noexcept;
    FourierTransform(const FourierTransform&) = delete;
    FourierTransform& operator=(const FourierTransform&) = delete;

    const Grid& grid() const noexcept;
    void forward(std::span<const double> in, std::span<Complex> out);
    void inverse(std::span<const Complex> in, std::span<double> out);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Real periodic field with values at the grid nodes.
struct SpectralField {
    Grid grid;
    std::vector<double> values;

    SpectralField() = default;
    explicit SpectralField(const Grid& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}
    SpectralField(const Grid& g, std::vector<double> v);

    /// Half-spectrum coefficients (see FourierTransform).
    std::vector<Complex> coefficients() const;
    static SpectralField from_coefficients(const Grid& g, std::span<const Complex> coef);
    /// Coefficient at an arbitrary frequency vector |p_i| <= P/2, using
    /// Hermitian symmetry for p_1 < 0.
    static Complex coefficient_at(const Grid& g, std::span<const Complex> coef, std::span<const int> p);

    /// Integral over the box (sum times cell volume).
    double integral() const;
    double min() const;
    double max() const;
};

}  // namespace anisoflow
