#ifndef KDVB_NUMERICS_HPP
#define KDVB_NUMERICS_HPP

#include <array>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace kdvb {

using Complex = std::complex<double>;

/// Uniform sample grid on [x_min, x_max], both endpoints included.
class Grid1D {
  public:
    Grid1D(double x_min, double x_max, int n_points) : xa_(x_min), xb_(x_max), n_(n_points) {
        if (n_points < 4) throw std::invalid_argument("Grid1D: need at least 4 points");
        if (!(x_max > x_min)) throw std::invalid_argument("Grid1D: x_max must exceed x_min");
    }
    double x_min() const { return xa_; }
    double x_max() const { return xb_; }
    int size() const { return n_; }
    double spacing() const { return (xb_ - xa_) / (n_ - 1); }
    double point(int i) const { return xa_ + spacing() * i; }
    std::vector<double> points() const {
        std::vector<double> p(n_);
        for (int i = 0; i < n_; ++i) p[i] = point(i);
        return p;
    }
    bool operator==(const Grid1D& o) const { return xa_ == o.xa_ && xb_ == o.xb_ && n_ == o.n_; }

  private:
    double xa_, xb_;
    int n_;
};

/// Complex samples aligned to a grid. Transforms treat the grid as one period
/// of length n*spacing (the point after x_max wraps to x_min).
struct ComplexField {
    Grid1D grid;
    std::vector<Complex> values;

    ComplexField(Grid1D g, std::vector<Complex> v) : grid(g), values(std::move(v)) {
        if ((int)values.size() != grid.size())
            throw std::invalid_argument("ComplexField: length does not match grid");
    }
    double period() const { return grid.size() * grid.spacing(); }
};

/// DFT coefficients in FFT storage order; index i maps to the signed integer
/// frequency freq_index(i) in [-n/2, n/2), symmetric about 0.
struct SpectralCoeffs {
    std::vector<Complex> coeffs;
    double base_length = 0.0;  // period of the underlying grid

    int size() const { return (int)coeffs.size(); }
    int freq_index(int i) const {
        int n = size();
        return i <= (n - 1) / 2 ? i : i - n;
    }
    /// physical wavenumber xi_k = 2*pi*k/base_length
    double wavenumber(int i) const;
};

/// Unitary DFT pair (1/sqrt(n) both directions, e^{-i..} forward), so
/// Parseval holds as an equality in exact arithmetic.
SpectralCoeffs dft(const ComplexField& f);
ComplexField idft(const SpectralCoeffs& c, const Grid1D& grid);

/// Composite Simpson with a 3/8 tail when the interval count is odd.
/// Order 4 for smooth integrands (the contract asks for order >= 2).
double quadrature(const std::vector<double>& samples, const Grid1D& grid);
Complex quadrature(const std::vector<Complex>& samples, const Grid1D& grid);
/// The weights w_i with integral = sum w_i f(x_i); same rule as quadrature().
std::vector<double> quadrature_weights(const Grid1D& grid);

/// Finite-difference derivative of the given order (1, 2 or 3) sampled on the
/// whole grid: centered stencils inside, one-sided second-order at the ends.
std::vector<double> finite_diff(const std::vector<double>& values, const Grid1D& grid, int order);

/// Spectral Sobolev norm (sum <k>^{2s} |c_k|^2)^{1/2} with <k> = sqrt(1+k^2)
/// over signed integer frequencies; the field is used as a periodic surrogate.
double sobolev_norm(const ComplexField& f, double s);

/// Derivative-based discrete H^1(0,T) norm: (||f||^2 + ||f'||^2)^{1/2} with
/// the quadrature and first-difference rules above. Used for trace norms of
/// non-periodic time series where the spectral surrogate would see a wrap jump.
double sobolev_h1_norm(const std::vector<double>& values, const Grid1D& grid);

struct CubicRoots {
    std::array<Complex, 3> roots;
    bool has_multiple_root = false;  // some pair coincides within tolerance
};

/// Roots of the monic cubic z^3 + c2 z^2 + c1 z + c0 (Cardano plus a Newton
/// polish per root; residual |p(z)| <= 1e-10 (1+|z|^3)).
CubicRoots cubic_roots(Complex c2, Complex c1, Complex c0);

}  // namespace kdvb

#endif
