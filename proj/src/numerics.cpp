#include "kdvb/numerics.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>

namespace kdvb {

double SpectralCoeffs::wavenumber(int i) const {
    return 2.0 * M_PI * freq_index(i) / base_length;
}

namespace {

// FFTW planning is not thread-safe; executing a cached plan on fresh arrays
// is. Plans are created FFTW_UNALIGNED so any heap buffer works.
std::mutex plan_mutex;

fftw_plan cached_plan(int n, int sign) {
    static std::map<std::pair<int, int>, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto key = std::make_pair(n, sign);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::vector<Complex> scratch(n);
    fftw_plan p = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(scratch.data()),
                                   reinterpret_cast<fftw_complex*>(scratch.data()), sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    cache[key] = p;
    return p;
}

void run_fft(const std::vector<Complex>& in, std::vector<Complex>& out, int sign) {
    int n = (int)in.size();
    out = in;
    fftw_plan p = cached_plan(n, sign);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(out.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    double scale = 1.0 / std::sqrt((double)n);
    for (auto& v : out) v *= scale;
}

}  // namespace

SpectralCoeffs dft(const ComplexField& f) {
    if (!(f.grid.spacing() > 0)) throw std::invalid_argument("dft: degenerate grid");
    SpectralCoeffs c;
    c.base_length = f.period();
    run_fft(f.values, c.coeffs, FFTW_FORWARD);
    return c;
}

ComplexField idft(const SpectralCoeffs& c, const Grid1D& grid) {
    if (grid.size() != c.size()) throw std::invalid_argument("idft: grid/coefficient size mismatch");
    std::vector<Complex> v;
    run_fft(c.coeffs, v, FFTW_BACKWARD);
    return ComplexField(grid, std::move(v));
}

namespace {

template <typename T>
T quad_impl(const std::vector<T>& f, const Grid1D& g) {
    if ((int)f.size() != g.size()) throw std::invalid_argument("quadrature: length mismatch");
    const double h = g.spacing();
    const int n = g.size();
    const int intervals = n - 1;
    T acc{};
    int m = intervals;
    if (intervals % 2 != 0) m = intervals - 3;  // leave 3 intervals for the 3/8 tail
    // composite Simpson over the first m intervals
    for (int i = 0; i + 2 <= m; i += 2) acc += (h / 3.0) * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
    if (intervals % 2 != 0) {
        int i = m;
        acc += (3.0 * h / 8.0) * (f[i] + 3.0 * f[i + 1] + 3.0 * f[i + 2] + f[i + 3]);
    }
    return acc;
}

}  // namespace

double quadrature(const std::vector<double>& samples, const Grid1D& grid) {
    return quad_impl(samples, grid);
}

Complex quadrature(const std::vector<Complex>& samples, const Grid1D& grid) {
    return quad_impl(samples, grid);
}

std::vector<double> quadrature_weights(const Grid1D& grid) {
    const double h = grid.spacing();
    const int n = grid.size();
    const int intervals = n - 1;
    std::vector<double> w(n, 0.0);
    int m = (intervals % 2 == 0) ? intervals : intervals - 3;
    for (int i = 0; i + 2 <= m; i += 2) {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
    }
    if (intervals % 2 != 0) {
        int i = m;
        w[i] += 3.0 * h / 8.0;
        w[i + 1] += 9.0 * h / 8.0;
        w[i + 2] += 9.0 * h / 8.0;
        w[i + 3] += 3.0 * h / 8.0;
    }
    return w;
}

std::vector<double> finite_diff(const std::vector<double>& f, const Grid1D& g, int order) {
    if (order < 1 || order > 3) throw std::invalid_argument("finite_diff: order must be 1, 2 or 3");
    const int n = g.size();
    if ((int)f.size() != n) throw std::invalid_argument("finite_diff: length mismatch");
    if (n < order + 2) throw std::invalid_argument("finite_diff: sequence too short");
    const double h = g.spacing();
    std::vector<double> d(n);
    switch (order) {
        case 1: {
            for (int i = 1; i < n - 1; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2 * h);
            d[0] = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h);
            d[n - 1] = (3 * f[n - 1] - 4 * f[n - 2] + f[n - 3]) / (2 * h);
            break;
        }
        case 2: {
            const double h2 = h * h;
            for (int i = 1; i < n - 1; ++i) d[i] = (f[i + 1] - 2 * f[i] + f[i - 1]) / h2;
            d[0] = (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]) / h2;
            d[n - 1] = (2 * f[n - 1] - 5 * f[n - 2] + 4 * f[n - 3] - f[n - 4]) / h2;
            break;
        }
        case 3: {
            const double h3 = 2 * h * h * h;
            for (int i = 2; i < n - 2; ++i)
                d[i] = (f[i + 2] - 2 * f[i + 1] + 2 * f[i - 1] - f[i - 2]) / h3;
            if (n >= 5) {
                d[0] = (-5 * f[0] + 18 * f[1] - 24 * f[2] + 14 * f[3] - 3 * f[4]) / h3;
                d[1] = (-3 * f[0] + 10 * f[1] - 12 * f[2] + 6 * f[3] - f[4]) / h3;
                d[n - 1] =
                    (5 * f[n - 1] - 18 * f[n - 2] + 24 * f[n - 3] - 14 * f[n - 4] + 3 * f[n - 5]) / h3;
                d[n - 2] =
                    (3 * f[n - 1] - 10 * f[n - 2] + 12 * f[n - 3] - 6 * f[n - 4] + f[n - 5]) / h3;
            }
            break;
        }
    }
    return d;
}

double sobolev_norm(const ComplexField& f, double s) {
    SpectralCoeffs c = dft(f);
    double acc = 0.0;
    for (int i = 0; i < c.size(); ++i) {
        double k = c.freq_index(i);
        acc += std::pow(1.0 + k * k, s) * std::norm(c.coeffs[i]);
    }
    return std::sqrt(acc);
}

double sobolev_h1_norm(const std::vector<double>& values, const Grid1D& grid) {
    std::vector<double> d = finite_diff(values, grid, 1);
    std::vector<double> v2(values.size()), d2(values.size());
    for (size_t i = 0; i < values.size(); ++i) {
        v2[i] = values[i] * values[i];
        d2[i] = d[i] * d[i];
    }
    return std::sqrt(quadrature(v2, grid) + quadrature(d2, grid));
}

CubicRoots cubic_roots(Complex c2, Complex c1, Complex c0) {
    // depressed cubic t^3 + p t + q with z = t - c2/3
    const Complex shift = c2 / 3.0;
    const Complex p = c1 - c2 * c2 / 3.0;
    const Complex q = 2.0 * c2 * c2 * c2 / 27.0 - c2 * c1 / 3.0 + c0;

    std::array<Complex, 3> t;
    const Complex disc = std::sqrt(q * q / 4.0 + p * p * p / 27.0);
    Complex u3 = -q / 2.0 + disc;
    if (std::abs(u3) < std::abs(-q / 2.0 - disc)) u3 = -q / 2.0 - disc;
    if (std::abs(u3) == 0.0) {
        // p == q == 0: triple root of the depressed cubic
        t = {Complex(0), Complex(0), Complex(0)};
    } else {
        const Complex u = std::pow(u3, 1.0 / 3.0);
        const Complex w(-0.5, std::sqrt(3.0) / 2.0);  // primitive cube root of unity
        for (int k = 0; k < 3; ++k) {
            Complex uk = u * std::pow(w, (double)k);
            t[k] = uk - p / (3.0 * uk);
        }
    }

    CubicRoots out;
    for (int k = 0; k < 3; ++k) {
        Complex z = t[k] - shift;
        // two Newton steps; keeps the double root at the origin clean
        for (int it = 0; it < 2; ++it) {
            Complex pz = ((z + c2) * z + c1) * z + c0;
            Complex dp = (3.0 * z + 2.0 * c2) * z + c1;
            if (std::abs(dp) > 1e-300) {
                Complex step = pz / dp;
                if (std::abs(step) < 1.0 + std::abs(z)) z -= step;
            }
        }
        out.roots[k] = z;
    }
    double scale = 0.0;
    for (auto& z : out.roots) scale = std::max(scale, std::abs(z));
    for (int a = 0; a < 3 && !out.has_multiple_root; ++a)
        for (int b = a + 1; b < 3; ++b)
            if (std::abs(out.roots[a] - out.roots[b]) <= 1e-8 * (1.0 + scale)) {
                out.has_multiple_root = true;
                break;
            }
    return out;
}

}  // namespace kdvb
