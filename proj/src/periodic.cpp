#include "kdvb/periodic.hpp"

#include <cmath>

namespace kdvb {

double ModeCoeffs::l2_norm_sq() const {
    double acc = 0.0;
    for (auto& v : c) acc += std::norm(v);
    return acc;
}

PeriodicSpectrum spectrum(double L, int n_max) {
    if (!(L > 0)) throw std::invalid_argument("spectrum: L must be positive");
    if (n_max < 1) throw std::invalid_argument("spectrum: n_max must be >= 1");
    PeriodicSpectrum s;
    s.L = L;
    s.n_max = n_max;
    s.eigenvalues.resize(2 * n_max + 1);
    for (int n = -n_max; n <= n_max; ++n) {
        double k = n * M_PI / L;
        s.eigenvalues[n + n_max] = Complex(-k * k, -k * k * k);
    }
    s.gap = 2.0 * std::pow(M_PI, 3) / std::pow(L, 3);
    return s;
}

ModeCoeffs propagate_periodic(const ModeCoeffs& c, const PeriodicSpectrum& spec, double t) {
    if (t < 0) throw std::invalid_argument("propagate_periodic: t must be >= 0");
    if (c.n_max != spec.n_max) throw std::invalid_argument("propagate_periodic: n_max mismatch");
    ModeCoeffs out(c.n_max);
    for (int n = -c.n_max; n <= c.n_max; ++n)
        out.coeff(n) = c.coeff(n) * std::exp(spec.lambda(n) * t);
    return out;
}

Complex evaluate_modes(const ModeCoeffs& c, const PeriodicSpectrum& spec, double x, double t) {
    Complex acc(0, 0);
    const double norm = 1.0 / std::sqrt(2.0 * spec.L);
    for (int n = -c.n_max; n <= c.n_max; ++n) {
        Complex en = std::polar(norm, n * M_PI * x / spec.L);
        acc += c.coeff(n) * std::exp(spec.lambda(n) * t) * en;
    }
    return acc;
}

double observability_ratio(const ModeCoeffs& c, double L, double l, double T,
                           const ObservabilityOptions& opt) {
    if (!(l > 0 && l < L && T > 0))
        throw std::invalid_argument("observability_ratio: need 0 < l < L and T > 0");
    const double num = c.l2_norm_sq();
    if (num == 0.0) throw std::invalid_argument("observability_ratio: zero coefficients");

    PeriodicSpectrum spec = spectrum(L, c.n_max);
    double den = 0.0;
    if (opt.use_quadrature) {
        Grid1D xg(-l, l, opt.nx);
        Grid1D tg(0.0, T, opt.nt);
        auto wx = quadrature_weights(xg);
        auto wt = quadrature_weights(tg);
        for (int it = 0; it < tg.size(); ++it) {
            double t = tg.point(it);
            for (int ix = 0; ix < xg.size(); ++ix)
                den += wx[ix] * wt[it] * std::norm(evaluate_modes(c, spec, xg.point(ix), t));
        }
    } else {
        // closed-form modal cross terms:
        //   int_0^T e^{(lambda_m + conj(lambda_n)) t} dt x int_{-l}^{l} e_m conj(e_n) dx
        for (int m = -c.n_max; m <= c.n_max; ++m) {
            if (c.coeff(m) == Complex(0, 0)) continue;
            for (int n = -c.n_max; n <= c.n_max; ++n) {
                if (c.coeff(n) == Complex(0, 0)) continue;
                Complex mu = spec.lambda(m) + std::conj(spec.lambda(n));
                Complex tint = (std::abs(mu) < 1e-14)
                                   ? Complex(T, 0)
                                   : (std::exp(mu * T) - 1.0) / mu;
                double kap = (m - n) * M_PI / L;
                double xint = (m == n) ? (l / L) : std::sin(kap * l) / (kap * L);
                den += (c.coeff(m) * std::conj(c.coeff(n)) * tint).real() * xint;
            }
        }
    }
    if (!(den > 0)) throw std::runtime_error("observability_ratio: degenerate denominator");
    return num / den;
}

InghamParams ingham_params(double L) {
    if (!(L > 0)) throw std::invalid_argument("ingham_params: L must be positive");
    double gamma = 2.0 * std::pow(M_PI, 3) / std::pow(L, 3);
    return {gamma, M_PI / gamma};
}

}  // namespace kdvb
