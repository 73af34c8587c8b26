#ifndef KDVB_PERIODIC_HPP
#define KDVB_PERIODIC_HPP

#include <vector>

#include "kdvb/numerics.hpp"

// Exact eigen-decomposition of the periodic operator A_L v = v''' + v'' on
// (-L, L): eigenvalues lambda_n = -i (n pi / L)^3 - (n pi / L)^2 with the
// orthonormal basis e_n(x) = (2L)^{-1/2} e^{i n pi x / L}, the propagator
// S_L(t), and the observability ratio of the partial-observation inequality
// ||u_0||_{L2(-L,L)} <= C ||u||_{L2((-l,l)x(0,T))}.

namespace kdvb {

struct PeriodicSpectrum {
    double L = 0.0;
    int n_max = 0;
    std::vector<Complex> eigenvalues;  // index i corresponds to n = i - n_max
    double gap = 0.0;                  // gamma = 2 pi^3 / L^3

    Complex lambda(int n) const { return eigenvalues[n + n_max]; }
};

/// Coefficients c_n for |n| <= n_max against the orthonormal basis.
struct ModeCoeffs {
    int n_max = 0;
    std::vector<Complex> c;  // length 2 n_max + 1, index i <-> n = i - n_max

    ModeCoeffs(int nmax) : n_max(nmax), c(2 * nmax + 1, Complex(0, 0)) {}
    Complex& coeff(int n) { return c[n + n_max]; }
    Complex coeff(int n) const { return c[n + n_max]; }
    double l2_norm_sq() const;
};

PeriodicSpectrum spectrum(double L, int n_max);

/// c_n -> e^{lambda_n t} c_n; rejects t < 0.
ModeCoeffs propagate_periodic(const ModeCoeffs& c, const PeriodicSpectrum& spec, double t);

/// u(x,t) = sum c_n e^{lambda_n t} e_n(x).
Complex evaluate_modes(const ModeCoeffs& c, const PeriodicSpectrum& spec, double x, double t);

struct ObservabilityOptions {
    bool use_quadrature = false;  // closed-form modal cross terms by default
    int nx = 128;
    int nt = 256;
};

/// ||u0||^2_{L2(-L,L)} / ||u||^2_{L2((-l,l)x(0,T))}, the square of the
/// observability constant bounded by the partial-observability inequality.
double observability_ratio(const ModeCoeffs& c, double L, double l, double T,
                           const ObservabilityOptions& opt = {});

struct InghamParams {
    double gamma;       // 2 pi^3 / L^3
    double t_star_min;  // pi / gamma = L^3 / (2 pi^2)
};
InghamParams ingham_params(double L);

}  // namespace kdvb

#endif
