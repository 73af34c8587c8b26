#ifndef KDVB_LINEAR_OPS_HPP
#define KDVB_LINEAR_OPS_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "kdvb/numerics.hpp"

// Explicit solution operators of the canonical half-line problem
//
//   u_t - u_xxx - u_xx = 0,  x > 0,  u(0,t) = h(t), u_x(0,t) = g(t),
//
// built from the whole-line Fourier multiplier e^{-(i xi^3 + xi^2) t}, the
// characteristic roots of tau - r^3 - r^2 = 0, an imaginary-axis synthesis of
// the Dirichlet/Neumann boundary operators, and the extension-and-correction
// form of the homogeneous-boundary semigroup.

namespace kdvb {

/// Dirichlet/Neumann boundary time series at x = 0.
struct BoundaryData {
    Grid1D time_grid;
    std::vector<double> h;  // u(0, t)
    std::vector<double> g;  // u_x(0, t)

    BoundaryData(Grid1D tg, std::vector<double> hh, std::vector<double> gg)
        : time_grid(tg), h(std::move(hh)), g(std::move(gg)) {
        if ((int)h.size() != time_grid.size() || (int)g.size() != time_grid.size())
            throw std::invalid_argument("BoundaryData: series length does not match time grid");
    }
    static BoundaryData zero(const Grid1D& tg) {
        return BoundaryData(tg, std::vector<double>(tg.size(), 0.0),
                            std::vector<double>(tg.size(), 0.0));
    }
};

/// Sampled real field u(x_i, t_j) on x >= 0; stored x-major so a fixed-x time
/// series is contiguous.
struct HalfLineState {
    Grid1D space_grid;
    Grid1D time_grid;
    std::vector<double> values;  // values[ix * nt + it]

    // advisory diagnostics, filled by the operators that can check them
    double compatibility_defect = 0.0;
    double trace_value_max = 0.0;
    double trace_deriv_max = 0.0;
    std::vector<std::string> warnings;

    HalfLineState(Grid1D xg, Grid1D tg)
        : space_grid(xg), time_grid(tg),
          values((size_t)xg.size() * tg.size(), 0.0) {}

    double& at(int ix, int it) { return values[(size_t)ix * time_grid.size() + it]; }
    double at(int ix, int it) const { return values[(size_t)ix * time_grid.size() + it]; }
    std::vector<double> time_series(int ix) const {
        auto b = values.begin() + (size_t)ix * time_grid.size();
        return std::vector<double>(b, b + time_grid.size());
    }
    std::vector<double> space_slice(int it) const {
        std::vector<double> s(space_grid.size());
        for (int ix = 0; ix < space_grid.size(); ++ix) s[ix] = at(ix, it);
        return s;
    }
    /// L2(dx dt) norm by the composite quadrature rule.
    double l2_norm() const;
};

/// Roots of tau - r^3 - r^2 = 0 with decay classification.
struct CubicRootTriple {
    Complex tau;
    std::array<Complex, 3> roots;
    std::vector<int> decaying;  // indices with Re r < -dead_band
    bool degenerate = false;    // some |Re r| fell inside the dead band
};

/// Solves r^3 + r^2 - tau = 0. Roots with |Re r| < dead_band are flagged
/// degenerate (the double root at tau = 0 makes the classification
/// discontinuous there).
CubicRootTriple characteristic_roots(Complex tau, double dead_band = 1e-9);

/// Decaying-pair splitting r_j(i lambda^3) = i lambda + mu_j(lambda).
/// Re mu_j <= 0 always holds; the measured growth of |mu_j| is ~|lambda|
/// (exponent about 1), not the |lambda|^{1/3} sometimes quoted for the
/// tau-parameterized roots, so only the sign condition is contractual.
struct RootSplit {
    double lambda;
    Complex mu1, mu2;
};
RootSplit root_split(double lambda);

/// Spectral multiplication by e^{-(i xi^3 + xi^2) t} on the field's periodic
/// grid. Rejects t < 0 (the multiplier blows up).
ComplexField whole_line_propagate(const ComplexField& u0, double t);

/// Cached spectral evolution of one initial field; cheap repeated evaluation
/// at many times plus exact-in-band traces at x = 0.
class WholeLineEvolution {
  public:
    explicit WholeLineEvolution(const ComplexField& u0);
    ComplexField at(double t) const;
    /// (u(0,t), u_x(0,t)) of the real part, by spectral summation.
    std::pair<double, double> trace_at_zero(double t) const;

  private:
    Grid1D grid_;
    SpectralCoeffs hat_;
    std::vector<Complex> phase0_;  // e^{i xi (0 - x_min)} / sqrt(n)
};

/// Zero extension of half-line samples on [0, X] to the symmetric periodic
/// grid [-X, X] (2n-1 points, same spacing; x = 0 sits at index n-1).
ComplexField zero_extend(const std::vector<double>& u0, const Grid1D& half_grid);
int extension_zero_index(const Grid1D& half_grid);

/// C3 reflection extension on the same symmetric grid:
/// u(-y) = 10 u(y) - 20 u(2y) + 15 u(3y) - 4 u(4y), smoothly cut off on
/// y in [0.15 X, 0.24 X]. Matches value and three derivatives at x = 0, so
/// traces of the extended flow stay smooth at t = 0+ where a zero extension
/// of data with u(0) != 0 (or kinked higher derivatives) would not.
ComplexField smooth_extend(const std::vector<double>& u0, const Grid1D& half_grid);

/// Tuning of the imaginary-axis synthesis of W_D / W_N.
struct BoundaryOpOptions {
    double tail_tol = 1e-6;    // truncation: <Lambda>^{-1/3} * tail(h~) below this
    double sigma0 = 2.0;       // graded refinement window around sigma = 0
    double dead_band = 1e-9;   // degenerate-root node perturbation
    double resolution_scale = 1.0;  // >1 refines the sigma quadrature
    double lambda_min = 24.0;  // smallest truncation considered
};

/// W_D(t) h: value trace reproduces h, derivative trace is ~0.
HalfLineState boundary_dirichlet(const BoundaryData& data, const Grid1D& eval_grid,
                                 const BoundaryOpOptions& opt = {});
/// W_N(t) g: value trace ~0, derivative trace reproduces g.
HalfLineState boundary_neumann(const BoundaryData& data, const Grid1D& eval_grid,
                               const BoundaryOpOptions& opt = {});

/// Variants with separate data and output time grids, for callers that feed a
/// tapered/extended series but only need the solution on a sub-window.
HalfLineState boundary_dirichlet(const std::vector<double>& h, const Grid1D& data_time_grid,
                                 const Grid1D& eval_grid, const Grid1D& out_time_grid,
                                 const BoundaryOpOptions& opt = {});
HalfLineState boundary_neumann(const std::vector<double>& g, const Grid1D& data_time_grid,
                               const Grid1D& eval_grid, const Grid1D& out_time_grid,
                               const BoundaryOpOptions& opt = {});

/// Kernel magnitude |(e^{r2 x} - e^{r1 x}) / (r2 - r1)| of W_N at fixed x,
/// for decay-rate studies across the sigma grid.
double neumann_kernel_magnitude(double x, double sigma);

/// Extend a series from its grid onto a longer grid (same spacing) by a C1
/// value/slope-matched ramp to zero; the synthesis operators then see
/// effectively supported data, and causality keeps [0, T] unaffected.
std::vector<double> taper_extend(const std::vector<double>& series, const Grid1D& tgrid,
                                 const Grid1D& tgrid_ext);

/// W_0(t) u0 by zero extension, whole-line propagation, and subtraction of the
/// boundary operators applied to the extension's x = 0 traces. Both traces of
/// the result are ~0; u0(0), u0'(0) != 0 is reported, not rejected.
HalfLineState halfline_semigroup(const std::vector<double>& u0, const Grid1D& half_grid,
                                 const Grid1D& time_grid, const BoundaryOpOptions& opt = {},
                                 bool smooth_extension = false);

/// Duhamel term int_0^t W_R(t - s) f(., s) ds for f sampled on grid x times.
/// `forcing` is (grid.size() x time_grid.size()), x-major like HalfLineState.
class DuhamelIntegrator {
  public:
    DuhamelIntegrator(const Grid1D& grid, const Grid1D& time_grid);
    /// Spectral trajectory U^(xi, t_k) for all k; input overwritten column-wise.
    /// forcing_hat has one column (length n) per time node.
    std::vector<std::vector<Complex>> trajectory(
        const std::vector<std::vector<Complex>>& forcing_hat) const;

    const Grid1D& grid() const { return grid_; }
    const Grid1D& time_grid() const { return tgrid_; }

  private:
    Grid1D grid_, tgrid_;
    std::vector<std::vector<Complex>> decay_;          // decay_[i][d] = e^{m(xi_i) d dt}
    std::vector<std::vector<double>> cumulative_w_;    // quadrature weights on [0, t_k]
};

/// One-call forced Duhamel evaluation at a single time (the trajectory
/// integrator above is the bulk interface).
ComplexField duhamel_forced(const std::vector<ComplexField>& f, const Grid1D& time_grid, double t);

/// One-sided second-order traces (u, u_x, u_xx) at x = 0.
struct Traces {
    std::vector<double> value, deriv, second;
};
Traces trace_extract(const HalfLineState& state);

}  // namespace kdvb

#endif
