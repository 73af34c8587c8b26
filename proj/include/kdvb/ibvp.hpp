#ifndef KDVB_IBVP_HPP
#define KDVB_IBVP_HPP

#include <memory>
#include <optional>

#include "kdvb/linear_ops.hpp"

// Fixed-point solver for the nonlinear half-line problem
//
//   u_t - u_xxx - u_xx = u u_x + forcing,   u(x,0) = u0,
//   u(0,t) = h(t), u_x(0,t) = g(t),
//
// via the map
//
//   Gamma(w) = W_R u0* + W_bdr(h - p1 - q1, g - p2 - q2) + Duhamel(f(w)),
//
// where u0* is the zero extension of u0, p/q are the x = 0 traces of the
// whole-line and Duhamel parts, and f(w) = w w_x computed pseudo-spectrally
// with 2/3-rule de-aliasing. All traces are taken by spectral evaluation at
// x = 0 (the trace-at-zero reading of the correction operator).

namespace kdvb {

struct IbvpProblem {
    std::vector<double> u0;
    Grid1D space_grid;  // [0, X]
    BoundaryData boundary;
    bool nonlinearity_on = true;
    /// optional forcing sampled like HalfLineState::values (x-major)
    std::optional<std::vector<double>> forcing;

    IbvpProblem(std::vector<double> u0_, Grid1D xg, BoundaryData bd)
        : u0(std::move(u0_)), space_grid(xg), boundary(std::move(bd)) {
        if ((int)u0.size() != space_grid.size())
            throw std::invalid_argument("IbvpProblem: u0 length does not match grid");
        if (!(boundary.time_grid.x_max() > boundary.time_grid.x_min()))
            throw std::invalid_argument("IbvpProblem: T must be positive");
    }
    const Grid1D& time_grid() const { return boundary.time_grid; }
};

struct EnergyAudit {
    std::vector<double> energy;     // E(t_k) = int u^2 dx
    std::vector<double> residual;   // |identity defect| at interior time nodes
};

struct SolveReport {
    HalfLineState solution;
    int iterations = 0;
    std::vector<double> residual_history;  // ||w_{k+1} - w_k||_{L2(dx dt)}
    double contraction_ratio = 0.0;        // geometric fit of the history
    EnergyAudit energy_audit;
    bool converged = false;
};

/// The Picard map. Construction precomputes the linear and forcing pieces;
/// apply() adds the w-dependent Duhamel part and its boundary correction.
class GammaOperator {
  public:
    GammaOperator(const IbvpProblem& problem, BoundaryOpOptions opt = {});
    HalfLineState apply(const HalfLineState& w) const;
    HalfLineState linear_solution() const;  // Gamma of w = 0

    const IbvpProblem& problem() const { return prob_; }

  private:
    HalfLineState assemble(const std::vector<std::vector<Complex>>& duhamel_hat) const;
    std::vector<std::vector<Complex>> nonlinear_hat(const HalfLineState& w) const;

    IbvpProblem prob_;
    BoundaryOpOptions opt_;
    Grid1D ext_;           // symmetric periodic grid
    Grid1D tgrid_;
    int zero_idx_;
    std::vector<Complex> u0_hat_;
    std::vector<std::vector<Complex>> forcing_hat_;  // per time node (may be empty)
    std::unique_ptr<DuhamelIntegrator> duhamel_;
    // linear part sampled on the half grid plus its x=0 traces
    std::vector<double> linear_field_;       // x-major
    std::vector<double> p1_, p2_;            // traces of W_R u0*
    std::vector<Complex> phase0_, dphase0_;  // spectral trace evaluation helpers
};

/// Picard iteration from w0 = linear solution; stops when the successive
/// L2 distance drops below tol. Non-convergence is reported, not thrown
/// (it signals data outside the contraction ball).
SolveReport solve_fixed_point(const IbvpProblem& problem, double tol, int max_iter,
                              BoundaryOpOptions opt = {});

/// Residuals of the energy identity of the canonical operator on x > 0:
///   (1/2) d/dt int u^2 = -h u_xx(0) + (1/2) g^2 - h g - int u_x^2.
EnergyAudit energy_audit(const HalfLineState& state, const BoundaryData& boundary);

}  // namespace kdvb

#endif
