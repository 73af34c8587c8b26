#include "kdvb/ibvp.hpp"

#include <cmath>

namespace kdvb {

namespace {

double l2_distance(const HalfLineState& a, const HalfLineState& b) {
    auto wx = quadrature_weights(a.space_grid);
    auto wt = quadrature_weights(a.time_grid);
    const int nt = a.time_grid.size();
    double acc = 0.0;
    for (int ix = 0; ix < a.space_grid.size(); ++ix)
        for (int it = 0; it < nt; ++it) {
            double d = a.at(ix, it) - b.at(ix, it);
            acc += wx[ix] * wt[it] * d * d;
        }
    return std::sqrt(acc);
}

}  // namespace

GammaOperator::GammaOperator(const IbvpProblem& problem, BoundaryOpOptions opt)
    : prob_(problem), opt_(opt), ext_(smooth_extend(problem.u0, problem.space_grid).grid),
      tgrid_(problem.time_grid()), zero_idx_(extension_zero_index(problem.space_grid)) {
    // C3 reflection extensions keep the x = 0 traces of every whole-line piece
    // smooth at t = 0+, which the imaginary-axis synthesis needs
    ComplexField u0_ext = smooth_extend(prob_.u0, prob_.space_grid);
    u0_hat_ = dft(u0_ext).coeffs;
    duhamel_ = std::make_unique<DuhamelIntegrator>(ext_, tgrid_);

    const int n = ext_.size();
    const double period = n * ext_.spacing();
    phase0_.resize(n);
    dphase0_.resize(n);
    const double scale = 1.0 / std::sqrt((double)n);
    for (int i = 0; i < n; ++i) {
        int ks = i <= (n - 1) / 2 ? i : i - n;
        double xi = 2.0 * M_PI * ks / period;
        phase0_[i] = std::polar(scale, -xi * ext_.x_min());
        dphase0_[i] = Complex(0, xi) * phase0_[i];
    }

    WholeLineEvolution evo(u0_ext);
    const int nx = prob_.space_grid.size();
    const int nt = tgrid_.size();
    linear_field_.assign((size_t)nx * nt, 0.0);
    p1_.resize(nt);
    p2_.resize(nt);
    for (int it = 0; it < nt; ++it) {
        double t = tgrid_.point(it);
        ComplexField f = evo.at(t);
        for (int ix = 0; ix < nx; ++ix)
            linear_field_[(size_t)ix * nt + it] = f.values[zero_idx_ + ix].real();
        auto [v, d] = evo.trace_at_zero(t);
        p1_[it] = v;
        p2_[it] = d;
    }

    if (prob_.forcing) {
        const auto& fc = *prob_.forcing;
        if (fc.size() != (size_t)nx * nt)
            throw std::invalid_argument("IbvpProblem: forcing size does not match grids");
        forcing_hat_.resize(nt);
        for (int it = 0; it < nt; ++it) {
            std::vector<double> slice(nx);
            for (int ix = 0; ix < nx; ++ix) slice[ix] = fc[(size_t)ix * nt + it];
            forcing_hat_[it] = dft(smooth_extend(slice, prob_.space_grid)).coeffs;
        }
    }
}

std::vector<std::vector<Complex>> GammaOperator::nonlinear_hat(const HalfLineState& w) const {
    const int nx = prob_.space_grid.size();
    const int nt = tgrid_.size();
    const int n = ext_.size();
    std::vector<std::vector<Complex>> cols(nt);
    for (int it = 0; it < nt; ++it) {
        std::vector<double> slice(nx);
        for (int ix = 0; ix < nx; ++ix) {
            double v = w.at(ix, it);
            if (!std::isfinite(v))
                throw std::runtime_error("gamma_map: non-finite value in iterate at t index " +
                                         std::to_string(it));
            slice[ix] = v;
        }
        ComplexField we = smooth_extend(slice, prob_.space_grid);
        SpectralCoeffs what = dft(we);
        SpectralCoeffs dhat = what;
        for (int i = 0; i < n; ++i) dhat.coeffs[i] *= Complex(0, what.wavenumber(i));
        ComplexField wx = idft(dhat, ext_);
        std::vector<Complex> prod(n);
        for (int i = 0; i < n; ++i) prod[i] = we.values[i].real() * wx.values[i].real();
        SpectralCoeffs phat = dft(ComplexField(ext_, std::move(prod)));
        // 2/3-rule de-aliasing of the quadratic product
        for (int i = 0; i < n; ++i)
            if (std::abs(phat.freq_index(i)) > n / 3) phat.coeffs[i] = Complex(0, 0);
        cols[it] = std::move(phat.coeffs);
    }
    if (!forcing_hat_.empty())
        for (int it = 0; it < nt; ++it)
            for (int i = 0; i < n; ++i) cols[it][i] += forcing_hat_[it][i];
    return cols;
}

HalfLineState GammaOperator::assemble(const std::vector<std::vector<Complex>>& duhamel_hat) const {
    const int nx = prob_.space_grid.size();
    const int nt = tgrid_.size();
    const int n = ext_.size();
    const double dt = tgrid_.spacing();

    HalfLineState out(prob_.space_grid, tgrid_);
    std::vector<double> q1(nt, 0.0), q2(nt, 0.0);
    const bool have_duhamel = !duhamel_hat.empty();
    if (have_duhamel) {
        for (int it = 0; it < nt; ++it) {
            Complex v(0, 0), d(0, 0);
            for (int i = 0; i < n; ++i) {
                v += duhamel_hat[it][i] * phase0_[i];
                d += duhamel_hat[it][i] * dphase0_[i];
            }
            q1[it] = v.real();
            q2[it] = d.real();
            SpectralCoeffs c;
            c.base_length = n * ext_.spacing();
            c.coeffs = duhamel_hat[it];
            ComplexField f = idft(c, ext_);
            for (int ix = 0; ix < nx; ++ix) out.at(ix, it) = f.values[zero_idx_ + ix].real();
        }
    }

    std::vector<double> c1(nt), c2(nt);
    for (int it = 0; it < nt; ++it) {
        c1[it] = prob_.boundary.h[it] - p1_[it] - q1[it];
        c2[it] = prob_.boundary.g[it] - p2_[it] - q2[it];
    }
    const int n_extra = std::max(8, (int)std::ceil(0.35 * nt));
    Grid1D tgrid_ext(tgrid_.x_min(), tgrid_.x_min() + dt * (nt + n_extra - 1), nt + n_extra);
    auto c1e = taper_extend(c1, tgrid_, tgrid_ext);
    auto c2e = taper_extend(c2, tgrid_, tgrid_ext);

    HalfLineState wd = boundary_dirichlet(c1e, tgrid_ext, prob_.space_grid, tgrid_, opt_);
    HalfLineState wn = boundary_neumann(c2e, tgrid_ext, prob_.space_grid, tgrid_, opt_);

    for (int ix = 0; ix < nx; ++ix)
        for (int it = 0; it < nt; ++it)
            out.at(ix, it) += linear_field_[(size_t)ix * nt + it] + wd.at(ix, it) + wn.at(ix, it);
    for (auto& w : wd.warnings) out.warnings.push_back(w);
    return out;
}

HalfLineState GammaOperator::linear_solution() const {
    if (forcing_hat_.empty()) return assemble({});
    return assemble(duhamel_->trajectory(forcing_hat_));
}

HalfLineState GammaOperator::apply(const HalfLineState& w) const {
    if (!prob_.nonlinearity_on) return linear_solution();
    return assemble(duhamel_->trajectory(nonlinear_hat(w)));
}

SolveReport solve_fixed_point(const IbvpProblem& problem, double tol, int max_iter,
                              BoundaryOpOptions opt) {
    if (!(tol > 0)) throw std::invalid_argument("solve_fixed_point: tol must be positive");
    GammaOperator gamma(problem, opt);
    HalfLineState w = gamma.linear_solution();
    SolveReport rep{w};
    for (int k = 0; k < max_iter; ++k) {
        HalfLineState next = gamma.apply(w);
        double r = l2_distance(next, w);
        rep.residual_history.push_back(r);
        w = next;
        rep.iterations = k + 1;
        if (r < tol) {
            rep.converged = true;
            break;
        }
    }
    rep.solution = w;
    // geometric-decay fit of the residual history
    double logsum = 0.0;
    int cnt = 0;
    for (size_t i = 1; i < rep.residual_history.size(); ++i) {
        double a = rep.residual_history[i - 1], b = rep.residual_history[i];
        if (a > 0 && b > 0) {
            logsum += std::log(b / a);
            ++cnt;
        }
    }
    rep.contraction_ratio = cnt ? std::exp(logsum / cnt) : 0.0;
    rep.energy_audit = energy_audit(rep.solution, problem.boundary);
    return rep;
}

EnergyAudit energy_audit(const HalfLineState& state, const BoundaryData& boundary) {
    const Grid1D& xg = state.space_grid;
    const Grid1D& tg = state.time_grid;
    const int nt = tg.size();
    const double dt = tg.spacing();
    auto wx = quadrature_weights(xg);

    EnergyAudit audit;
    audit.energy.resize(nt);
    std::vector<double> dissip(nt);
    for (int it = 0; it < nt; ++it) {
        std::vector<double> u = state.space_slice(it);
        std::vector<double> ux = finite_diff(u, xg, 1);
        double e = 0, d = 0;
        for (int ix = 0; ix < xg.size(); ++ix) {
            e += wx[ix] * u[ix] * u[ix];
            d += wx[ix] * ux[ix] * ux[ix];
        }
        audit.energy[it] = e;
        dissip[it] = d;
    }
    Traces tr = trace_extract(state);
    audit.residual.assign(nt, 0.0);
    for (int it = 1; it + 1 < nt; ++it) {
        double dE = (audit.energy[it + 1] - audit.energy[it - 1]) / (4.0 * dt);  // (1/2) dE/dt
        double h = boundary.h[it], g = boundary.g[it];
        double rhs = -h * tr.second[it] + 0.5 * g * g - h * g - dissip[it];
        audit.residual[it] = std::abs(dE - rhs);
    }
    return audit;
}

}  // namespace kdvb
