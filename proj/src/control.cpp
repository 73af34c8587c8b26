#include "kdvb/control.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace kdvb {

ControlProblem::ControlProblem(Grid1D xg, Grid1D tg, double t1_, double t2_, double eps,
                               std::vector<double> f_)
    : xgrid(xg), tgrid(tg), t1(t1_), t2(t2_), epsilon(eps), f(std::move(f_)) {
    const double T_ = tgrid.x_max();
    if (!(0 < t1 && t1 < t2 && t2 < T_))
        throw std::invalid_argument("ControlProblem: need 0 < t1 < t2 < T");
    if (!(0 < epsilon && epsilon < std::min(t1, T_ - t2)))
        throw std::invalid_argument("ControlProblem: need 0 < eps < min(t1, T - t2)");
    if (f.size() != (size_t)xgrid.size() * tgrid.size())
        throw std::invalid_argument("ControlProblem: forcing size does not match grids");
    double inside = 0, outside = 0;
    for (int ix = 0; ix < xgrid.size(); ++ix)
        for (int it = 0; it < tgrid.size(); ++it) {
            double v = f[(size_t)ix * tgrid.size() + it];
            double t = tgrid.point(it);
            (t >= t1 - 1e-12 && t <= t2 + 1e-12 ? inside : outside) += v * v;
        }
    if (outside > 1e-12 * (inside + outside) && inside + outside > 0)
        throw std::invalid_argument("ControlProblem: forcing support leaks outside [t1, t2]");
}

namespace {

// adjoint Q = -d_t + d_xxx - d_xx applied to an x-major sampled field
std::vector<double> apply_adjoint(const std::vector<double>& p, const Grid1D& xg,
                                  const Grid1D& tg) {
    const int nx = xg.size(), nt = tg.size();
    std::vector<double> out((size_t)nx * nt, 0.0);
    std::vector<double> series(nt), slice(nx);
    for (int ix = 0; ix < nx; ++ix) {
        for (int it = 0; it < nt; ++it) series[it] = p[(size_t)ix * nt + it];
        auto dt = finite_diff(series, tg, 1);
        for (int it = 0; it < nt; ++it) out[(size_t)ix * nt + it] = -dt[it];
    }
    for (int it = 0; it < nt; ++it) {
        for (int ix = 0; ix < nx; ++ix) slice[ix] = p[(size_t)ix * nt + it];
        auto d3 = finite_diff(slice, xg, 3);
        auto d2 = finite_diff(slice, xg, 2);
        for (int ix = 0; ix < nx; ++ix) out[(size_t)ix * nt + it] += d3[ix] - d2[ix];
    }
    return out;
}

// forward P = d_t - d_xxx - d_xx, same stencils
std::vector<double> apply_forward(const std::vector<double>& u, const Grid1D& xg,
                                  const Grid1D& tg) {
    const int nx = xg.size(), nt = tg.size();
    std::vector<double> out((size_t)nx * nt, 0.0);
    std::vector<double> series(nt), slice(nx);
    for (int ix = 0; ix < nx; ++ix) {
        for (int it = 0; it < nt; ++it) series[it] = u[(size_t)ix * nt + it];
        auto dt = finite_diff(series, tg, 1);
        for (int it = 0; it < nt; ++it) out[(size_t)ix * nt + it] = dt[it];
    }
    for (int it = 0; it < nt; ++it) {
        for (int ix = 0; ix < nx; ++ix) slice[ix] = u[(size_t)ix * nt + it];
        auto d3 = finite_diff(slice, xg, 3);
        auto d2 = finite_diff(slice, xg, 2);
        for (int ix = 0; ix < nx; ++ix) out[(size_t)ix * nt + it] -= d3[ix] + d2[ix];
    }
    return out;
}

// uniform cubic B-spline with support [0, 4]
double bspline3(double u) {
    if (u <= 0 || u >= 4) return 0.0;
    if (u < 1) return u * u * u / 6.0;
    if (u < 2) return (-3 * u * u * u + 12 * u * u - 12 * u + 4) / 6.0;
    if (u < 3) return (3 * u * u * u - 24 * u * u + 60 * u - 44) / 6.0;
    double w = 4.0 - u;
    return w * w * w / 6.0;
}

}  // namespace

ControlSolution hum_solve(const ControlProblem& prob, const HumOptions& opt) {
    const Grid1D& xg = prob.xgrid;
    const Grid1D& tg = prob.tgrid;
    const int nx = xg.size(), nt = tg.size();
    const int N = nx * nt;
    const double dt = tg.spacing();

    ControlSolution sol(xg, tg);
    sol.v.assign(N, 0.0);

    double fnorm2 = 0.0;
    for (double v : prob.f) fnorm2 += v * v;
    if (fnorm2 == 0.0) return sol;  // zero forcing, zero control

    // trial space: (1 - xi^2)^3 Chebyshev in x, interior cubic B-splines in t;
    // the spline window sits one stencil radius inside [t1-eps, t2+eps] so
    // v = Qp cannot leak out of it
    const double wa = prob.t1 - prob.epsilon + 3.0 * dt;
    const double wb = prob.t2 + prob.epsilon - 3.0 * dt;
    if (wb - wa < 8.0 * dt)
        throw std::invalid_argument("hum_solve: time grid too coarse for the support window");
    const int Kx = opt.n_basis_x, Kt = opt.n_basis_t;
    const int Nb = Kx * Kt;
    const double du = (wb - wa) / (Kt + 3);

    std::vector<std::vector<double>> Xb(Kx, std::vector<double>(nx));
    for (int ix = 0; ix < nx; ++ix) {
        double xi = (2.0 * xg.point(ix) - (xg.x_min() + xg.x_max())) / (xg.x_max() - xg.x_min());
        double env = std::pow(1.0 - xi * xi, 3);
        double tm2 = 1.0, tm1 = xi;
        for (int j = 0; j < Kx; ++j) {
            double T_j = (j == 0) ? 1.0 : (j == 1 ? xi : 2.0 * xi * tm1 - tm2);
            if (j >= 2) {
                tm2 = tm1;
                tm1 = T_j;
            }
            Xb[j][ix] = env * T_j;
        }
    }
    std::vector<std::vector<double>> Tb(Kt, std::vector<double>(nt));
    for (int k = 0; k < Kt; ++k)
        for (int it = 0; it < nt; ++it) Tb[k][it] = bspline3((tg.point(it) - wa) / du - k);

    Eigen::MatrixXd G(N, Nb);
    Eigen::VectorXd b(Nb);
    std::vector<double> basis(N);
    for (int j = 0; j < Kx; ++j)
        for (int k = 0; k < Kt; ++k) {
            for (int ix = 0; ix < nx; ++ix)
                for (int it = 0; it < nt; ++it)
                    basis[(size_t)ix * nt + it] = Xb[j][ix] * Tb[k][it];
            auto qb = apply_adjoint(basis, xg, tg);
            const int col = j * Kt + k;
            double dot = 0.0;
            for (int i = 0; i < N; ++i) {
                G(i, col) = qb[i];
                dot += basis[i] * prob.f[i];
            }
            b(col) = dot;
        }

    // column equilibration, then the Galerkin normal equations
    Eigen::VectorXd d(Nb);
    for (int i = 0; i < Nb; ++i) {
        double n = G.col(i).norm();
        d(i) = n > 0 ? 1.0 / n : 1.0;
    }
    Eigen::MatrixXd Gs = G * d.asDiagonal();
    Eigen::MatrixXd M = Gs.transpose() * Gs;
    Eigen::VectorXd bs = d.asDiagonal() * b;

    Eigen::VectorXd c = M.ldlt().solve(bs);
    double rel = (M * c - bs).norm() / bs.norm();
    if (!c.allFinite() || rel > 1e-8) {
        double shift = opt.tikhonov * M.trace() / Nb;
        Eigen::MatrixXd Mr = M + shift * Eigen::MatrixXd::Identity(Nb, Nb);
        c = Mr.ldlt().solve(bs);
        rel = (M * c - bs).norm() / bs.norm();
        sol.regularized = true;
    }
    sol.forward_residual = rel;
    sol.n_basis = Nb;

    Eigen::VectorXd vv = Gs * c;
    for (int i = 0; i < N; ++i) sol.v[i] = vv(i);

    // ||Qp||^2 vs <p, f> (both under the uniform hx*ht inner product)
    const double hxht = xg.spacing() * tg.spacing();
    double cost = hxht * vv.squaredNorm();
    double pf = hxht * c.dot(bs);
    sol.quadratic_cost = cost;
    sol.optimality_gap = std::abs(cost - pf) / std::max({std::abs(cost), std::abs(pf), 1e-300});

    double inside = 0, outside = 0;
    for (int ix = 0; ix < nx; ++ix)
        for (int it = 0; it < nt; ++it) {
            double t = tg.point(it);
            double v2 = sol.v[(size_t)ix * nt + it] * sol.v[(size_t)ix * nt + it];
            (t >= prob.t1 - prob.epsilon - 1e-12 && t <= prob.t2 + prob.epsilon + 1e-12 ? inside
                                                                                        : outside) +=
                v2;
        }
    sol.support_leakage = outside / std::max(inside + outside, 1e-300);

    auto pv = apply_forward(sol.v, xg, tg);
    double num = 0, den = 0;
    for (int ix = 2; ix < nx - 2; ++ix)
        for (int it = 2; it < nt - 2; ++it) {
            size_t i = (size_t)ix * nt + it;
            num += (pv[i] - prob.f[i]) * (pv[i] - prob.f[i]);
            den += prob.f[i] * prob.f[i];
        }
    sol.grid_residual = std::sqrt(num / std::max(den, 1e-300));
    return sol;
}

double NonControlMode::value(double x, double t) const {
    return std::exp(-lambda * t) * std::exp(a * x) * std::sin(b * x);
}

NonControlMode mode_construct(double a) {
    if (!(a > 0)) throw std::invalid_argument("mode_construct: a must be positive");
    NonControlMode m;
    m.a = a;
    m.b = std::sqrt(a * (2.0 + 3.0 * a));
    m.lambda = 2.0 * a * (1.0 + 2.0 * a) * (1.0 + 2.0 * a);
    m.z1 = -(1.0 + 2.0 * a);
    Complex z(a, m.b);
    double r1 = std::abs(z * z * z + z * z + m.lambda);
    double r2 = std::abs(m.z1 * m.z1 * m.z1 + m.z1 * m.z1 + m.lambda);
    m.root_residual = std::max(r1, r2);
    return m;
}

double mode_residual(const NonControlMode& mode, const Grid1D& xgrid, const Grid1D& tgrid) {
    const int nx = xgrid.size(), nt = tgrid.size();
    std::vector<double> u((size_t)nx * nt);
    for (int ix = 0; ix < nx; ++ix)
        for (int it = 0; it < nt; ++it)
            u[(size_t)ix * nt + it] = mode.value(xgrid.point(ix), tgrid.point(it));
    auto pu = apply_forward(u, xgrid, tgrid);
    double worst = 0.0;
    for (double v : pu) worst = std::max(worst, std::abs(v));
    return worst;
}

std::vector<NonControlScanRow> noncontrol_scan(const std::vector<double>& a_values, double X,
                                               double T, int nx, int nt) {
    Grid1D xg(0.0, X, nx);
    Grid1D tg(0.0, T, nt);
    std::vector<NonControlScanRow> rows;
    for (double a : a_values) {
        NonControlMode m = mode_construct(a);
        std::vector<double> w0(nx);
        for (int ix = 0; ix < nx; ++ix) {
            double v = m.value(xg.point(ix), 0.0);
            w0[ix] = v * v;
        }
        std::vector<double> tx(nt), txx(nt);
        for (int it = 0; it < nt; ++it) {
            tx[it] = m.wx0(tg.point(it));
            txx[it] = m.wxx0(tg.point(it));
        }
        NonControlScanRow r;
        r.a = a;
        r.b = m.b;
        r.lambda = m.lambda;
        r.numerator = std::sqrt(quadrature(w0, xg));
        r.denominator = sobolev_h1_norm(tx, tg) + sobolev_h1_norm(txx, tg);
        r.ratio = r.numerator / r.denominator;
        rows.push_back(r);
    }
    return rows;
}

namespace {

double cinf_ramp(double s) {  // 0 at s<=0, 1 at s>=1
    if (s <= 1e-9) return 0.0;
    if (s >= 1.0 - 1e-9) return 1.0;
    double fa = std::exp(-1.0 / s);
    double fb = std::exp(-1.0 / (1.0 - s));
    return fa / (fa + fb);
}

double cinf_ramp_deriv(double s) {
    if (s <= 1e-9 || s >= 1.0 - 1e-9) return 0.0;
    double fa = std::exp(-1.0 / s);
    double fb = std::exp(-1.0 / (1.0 - s));
    double fap = fa / (s * s);
    double fbp = -fb / ((1.0 - s) * (1.0 - s));
    double den = fa + fb;
    return (fap * den - fa * (fap + fbp)) / (den * den);
}

}  // namespace

double steering_cutoff(double t, double tau, double T) {
    return cinf_ramp((T - tau - t) / (T - 2.0 * tau));
}

double steering_cutoff_deriv(double t, double tau, double T) {
    return -cinf_ramp_deriv((T - tau - t) / (T - 2.0 * tau)) / (T - 2.0 * tau);
}

SteerResult steer_pipeline(const SteeringPlan& plan, const HumOptions& hum_opt) {
    const Grid1D& xg = plan.xgrid;
    const int nx = xg.size();
    const int nt = plan.nt;
    Grid1D tg(0.0, plan.T, nt);
    const double T = plan.T;

    double tau = plan.tau > 0 ? plan.tau : std::max(plan.t1, T - plan.t2);
    if (!(tau >= plan.t1 - 1e-12 && T - tau <= plan.t2 + 1e-12 && tau < T / 2))
        throw std::invalid_argument("steer_pipeline: cutoff window must sit inside [t1, t2]");

    // stage 1: forward flow of u0
    ComplexField u0e = zero_extend(plan.u0, xg);
    SpectralCoeffs u0h = dft(u0e);
    // stage 2: flow pinned to uT at t = T (regularized backward spectral solve)
    ComplexField uTe = zero_extend(plan.uT, xg);
    SpectralCoeffs uTh = dft(uTe);
    SpectralCoeffs w0h = uTh, uTlp = uTh;
    for (int i = 0; i < w0h.size(); ++i) {
        double xi = w0h.wavenumber(i);
        double amp = xi * xi * T;
        if (amp > std::log(plan.max_amplification)) {
            w0h.coeffs[i] = Complex(0, 0);
            uTlp.coeffs[i] = Complex(0, 0);
        } else {
            w0h.coeffs[i] *= std::exp(Complex(amp, xi * xi * xi * T));
        }
    }
    const int j0 = extension_zero_index(xg);

    auto weighted_err = [&](const std::vector<double>& a, const std::vector<double>& b) {
        std::vector<double> num(nx), den(nx);
        for (int ix = 0; ix < nx; ++ix) {
            double w = std::exp(-2.0 * plan.beta * xg.point(ix));
            num[ix] = (a[ix] - b[ix]) * (a[ix] - b[ix]) * w;
            den[ix] = b[ix] * b[ix] * w;
        }
        return std::sqrt(quadrature(num, xg) / std::max(quadrature(den, xg), 1e-300));
    };

    SteerResult res(xg, tg);
    {
        ComplexField lp = idft(uTlp, u0e.grid);
        std::vector<double> uTr(nx);
        for (int ix = 0; ix < nx; ++ix) uTr[ix] = lp.values[j0 + ix].real();
        res.backward_cutoff_err = weighted_err(uTr, plan.uT);
    }

    std::vector<double> nu1((size_t)nx * nt), nu2((size_t)nx * nt);
    for (int it = 0; it < nt; ++it) {
        double t = tg.point(it);
        SpectralCoeffs c1 = u0h, c2 = w0h;
        for (int i = 0; i < c1.size(); ++i) {
            double xi = c1.wavenumber(i);
            Complex m = std::exp(Complex(-xi * xi * t, -xi * xi * xi * t));
            c1.coeffs[i] *= m;
            c2.coeffs[i] *= m;
        }
        ComplexField f1 = idft(c1, u0e.grid), f2 = idft(c2, u0e.grid);
        for (int ix = 0; ix < nx; ++ix) {
            nu1[(size_t)ix * nt + it] = f1.values[j0 + ix].real();
            nu2[(size_t)ix * nt + it] = f2.values[j0 + ix].real();
        }
    }

    // forcing f = phi'(t) (nu1 - nu2); the stage-2 flow solves the equation,
    // so the residual-based assembly has no (phi - 1) term
    res.f.assign((size_t)nx * nt, 0.0);
    double inside = 0, outside = 0;
    for (int it = 0; it < nt; ++it) {
        double t = tg.point(it);
        double dphi = steering_cutoff_deriv(t, tau, T);
        for (int ix = 0; ix < nx; ++ix) {
            double v = dphi * (nu1[(size_t)ix * nt + it] - nu2[(size_t)ix * nt + it]);
            res.f[(size_t)ix * nt + it] = v;
            (t >= plan.t1 - 1e-12 && t <= plan.t2 + 1e-12 ? inside : outside) += v * v;
        }
    }
    res.f_support_violation = outside / std::max(inside + outside, 1e-300);
    if (res.f_support_violation > 1e-12)
        throw std::runtime_error("steer_pipeline: assembled forcing leaks outside [t1, t2]");

    // omega: P omega = -f
    std::vector<double> neg_f(res.f.size());
    for (size_t i = 0; i < res.f.size(); ++i) neg_f[i] = -res.f[i];
    ControlProblem cp(xg, tg, plan.t1, plan.t2, plan.epsilon, std::move(neg_f));
    res.hum = hum_solve(cp, hum_opt);

    res.nu.assign((size_t)nx * nt, 0.0);
    res.stage_norm1.resize(nt);
    res.stage_norm2.resize(nt);
    res.stage_norm_omega.resize(nt);
    auto wx = quadrature_weights(xg);
    for (int it = 0; it < nt; ++it) {
        double t = tg.point(it);
        double phi = steering_cutoff(t, tau, T);
        double s1 = 0, s2 = 0, s3 = 0;
        for (int ix = 0; ix < nx; ++ix) {
            size_t i = (size_t)ix * nt + it;
            res.nu[i] = phi * nu1[i] + (1.0 - phi) * nu2[i] + res.hum.v[i];
            s1 += wx[ix] * nu1[i] * nu1[i];
            s2 += wx[ix] * nu2[i] * nu2[i];
            s3 += wx[ix] * res.hum.v[i] * res.hum.v[i];
        }
        res.stage_norm1[it] = std::sqrt(s1);
        res.stage_norm2[it] = std::sqrt(s2);
        res.stage_norm_omega[it] = std::sqrt(s3);
    }

    std::vector<double> nu_0(nx), nu_T(nx), du0(nx), duT(nx);
    for (int ix = 0; ix < nx; ++ix) {
        nu_0[ix] = res.nu[(size_t)ix * nt + 0];
        nu_T[ix] = res.nu[(size_t)ix * nt + nt - 1];
        du0[ix] = (nu_0[ix] - plan.u0[ix]) * (nu_0[ix] - plan.u0[ix]);
        duT[ix] = plan.u0[ix] * plan.u0[ix];
    }
    res.endpoint_err0 = std::sqrt(quadrature(du0, xg) / std::max(quadrature(duT, xg), 1e-300));
    res.endpoint_errT = weighted_err(nu_T, plan.uT);

    auto pnu = apply_forward(res.nu, xg, tg);
    double acc = 0;
    long cnt = 0;
    for (int ix = 2; ix < nx - 2; ++ix)
        for (int it = 2; it < nt - 2; ++it) {
            double v = pnu[(size_t)ix * nt + it];
            acc += v * v;
            ++cnt;
        }
    res.pde_residual_rms = std::sqrt(acc / std::max<long>(cnt, 1));
    return res;
}

}  // namespace kdvb
