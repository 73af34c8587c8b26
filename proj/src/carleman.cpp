#include "kdvb/carleman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kdvb {

WeightDerivs CarlemanWeight::weight_eval(double x, double t) const {
    if (!(t > 0 && t < T_))
        throw std::invalid_argument("CarlemanWeight: t in {0, T} is singular");
    const double th = 1.0 / (t * (T_ - t));
    const double th_t = (2.0 * t - T_) * th * th;
    WeightDerivs d;
    d.psi = phi(x) * th;
    d.psi_x = phi_p(x) * th;
    d.psi_xx = phi_pp * th;
    d.psi_xxx = 0.0;
    d.psi_t = phi(x) * th_t;
    return d;
}

CarlemanCoeffs carleman_coefficients(const CarlemanWeight& w, double x, double t, double epsilon,
                                     Expansion variant) {
    const double T = w.T();
    if (!(t > 0 && t < T))
        throw std::invalid_argument("carleman_coefficients: t in {0, T} is singular");
    const double s = w.s();
    const double s2 = s * s, s3 = s2 * s;
    const double fp = w.phi_p(x);        // phi'
    const double f = w.phi(x);           // phi
    const double th = 1.0 / (t * (T - t));
    const double th2 = th * th, th3 = th2 * th;
    const double th_t = (2.0 * t - T) * th2;
    const double th_tt = 2.0 * th2 + 2.0 * (2.0 * t - T) * (2.0 * t - T) * th3;

    CarlemanCoeffs c;
    // A = s[psi_t - psi_xx - psi_xxx] - s^2[psi_x^2 + 3 psi_x psi_xx] - s^3[psi_x^3 (+ 3 psi_x psi_xx)]
    c.A = s * (f * th_t + 2.0 * th) - s2 * (fp * fp - 6.0 * fp) * th2 - s3 * fp * fp * fp * th3;
    c.A_x = s * fp * th_t - s2 * (-4.0 * fp + 12.0) * th2 + 6.0 * s3 * fp * fp * th3;
    c.A_t = s * (f * th_tt + 2.0 * th_t) - 2.0 * s2 * (fp * fp - 6.0 * fp) * th * th_t -
            3.0 * s3 * fp * fp * fp * th2 * th_t;
    c.A_xxx = 48.0 * s3 * th3;
    if (variant == Expansion::paper) {
        c.A += 6.0 * s3 * fp * th2;
        c.A_x += -12.0 * s3 * th2;
        c.A_t += 12.0 * s3 * fp * th * th_t;
        // the extra term is linear in phi', so A_xx/A_xxx pick up nothing
    }
    c.B = -s * (2.0 * fp - 6.0) * th - 3.0 * s2 * fp * fp * th2;
    c.B_x = 4.0 * s * th + 12.0 * s2 * fp * th2;
    c.C = -1.0 - 3.0 * s * fp * th;
    c.C_x = 6.0 * s * th;
    c.C_t = -3.0 * s * fp * th_t;

    // C_xx = C_xxx = 0 for the quadratic phi, so (C_x A)_x = C_x A_x and
    // (C_x C)_x = C_x^2.
    c.D = -c.A_t + c.A_xxx - (c.A_x * c.B + c.A * c.B_x) - c.C_x * c.A_x;
    c.E = c.C_t + 2.0 * c.C_x * c.B - c.C_x * c.C_x - (c.B_x * c.C + c.B * c.C_x) -
          epsilon * c.C_x * c.C_x;
    c.F = 3.0 * c.C_x;
    return c;
}

Abc coefficients_abc(const CarlemanWeight& w, double x, double t, Expansion variant) {
    CarlemanCoeffs c = carleman_coefficients(w, x, t, 0.0, variant);
    return {c.A, c.B, c.C};
}

std::pair<Grid1D, Grid1D> margined_grids(double L, double T, int nx, int nt, double delta_x,
                                         double delta_t) {
    return {Grid1D(-L * (1.0 - delta_x), L * (1.0 - delta_x), nx),
            Grid1D(delta_t * T, (1.0 - delta_t) * T, nt)};
}

CoefficientField coefficients_def(const CarlemanWeight& w, const Grid1D& xgrid, const Grid1D& tgrid,
                                  double epsilon, Expansion variant) {
    if (!(epsilon > 0)) throw std::invalid_argument("coefficients_def: epsilon must be positive");
    CoefficientField out{xgrid, tgrid, epsilon, {}, {}, {}, {}, {}, {}, 0.0};
    const int nx = xgrid.size(), nt = tgrid.size();
    out.A.resize((size_t)nx * nt);
    out.B.resize((size_t)nx * nt);
    out.C.resize((size_t)nx * nt);
    out.D.resize((size_t)nx * nt);
    out.E.resize((size_t)nx * nt);
    out.F.resize((size_t)nx * nt);
    for (int ix = 0; ix < nx; ++ix)
        for (int it = 0; it < nt; ++it) {
            CarlemanCoeffs c =
                carleman_coefficients(w, xgrid.point(ix), tgrid.point(it), epsilon, variant);
            size_t i = (size_t)ix * nt + it;
            out.A[i] = c.A;
            out.B[i] = c.B;
            out.C[i] = c.C;
            out.D[i] = c.D;
            out.E[i] = c.E;
            out.F[i] = c.F;
        }

    // one-time cross-check of every closed-form derivative entering D and E.
    // A, B, C are polynomials of degree <= 3 in x, so the five-point fourth-
    // order first difference and the four-point third difference are exact in
    // x at any step (only round-off remains, tamed by a large step); the
    // t-derivatives use Richardson-extrapolated central differences.
    double worst = 0.0;
    const double hx = 0.05 * w.L();
    auto val = [&](double x, double t) { return carleman_coefficients(w, x, t, epsilon, variant); };
    auto rel = [](double a, double b) {
        return std::abs(a - b) / (1.0 + std::max(std::abs(a), std::abs(b)));
    };
    for (double fx : {0.3, 0.62}) {
        for (double ft : {0.35, 0.5, 0.71}) {
            double x = -w.L() + 2.0 * w.L() * fx;
            double t = w.T() * ft;
            CarlemanCoeffs c = val(x, t);
            auto dx4 = [&](auto get) {
                return (get(val(x - 2 * hx, t)) - 8 * get(val(x - hx, t)) +
                        8 * get(val(x + hx, t)) - get(val(x + 2 * hx, t))) /
                       (12 * hx);
            };
            auto dt_rich = [&](auto get) {
                double ht = 2e-3 * w.T();
                auto cd = [&](double h) {
                    return (get(val(x, t + h)) - get(val(x, t - h))) / (2 * h);
                };
                return (4.0 * cd(ht / 2) - cd(ht)) / 3.0;
            };
            double ax = dx4([](const CarlemanCoeffs& q) { return q.A; });
            double bx = dx4([](const CarlemanCoeffs& q) { return q.B; });
            double cx = dx4([](const CarlemanCoeffs& q) { return q.C; });
            double at = dt_rich([](const CarlemanCoeffs& q) { return q.A; });
            double ct = dt_rich([](const CarlemanCoeffs& q) { return q.C; });
            double axxx = (val(x + 2 * hx, t).A - 2 * val(x + hx, t).A + 2 * val(x - hx, t).A -
                           val(x - 2 * hx, t).A) /
                          (2 * hx * hx * hx);
            worst = std::max({worst, rel(ax, c.A_x), rel(at, c.A_t), rel(bx, c.B_x),
                              rel(cx, c.C_x), rel(ct, c.C_t), rel(axxx, c.A_xxx)});
        }
    }
    out.fd_crosscheck_max_rel = worst;
    return out;
}

PositivityScan positivity_scan(double L, double T, double epsilon,
                               const std::vector<double>& s_ladder, int nx, int nt, double delta_x,
                               double delta_t, Expansion variant) {
    PositivityScan scan;
    auto [xg, tg] = margined_grids(L, T, nx, nt, delta_x, delta_t);
    for (double s : s_ladder) {
        CarlemanWeight w(L, T, s);
        double mD = std::numeric_limits<double>::infinity(), mE = mD, mF = mD;
        for (int ix = 0; ix < nx; ++ix)
            for (int it = 0; it < nt; ++it) {
                CarlemanCoeffs c =
                    carleman_coefficients(w, xg.point(ix), tg.point(it), epsilon, variant);
                mD = std::min(mD, c.D);
                mE = std::min(mE, c.E);
                mF = std::min(mF, c.F);
            }
        scan.rows.push_back({s, mD, mE, mF});
        if (!scan.found && mD > 0 && mE > 0 && mF > 0) {
            scan.found = true;
            scan.s0 = s;
        }
    }
    return scan;
}

AdmissibleTest::Derivs AdmissibleTest::eval(double x, double t) const {
    const double L2 = L * L;
    const double u = L2 - x * x;
    const double E0 = u * u * u;
    const double E1 = -6.0 * x * u * u;
    const double E2 = -6.0 * u * u + 24.0 * x * x * u;
    const double E3 = 72.0 * L2 * x - 120.0 * x * x * x;

    double W = 0, Wx = 0, Wxx = 0, Wxxx = 0, Wt = 0;
    for (const auto& tm : terms) {
        double X = 1, X1 = 0, X2 = 0, X3 = 0;
        if (tm.has_gauss_x) {
            const double z = (x - tm.cx) / tm.wx;
            const double g = std::exp(-z * z);
            const double iw = 1.0 / tm.wx;
            X = g;
            X1 = -2.0 * z * iw * g;
            X2 = (4.0 * z * z - 2.0) * iw * iw * g;
            X3 = (12.0 * z - 8.0 * z * z * z) * iw * iw * iw * g;
        }
        double Tv = 1, Tt = 0;
        if (tm.kind == Term::TimeKind::gauss) {
            const double z = (t - tm.ct) / tm.wt;
            Tv = std::exp(-z * z);
            Tt = -2.0 * z / tm.wt * Tv;
        } else {
            const double a = M_PI / T;
            const double sn = std::sin(a * t), cs = std::cos(a * t);
            Tv = sn * sn * sn;
            Tt = 3.0 * a * sn * sn * cs;
        }
        W += tm.amp * X * Tv;
        Wx += tm.amp * X1 * Tv;
        Wxx += tm.amp * X2 * Tv;
        Wxxx += tm.amp * X3 * Tv;
        Wt += tm.amp * X * Tt;
    }
    Derivs d;
    d.q = E0 * W;
    d.q_x = E1 * W + E0 * Wx;
    d.q_xx = E2 * W + 2.0 * E1 * Wx + E0 * Wxx;
    d.q_xxx = E3 * W + 3.0 * E2 * Wx + 3.0 * E1 * Wxx + E0 * Wxxx;
    d.q_t = E0 * Wt;
    return d;
}

AdmissibleTest AdmissibleTest::sine_cubed(double L, double T) {
    AdmissibleTest q;
    q.L = L;
    q.T = T;
    Term t;
    t.kind = Term::TimeKind::sin_cubed;
    q.terms.push_back(t);
    return q;
}

AdmissibleTest AdmissibleTest::random_bumps(double L, double T, std::mt19937_64& rng, int n_bumps) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    AdmissibleTest q;
    q.L = L;
    q.T = T;
    for (int i = 0; i < n_bumps; ++i) {
        Term t;
        t.amp = 0.3 + uni(rng);
        t.has_gauss_x = true;
        t.cx = L * (2.0 * uni(rng) - 1.0) * 0.7;
        t.wx = L * (0.25 + 0.5 * uni(rng));
        t.kind = Term::TimeKind::gauss;
        t.ct = T * (0.25 + 0.5 * uni(rng));
        t.wt = T * (0.15 + 0.3 * uni(rng));
        q.terms.push_back(t);
    }
    return q;
}

CarlemanCheck verify_inequality(const CarlemanWeight& w, const AdmissibleTest& q, int nx, int nt,
                                double delta_x, double delta_t) {
    if (q.L != w.L() || q.T != w.T())
        throw std::invalid_argument("verify_inequality: test function domain mismatch");
    // admissibility: the envelope kills q, q_x, q_xx at +-L
    for (double t : {0.3 * w.T(), 0.7 * w.T()})
        for (double x : {-w.L(), w.L()}) {
            auto d = q.eval(x, t);
            if (std::abs(d.q) + std::abs(d.q_x) + std::abs(d.q_xx) > 1e-12)
                throw std::invalid_argument("verify_inequality: q not admissible");
        }

    auto [xg, tg] = margined_grids(w.L(), w.T(), nx, nt, delta_x, delta_t);
    auto wx = quadrature_weights(xg);
    auto wt = quadrature_weights(tg);
    const double s = w.s();
    const double s3 = s * s * s, s5 = s3 * s * s;

    // pass 1: largest exponent of the shared weight
    double M = -std::numeric_limits<double>::infinity();
    for (int ix = 0; ix < nx; ++ix)
        for (int it = 0; it < nt; ++it)
            M = std::max(M, -2.0 * s * w.weight_eval(xg.point(ix), tg.point(it)).psi);

    double acc_l = 0.0, acc_r = 0.0;
    for (int ix = 0; ix < nx; ++ix) {
        const double x = xg.point(ix);
        for (int it = 0; it < nt; ++it) {
            const double t = tg.point(it);
            const double th = 1.0 / (t * (w.T() - t));
            const double th3 = th * th * th, th5 = th3 * th * th;
            auto d = q.eval(x, t);
            const double e = std::exp(-2.0 * s * w.weight_eval(x, t).psi - M);
            const double pq = d.q_t - d.q_xx - d.q_xxx;
            acc_l += wx[ix] * wt[it] * e *
                     (s5 * th5 * d.q * d.q + s3 * th3 * d.q_x * d.q_x + s * th * d.q_xx * d.q_xx);
            acc_r += wx[ix] * wt[it] * e * pq * pq;
        }
    }

    CarlemanCheck out;
    if (acc_l <= 0.0 && acc_r <= 0.0) return out;  // 0/0 sentinel, defined = false
    out.defined = true;
    out.log_lhs = M + std::log(acc_l);
    out.log_rhs = M + std::log(acc_r);
    out.lhs = std::exp(out.log_lhs);
    out.rhs_raw = std::exp(out.log_rhs);
    out.ratio = std::exp(out.log_lhs - out.log_rhs);
    return out;
}

}  // namespace kdvb
