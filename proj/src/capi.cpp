#include "kdvb/kdvb.h"

#include <json.hpp>

#include <cmath>
#include <cstring>
#include <memory>
#include <random>

#include "kdvb/carleman.hpp"
#include "kdvb/control.hpp"
#include "kdvb/ibvp.hpp"
#include "kdvb/linear_ops.hpp"
#include "kdvb/numerics.hpp"
#include "kdvb/periodic.hpp"

using nlohmann::json;

struct kdvb_result {
    struct Table {
        std::string name;
        long rows = 0, cols = 0;
        std::vector<std::string> col_names;
        std::vector<double> data;  // row-major
    };
    std::vector<Table> tables;
    std::string scalars;

    Table& add(const std::string& name, std::vector<std::string> cols) {
        tables.push_back({name, 0, (long)cols.size(), std::move(cols), {}});
        return tables.back();
    }
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& m) { g_last_error = m; }

template <typename F>
kdvb_status guarded(F&& fn) {
    try {
        fn();
        return KDVB_OK;
    } catch (const std::invalid_argument& e) {
        set_error(e.what());
        return KDVB_ERR_INVALID;
    } catch (const std::exception& e) {
        set_error(e.what());
        return KDVB_ERR_NUMERIC;
    }
}

void push_row(kdvb_result::Table& t, std::initializer_list<double> row) {
    t.data.insert(t.data.end(), row);
    ++t.rows;
}

// field table: first column x, one column per time node
void add_field_table(kdvb_result& res, const std::string& name, const kdvb::Grid1D& xg,
                     const kdvb::Grid1D& tg, const std::vector<double>& xmajor) {
    std::vector<std::string> cols{"x"};
    char buf[48];
    for (int it = 0; it < tg.size(); ++it) {
        snprintf(buf, sizeof buf, "t=%.10g", tg.point(it));
        cols.push_back(buf);
    }
    auto& t = res.add(name, std::move(cols));
    const int nt = tg.size();
    for (int ix = 0; ix < xg.size(); ++ix) {
        t.data.push_back(xg.point(ix));
        for (int it = 0; it < nt; ++it) t.data.push_back(xmajor[(size_t)ix * nt + it]);
        ++t.rows;
    }
}

kdvb::ModeCoeffs random_coeffs(int n_max, unsigned long long seed, int which) {
    // summable draw spectrum c_n ~ <n>^{-2} (a fixed H^1-type ball, so the
    // worst ratio is saturated by observable scales), drawn per-mode in the
    // order 0, +-1, +-2, ... from a per-draw stream: raising n_max extends a
    // draw with new small coefficients instead of resampling the low modes
    std::mt19937_64 rng(seed + 7919ull * (unsigned long long)(which + 1));
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    kdvb::ModeCoeffs c(n_max);
    for (int k = 0; k <= n_max; ++k) {
        double w = 1.0 / (1.0 + (double)k * k);
        c.coeff(k) = kdvb::Complex(uni(rng), uni(rng)) * w;
        if (k > 0) c.coeff(-k) = kdvb::Complex(uni(rng), uni(rng)) * w;
    }
    return c;
}

}  // namespace

extern "C" {

const char* kdvb_version(void) { return "0.1.0"; }
const char* kdvb_last_error(void) { return g_last_error.c_str(); }

kdvb_status kdvb_characteristic_roots(double tau_re, double tau_im, double roots[6],
                                      int decaying[3], int* n_decaying, int* degenerate) {
    return guarded([&] {
        auto t = kdvb::characteristic_roots(kdvb::Complex(tau_re, tau_im));
        for (int i = 0; i < 3; ++i) {
            roots[2 * i] = t.roots[i].real();
            roots[2 * i + 1] = t.roots[i].imag();
            decaying[i] = 0;
        }
        for (int i : t.decaying) decaying[i] = 1;
        if (n_decaying) *n_decaying = (int)t.decaying.size();
        if (degenerate) *degenerate = t.degenerate ? 1 : 0;
    });
}

kdvb_status kdvb_cubic_roots(double c2_re, double c2_im, double c1_re, double c1_im, double c0_re,
                             double c0_im, double roots[6]) {
    return guarded([&] {
        auto r = kdvb::cubic_roots({c2_re, c2_im}, {c1_re, c1_im}, {c0_re, c0_im});
        for (int i = 0; i < 3; ++i) {
            roots[2 * i] = r.roots[i].real();
            roots[2 * i + 1] = r.roots[i].imag();
        }
    });
}

kdvb_status kdvb_whole_line_propagate(const double* re, const double* im, long n, double period,
                                      double t, double* out_re, double* out_im) {
    return guarded([&] {
        if (n < 4) throw std::invalid_argument("need at least 4 samples");
        if (!(period > 0)) throw std::invalid_argument("period must be positive");
        double d = period / n;
        kdvb::Grid1D g(0.0, d * (n - 1), (int)n);
        std::vector<kdvb::Complex> v(n);
        for (long i = 0; i < n; ++i) v[i] = kdvb::Complex(re[i], im ? im[i] : 0.0);
        auto out = kdvb::whole_line_propagate(kdvb::ComplexField(g, std::move(v)), t);
        for (long i = 0; i < n; ++i) {
            out_re[i] = out.values[i].real();
            if (out_im) out_im[i] = out.values[i].imag();
        }
    });
}

kdvb_status kdvb_periodic_spectrum(double L, int n_max, double* lambda_re, double* lambda_im,
                                   double* gap, double* t_star_min) {
    return guarded([&] {
        auto s = kdvb::spectrum(L, n_max);
        for (int i = 0; i < 2 * n_max + 1; ++i) {
            lambda_re[i] = s.eigenvalues[i].real();
            lambda_im[i] = s.eigenvalues[i].imag();
        }
        auto ing = kdvb::ingham_params(L);
        if (gap) *gap = ing.gamma;
        if (t_star_min) *t_star_min = ing.t_star_min;
    });
}

kdvb_status kdvb_observability_ratio(double L, double l, double T, int n_max, const double* c_re,
                                     const double* c_im, int use_quadrature, int nx, int nt,
                                     double* ratio) {
    return guarded([&] {
        kdvb::ModeCoeffs c(n_max);
        for (int i = 0; i < 2 * n_max + 1; ++i)
            c.c[i] = kdvb::Complex(c_re[i], c_im ? c_im[i] : 0.0);
        kdvb::ObservabilityOptions opt;
        opt.use_quadrature = use_quadrature != 0;
        if (nx > 0) opt.nx = nx;
        if (nt > 0) opt.nt = nt;
        *ratio = kdvb::observability_ratio(c, L, l, T, opt);
    });
}

kdvb_status kdvb_noncontrol_mode(double a, double* b, double* lambda, double* root_residual) {
    return guarded([&] {
        auto m = kdvb::mode_construct(a);
        if (b) *b = m.b;
        if (lambda) *lambda = m.lambda;
        if (root_residual) *root_residual = m.root_residual;
    });
}

void kdvb_result_free(kdvb_result* r) { delete r; }

int kdvb_result_table_count(const kdvb_result* r) { return r ? (int)r->tables.size() : 0; }

const char* kdvb_result_table_name(const kdvb_result* r, int table) {
    if (!r || table < 0 || table >= (int)r->tables.size()) return nullptr;
    return r->tables[table].name.c_str();
}

kdvb_status kdvb_result_table_dims(const kdvb_result* r, int table, long* rows, long* cols) {
    if (!r || table < 0 || table >= (int)r->tables.size()) {
        set_error("bad result table index");
        return KDVB_ERR_INVALID;
    }
    if (rows) *rows = r->tables[table].rows;
    if (cols) *cols = r->tables[table].cols;
    return KDVB_OK;
}

const char* kdvb_result_table_column(const kdvb_result* r, int table, int col) {
    if (!r || table < 0 || table >= (int)r->tables.size()) return nullptr;
    const auto& t = r->tables[table];
    if (col < 0 || col >= (int)t.col_names.size()) return nullptr;
    return t.col_names[col].c_str();
}

const double* kdvb_result_table_data(const kdvb_result* r, int table) {
    if (!r || table < 0 || table >= (int)r->tables.size()) return nullptr;
    return r->tables[table].data.data();
}

const char* kdvb_result_scalars_json(const kdvb_result* r) {
    return r ? r->scalars.c_str() : nullptr;
}

kdvb_status kdvb_run_ivp(const double* u0, long n, double x_min, double x_max, double t_max,
                         int nt, kdvb_result** out) {
    return guarded([&] {
        kdvb::Grid1D xg(x_min, x_max, (int)n);
        std::vector<kdvb::Complex> v(n);
        for (long i = 0; i < n; ++i) v[i] = u0[i];
        kdvb::WholeLineEvolution evo(kdvb::ComplexField(xg, std::move(v)));
        kdvb::Grid1D tg(0.0, t_max, nt);

        auto res = std::make_unique<kdvb_result>();
        std::vector<double> field((size_t)n * nt);
        auto& norms = res->add("norms", {"t", "l2_norm"});
        for (int it = 0; it < nt; ++it) {
            auto f = evo.at(tg.point(it));
            double acc = 0.0;
            for (long ix = 0; ix < n; ++ix) {
                field[(size_t)ix * nt + it] = f.values[ix].real();
                acc += std::norm(f.values[ix]) * xg.spacing();
            }
            push_row(norms, {tg.point(it), std::sqrt(acc)});
        }
        add_field_table(*res, "snapshots", xg, tg, field);
        json j;
        j["period"] = n * xg.spacing();
        res->scalars = j.dump();
        *out = res.release();
    });
}

kdvb_status kdvb_run_linear_ibvp(const double* u0, long nx, double X, const double* h,
                                 const double* g, long nt, double T, kdvb_result** out) {
    return guarded([&] {
        kdvb::Grid1D xg(0.0, X, (int)nx);
        kdvb::Grid1D tg(0.0, T, (int)nt);
        kdvb::BoundaryData bd(tg, std::vector<double>(h, h + nt), std::vector<double>(g, g + nt));
        kdvb::IbvpProblem prob(std::vector<double>(u0, u0 + nx), xg, bd);
        prob.nonlinearity_on = false;
        auto rep = kdvb::solve_fixed_point(prob, 1e-12, 2);

        auto res = std::make_unique<kdvb_result>();
        add_field_table(*res, "field", xg, tg, rep.solution.values);
        auto tr = kdvb::trace_extract(rep.solution);
        auto& t = res->add("traces", {"t", "value", "deriv", "second", "h", "g"});
        double dmax_v = 0, dmax_d = 0;
        for (int it = 0; it < tg.size(); ++it) {
            push_row(t, {tg.point(it), tr.value[it], tr.deriv[it], tr.second[it], bd.h[it],
                         bd.g[it]});
            dmax_v = std::max(dmax_v, std::abs(tr.value[it] - bd.h[it]));
            dmax_d = std::max(dmax_d, std::abs(tr.deriv[it] - bd.g[it]));
        }
        json j;
        j["trace_value_defect"] = dmax_v;
        j["trace_deriv_defect"] = dmax_d;
        j["warnings"] = rep.solution.warnings;
        res->scalars = j.dump();
        *out = res.release();
    });
}

kdvb_status kdvb_run_nonlinear(const double* u0, long nx, double X, const double* h,
                               const double* g, long nt, double T, const double* forcing,
                               int nonlinearity_on, double tol, int max_iter, kdvb_result** out) {
    return guarded([&] {
        kdvb::Grid1D xg(0.0, X, (int)nx);
        kdvb::Grid1D tg(0.0, T, (int)nt);
        kdvb::BoundaryData bd(tg, std::vector<double>(h, h + nt), std::vector<double>(g, g + nt));
        kdvb::IbvpProblem prob(std::vector<double>(u0, u0 + nx), xg, bd);
        prob.nonlinearity_on = nonlinearity_on != 0;
        if (forcing) prob.forcing = std::vector<double>(forcing, forcing + (size_t)nx * nt);
        auto rep = kdvb::solve_fixed_point(prob, tol, max_iter);
        if (!rep.converged)
            throw std::runtime_error("fixed-point iteration did not converge (data outside the "
                                     "contraction ball?)");

        auto res = std::make_unique<kdvb_result>();
        add_field_table(*res, "field", xg, tg, rep.solution.values);
        auto& rh = res->add("residual_history", {"iteration", "residual"});
        for (size_t k = 0; k < rep.residual_history.size(); ++k)
            push_row(rh, {(double)(k + 1), rep.residual_history[k]});
        auto& en = res->add("energy", {"t", "energy", "identity_residual"});
        for (int it = 0; it < tg.size(); ++it)
            push_row(en, {tg.point(it), rep.energy_audit.energy[it],
                          rep.energy_audit.residual[it]});
        json j;
        j["iterations"] = rep.iterations;
        j["contraction_ratio"] = rep.contraction_ratio;
        j["converged"] = rep.converged;
        res->scalars = j.dump();
        *out = res.release();
    });
}

kdvb_status kdvb_run_energy_audit(const double* u0, long nx, double X, double T, int nt,
                                  kdvb_result** out) {
    return guarded([&] {
        kdvb::Grid1D xg(0.0, X, (int)nx);
        kdvb::Grid1D tg(0.0, T, nt);
        auto state = kdvb::halfline_semigroup(std::vector<double>(u0, u0 + nx), xg, tg);
        auto audit = kdvb::energy_audit(state, kdvb::BoundaryData::zero(tg));

        auto res = std::make_unique<kdvb_result>();
        auto& t = res->add("ledger", {"t", "energy", "identity_residual"});
        bool monotone = true;
        double rmax = 0.0;
        for (int it = 0; it < nt; ++it) {
            push_row(t, {tg.point(it), audit.energy[it], audit.residual[it]});
            if (it && audit.energy[it] > audit.energy[it - 1] + 1e-12 * audit.energy[0])
                monotone = false;
            rmax = std::max(rmax, audit.residual[it]);
        }
        json j;
        j["max_identity_residual"] = rmax;
        j["energy_monotone"] = monotone;
        j["trace_value_max"] = state.trace_value_max;
        j["trace_deriv_max"] = state.trace_deriv_max;
        j["compatibility_defect"] = state.compatibility_defect;
        res->scalars = j.dump();
        *out = res.release();
    });
}

kdvb_status kdvb_run_observability(double L, double l, double T, int n_max, int n_draws,
                                   unsigned long long seed, kdvb_result** out) {
    return guarded([&] {
        auto res = std::make_unique<kdvb_result>();
        auto& dt = res->add("draws", {"draw", "ratio_closed", "ratio_quadrature"});

        std::vector<kdvb::ModeCoeffs> draws;
        for (int i = 0; i < n_draws; ++i) draws.push_back(random_coeffs(n_max, seed, i));

        kdvb::ObservabilityOptions quad;
        quad.use_quadrature = true;
        quad.nx = 97;
        quad.nt = 193;
        kdvb::ObservabilityOptions quad2 = quad;
        quad2.nx = 193;
        quad2.nt = 385;

        double max_closed = 0, max_quad = 0, max_quad2 = 0;
        for (int i = 0; i < n_draws; ++i) {
            double rc = kdvb::observability_ratio(draws[i], L, l, T);
            double rq = kdvb::observability_ratio(draws[i], L, l, T, quad);
            double rq2 = kdvb::observability_ratio(draws[i], L, l, T, quad2);
            push_row(dt, {(double)i, rc, rq});
            max_closed = std::max(max_closed, rc);
            max_quad = std::max(max_quad, rq);
            max_quad2 = std::max(max_quad2, rq2);
        }

        // the same draws extended with twice the modes
        double max_doubled = 0;
        for (int i = 0; i < n_draws; ++i) {
            auto c = random_coeffs(2 * n_max, seed, i);
            max_doubled = std::max(max_doubled, kdvb::observability_ratio(c, L, l, T));
        }

        // single-mode n = 1 against the closed form
        kdvb::ModeCoeffs one(n_max);
        one.coeff(1) = 1.0;
        double r1 = kdvb::observability_ratio(one, L, l, T);
        double k1 = M_PI / L;
        double closed = 1.0 / ((l / L) * (1.0 - std::exp(-2.0 * k1 * k1 * T)) / (2.0 * k1 * k1));

        json j;
        j["seed"] = seed;
        j["n_draws"] = n_draws;
        j["n_max"] = n_max;
        j["max_ratio_closed"] = max_closed;
        j["max_ratio_quadrature"] = max_quad;
        j["max_ratio_quadrature_refined"] = max_quad2;
        j["quadrature_change"] = std::abs(max_quad2 - max_quad) / max_quad;
        j["max_ratio_modes_doubled"] = max_doubled;
        j["mode_change"] = std::abs(max_doubled - max_closed) / max_closed;
        j["single_mode_ratio"] = r1;
        j["single_mode_closed_form"] = closed;
        j["single_mode_error"] = std::abs(r1 - closed) / closed;
        j["t_star_min"] = kdvb::ingham_params(L).t_star_min;
        res->scalars = j.dump();
        *out = res.release();
    });
}

kdvb_status kdvb_run_carleman(double L, double T, double epsilon, int nx, int nt, int n_samples,
                              unsigned long long seed, kdvb_result** out) {
    return guarded([&] {
        std::vector<double> ladder;
        for (double s = 0.25; s <= 300.0; s *= 2.0) ladder.push_back(s);
        auto scan = kdvb::positivity_scan(L, T, epsilon, ladder, nx, nt);
        if (!scan.found) throw std::runtime_error("positivity scan exhausted its s ladder");

        auto res = std::make_unique<kdvb_result>();
        auto& st = res->add("scan", {"s", "min_D", "min_E", "min_F"});
        for (auto& r : scan.rows) push_row(st, {r.s, r.min_D, r.min_E, r.min_F});

        const double s2 = 2.0 * scan.s0;
        kdvb::CarlemanWeight w(L, T, s2);
        auto [mx, mt] = kdvb::margined_grids(L, T, 33, 33);
        auto field = kdvb::coefficients_def(w, mx, mt, epsilon);
        auto& hm = res->add("coefficients", {"x", "t", "D", "E", "F"});
        for (int ix = 0; ix < mx.size(); ++ix)
            for (int it = 0; it < mt.size(); ++it) {
                size_t i = (size_t)ix * mt.size() + it;
                push_row(hm, {mx.point(ix), mt.point(it), field.D[i], field.E[i], field.F[i]});
            }

        std::mt19937_64 rng(seed);
        auto& samp = res->add("samples", {"sample", "log_ratio_base", "log_ratio_refined"});
        double max_base = -1e300, max_ref = -1e300;  // log scale
        auto sc = kdvb::verify_inequality(w, kdvb::AdmissibleTest::sine_cubed(L, T), nx, nt);
        for (int i = 0; i < n_samples; ++i) {
            auto q = kdvb::AdmissibleTest::random_bumps(L, T, rng);
            auto base = kdvb::verify_inequality(w, q, nx, nt);
            auto ref = kdvb::verify_inequality(w, q, 2 * nx - 1, 2 * nt - 1);
            double lb = base.log_lhs - base.log_rhs;
            double lr = ref.log_lhs - ref.log_rhs;
            push_row(samp, {(double)i, lb, lr});
            max_base = std::max(max_base, lb);
            max_ref = std::max(max_ref, lr);
        }
        double cfit = 1.05 * std::exp(max_base);
        double cfit_ref = 1.05 * std::exp(max_ref);

        json j;
        j["seed"] = seed;
        j["s0"] = scan.s0;
        j["s_used"] = s2;
        j["epsilon"] = epsilon;
        j["C_fit"] = cfit;
        j["C_fit_refined"] = cfit_ref;
        j["C_fit_stability"] = std::abs(cfit_ref - cfit) / cfit;
        j["fd_crosscheck_max_rel"] = field.fd_crosscheck_max_rel;
        j["sine_cubed_ratio"] = sc.ratio;
        res->scalars = j.dump();
        *out = res.release();
    });
}

kdvb_status kdvb_run_hum(const double* f, long nx, double x_min, double x_max, long nt, double T,
                         double t1, double t2, double epsilon, int n_basis_x, int n_basis_t,
                         kdvb_result** out) {
    return guarded([&] {
        kdvb::Grid1D xg(x_min, x_max, (int)nx);
        kdvb::Grid1D tg(0.0, T, (int)nt);
        kdvb::ControlProblem prob(xg, tg, t1, t2, epsilon,
                                  std::vector<double>(f, f + (size_t)nx * nt));
        kdvb::HumOptions opt;
        if (n_basis_x > 0) opt.n_basis_x = n_basis_x;
        if (n_basis_t > 0) opt.n_basis_t = n_basis_t;
        auto sol = kdvb::hum_solve(prob, opt);

        auto res = std::make_unique<kdvb_result>();
        add_field_table(*res, "control_field", xg, tg, sol.v);
        json j;
        j["forward_residual"] = sol.forward_residual;
        j["support_leakage"] = sol.support_leakage;
        j["quadratic_cost"] = sol.quadratic_cost;
        j["optimality_gap"] = sol.optimality_gap;
        j["grid_residual"] = sol.grid_residual;
        j["regularized"] = sol.regularized;
        j["n_basis"] = sol.n_basis;
        res->scalars = j.dump();
        *out = res.release();
    });
}

kdvb_status kdvb_run_modes(const double* a_values, int n_a, double X, double T, int nx, int nt,
                           kdvb_result** out) {
    return guarded([&] {
        auto res = std::make_unique<kdvb_result>();
        auto& mt = res->add("modes", {"a", "b", "lambda", "root_residual"});
        std::vector<double> av(a_values, a_values + n_a);
        for (double a : av) {
            auto m = kdvb::mode_construct(a);
            push_row(mt, {m.a, m.b, m.lambda, m.root_residual});
        }
        auto rows = kdvb::noncontrol_scan(av, X, T, nx, nt);
        auto& st = res->add("scan", {"a", "numerator", "denominator", "ratio"});
        bool increasing = true;
        for (size_t i = 0; i < rows.size(); ++i) {
            push_row(st, {rows[i].a, rows[i].numerator, rows[i].denominator, rows[i].ratio});
            if (i && rows[i].a < rows[i - 1].a && rows[i].ratio <= rows[i - 1].ratio)
                increasing = false;
        }
        json j;
        j["ratio_increases_as_a_decreases"] = increasing;
        j["X"] = X;
        j["T"] = T;
        res->scalars = j.dump();
        *out = res.release();
    });
}

kdvb_status kdvb_run_steer(const double* u0, const double* uT, long nx, double X, double T,
                           int nt, double beta, double t1, double t2, double epsilon,
                           int n_basis_x, int n_basis_t, kdvb_result** out) {
    return guarded([&] {
        kdvb::SteeringPlan plan(std::vector<double>(u0, u0 + nx), std::vector<double>(uT, uT + nx),
                                kdvb::Grid1D(0.0, X, (int)nx));
        plan.nt = nt;
        plan.T = T;
        plan.beta = beta;
        plan.t1 = t1;
        plan.t2 = t2;
        plan.epsilon = epsilon;
        kdvb::HumOptions opt;
        if (n_basis_x > 0) opt.n_basis_x = n_basis_x;
        if (n_basis_t > 0) opt.n_basis_t = n_basis_t;
        auto sr = kdvb::steer_pipeline(plan, opt);

        auto res = std::make_unique<kdvb_result>();
        add_field_table(*res, "solution", sr.xgrid, sr.tgrid, sr.nu);
        auto& st = res->add("stages", {"t", "norm_nu1", "norm_nu2", "norm_omega"});
        for (int it = 0; it < sr.tgrid.size(); ++it)
            push_row(st, {sr.tgrid.point(it), sr.stage_norm1[it], sr.stage_norm2[it],
                          sr.stage_norm_omega[it]});
        json j;
        j["endpoint_err0"] = sr.endpoint_err0;
        j["endpoint_errT_weighted"] = sr.endpoint_errT;
        j["backward_cutoff_err"] = sr.backward_cutoff_err;
        j["f_support_violation"] = sr.f_support_violation;
        j["pde_residual_rms"] = sr.pde_residual_rms;
        j["hum_forward_residual"] = sr.hum.forward_residual;
        j["hum_support_leakage"] = sr.hum.support_leakage;
        res->scalars = j.dump();
        *out = res.release();
    });
}

}  // extern "C"
