#include "kdvb/linear_ops.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace kdvb {

double HalfLineState::l2_norm() const {
    auto wx = quadrature_weights(space_grid);
    auto wt = quadrature_weights(time_grid);
    double acc = 0.0;
    const int nt = time_grid.size();
    for (int ix = 0; ix < space_grid.size(); ++ix)
        for (int it = 0; it < nt; ++it) {
            double v = values[(size_t)ix * nt + it];
            acc += wx[ix] * wt[it] * v * v;
        }
    return std::sqrt(acc);
}

CubicRootTriple characteristic_roots(Complex tau, double dead_band) {
    CubicRootTriple out;
    out.tau = tau;
    out.roots = cubic_roots(Complex(1, 0), Complex(0, 0), -tau).roots;
    for (int i = 0; i < 3; ++i) {
        double re = out.roots[i].real();
        if (std::abs(re) < dead_band)
            out.degenerate = true;
        else if (re < 0)
            out.decaying.push_back(i);
    }
    return out;
}

RootSplit root_split(double lambda) {
    Complex tau(0.0, lambda * lambda * lambda);
    auto triple = characteristic_roots(tau);
    if (triple.decaying.size() != 2)
        throw std::runtime_error("root_split: did not find a decaying pair (lambda too close to 0?)");
    RootSplit s;
    s.lambda = lambda;
    s.mu1 = triple.roots[triple.decaying[0]] - Complex(0.0, lambda);
    s.mu2 = triple.roots[triple.decaying[1]] - Complex(0.0, lambda);
    return s;
}

namespace {

Complex multiplier(double xi, double t) {
    // e^{-(i xi^3 + xi^2) t}
    return std::exp(Complex(-xi * xi * t, -xi * xi * xi * t));
}

}  // namespace

ComplexField whole_line_propagate(const ComplexField& u0, double t) {
    if (t < 0) throw std::invalid_argument("whole_line_propagate: t must be >= 0");
    SpectralCoeffs c = dft(u0);
    for (int i = 0; i < c.size(); ++i) c.coeffs[i] *= multiplier(c.wavenumber(i), t);
    return idft(c, u0.grid);
}

WholeLineEvolution::WholeLineEvolution(const ComplexField& u0)
    : grid_(u0.grid), hat_(dft(u0)) {
    const int n = hat_.size();
    phase0_.resize(n);
    const double scale = 1.0 / std::sqrt((double)n);
    for (int i = 0; i < n; ++i) {
        double xi = hat_.wavenumber(i);
        phase0_[i] = std::polar(scale, -xi * grid_.x_min());
    }
}

ComplexField WholeLineEvolution::at(double t) const {
    if (t < 0) throw std::invalid_argument("WholeLineEvolution: t must be >= 0");
    SpectralCoeffs c = hat_;
    for (int i = 0; i < c.size(); ++i) c.coeffs[i] *= multiplier(c.wavenumber(i), t);
    return idft(c, grid_);
}

std::pair<double, double> WholeLineEvolution::trace_at_zero(double t) const {
    Complex val(0, 0), der(0, 0);
    for (int i = 0; i < hat_.size(); ++i) {
        double xi = hat_.wavenumber(i);
        Complex a = hat_.coeffs[i] * multiplier(xi, t) * phase0_[i];
        val += a;
        der += Complex(0, xi) * a;
    }
    return {val.real(), der.real()};
}

int extension_zero_index(const Grid1D& half_grid) { return half_grid.size() - 1; }

ComplexField zero_extend(const std::vector<double>& u0, const Grid1D& half_grid) {
    if ((int)u0.size() != half_grid.size())
        throw std::invalid_argument("zero_extend: sample count does not match grid");
    if (std::abs(half_grid.x_min()) > 1e-12)
        throw std::invalid_argument("zero_extend: half-line grid must start at x = 0");
    const int n = half_grid.size();
    const double X = half_grid.x_max();
    Grid1D ext(-X, X, 2 * n - 1);
    std::vector<Complex> v(2 * n - 1, Complex(0, 0));
    for (int i = 0; i < n; ++i) v[n - 1 + i] = u0[i];
    return ComplexField(ext, std::move(v));
}

ComplexField smooth_extend(const std::vector<double>& u0, const Grid1D& half_grid) {
    ComplexField out = zero_extend(u0, half_grid);
    const int n = half_grid.size();
    const int j0 = n - 1;
    const double h = half_grid.spacing();

    // one-sided estimates of u0, u0', u0'', u0''' at x = 0
    const double d0 = u0[0];
    const double d1 = (-25 * u0[0] + 48 * u0[1] - 36 * u0[2] + 16 * u0[3] - 3 * u0[4]) / (12 * h);
    const double d2 = (2 * u0[0] - 5 * u0[1] + 4 * u0[2] - u0[3]) / (h * h);
    const double d3 =
        (-5 * u0[0] + 18 * u0[1] - 24 * u0[2] + 14 * u0[3] - 3 * u0[4]) / (2 * h * h * h);

    // cubic-Taylor extension damped by a gaussian envelope E = e^{-(x/l)^2};
    // the polynomial absorbs E's curvature so value and three derivatives
    // match at x = 0, and the product is C-infinity with no blend kinks
    const double l = std::max(8.0 * h, 0.08 * half_grid.x_max());
    const double p2 = d2 + 2.0 * d0 / (l * l);
    const double p3 = d3 + 6.0 * d1 / (l * l);
    for (int i = 1; i <= j0; ++i) {
        double x = -i * h;
        double env = std::exp(-(x / l) * (x / l));
        if (env < 1e-300) break;
        double poly = d0 + d1 * x + 0.5 * p2 * x * x + p3 * x * x * x / 6.0;
        out.values[j0 - i] = poly * env;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Imaginary-axis synthesis of the boundary operators:
//   u(x,t) = (1/2pi) Int e^{i sigma t} K(x, i sigma) h~(i sigma) d sigma,
//   h~(i sigma) = Int_0^T e^{-i sigma s} h(s) ds,
// with K built from the two decaying roots of r^3 + r^2 = i sigma.

namespace {

enum class Kind { dirichlet, neumann };

struct SigmaGrid {
    std::vector<double> nodes, weights;
    std::vector<std::string> warnings;
};

// One composite-Simpson block of [a, b] with spacing <= step.
void add_block(SigmaGrid& g, double a, double b, double step) {
    int intervals = std::max(4, (int)std::ceil((b - a) / step));
    if (intervals % 2) ++intervals;
    const double h = (b - a) / intervals;
    for (int i = 0; i <= intervals; ++i) {
        double w = (i == 0 || i == intervals) ? h / 3.0 : (i % 2 ? 4.0 * h / 3.0 : 2.0 * h / 3.0);
        g.nodes.push_back(a + i * h);
        g.weights.push_back(w);
    }
}

// Substituted block for [0, b]: sigma = u^2 turns the sqrt(sigma) root cusp
// at the origin into a smooth integrand in u; Simpson in u with d sigma = 2u du.
void add_block_sqrt(SigmaGrid& g, double b, double ustep) {
    const double ub = std::sqrt(b);
    int intervals = std::max(8, (int)std::ceil(ub / ustep));
    if (intervals % 2) ++intervals;
    const double h = ub / intervals;
    for (int i = 0; i <= intervals; ++i) {
        double u = i * h;
        double wu = (i == 0 || i == intervals) ? h / 3.0 : (i % 2 ? 4.0 * h / 3.0 : 2.0 * h / 3.0);
        g.nodes.push_back(u * u);
        g.weights.push_back(2.0 * u * wu);
    }
}

std::vector<Complex> laplace_on_axis(const std::vector<double>& series, const Grid1D& tgrid,
                                     const std::vector<double>& sigmas) {
    auto wq = quadrature_weights(tgrid);
    std::vector<Complex> out(sigmas.size());
    const int nt = tgrid.size();
    for (size_t j = 0; j < sigmas.size(); ++j) {
        const double s = sigmas[j];
        Complex acc(0, 0);
        // rotation recurrence for e^{-i s t_k}
        Complex rot = std::polar(1.0, -s * tgrid.x_min());
        const Complex stepr = std::polar(1.0, -s * tgrid.spacing());
        for (int k = 0; k < nt; ++k) {
            acc += wq[k] * series[k] * rot;
            rot *= stepr;
        }
        out[j] = acc;
    }
    return out;
}

SigmaGrid build_sigma_grid(const std::vector<double>& series, const Grid1D& tgrid,
                           const BoundaryOpOptions& opt) {
    const double T_ref = tgrid.x_max() - tgrid.x_min();
    const double scale = std::max(1.0, opt.resolution_scale);
    const double dsig = 0.2 / (T_ref * scale);
    const double sigma_cap = 0.9 * M_PI / tgrid.spacing();
    // refinement tightens the truncation floor along with the node spacing
    const double tail_tol = opt.tail_tol / (scale * scale * scale * scale);

    // truncation: grow Lambda until the outer-band tail of the transform is
    // negligible against the kernel decay <Lambda>^{-1/3}
    double lambda = std::min(opt.lambda_min, sigma_cap);
    double hmax = 1e-300;
    {
        std::vector<double> probe;
        for (int i = 0; i <= 32; ++i) probe.push_back(lambda * i / 32.0);
        for (auto& v : laplace_on_axis(series, tgrid, probe)) hmax = std::max(hmax, std::abs(v));
    }
    SigmaGrid g;
    while (true) {
        std::vector<double> band;
        for (int i = 0; i <= 16; ++i) band.push_back(lambda * (0.85 + 0.15 * i / 16.0));
        double tail = 0.0;
        for (auto& v : laplace_on_axis(series, tgrid, band)) tail = std::max(tail, std::abs(v));
        hmax = std::max(hmax, tail);
        double metric = tail / std::pow(1.0 + lambda * lambda, 1.0 / 6.0) / hmax;
        if (metric < tail_tol) break;
        if (lambda >= sigma_cap) {
            g.warnings.push_back("sigma truncation capped by time-grid resolution");
            break;
        }
        lambda = std::min(2.0 * lambda, sigma_cap);
    }

    // the roots split like sqrt(i sigma) at the origin; integrate [0, sigma0]
    // in the substituted variable where the kernel is smooth
    const double s0 = std::min(opt.sigma0, lambda / 4.0);
    add_block_sqrt(g, s0, dsig / (6.0 * std::sqrt(s0)));
    add_block(g, s0, lambda, dsig);
    // mirror to negative sigma
    const size_t np = g.nodes.size();
    for (size_t i = 0; i < np; ++i) {
        g.nodes.push_back(-g.nodes[i]);
        g.weights.push_back(g.weights[i]);
    }
    // dead-band shift of the degenerate tau = 0 nodes
    bool shifted = false;
    for (auto& s : g.nodes)
        if (std::abs(s) < opt.dead_band) {
            s = (std::signbit(s) ? -1.0 : 1.0) * opt.dead_band;
            shifted = true;
        }
    if (shifted) g.warnings.push_back("degenerate root at sigma=0: node shifted by dead band");
    return g;
}

HalfLineState synthesize(Kind kind, const std::vector<double>& series, const Grid1D& data_grid,
                         const Grid1D& xgrid, const Grid1D& out_tgrid,
                         const BoundaryOpOptions& opt) {
    SigmaGrid sg = build_sigma_grid(series, data_grid, opt);
    const int ns = (int)sg.nodes.size();
    const int nx = xgrid.size();
    const int nt = out_tgrid.size();

    std::vector<Complex> hat = laplace_on_axis(series, data_grid, sg.nodes);

    // raised-cosine roll-off over the outer 15% of the truncated band; kills
    // the Gibbs ripple a hard cutoff would imprint on the synthesized field
    double lambda_max = 0.0;
    for (double s : sg.nodes) lambda_max = std::max(lambda_max, std::abs(s));
    auto rolloff = [lambda_max](double s) {
        double a = std::abs(s) / lambda_max;
        if (a <= 0.85) return 1.0;
        return 0.5 * (1.0 + std::cos(M_PI * (a - 0.85) / 0.15));
    };

    Eigen::MatrixXcd A(nx, ns);
    for (int j = 0; j < ns; ++j) {
        const double sigma = sg.nodes[j];
        auto triple = characteristic_roots(Complex(0.0, sigma), opt.dead_band);
        if (triple.decaying.size() != 2) {
            // fall back: take the two smallest real parts
            std::array<int, 3> idx = {0, 1, 2};
            std::sort(idx.begin(), idx.end(), [&](int a, int b) {
                return triple.roots[a].real() < triple.roots[b].real();
            });
            triple.decaying = {idx[0], idx[1]};
        }
        const Complex r1 = triple.roots[triple.decaying[0]];
        const Complex r2 = triple.roots[triple.decaying[1]];
        const Complex den = r2 - r1;
        const Complex amp = hat[j] * (sg.weights[j] * rolloff(sigma) / (2.0 * M_PI));
        for (int ix = 0; ix < nx; ++ix) {
            const double x = xgrid.point(ix);
            const Complex e1 = std::exp(r1 * x);
            const Complex e2 = std::exp(r2 * x);
            const Complex K = (kind == Kind::dirichlet) ? (r2 * e1 - r1 * e2) / den : (e2 - e1) / den;
            A(ix, j) = K * amp;
        }
    }

    Eigen::MatrixXcd E(ns, nt);
    for (int j = 0; j < ns; ++j)
        for (int it = 0; it < nt; ++it)
            E(j, it) = std::polar(1.0, sg.nodes[j] * out_tgrid.point(it));

    Eigen::MatrixXd U = (A * E).real();

    HalfLineState state(xgrid, out_tgrid);
    for (int ix = 0; ix < nx; ++ix)
        for (int it = 0; it < nt; ++it) state.at(ix, it) = U(ix, it);
    state.warnings = sg.warnings;
    return state;
}

}  // namespace

HalfLineState boundary_dirichlet(const BoundaryData& data, const Grid1D& eval_grid,
                                 const BoundaryOpOptions& opt) {
    return synthesize(Kind::dirichlet, data.h, data.time_grid, eval_grid, data.time_grid, opt);
}

HalfLineState boundary_neumann(const BoundaryData& data, const Grid1D& eval_grid,
                               const BoundaryOpOptions& opt) {
    return synthesize(Kind::neumann, data.g, data.time_grid, eval_grid, data.time_grid, opt);
}

HalfLineState boundary_dirichlet(const std::vector<double>& h, const Grid1D& data_time_grid,
                                 const Grid1D& eval_grid, const Grid1D& out_time_grid,
                                 const BoundaryOpOptions& opt) {
    return synthesize(Kind::dirichlet, h, data_time_grid, eval_grid, out_time_grid, opt);
}

HalfLineState boundary_neumann(const std::vector<double>& g, const Grid1D& data_time_grid,
                               const Grid1D& eval_grid, const Grid1D& out_time_grid,
                               const BoundaryOpOptions& opt) {
    return synthesize(Kind::neumann, g, data_time_grid, eval_grid, out_time_grid, opt);
}

double neumann_kernel_magnitude(double x, double sigma) {
    auto triple = characteristic_roots(Complex(0.0, sigma));
    if (triple.decaying.size() != 2) return 0.0;
    const Complex r1 = triple.roots[triple.decaying[0]];
    const Complex r2 = triple.roots[triple.decaying[1]];
    return std::abs((std::exp(r2 * x) - std::exp(r1 * x)) / (r2 - r1));
}

namespace {

// C2 ramp from 1 at u=0 to 0 at u=1.
double taper_down(double u) {
    if (u <= 0) return 1.0;
    if (u >= 1) return 0.0;
    double s = u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
    return 1.0 - s;
}

}  // namespace

std::vector<double> taper_extend(const std::vector<double>& series, const Grid1D& tgrid,
                                 const Grid1D& tgrid_ext) {
    const int nt = tgrid.size();
    const int ne = tgrid_ext.size();
    const double dt = tgrid.spacing();
    const double T = tgrid.x_max();
    const double len = tgrid_ext.x_max() - dt - T;
    // C2 continuation: one-sided value/slope/curvature at T times a quintic
    // ramp whose first two derivatives vanish at the junction
    const double v = series[nt - 1];
    const double s1 = (3 * series[nt - 1] - 4 * series[nt - 2] + series[nt - 3]) / (2 * dt);
    const double s2 =
        (2 * series[nt - 1] - 5 * series[nt - 2] + 4 * series[nt - 3] - series[nt - 4]) /
        (dt * dt);
    std::vector<double> out(ne, 0.0);
    for (int k = 0; k < nt; ++k) out[k] = series[k];
    for (int k = nt; k < ne; ++k) {
        double tau = tgrid_ext.point(k) - T;
        out[k] = (v + s1 * tau + 0.5 * s2 * tau * tau) * taper_down(tau / len);
    }
    return out;
}

HalfLineState halfline_semigroup(const std::vector<double>& u0, const Grid1D& half_grid,
                                 const Grid1D& time_grid, const BoundaryOpOptions& opt,
                                 bool smooth_extension) {
    ComplexField ext = smooth_extension ? smooth_extend(u0, half_grid) : zero_extend(u0, half_grid);
    WholeLineEvolution evo(ext);
    const int j0 = extension_zero_index(half_grid);
    const int nx = half_grid.size();
    const int nt = time_grid.size();
    const double dt = time_grid.spacing();

    // traces on [0, T], then a tapered extension so the synthesis sees
    // effectively supported data (same pipeline as the fixed-point map)
    const int n_extra = std::max(8, (int)std::ceil(0.35 * nt));
    Grid1D tgrid_ext(time_grid.x_min(), time_grid.x_min() + dt * (nt + n_extra - 1), nt + n_extra);

    std::vector<double> trace_h(nt), trace_g(nt);
    for (int k = 0; k < nt; ++k) {
        auto [v, d] = evo.trace_at_zero(time_grid.point(k));
        trace_h[k] = v;
        trace_g[k] = d;
    }
    auto trace_he = taper_extend(trace_h, time_grid, tgrid_ext);
    auto trace_ge = taper_extend(trace_g, time_grid, tgrid_ext);

    HalfLineState wd = synthesize(Kind::dirichlet, trace_he, tgrid_ext, half_grid, time_grid, opt);
    HalfLineState wn = synthesize(Kind::neumann, trace_ge, tgrid_ext, half_grid, time_grid, opt);

    HalfLineState out(half_grid, time_grid);
    for (int it = 0; it < nt; ++it) {
        ComplexField bar = evo.at(time_grid.point(it));
        for (int ix = 0; ix < nx; ++ix)
            out.at(ix, it) = bar.values[j0 + ix].real() - wd.at(ix, it) - wn.at(ix, it);
    }

    // advisory diagnostics
    auto d0 = finite_diff(u0, half_grid, 1);
    out.compatibility_defect = std::abs(u0[0]) + std::abs(d0[0]);
    double umax = 0.0;
    for (double v : u0) umax = std::max(umax, std::abs(v));
    if (out.compatibility_defect > 1e-6 * (umax + 1e-300))
        out.warnings.push_back("incompatible initial data: u0(0), u0'(0) not both ~0");
    Traces tr = trace_extract(out);
    for (int it = 0; it < nt; ++it) {
        out.trace_value_max = std::max(out.trace_value_max, std::abs(tr.value[it]));
        out.trace_deriv_max = std::max(out.trace_deriv_max, std::abs(tr.deriv[it]));
    }
    for (auto& w : wd.warnings) out.warnings.push_back(w);
    return out;
}

DuhamelIntegrator::DuhamelIntegrator(const Grid1D& grid, const Grid1D& time_grid)
    : grid_(grid), tgrid_(time_grid) {
    const int n = grid.size();
    const int nt = time_grid.size();
    const double dt = time_grid.spacing();
    const double period = n * grid.spacing();

    decay_.assign(n, std::vector<Complex>(nt));
    for (int i = 0; i < n; ++i) {
        int ks = i <= (n - 1) / 2 ? i : i - n;
        double xi = 2.0 * M_PI * ks / period;
        for (int d = 0; d < nt; ++d) decay_[i][d] = multiplier(xi, d * dt);
    }

    cumulative_w_.assign(nt, {});
    for (int k = 1; k < nt; ++k) {
        std::vector<double> w(k + 1, 0.0);
        if (k == 1) {
            w[0] = w[1] = dt / 2.0;
        } else {
            int m = (k % 2 == 0) ? k : k - 3;
            for (int i = 0; i + 2 <= m; i += 2) {
                w[i] += dt / 3.0;
                w[i + 1] += 4.0 * dt / 3.0;
                w[i + 2] += dt / 3.0;
            }
            if (k % 2 != 0) {  // k odd and >= 3, so m = k-3 >= 0
                w[m] += 3.0 * dt / 8.0;
                w[m + 1] += 9.0 * dt / 8.0;
                w[m + 2] += 9.0 * dt / 8.0;
                w[m + 3] += 3.0 * dt / 8.0;
            }
        }
        cumulative_w_[k] = std::move(w);
    }
}

std::vector<std::vector<Complex>> DuhamelIntegrator::trajectory(
    const std::vector<std::vector<Complex>>& forcing_hat) const {
    const int n = grid_.size();
    const int nt = tgrid_.size();
    if ((int)forcing_hat.size() != nt)
        throw std::invalid_argument("DuhamelIntegrator: forcing column count != time grid");
    for (auto& col : forcing_hat)
        if ((int)col.size() != n)
            throw std::invalid_argument("DuhamelIntegrator: forcing column length != grid");

    // transpose to per-mode rows for the inner sums
    std::vector<std::vector<Complex>> fr(n, std::vector<Complex>(nt));
    for (int k = 0; k < nt; ++k)
        for (int i = 0; i < n; ++i) fr[i][k] = forcing_hat[k][i];

    std::vector<std::vector<Complex>> out(nt, std::vector<Complex>(n, Complex(0, 0)));
    for (int i = 0; i < n; ++i) {
        const auto& dec = decay_[i];
        const auto& row = fr[i];
        for (int k = 1; k < nt; ++k) {
            const auto& w = cumulative_w_[k];
            Complex acc(0, 0);
            for (int j = 0; j <= k; ++j) acc += w[j] * dec[k - j] * row[j];
            out[k][i] = acc;
        }
    }
    return out;
}

ComplexField duhamel_forced(const std::vector<ComplexField>& f, const Grid1D& time_grid, double t) {
    if ((int)f.size() != time_grid.size())
        throw std::invalid_argument("duhamel_forced: need one field per time node");
    const Grid1D& grid = f.front().grid;
    for (auto& fld : f)
        if (!(fld.grid == grid)) throw std::invalid_argument("duhamel_forced: grid mismatch");
    int k = (int)std::llround((t - time_grid.x_min()) / time_grid.spacing());
    if (k < 0 || k >= time_grid.size() ||
        std::abs(time_grid.point(k) - t) > 1e-9 * (1.0 + std::abs(t)))
        throw std::invalid_argument("duhamel_forced: t is not a time-grid node");

    DuhamelIntegrator integ(grid, time_grid);
    std::vector<std::vector<Complex>> fhat(time_grid.size());
    for (int j = 0; j < time_grid.size(); ++j) fhat[j] = dft(f[j]).coeffs;
    auto traj = integ.trajectory(fhat);
    SpectralCoeffs c;
    c.base_length = grid.size() * grid.spacing();
    c.coeffs = traj[k];
    return idft(c, grid);
}

Traces trace_extract(const HalfLineState& state) {
    if (state.space_grid.size() < 4)
        throw std::invalid_argument("trace_extract: need at least 4 spatial points");
    const int nt = state.time_grid.size();
    const double dx = state.space_grid.spacing();
    Traces tr;
    tr.value.resize(nt);
    tr.deriv.resize(nt);
    tr.second.resize(nt);
    for (int it = 0; it < nt; ++it) {
        double f0 = state.at(0, it), f1 = state.at(1, it), f2 = state.at(2, it),
               f3 = state.at(3, it);
        tr.value[it] = f0;
        tr.deriv[it] = (-3 * f0 + 4 * f1 - f2) / (2 * dx);
        tr.second[it] = (2 * f0 - 5 * f1 + 4 * f2 - f3) / (dx * dx);
    }
    return tr;
}

}  // namespace kdvb
