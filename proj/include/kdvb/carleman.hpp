#ifndef KDVB_CARLEMAN_HPP
#define KDVB_CARLEMAN_HPP

#include <random>
#include <vector>

#include "kdvb/numerics.hpp"

// The weighted inequality for P = d_t - d_xxx - d_xx on (-L,L)x(0,T) in
// executable form: weight psi(x,t) = phi(x)/(t(T-t)) with
// phi(x) = -x^2 - (2L + 3T/2)x, the order coefficients A..F of the conjugated
// operator e^{-s psi} P e^{s psi}, the positivity threshold s0, and quadrature
// verification of
//
//   int (s^5 th^5 q^2 + s^3 th^3 q_x^2 + s th q_xx^2) e^{-2 s psi}
//     <= C int (Pq)^2 e^{-2 s psi},     th = 1/(t(T-t)).
//
// phi is negative on (0, L], so e^{-2 s psi} grows without bound toward the
// time endpoints there; all quadratures therefore run on the margined open
// rectangle and accumulate in log space.

namespace kdvb {

struct WeightDerivs {
    double psi, psi_x, psi_xx, psi_xxx, psi_t;
};

class CarlemanWeight {
  public:
    CarlemanWeight(double L, double T, double s) : L_(L), T_(T), s_(s) {
        if (!(L > 0 && T > 0 && s > 0))
            throw std::invalid_argument("CarlemanWeight: L, T, s must be positive");
    }
    double L() const { return L_; }
    double T() const { return T_; }
    double s() const { return s_; }
    double slope() const { return 2.0 * L_ + 1.5 * T_; }   // the 2L + 3T/2 coefficient
    double phi(double x) const { return -x * x - slope() * x; }
    double phi_p(double x) const { return -2.0 * x - slope(); }
    static constexpr double phi_pp = -2.0;

    /// Closed-form partials; t in {0, T} is singular and rejected.
    WeightDerivs weight_eval(double x, double t) const;

  private:
    double L_, T_, s_;
};

/// The paper-printed expansion duplicates the 3 psi_x psi_xx term into the s^3
/// bracket of A; `verified` is the from-scratch expansion (it alone matches a
/// finite-difference probe of e^{-s psi} P(e^{s psi} u)).
enum class Expansion { verified, paper };

struct CarlemanCoeffs {
    double A, B, C;
    double A_x, A_t, A_xxx, B_x, C_x, C_t;
    double D, E, F;
};

/// All coefficients, their closed-form derivatives, and the combinations
///   D = -A_t + A_xxx - (AB)_x - (C_x A)_x,
///   E = C_t + 2 C_x B - (C_x C)_x - C_xxx - (BC)_x - eps C_x^2,
///   F = 3 C_x,
/// at one interior point.
CarlemanCoeffs carleman_coefficients(const CarlemanWeight& w, double x, double t, double epsilon,
                                     Expansion variant = Expansion::verified);

struct Abc {
    double A, B, C;
};
/// The (A, B, C) block as printed (default: the paper's variant, which is what
/// the order-coefficient display states; see Expansion).
Abc coefficients_abc(const CarlemanWeight& w, double x, double t,
                     Expansion variant = Expansion::paper);

/// Margined open-rectangle grids: x in [-L(1-dx), L(1-dx)], t in [dt T, (1-dt) T].
std::pair<Grid1D, Grid1D> margined_grids(double L, double T, int nx, int nt,
                                         double delta_x = 0.025, double delta_t = 0.025);

struct CoefficientField {
    Grid1D xgrid, tgrid;
    double epsilon;
    std::vector<double> A, B, C, D, E, F;  // x-major: [ix*nt + it]
    double fd_crosscheck_max_rel = 0.0;    // closed forms vs finite differences
};

/// Sampled coefficient fields; a finite-difference cross-check of every
/// closed-form derivative entering D and E runs once per construction.
CoefficientField coefficients_def(const CarlemanWeight& w, const Grid1D& xgrid, const Grid1D& tgrid,
                                  double epsilon, Expansion variant = Expansion::verified);

struct PositivityScan {
    bool found = false;
    double s0 = 0.0;
    struct Row {
        double s, min_D, min_E, min_F;
    };
    std::vector<Row> rows;
};

/// Smallest ladder value of s with min D, min E, min F all positive on the
/// margined grid.
PositivityScan positivity_scan(double L, double T, double epsilon,
                               const std::vector<double>& s_ladder, int nx, int nt,
                               double delta_x = 0.025, double delta_t = 0.025,
                               Expansion variant = Expansion::verified);

/// Test functions q = (L^2-x^2)^3 * (sum of separable smooth factors), with
/// all derivatives in closed form; q, q_x, q_xx vanish at x = +-L exactly.
struct AdmissibleTest {
    double L = 0.0, T = 0.0;
    struct Term {
        double amp = 1.0;
        bool has_gauss_x = false;
        double cx = 0.0, wx = 1.0;
        enum class TimeKind { gauss, sin_cubed } kind = TimeKind::gauss;
        double ct = 0.0, wt = 1.0;
    };
    std::vector<Term> terms;

    struct Derivs {
        double q, q_x, q_xx, q_xxx, q_t;
    };
    Derivs eval(double x, double t) const;

    static AdmissibleTest sine_cubed(double L, double T);
    static AdmissibleTest random_bumps(double L, double T, std::mt19937_64& rng, int n_bumps = 3);
};

struct CarlemanCheck {
    double log_lhs = 0.0, log_rhs = 0.0;
    double lhs = 0.0, rhs_raw = 0.0;  // exp of the logs; +-inf when out of range
    double ratio = 0.0;               // lhs / rhs, computed in log space
    bool defined = false;             // false for the 0/0 sentinel (q == 0)
};

/// Quadrature of both sides on the margined rectangle (log-sum-exp
/// accumulation; integrands are nonnegative).
CarlemanCheck verify_inequality(const CarlemanWeight& w, const AdmissibleTest& q, int nx, int nt,
                                double delta_x = 0.025, double delta_t = 0.025);

}  // namespace kdvb

#endif
