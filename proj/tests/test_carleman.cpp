#include <doctest.h>

#include <cmath>
#include <random>

#include "kdvb/carleman.hpp"

using namespace kdvb;

TEST_CASE("weight_eval: frozen point values at L=1, T=2") {
    CarlemanWeight w(1.0, 2.0, 1.0);
    auto d = w.weight_eval(0.0, 1.0);
    CHECK(d.psi == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(d.psi_x == doctest::Approx(-5.0).epsilon(1e-14));
    CHECK(d.psi_xx == doctest::Approx(-2.0).epsilon(1e-14));
    CHECK(d.psi_t == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(d.psi_xxx == 0.0);
    CHECK_THROWS_AS(w.weight_eval(0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(w.weight_eval(0.0, 2.0), std::invalid_argument);
}

TEST_CASE("weight_eval: psi_t is antisymmetric about T/2, psi_xxx vanishes") {
    CarlemanWeight w(1.5, 1.0, 2.0);
    for (double x : {-1.2, 0.0, 0.7})
        for (double t : {0.2, 0.35}) {
            auto a = w.weight_eval(x, t);
            auto b = w.weight_eval(x, 1.0 - t);
            CHECK(a.psi_t == doctest::Approx(-b.psi_t).epsilon(1e-12));
            CHECK(a.psi_xxx == 0.0);
        }
}

TEST_CASE("coefficients_abc: frozen values, both expansion variants") {
    CarlemanWeight w(1.0, 2.0, 1.0);
    auto paper = coefficients_abc(w, 0.0, 1.0, Expansion::paper);
    CHECK(paper.A == doctest::Approx(42.0).epsilon(1e-13));
    CHECK(paper.B == doctest::Approx(-59.0).epsilon(1e-13));
    CHECK(paper.C == doctest::Approx(14.0).epsilon(1e-13));
    auto verified = coefficients_abc(w, 0.0, 1.0, Expansion::verified);
    CHECK(verified.A == doctest::Approx(72.0).epsilon(1e-13));
    CHECK(verified.B == doctest::Approx(-59.0).epsilon(1e-13));
    CHECK(verified.C == doctest::Approx(14.0).epsilon(1e-13));
}

TEST_CASE("conjugation identity: the verified expansion matches a FD probe") {
    // w = e^{-s psi} P(e^{s psi} u) must equal A u + B u_x + C u_xx - u_xxx + u_t
    const double L = 1.0, T = 2.0, s = 0.1;
    CarlemanWeight w(L, T, s);
    const double cx = 0.2, ct = 1.1;
    auto u = [&](double x, double t) {
        return std::exp(-(x - cx) * (x - cx)) * std::exp(-2.0 * (t - ct) * (t - ct));
    };
    auto v = [&](double x, double t) {
        double th = 1.0 / (t * (T - t));
        return std::exp(s * w.phi(x) * th) * u(x, t);
    };
    const double x0 = 0.3, t0 = 0.9, h = 2e-3;
    // fourth-order stencils keep the probe's truncation below the 1e-6 gate
    double v_t = (v(x0, t0 - 2 * h) - 8 * v(x0, t0 - h) + 8 * v(x0, t0 + h) - v(x0, t0 + 2 * h)) /
                 (12 * h);
    double v_xx = (-v(x0 - 2 * h, t0) + 16 * v(x0 - h, t0) - 30 * v(x0, t0) +
                   16 * v(x0 + h, t0) - v(x0 + 2 * h, t0)) /
                  (12 * h * h);
    double v_xxx = (v(x0 - 3 * h, t0) - 8 * v(x0 - 2 * h, t0) + 13 * v(x0 - h, t0) -
                    13 * v(x0 + h, t0) + 8 * v(x0 + 2 * h, t0) - v(x0 + 3 * h, t0)) /
                   (8 * h * h * h);
    double th0 = 1.0 / (t0 * (T - t0));
    double w_probe = std::exp(-s * w.phi(x0) * th0) * (v_t - v_xxx - v_xx);

    // analytic derivatives of u
    double uu = u(x0, t0);
    double ux = -2.0 * (x0 - cx) * uu;
    double uxx = (4.0 * (x0 - cx) * (x0 - cx) - 2.0) * uu;
    double uxxx = (12.0 * (x0 - cx) - 8.0 * std::pow(x0 - cx, 3)) * uu;
    double ut = -4.0 * (t0 - ct) * uu;

    auto cv = coefficients_abc(w, x0, t0, Expansion::verified);
    double w_verified = cv.A * uu + cv.B * ux + cv.C * uxx - uxxx + ut;
    CHECK(std::abs(w_verified - w_probe) <= 1e-6 * (1.0 + std::abs(w_probe)));

    auto cp = coefficients_abc(w, x0, t0, Expansion::paper);
    double w_paper = cp.A * uu + cp.B * ux + cp.C * uxx - uxxx + ut;
    CHECK(std::abs(w_paper - w_probe) > 1e-3 * (1.0 + std::abs(w_probe)));
}

TEST_CASE("coefficient combinations: F and the leading-sign skeleton") {
    CarlemanWeight w(1.0, 2.0, 1.0);
    auto c = carleman_coefficients(w, 0.4, 1.0, 0.1);
    CHECK(c.F == doctest::Approx(18.0).epsilon(1e-13));  // 3 C_x = 18 s / (t(T-t))
    // phi'' = -2 < 0; -15 phi'^4 phi'' > 0; -9 phi'^2 phi'' > 0 where phi' != 0
    for (double x : {-0.9, -0.3, 0.5, 0.9}) {
        double fp = w.phi_p(x);
        CHECK(w.phi_pp < 0.0);
        CHECK(-15.0 * std::pow(fp, 4) * w.phi_pp > 0.0);
        CHECK(-9.0 * fp * fp * w.phi_pp > 0.0);
        CHECK(fp != 0.0);  // the zero of phi' sits at -(L + 3T/4), outside [-L, L]
    }
}

TEST_CASE("coefficients_def: closed forms agree with finite differences") {
    CarlemanWeight w(1.0, 2.0, 7.0);
    auto [xg, tg] = margined_grids(1.0, 2.0, 41, 41);
    auto field = coefficients_def(w, xg, tg, 0.1);
    CHECK(field.fd_crosscheck_max_rel <= 1e-6);
    CHECK(field.D.size() == (size_t)41 * 41);
}

TEST_CASE("coefficients: D, E, F all positive at s = 50 on the margined grid") {
    auto scan = positivity_scan(1.0, 2.0, 0.1, {50.0}, 81, 81);
    REQUIRE(scan.rows.size() == 1);
    CHECK(scan.rows[0].min_D > 0.0);
    CHECK(scan.rows[0].min_E > 0.0);
    CHECK(scan.rows[0].min_F > 0.0);
}

TEST_CASE("positivity_scan: finite s0; F positive for every s") {
    std::vector<double> ladder{0.25, 0.5, 1, 2, 4, 8, 16, 32, 64, 128};
    auto scan = positivity_scan(1.0, 2.0, 0.1, ladder, 61, 61);
    CHECK(scan.found);
    CHECK(scan.s0 > 0.0);
    for (auto& r : scan.rows) CHECK(r.min_F > 0.0);
    // margin [0.05, 1.95] on the time axis: the default margined grid
    auto [xg, tg] = margined_grids(1.0, 2.0, 61, 61);
    CHECK(tg.x_min() == doctest::Approx(0.05));
    CHECK(tg.x_max() == doctest::Approx(1.95));
}

TEST_CASE("positivity_scan: s0 does not grow when the margin widens") {
    std::vector<double> ladder{0.25, 0.5, 1, 2, 4, 8, 16, 32, 64, 128};
    auto base = positivity_scan(1.0, 2.0, 0.1, ladder, 61, 61, 0.025, 0.025);
    auto wide = positivity_scan(1.0, 2.0, 0.1, ladder, 61, 61, 0.025, 0.05);
    REQUIRE(base.found);
    REQUIRE(wide.found);
    CHECK(wide.s0 <= base.s0);
}

TEST_CASE("admissible tests: envelope kills q, q_x, q_xx at both walls") {
    std::mt19937_64 rng(61);
    auto q = AdmissibleTest::random_bumps(1.0, 2.0, rng);
    for (double t : {0.3, 1.0, 1.7})
        for (double x : {-1.0, 1.0}) {
            auto d = q.eval(x, t);
            CHECK(std::abs(d.q) <= 1e-12);
            CHECK(std::abs(d.q_x) <= 1e-12);
            CHECK(std::abs(d.q_xx) <= 1e-12);
        }
}

TEST_CASE("admissible tests: closed-form derivatives match finite differences") {
    std::mt19937_64 rng(67);
    auto q = AdmissibleTest::random_bumps(1.0, 2.0, rng);
    const double x = 0.31, t = 0.83, h = 1e-4;
    auto d = q.eval(x, t);
    auto at = [&](double xx, double tt) { return q.eval(xx, tt).q; };
    CHECK(d.q_x ==
          doctest::Approx((at(x + h, t) - at(x - h, t)) / (2 * h)).epsilon(1e-6));
    CHECK(d.q_xx ==
          doctest::Approx((at(x + h, t) - 2 * at(x, t) + at(x - h, t)) / (h * h)).epsilon(1e-5));
    CHECK(d.q_xxx == doctest::Approx((at(x + 2 * h, t) - 2 * at(x + h, t) + 2 * at(x - h, t) -
                                      at(x - 2 * h, t)) /
                                     (2 * h * h * h))
                         .epsilon(1e-4));
    CHECK(d.q_t == doctest::Approx((at(x, t + h) - at(x, t - h)) / (2 * h)).epsilon(1e-6));
}

TEST_CASE("verify_inequality: zero test function gives the 0/0 sentinel") {
    CarlemanWeight w(1.0, 2.0, 4.0);
    AdmissibleTest q;
    q.L = 1.0;
    q.T = 2.0;  // no terms: q == 0
    auto chk = verify_inequality(w, q, 41, 41);
    CHECK_FALSE(chk.defined);
    CHECK(chk.lhs == 0.0);
    CHECK(chk.rhs_raw == 0.0);
}

TEST_CASE("verify_inequality: sine-cubed sample has a finite ratio") {
    CarlemanWeight w(1.0, 2.0, 4.0);
    auto chk = verify_inequality(w, AdmissibleTest::sine_cubed(1.0, 2.0), 61, 61);
    CHECK(chk.defined);
    CHECK(std::isfinite(chk.ratio));
    CHECK(chk.ratio > 0.0);
}

TEST_CASE("verify_inequality: invariant under scaling of q") {
    CarlemanWeight w(1.0, 2.0, 4.0);
    std::mt19937_64 rng(71);
    auto q = AdmissibleTest::random_bumps(1.0, 2.0, rng);
    auto a = verify_inequality(w, q, 41, 41);
    for (auto& t : q.terms) t.amp *= 17.0;
    auto b = verify_inequality(w, q, 41, 41);
    CHECK(a.ratio == doctest::Approx(b.ratio).epsilon(1e-12));
    AdmissibleTest wrong = q;
    wrong.L = 0.5;
    CHECK_THROWS_AS(verify_inequality(w, wrong, 41, 41), std::invalid_argument);
}
