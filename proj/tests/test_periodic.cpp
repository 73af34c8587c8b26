#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "kdvb/periodic.hpp"

using namespace kdvb;

TEST_CASE("spectrum: closed form, L = pi") {
    auto s = spectrum(M_PI, 4);
    CHECK(s.lambda(0) == Complex(0, 0));
    CHECK(s.lambda(1).real() == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(s.lambda(1).imag() == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(s.gap == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("spectrum: matches an independent evaluation for |n| <= 64") {
    for (double L : {1.0, M_PI, 2.0 * M_PI}) {
        auto s = spectrum(L, 64);
        for (int n = -64; n <= 64; ++n) {
            double k = n * M_PI / L;
            Complex ref = Complex(0, -1) * (k * k * k) - Complex(k * k, 0);
            CHECK(std::abs(s.lambda(n) - ref) <= 1e-15 * (1.0 + std::abs(ref)));
            CHECK(s.lambda(n).real() <= 0.0);
        }
    }
}

TEST_CASE("spectrum: dispersive gaps, paired and sorted readings") {
    // the gap derivation pairs +-n: alpha_n - alpha_{-n} = 2 n^3 (pi/L)^3 >= gamma;
    // the sorted consecutive sequence only guarantees gamma/2 (attained at n = 0)
    for (double L : {1.0, 2.5}) {
        auto s = spectrum(L, 32);
        for (int n = 1; n <= 32; ++n) {
            double paired = std::pow(n * M_PI / L, 3) - std::pow(-n * M_PI / L, 3);
            CHECK(paired >= s.gap - 1e-12);
        }
        double min_consecutive = std::numeric_limits<double>::infinity();
        for (int n = -32; n < 32; ++n) {
            double a0 = std::pow(n * M_PI / L, 3), a1 = std::pow((n + 1) * M_PI / L, 3);
            min_consecutive = std::min(min_consecutive, a1 - a0);
        }
        CHECK(min_consecutive >= 0.5 * s.gap - 1e-12);
        CHECK(min_consecutive < s.gap);  // the distinction the docs record
    }
}

TEST_CASE("propagate: constant mode is invariant, single mode decays as e^{-t}") {
    auto s = spectrum(M_PI, 4);
    ModeCoeffs c(4);
    c.coeff(0) = 2.0;
    auto out = propagate_periodic(c, s, 5.0);
    CHECK(std::abs(out.coeff(0) - Complex(2, 0)) < 1e-15);

    ModeCoeffs d(4);
    d.coeff(1) = 1.0;
    auto out2 = propagate_periodic(d, s, 1.0);
    CHECK(std::abs(out2.coeff(1)) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK_THROWS_AS(propagate_periodic(d, s, -1.0), std::invalid_argument);
}

TEST_CASE("propagate: dissipativity and the dense-quadrature norm oracle") {
    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> uni(-1, 1);
    double L = M_PI;
    int n_max = 6;
    auto s = spectrum(L, n_max);
    ModeCoeffs c(n_max);
    for (int n = -n_max; n <= n_max; ++n) c.coeff(n) = Complex(uni(rng), uni(rng));
    double t = 0.3;
    auto ct = propagate_periodic(c, s, t);
    CHECK(std::sqrt(ct.l2_norm_sq()) <= std::sqrt(c.l2_norm_sq()));

    // spectral sum
    double spec = 0;
    for (int n = -n_max; n <= n_max; ++n) {
        double k = n * M_PI / L;
        spec += std::exp(-2.0 * k * k * t) * std::norm(c.coeff(n));
    }
    // periodic-trapezoid spatial quadrature is exact for trigonometric
    // polynomials, so this is an independent norm evaluation
    int nq = 8 * n_max + 9;
    double dx = 2.0 * L / nq, quad = 0;
    for (int i = 0; i < nq; ++i)
        quad += std::norm(evaluate_modes(c, s, -L + i * dx, t)) * dx;
    CHECK(std::abs(spec - quad) <= 1e-12 * spec);
    CHECK(std::abs(ct.l2_norm_sq() - spec) <= 1e-12 * spec);
}

TEST_CASE("observability: single-mode closed form") {
    double L = M_PI, l = M_PI / 2, T = 4.0;
    ModeCoeffs c(8);
    c.coeff(1) = 1.0;
    double k = M_PI / L;
    double closed = 1.0 / ((l / L) * (1.0 - std::exp(-2.0 * k * k * T)) / (2.0 * k * k));
    CHECK(observability_ratio(c, L, l, T) == doctest::Approx(closed).epsilon(1e-12));
    ObservabilityOptions q;
    q.use_quadrature = true;
    q.nx = 129;
    q.nt = 1025;
    CHECK(observability_ratio(c, L, l, T, q) == doctest::Approx(closed).epsilon(1e-4));
}

TEST_CASE("observability: degree-zero homogeneity and zero rejection") {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> uni(-1, 1);
    ModeCoeffs c(5);
    for (int n = -5; n <= 5; ++n) c.coeff(n) = Complex(uni(rng), uni(rng));
    double r = observability_ratio(c, M_PI, M_PI / 2, 4.0);
    ModeCoeffs scaled = c;
    for (auto& v : scaled.c) v *= -3.7;
    CHECK(observability_ratio(scaled, M_PI, M_PI / 2, 4.0) == doctest::Approx(r).epsilon(1e-12));
    ModeCoeffs zero(5);
    CHECK_THROWS_AS(observability_ratio(zero, M_PI, M_PI / 2, 4.0), std::invalid_argument);
    CHECK_THROWS_AS(observability_ratio(c, M_PI, 2 * M_PI, 4.0), std::invalid_argument);
}

TEST_CASE("observability: quadrature path agrees with the closed form") {
    std::mt19937_64 rng(57);
    std::uniform_real_distribution<double> uni(-1, 1);
    ModeCoeffs c(4);
    for (int n = -4; n <= 4; ++n)
        c.coeff(n) = Complex(uni(rng), uni(rng)) / std::sqrt(1.0 + n * n);
    double closed = observability_ratio(c, M_PI, M_PI / 2, 4.0);
    ObservabilityOptions q;
    q.use_quadrature = true;
    q.nx = 193;
    q.nt = 769;
    CHECK(observability_ratio(c, M_PI, M_PI / 2, 4.0, q) == doctest::Approx(closed).epsilon(1e-3));
}

TEST_CASE("ingham parameters") {
    auto p = ingham_params(M_PI);
    CHECK(p.gamma == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(p.t_star_min == doctest::Approx(M_PI / 2).epsilon(1e-15));
    auto q = ingham_params(2.0 * M_PI);
    CHECK(q.gamma == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(q.t_star_min == doctest::Approx(4.0 * M_PI).epsilon(1e-15));
    double last = std::numeric_limits<double>::infinity();
    for (double L : {0.5, 1.0, 2.0, 4.0}) {
        CHECK(ingham_params(L).gamma < last);
        last = ingham_params(L).gamma;
    }
}
