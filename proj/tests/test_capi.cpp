#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "kdvb/kdvb.h"

TEST_CASE("version and error strings are stable C strings") {
    CHECK(kdvb_version() != nullptr);
    CHECK(kdvb_last_error() != nullptr);
}

TEST_CASE("characteristic roots through the C surface") {
    double roots[6];
    int decaying[3], nd = 0, degen = 0;
    REQUIRE(kdvb_characteristic_roots(2.0, 0.0, roots, decaying, &nd, &degen) == KDVB_OK);
    CHECK(nd == 2);
    CHECK(degen == 0);
    int found_one = 0;
    for (int i = 0; i < 3; ++i)
        if (std::abs(roots[2 * i] - 1.0) < 1e-9 && std::abs(roots[2 * i + 1]) < 1e-9) {
            found_one = 1;
            CHECK(decaying[i] == 0);
        }
    CHECK(found_one == 1);

    REQUIRE(kdvb_characteristic_roots(0.0, 0.0, roots, decaying, &nd, &degen) == KDVB_OK);
    CHECK(degen == 1);
}

TEST_CASE("cubic roots through the C surface") {
    double roots[6];
    REQUIRE(kdvb_cubic_roots(1, 0, 0, 0, 18, 0, roots) == KDVB_OK);
    bool m3 = false;
    for (int i = 0; i < 3; ++i)
        m3 = m3 || (std::abs(roots[2 * i] + 3.0) < 1e-9 && std::abs(roots[2 * i + 1]) < 1e-9);
    CHECK(m3);
}

TEST_CASE("whole-line propagate: error codes for bad input") {
    std::vector<double> re(8, 1.0), out(8);
    CHECK(kdvb_whole_line_propagate(re.data(), nullptr, 8, 8.0, -1.0, out.data(), nullptr) ==
          KDVB_ERR_INVALID);
    CHECK(std::strlen(kdvb_last_error()) > 0);
    CHECK(kdvb_whole_line_propagate(re.data(), nullptr, 2, 8.0, 1.0, out.data(), nullptr) ==
          KDVB_ERR_INVALID);
    CHECK(kdvb_whole_line_propagate(re.data(), nullptr, 8, 8.0, 0.0, out.data(), nullptr) ==
          KDVB_OK);
    for (double v : out) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("spectrum and mode helpers") {
    int n_max = 2;
    std::vector<double> lr(5), li(5);
    double gap = 0, tstar = 0;
    REQUIRE(kdvb_periodic_spectrum(M_PI, n_max, lr.data(), li.data(), &gap, &tstar) == KDVB_OK);
    CHECK(gap == doctest::Approx(2.0));
    CHECK(tstar == doctest::Approx(M_PI / 2));
    CHECK(lr[n_max + 1] == doctest::Approx(-1.0));
    CHECK(li[n_max + 1] == doctest::Approx(-1.0));

    double b = 0, lam = 0, resid = 1;
    REQUIRE(kdvb_noncontrol_mode(1.0, &b, &lam, &resid) == KDVB_OK);
    CHECK(b == doctest::Approx(std::sqrt(5.0)));
    CHECK(lam == doctest::Approx(18.0));
    CHECK(resid <= 1e-12);
    CHECK(kdvb_noncontrol_mode(-0.5, &b, &lam, &resid) == KDVB_ERR_INVALID);
}

TEST_CASE("observability ratio through the C surface") {
    int n_max = 8;
    std::vector<double> cr(2 * n_max + 1, 0.0), ci(2 * n_max + 1, 0.0);
    cr[n_max + 1] = 1.0;  // n = 1
    double ratio = 0;
    REQUIRE(kdvb_observability_ratio(M_PI, M_PI / 2, 4.0, n_max, cr.data(), ci.data(), 0, 0, 0,
                                     &ratio) == KDVB_OK);
    double closed = 1.0 / (0.5 * (1.0 - std::exp(-8.0)) / 2.0);
    CHECK(ratio == doctest::Approx(closed).epsilon(1e-12));
}

TEST_CASE("result handles: modes run produces tables and JSON scalars") {
    double avals[3] = {0.5, 0.1, 0.02};
    kdvb_result* res = nullptr;
    REQUIRE(kdvb_run_modes(avals, 3, 20.0, 1.0, 801, 801, &res) == KDVB_OK);
    REQUIRE(res != nullptr);
    CHECK(kdvb_result_table_count(res) == 2);
    int modes_idx = -1;
    for (int i = 0; i < kdvb_result_table_count(res); ++i)
        if (std::string(kdvb_result_table_name(res, i)) == "modes") modes_idx = i;
    REQUIRE(modes_idx >= 0);
    long rows = 0, cols = 0;
    REQUIRE(kdvb_result_table_dims(res, modes_idx, &rows, &cols) == KDVB_OK);
    CHECK(rows == 3);
    CHECK(cols == 4);
    const double* data = kdvb_result_table_data(res, modes_idx);
    REQUIRE(data != nullptr);
    CHECK(data[0] == doctest::Approx(0.5));                        // a
    CHECK(data[2] == doctest::Approx(2.0 * 0.5 * 2.0 * 2.0));       // lambda = 2a(1+2a)^2
    CHECK(std::string(kdvb_result_table_column(res, modes_idx, 1)) == "b");
    auto j = nlohmann::json::parse(kdvb_result_scalars_json(res));
    REQUIRE(j.contains("ratio_increases_as_a_decreases"));
    int scan_idx = modes_idx == 0 ? 1 : 0;
    long srows = 0, scols = 0;
    REQUIRE(kdvb_result_table_dims(res, scan_idx, &srows, &scols) == KDVB_OK);
    const double* sd = kdvb_result_table_data(res, scan_idx);
    bool increasing = true;
    for (long r = 1; r < srows; ++r)
        if (sd[r * scols] < sd[(r - 1) * scols] && sd[r * scols + 3] <= sd[(r - 1) * scols + 3])
            increasing = false;
    CHECK(j["ratio_increases_as_a_decreases"].get<bool>() == increasing);
    kdvb_result_free(res);
}

TEST_CASE("runs are deterministic given the seed") {
    kdvb_result* a = nullptr;
    kdvb_result* b = nullptr;
    REQUIRE(kdvb_run_observability(M_PI, M_PI / 2, 4.0, 4, 10, 77, &a) == KDVB_OK);
    REQUIRE(kdvb_run_observability(M_PI, M_PI / 2, 4.0, 4, 10, 77, &b) == KDVB_OK);
    CHECK(std::string(kdvb_result_scalars_json(a)) == std::string(kdvb_result_scalars_json(b)));
    long rows = 0, cols = 0;
    kdvb_result_table_dims(a, 0, &rows, &cols);
    const double* da = kdvb_result_table_data(a, 0);
    const double* db = kdvb_result_table_data(b, 0);
    for (long i = 0; i < rows * cols; ++i) CHECK(da[i] == db[i]);
    kdvb_result_free(a);
    kdvb_result_free(b);
}

TEST_CASE("hum run through the C surface") {
    const int nx = 32, nt = 40;
    const double T = 2.0, t1 = 0.6, t2 = 1.4;
    std::vector<double> f((size_t)nx * nt, 0.0);
    for (int ix = 0; ix < nx; ++ix)
        for (int it = 0; it < nt; ++it) {
            double x = -1.0 + 2.0 * ix / (nx - 1);
            double t = T * it / (nt - 1);
            if (t < t1 || t > t2) continue;
            f[(size_t)ix * nt + it] =
                std::exp(-x * x / 0.16 - std::pow((t - 1.0) / 0.2, 2));
        }
    kdvb_result* res = nullptr;
    REQUIRE(kdvb_run_hum(f.data(), nx, -1.0, 1.0, nt, T, t1, t2, 0.25, 10, 12, &res) == KDVB_OK);
    auto j = nlohmann::json::parse(kdvb_result_scalars_json(res));
    CHECK(j["forward_residual"].get<double>() <= 1e-6);
    CHECK(j["support_leakage"].get<double>() <= 1e-10);
    kdvb_result_free(res);

    // validation error path: epsilon too large
    CHECK(kdvb_run_hum(f.data(), nx, -1.0, 1.0, nt, T, t1, t2, 0.9, 10, 12, &res) ==
          KDVB_ERR_INVALID);
}
