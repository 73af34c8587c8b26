// Batch experiment runner for the KdV-Burgers half-line laboratory.
// Every subcommand resolves its configuration (flags and/or an INI config
// file), runs through the C API, and writes CSV tables plus a JSON manifest
// that echoes the full resolved configuration. Outputs are deterministic
// given the seed; each CSV carries the manifest hash of the run.

#include <CLI11.hpp>
#include <json.hpp>

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "kdvb/kdvb.h"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int EXIT_VALIDATION = 2;
constexpr int EXIT_NUMERIC = 3;

std::string fmt17(double v) {
    char buf[40];
    snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hash_hex(const json& params) {
    char buf[24];
    snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a(params.dump()));
    return buf;
}

struct Run {
    std::string command;
    std::string outdir = "out";
    unsigned long long seed = 12345;
    json params;
    std::vector<std::string> files;

    std::string manifest_hash() const {
        json all{{"command", command}, {"seed", seed}, {"params", params}};
        return hash_hex(all);
    }

    void write_result(kdvb_result* res) {
        fs::create_directories(outdir);
        const std::string hash = manifest_hash();
        for (int ti = 0; ti < kdvb_result_table_count(res); ++ti) {
            long rows = 0, cols = 0;
            kdvb_result_table_dims(res, ti, &rows, &cols);
            const double* data = kdvb_result_table_data(res, ti);
            std::string path = outdir + "/" + kdvb_result_table_name(res, ti) + ".csv";
            std::ofstream f(path);
            f << "# manifest=" << hash << "\n";
            for (int c = 0; c < cols; ++c)
                f << (c ? "," : "") << kdvb_result_table_column(res, ti, c);
            f << "\n";
            for (long r = 0; r < rows; ++r) {
                for (long c = 0; c < cols; ++c) f << (c ? "," : "") << fmt17(data[r * cols + c]);
                f << "\n";
            }
            files.push_back(path);
        }
        json manifest{{"command", command},
                      {"seed", seed},
                      {"params", params},
                      {"manifest_hash", hash},
                      {"library_version", kdvb_version()},
                      {"outputs", files}};
        const char* sc = kdvb_result_scalars_json(res);
        if (sc && *sc) manifest["report"] = json::parse(sc);
        std::ofstream m(outdir + "/manifest.json");
        m << manifest.dump(2) << "\n";
        std::printf("%s: wrote %zu tables to %s (manifest %s)\n", command.c_str(), files.size(),
                    outdir.c_str(), hash.c_str());
        if (sc && *sc) std::printf("report: %s\n", sc);
    }
};

// signal specs: "zero", "gaussian:amp=1,center=5,width=1", "mode:k=1,amp=1",
// "file:path.csv" (two columns, second is taken)
std::vector<double> make_signal(const std::string& spec, const std::vector<double>& points) {
    auto fail = [&](const std::string& m) { throw CLI::ValidationError("signal '" + spec + "': " + m); };
    std::string kind = spec;
    std::map<std::string, std::string> kv;
    if (auto colon = spec.find(':'); colon != std::string::npos) {
        kind = spec.substr(0, colon);
        std::string rest = spec.substr(colon + 1);
        size_t pos = 0;
        while (pos < rest.size()) {
            size_t comma = rest.find(',', pos);
            std::string item = rest.substr(pos, comma == std::string::npos ? comma : comma - pos);
            auto eq = item.find('=');
            if (eq == std::string::npos) fail("expected key=value, got '" + item + "'");
            kv[item.substr(0, eq)] = item.substr(eq + 1);
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
    }
    auto num = [&](const std::string& key, double dflt) {
        auto it = kv.find(key);
        return it == kv.end() ? dflt : std::stod(it->second);
    };
    std::vector<double> out(points.size(), 0.0);
    if (kind == "zero") return out;
    if (kind == "gaussian") {
        double a = num("amp", 1.0), c = num("center", 0.0), w = num("width", 1.0);
        for (size_t i = 0; i < points.size(); ++i) {
            double z = (points[i] - c) / w;
            out[i] = a * std::exp(-z * z);
        }
        return out;
    }
    if (kind == "mode") {
        double k = num("k", 1.0), a = num("amp", 1.0);
        for (size_t i = 0; i < points.size(); ++i) out[i] = a * std::sin(k * points[i]);
        return out;
    }
    if (kind == "file") {
        auto it = kv.find("path");
        if (it == kv.end()) fail("file spec needs path=");
        std::ifstream f(it->second);
        if (!f) fail("cannot open " + it->second);
        std::vector<double> vals;
        std::string line;
        while (std::getline(f, line)) {
            if (line.empty() || line[0] == '#' || std::isalpha((unsigned char)line[0])) continue;
            auto comma = line.find(',');
            vals.push_back(std::stod(comma == std::string::npos ? line : line.substr(comma + 1)));
        }
        if (vals.size() != points.size())
            fail("file has " + std::to_string(vals.size()) + " values, grid needs " +
                 std::to_string(points.size()));
        return vals;
    }
    fail("unknown kind '" + kind + "'");
    return out;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> p(n);
    for (int i = 0; i < n; ++i) p[i] = a + (b - a) * i / (n - 1);
    return p;
}

int finish(kdvb_status st, Run& run, kdvb_result* res) {
    if (st != KDVB_OK) {
        std::fprintf(stderr, "%s: %s\n", run.command.c_str(), kdvb_last_error());
        return st == KDVB_ERR_INVALID ? EXIT_VALIDATION : EXIT_NUMERIC;
    }
    run.write_result(res);
    kdvb_result_free(res);
    return 0;
}

// x-major forcing for the manufactured problem
// u*(x,t) = e^{-t} x^2 e^{-x}: f* = P u* - u* u*_x
std::vector<double> manufactured_forcing(const std::vector<double>& xs,
                                         const std::vector<double>& ts) {
    std::vector<double> f(xs.size() * ts.size());
    for (size_t ix = 0; ix < xs.size(); ++ix)
        for (size_t it = 0; it < ts.size(); ++it) {
            double x = xs[ix], t = ts[it];
            double lin = std::exp(-t) * std::exp(-x) * (-x * x - 2.0 * x + 4.0);
            double nl = std::exp(-2.0 * t) * std::exp(-2.0 * x) * (2.0 * x * x * x - x * x * x * x);
            f[ix * ts.size() + it] = lin - nl;
        }
    return f;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kdvb-lab: KdV-Burgers half-line numerical laboratory"};
    app.set_config("--config", "", "INI config file (key=value, [subcommand] sections)");
    app.require_subcommand(1);
    app.fallthrough();  // --out/--seed may follow the subcommand

    Run run;
    app.add_option("--out", run.outdir, "output directory");
    app.add_option("--seed", run.seed, "random seed recorded in every output");

    // ---- solve-ivp
    auto ivp = app.add_subcommand("solve-ivp", "whole-line propagator evolution");
    struct {
        double x_min = -20, x_max = 20, t_max = 1;
        int nx = 256, nt = 9;
        std::string u0 = "zero";
    } a_ivp;
    ivp->add_option("--x-min", a_ivp.x_min);
    ivp->add_option("--x-max", a_ivp.x_max);
    ivp->add_option("--t-max", a_ivp.t_max);
    ivp->add_option("--nx", a_ivp.nx);
    ivp->add_option("--nt", a_ivp.nt);
    ivp->add_option("--u0", a_ivp.u0, "zero | gaussian:... | mode:... | file:path=...");

    // ---- solve-ibvp
    auto ibvp = app.add_subcommand("solve-ibvp", "linear half-line IBVP with boundary data");
    struct {
        double X = 10, T = 2;
        int nx = 256, nt = 256;
        std::string u0 = "zero", h = "zero", g = "zero";
    } a_ibvp;
    ibvp->add_option("--X", a_ibvp.X);
    ibvp->add_option("--T", a_ibvp.T);
    ibvp->add_option("--nx", a_ibvp.nx);
    ibvp->add_option("--nt", a_ibvp.nt);
    ibvp->add_option("--u0", a_ibvp.u0);
    ibvp->add_option("--dirichlet", a_ibvp.h, "h(t) signal spec");
    ibvp->add_option("--neumann", a_ibvp.g, "g(t) signal spec");

    // ---- solve-nonlinear
    auto nl = app.add_subcommand("solve-nonlinear", "fixed-point solve of the nonlinear IBVP");
    struct {
        double X = 20, T = 1, tol = 1e-10;
        int nx = 192, nt = 129, max_iter = 30;
        std::string u0 = "gaussian:amp=0.05,center=8,width=1.5", h = "zero", g = "zero";
        bool linear_only = false, manufactured = false;
    } a_nl;
    nl->add_option("--X", a_nl.X);
    nl->add_option("--T", a_nl.T);
    nl->add_option("--nx", a_nl.nx);
    nl->add_option("--nt", a_nl.nt);
    nl->add_option("--tol", a_nl.tol);
    nl->add_option("--max-iter", a_nl.max_iter);
    nl->add_option("--u0", a_nl.u0);
    nl->add_option("--dirichlet", a_nl.h, "h(t) signal spec");
    nl->add_option("--neumann", a_nl.g, "g(t) signal spec");
    nl->add_flag("--linear-only", a_nl.linear_only, "disable the nonlinearity");
    nl->add_flag("--manufactured", a_nl.manufactured,
                 "solve the manufactured problem u* = e^{-t} x^2 e^{-x}");

    // ---- energy-audit
    auto en = app.add_subcommand("energy-audit", "energy ledger of the W_0 evolution");
    struct {
        double X = 20, T = 1;
        int nx = 192, nt = 129;
        std::string u0 = "gaussian:amp=1,center=8,width=1.5";
    } a_en;
    en->add_option("--X", a_en.X);
    en->add_option("--T", a_en.T);
    en->add_option("--nx", a_en.nx);
    en->add_option("--nt", a_en.nt);
    en->add_option("--u0", a_en.u0);

    // ---- spectrum
    auto sp = app.add_subcommand("spectrum", "periodic eigenvalues and Ingham gap");
    struct {
        double L = M_PI;
        int n_max = 64;
    } a_sp;
    sp->add_option("--L", a_sp.L);
    sp->add_option("--n-max", a_sp.n_max);

    // ---- observability
    auto ob = app.add_subcommand("observability", "partial-observability ratio ensemble");
    struct {
        double L = M_PI, l = M_PI / 2, T = 4;
        int n_max = 8, draws = 100;
    } a_ob;
    ob->add_option("--L", a_ob.L);
    ob->add_option("--l", a_ob.l);
    ob->add_option("--T", a_ob.T);
    ob->add_option("--n-max", a_ob.n_max);
    ob->add_option("--draws", a_ob.draws);

    // ---- carleman
    auto ca = app.add_subcommand("carleman", "positivity scan and weighted-inequality check");
    struct {
        double L = 1, T = 2, eps = 0.1;
        int nx = 121, nt = 121, samples = 50;
    } a_ca;
    ca->add_option("--L", a_ca.L);
    ca->add_option("--T", a_ca.T);
    ca->add_option("--epsilon", a_ca.eps);
    ca->add_option("--nx", a_ca.nx);
    ca->add_option("--nt", a_ca.nt);
    ca->add_option("--samples", a_ca.samples);

    // ---- hum
    auto hu = app.add_subcommand("hum", "control synthesis P v = f on a window");
    struct {
        double x_min = -1, x_max = 1, T = 2, t1 = 0.6, t2 = 1.4, eps = 0.25;
        int nx = 48, nt = 48, kx = 14, kt = 16;
        std::string f = "gaussian:amp=1,center=0,width=0.4";
        double f_tcenter = 1.0, f_twidth = 0.2;
    } a_hu;
    hu->add_option("--x-min", a_hu.x_min);
    hu->add_option("--x-max", a_hu.x_max);
    hu->add_option("--T", a_hu.T);
    hu->add_option("--t1", a_hu.t1);
    hu->add_option("--t2", a_hu.t2);
    hu->add_option("--epsilon", a_hu.eps);
    hu->add_option("--nx", a_hu.nx);
    hu->add_option("--nt", a_hu.nt);
    hu->add_option("--basis-x", a_hu.kx);
    hu->add_option("--basis-t", a_hu.kt);
    hu->add_option("--f", a_hu.f, "spatial profile of the forcing bump");
    hu->add_option("--f-tcenter", a_hu.f_tcenter);
    hu->add_option("--f-twidth", a_hu.f_twidth);

    // ---- modes
    auto mo = app.add_subcommand("modes", "non-controllable mode family and blow-up scan");
    struct {
        std::vector<double> a{0.5, 0.2, 0.1, 0.05, 0.02};
        double X = 20, T = 1;
        int nx = 2001, nt = 2001;
    } a_mo;
    mo->add_option("--a", a_mo.a, "a ladder (decreasing)");
    mo->add_option("--X", a_mo.X);
    mo->add_option("--T", a_mo.T);
    mo->add_option("--nx", a_mo.nx);
    mo->add_option("--nt", a_mo.nt);

    // ---- steer
    auto stc = app.add_subcommand("steer", "three-stage steering u0 -> uT");
    struct {
        double X = 20, T = 2, beta = 0.4, t1 = 0.6, t2 = 1.4, eps = 0.1;
        int nx = 129, nt = 97, kx = 14, kt = 16;
        std::string u0 = "gaussian:amp=1,center=7,width=2.5";
        std::string uT = "gaussian:amp=0.6,center=11,width=4";
    } a_st;
    stc->add_option("--X", a_st.X);
    stc->add_option("--T", a_st.T);
    stc->add_option("--beta", a_st.beta);
    stc->add_option("--t1", a_st.t1);
    stc->add_option("--t2", a_st.t2);
    stc->add_option("--epsilon", a_st.eps);
    stc->add_option("--nx", a_st.nx);
    stc->add_option("--nt", a_st.nt);
    stc->add_option("--basis-x", a_st.kx);
    stc->add_option("--basis-t", a_st.kt);
    stc->add_option("--u0", a_st.u0);
    stc->add_option("--uT", a_st.uT);

    for (auto* sc : app.get_subcommands({})) sc->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return EXIT_VALIDATION;
    }

    try {
        kdvb_result* res = nullptr;
        if (*ivp) {
            run.command = "solve-ivp";
            run.params = {{"x_min", a_ivp.x_min}, {"x_max", a_ivp.x_max}, {"t_max", a_ivp.t_max},
                          {"nx", a_ivp.nx},       {"nt", a_ivp.nt},       {"u0", a_ivp.u0}};
            auto u0 = make_signal(a_ivp.u0, linspace(a_ivp.x_min, a_ivp.x_max, a_ivp.nx));
            kdvb_status st = kdvb_run_ivp(u0.data(), a_ivp.nx, a_ivp.x_min, a_ivp.x_max, a_ivp.t_max,
                                       a_ivp.nt, &res);
            return finish(st, run, res);
        }
        if (*ibvp) {
            run.command = "solve-ibvp";
            run.params = {{"X", a_ibvp.X}, {"T", a_ibvp.T}, {"nx", a_ibvp.nx}, {"nt", a_ibvp.nt},
                          {"u0", a_ibvp.u0}, {"h", a_ibvp.h}, {"g", a_ibvp.g}};
            auto u0 = make_signal(a_ibvp.u0, linspace(0, a_ibvp.X, a_ibvp.nx));
            auto ts = linspace(0, a_ibvp.T, a_ibvp.nt);
            auto h = make_signal(a_ibvp.h, ts);
            auto g = make_signal(a_ibvp.g, ts);
            kdvb_status st = kdvb_run_linear_ibvp(u0.data(), a_ibvp.nx, a_ibvp.X, h.data(), g.data(),
                                               a_ibvp.nt, a_ibvp.T, &res);
            return finish(st, run, res);
        }
        if (*nl) {
            run.command = "solve-nonlinear";
            run.params = {{"X", a_nl.X},   {"T", a_nl.T},     {"nx", a_nl.nx},
                          {"nt", a_nl.nt}, {"tol", a_nl.tol}, {"max_iter", a_nl.max_iter},
                          {"u0", a_nl.u0}, {"h", a_nl.h},     {"g", a_nl.g},
                          {"linear_only", a_nl.linear_only},
                          {"manufactured", a_nl.manufactured}};
            auto xs = linspace(0, a_nl.X, a_nl.nx);
            auto ts = linspace(0, a_nl.T, a_nl.nt);
            std::vector<double> u0, h = make_signal(a_nl.h, ts), g = make_signal(a_nl.g, ts);
            std::vector<double> forcing;
            const double* fptr = nullptr;
            if (a_nl.manufactured) {
                u0.resize(xs.size());
                for (size_t i = 0; i < xs.size(); ++i)
                    u0[i] = xs[i] * xs[i] * std::exp(-xs[i]);
                forcing = manufactured_forcing(xs, ts);
                fptr = forcing.data();
            } else {
                u0 = make_signal(a_nl.u0, xs);
            }
            kdvb_status st = kdvb_run_nonlinear(u0.data(), a_nl.nx, a_nl.X, h.data(), g.data(),
                                             a_nl.nt, a_nl.T, fptr, a_nl.linear_only ? 0 : 1,
                                             a_nl.tol, a_nl.max_iter, &res);
            return finish(st, run, res);
        }
        if (*en) {
            run.command = "energy-audit";
            run.params = {{"X", a_en.X}, {"T", a_en.T}, {"nx", a_en.nx}, {"nt", a_en.nt},
                          {"u0", a_en.u0}};
            auto u0 = make_signal(a_en.u0, linspace(0, a_en.X, a_en.nx));
            kdvb_status st =
                kdvb_run_energy_audit(u0.data(), a_en.nx, a_en.X, a_en.T, a_en.nt, &res);
            return finish(st, run, res);
        }
        if (*sp) {
            run.command = "spectrum";
            run.params = {{"L", a_sp.L}, {"n_max", a_sp.n_max}};
            std::vector<double> lr(2 * a_sp.n_max + 1), li(2 * a_sp.n_max + 1);
            double gap = 0, tstar = 0;
            kdvb_status st =
                kdvb_periodic_spectrum(a_sp.L, a_sp.n_max, lr.data(), li.data(), &gap, &tstar);
            if (st != KDVB_OK) {
                std::fprintf(stderr, "spectrum: %s\n", kdvb_last_error());
                return EXIT_VALIDATION;
            }
            res = nullptr;
            // assemble the table locally: n, Re, Im
            fs::create_directories(run.outdir);
            std::ofstream f(run.outdir + "/spectrum.csv");
            f << "# manifest=" << run.manifest_hash() << "\nn,re_lambda,im_lambda\n";
            for (int n = -a_sp.n_max; n <= a_sp.n_max; ++n)
                f << n << "," << fmt17(lr[n + a_sp.n_max]) << "," << fmt17(li[n + a_sp.n_max])
                  << "\n";
            json manifest{{"command", run.command},
                          {"seed", run.seed},
                          {"params", run.params},
                          {"manifest_hash", run.manifest_hash()},
                          {"report", {{"gap", gap}, {"t_star_min", tstar}}}};
            std::ofstream m(run.outdir + "/manifest.json");
            m << manifest.dump(2) << "\n";
            std::printf("spectrum: gamma=%.12g t_star_min=%.12g\n", gap, tstar);
            return 0;
        }
        if (*ob) {
            run.command = "observability";
            run.params = {{"L", a_ob.L}, {"l", a_ob.l}, {"T", a_ob.T}, {"n_max", a_ob.n_max},
                          {"draws", a_ob.draws}};
            kdvb_status st = kdvb_run_observability(a_ob.L, a_ob.l, a_ob.T, a_ob.n_max, a_ob.draws,
                                                 run.seed, &res);
            return finish(st, run, res);
        }
        if (*ca) {
            run.command = "carleman";
            run.params = {{"L", a_ca.L}, {"T", a_ca.T}, {"epsilon", a_ca.eps}, {"nx", a_ca.nx},
                          {"nt", a_ca.nt}, {"samples", a_ca.samples}};
            kdvb_status st = kdvb_run_carleman(a_ca.L, a_ca.T, a_ca.eps, a_ca.nx, a_ca.nt,
                                            a_ca.samples, run.seed, &res);
            return finish(st, run, res);
        }
        if (*hu) {
            run.command = "hum";
            run.params = {{"x_min", a_hu.x_min}, {"x_max", a_hu.x_max}, {"T", a_hu.T},
                          {"t1", a_hu.t1},       {"t2", a_hu.t2},       {"epsilon", a_hu.eps},
                          {"nx", a_hu.nx},       {"nt", a_hu.nt},       {"f", a_hu.f},
                          {"f_tcenter", a_hu.f_tcenter}, {"f_twidth", a_hu.f_twidth},
                          {"basis_x", a_hu.kx},  {"basis_t", a_hu.kt}};
            auto prof = make_signal(a_hu.f, linspace(a_hu.x_min, a_hu.x_max, a_hu.nx));
            auto ts = linspace(0, a_hu.T, a_hu.nt);
            std::vector<double> f((size_t)a_hu.nx * a_hu.nt);
            for (int ix = 0; ix < a_hu.nx; ++ix)
                for (int it = 0; it < a_hu.nt; ++it) {
                    double z = (ts[it] - a_hu.f_tcenter) / a_hu.f_twidth;
                    double w = (ts[it] >= a_hu.t1 && ts[it] <= a_hu.t2) ? std::exp(-z * z) : 0.0;
                    f[(size_t)ix * a_hu.nt + it] = prof[ix] * w;
                }
            kdvb_status st = kdvb_run_hum(f.data(), a_hu.nx, a_hu.x_min, a_hu.x_max, a_hu.nt, a_hu.T,
                                       a_hu.t1, a_hu.t2, a_hu.eps, a_hu.kx, a_hu.kt, &res);
            return finish(st, run, res);
        }
        if (*mo) {
            run.command = "modes";
            run.params = {{"a", a_mo.a}, {"X", a_mo.X}, {"T", a_mo.T}, {"nx", a_mo.nx},
                          {"nt", a_mo.nt}};
            kdvb_status st = kdvb_run_modes(a_mo.a.data(), (int)a_mo.a.size(), a_mo.X, a_mo.T,
                                         a_mo.nx, a_mo.nt, &res);
            return finish(st, run, res);
        }
        if (*stc) {
            run.command = "steer";
            run.params = {{"X", a_st.X},   {"T", a_st.T},   {"beta", a_st.beta},
                          {"t1", a_st.t1}, {"t2", a_st.t2}, {"epsilon", a_st.eps},
                          {"nx", a_st.nx}, {"nt", a_st.nt}, {"u0", a_st.u0},
                          {"uT", a_st.uT}, {"basis_x", a_st.kx}, {"basis_t", a_st.kt}};
            auto xs = linspace(0, a_st.X, a_st.nx);
            auto u0 = make_signal(a_st.u0, xs);
            auto uT = make_signal(a_st.uT, xs);
            kdvb_status st = kdvb_run_steer(u0.data(), uT.data(), a_st.nx, a_st.X, a_st.T, a_st.nt,
                                         a_st.beta, a_st.t1, a_st.t2, a_st.eps, a_st.kx, a_st.kt,
                                         &res);
            return finish(st, run, res);
        }
    } catch (const CLI::ValidationError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return EXIT_VALIDATION;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return EXIT_NUMERIC;
    }
    return 0;
}
