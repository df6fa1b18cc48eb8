#include <chrono>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "poiskern/analysis.hpp"
#include "poiskern/closedform.hpp"
#include "poiskern/factorization.hpp"
#include "poiskern/kernel.hpp"
#include "poiskern/manifest.hpp"
#include "poiskern/montecarlo.hpp"
#include "poiskern/operators.hpp"
#include "poiskern/spectral.hpp"

using namespace poiskern;
using Complex = std::complex<double>;

namespace {

struct VerificationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Timer {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

OperatorSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open spec file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("spec file " + path + " is not valid JSON: " + e.what());
    }
    OperatorSpec spec = OperatorSpec::from_json(j);
    spec.validate();
    return spec;
}

void write_file(const std::string& path, const std::string& body) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << body;
}

void write_manifest(RunManifest& man, const Timer& timer, const std::string& path) {
    man.wall_clock = timer.seconds();
    write_file(path, man.to_json().dump(2) + "\n");
}

std::vector<double> log_grid(double lo, double hi, int n) {
    if (!(lo > 0.0) || !(hi > lo) || n < 2)
        throw std::invalid_argument("frequency grid needs 0 < lo < hi and at least two points");
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        g.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
    return g;
}

nlohmann::json complex_pair(Complex z) { return nlohmann::json::array({z.real(), z.imag()}); }

nlohmann::json shape_json(const BellShapeReport& rep, const std::string& manifest_hash) {
    nlohmann::json ts = nlohmann::json::array(), orders = nlohmann::json::array(),
                   counts = nlohmann::json::array(), refined = nlohmann::json::array();
    for (const BellShapeEntry& e : rep.entries) {
        ts.push_back(e.t);
        orders.push_back(e.order);
        counts.push_back(e.changes);
        refined.push_back(e.changes_refined);
    }
    return nlohmann::json{{"manifest", manifest_hash},
                          {"y", rep.y},
                          {"ts", ts},
                          {"orders", orders},
                          {"counts", counts},
                          {"counts_refined", refined},
                          {"verdict", rep.pass ? "pass" : "fail"},
                          {"tol", 1e-7}};
}

void cmd_kernel(const std::string& spec_path, double y, double t, int derivative, int bell_order,
                const std::string& prefix) {
    Timer timer;
    OperatorSpec spec = load_spec(spec_path);
    KernelOptions opts;
    opts.smoothing_t = t;
    opts.derivative = derivative;
    KernelEstimate kernel = build_kernel(spec, y, opts);

    RunManifest man;
    man.command = "kernel";
    man.spec = spec.to_json();
    man.parameters = {{"y", y}, {"t", t}, {"derivative", derivative}, {"bellshape", bell_order}};
    man.tolerances = {{"xi_tol", opts.xi_tol}, {"window_tol", opts.window_tol}};
    man.outputs = {prefix + ".csv"};
    if (bell_order >= 0) man.outputs.push_back(prefix + "_shape.json");

    std::ostringstream csv;
    csv << "# manifest=" << man.hash() << "\n";
    write_csv(kernel, csv);
    write_file(prefix + ".csv", csv.str());

    bool ok = true;
    if (bell_order >= 0) {
        BellShapeReport rep = check_bell_shape(spec, y, {1e-3, 1e-2}, bell_order);
        write_file(prefix + "_shape.json", shape_json(rep, man.hash()).dump(2) + "\n");
        ok = rep.pass;
    }
    write_manifest(man, timer, prefix + "_manifest.json");
    if (!ok) throw VerificationError("bell-shape verdict: fail (see " + prefix + "_shape.json)");
}

void cmd_verify_factorization(const std::string& spec_path, double split_height, double tol,
                              double lo, double hi, int n, bool inject, const std::string& out) {
    Timer timer;
    OperatorSpec spec = load_spec(spec_path);
    FactorizationReport rep = verify_factorization(spec, split_height, log_grid(lo, hi, n), tol);
    if (inject) {
        // corrupt the solution values and rerun the aggregation, proving the
        // report actually detects a broken factorisation
        rep.max_residual = 0.0;
        for (FactorizationPoint& pt : rep.points) {
            pt.lhs *= 1.001;
            pt.residual = std::abs(pt.lhs - pt.factor1 * pt.factor2) / std::abs(pt.lhs);
            rep.max_residual = std::max(rep.max_residual, pt.residual);
        }
        rep.pass = rep.pass && rep.max_residual <= tol;
    }

    RunManifest man;
    man.command = "verify-factorization";
    man.spec = spec.to_json();
    man.parameters = {{"split", split_height}, {"xi_lo", lo},
                      {"xi_hi", hi},           {"xi_n", n},
                      {"inject_fault", inject}};
    man.tolerances = {{"residual", tol}, {"zero_limit", 1e-6}};
    man.outputs = {out};

    nlohmann::json j = rep.to_json();
    j["manifest"] = man.hash();
    j["tol"] = tol;
    write_file(out, j.dump(2) + "\n");
    write_manifest(man, timer, out + ".manifest.json");
    if (!rep.pass) throw VerificationError("factorisation verdict: fail (see " + out + ")");
}

void cmd_verify_bellshape(const std::string& spec_path, double y, int max_order,
                          std::vector<double> ts, const std::string& out) {
    Timer timer;
    OperatorSpec spec = load_spec(spec_path);
    if (ts.empty()) ts = {1e-3, 1e-2};
    BellShapeReport rep = check_bell_shape(spec, y, ts, max_order);

    RunManifest man;
    man.command = "verify-bellshape";
    man.spec = spec.to_json();
    man.parameters = {{"y", y}, {"orders", max_order}, {"ts", ts}};
    man.tolerances = {{"sign_tol", 1e-7}};
    man.outputs = {out};

    write_file(out, shape_json(rep, man.hash()).dump(2) + "\n");
    write_manifest(man, timer, out + ".manifest.json");
    if (!rep.pass) throw VerificationError("bell-shape verdict: fail (see " + out + ")");
}

void cmd_closed_form(const std::string& family, int d, double alpha, double p, double q, double mu,
                     double y, double x_lo, double x_hi, int n, const std::string& out) {
    Timer timer;
    if (n < 2 || !(x_hi > x_lo)) throw std::invalid_argument("profile grid needs x_lo < x_hi, n >= 2");

    std::function<double(double)> profile;
    nlohmann::json params;
    if (family == "classical") {
        params = {{"d", d}, {"y", y}};
        profile = [d, y](double x) {
            std::vector<double> pt(static_cast<std::size_t>(d), 0.0);
            pt[0] = x;
            return classical_kernel(d, pt, y, std::vector<double>(pt.size(), 0.0));
        };
    } else if (family == "cs") {
        params = {{"d", d}, {"alpha", alpha}, {"y", y}};
        profile = [d, alpha, y](double x) {
            std::vector<double> pt(static_cast<std::size_t>(d), 0.0);
            pt[0] = x;
            return cs_kernel(d, alpha, pt, y, std::vector<double>(pt.size(), 0.0));
        };
    } else if (family == "homogeneous") {
        params = {{"p", p}, {"q", q}, {"mu", mu}, {"y", y}};
        HomogeneousProfile prof(p, q, mu);
        profile = scale_kernel([prof](double x) { return prof(x); }, y, mu);
    } else {
        throw std::invalid_argument("unknown family: " + family + " (classical, cs, homogeneous)");
    }

    RunManifest man;
    man.command = "closed-form";
    man.parameters = params;
    man.parameters["family"] = family;
    man.parameters["x_lo"] = x_lo;
    man.parameters["x_hi"] = x_hi;
    man.parameters["n"] = n;
    man.outputs = {out};

    std::ostringstream csv;
    csv << std::setprecision(17);
    csv << "# manifest=" << man.hash() << "\n";
    csv << "# family=" << family << ", params=" << params.dump() << "\n";
    csv << "x,value\n";
    for (int i = 0; i < n; ++i) {
        const double x = x_lo + (x_hi - x_lo) * static_cast<double>(i) / (n - 1);
        csv << x << ',' << profile(x) << '\n';
    }
    write_file(out, csv.str());
    write_manifest(man, timer, out + ".manifest.json");
}

const char* outcome_name(HitOutcome o) {
    switch (o) {
        case HitOutcome::Hit0: return "hit0";
        case HitOutcome::HitR: return "hitR";
        default: return "censored";
    }
}

void cmd_simulate(const std::string& spec_path, double y0, int paths, double dt,
                  std::uint64_t seed, double max_time, double atom_band,
                  std::vector<double> xi_grid, double ks_tol, const std::string& prefix,
                  int workers) {
    Timer timer;
    PathConfig cfg;
    cfg.spec = load_spec(spec_path);
    cfg.y0 = y0;
    cfg.dt = dt;
    cfg.max_time = max_time;
    cfg.seed = seed;
    cfg.atom_band = atom_band;
    if (xi_grid.empty()) xi_grid = {0.5, 1.0, 2.0};

    std::vector<HitSample> samples = run_simulation(cfg, paths, workers);
    std::size_t hits = 0;
    for (const HitSample& s : samples)
        if (s.outcome == HitOutcome::Hit0) ++hits;

    RunManifest man;
    man.command = "simulate";
    man.spec = cfg.spec.to_json();
    man.seed = seed;
    man.parameters = {{"y0", y0},           {"paths", paths},
                      {"dt", dt},           {"max_time", max_time},
                      {"atom_band", atom_band}, {"xi", xi_grid}};
    man.tolerances = {{"charfn_sigma", 3.0}, {"ks", ks_tol}};
    man.outputs = {prefix + "_samples.csv", prefix + "_summary.json"};

    std::ostringstream csv;
    csv << std::setprecision(17);
    csv << "# manifest=" << man.hash() << "\n";
    csv << "outcome,x,t\n";
    for (const HitSample& s : samples)
        csv << outcome_name(s.outcome) << ',' << s.x << ',' << s.elapsed << '\n';
    write_file(prefix + "_samples.csv", csv.str());

    bool pass = true;
    nlohmann::json summary{{"manifest", man.hash()}, {"paths", paths}};
    const double frac = static_cast<double>(hits) / static_cast<double>(paths);
    const double mass = solve_bounded(cfg.spec, Complex(0.0, 0.0)).value(y0).real();
    const double mass_sigma = std::sqrt(std::max(frac * (1.0 - frac), 1e-12) / paths);
    const bool mass_ok = std::abs(frac - mass) <= 3.0 * mass_sigma;
    pass = pass && mass_ok;
    summary["hit_fraction"] = frac;
    summary["mass_oracle"] = mass;
    summary["mass_pass"] = mass_ok;

    if (samples.size() >= 1000) {
        nlohmann::json points = nlohmann::json::array();
        auto charfn = estimate_charfn(samples, xi_grid);
        for (const CharfnPoint& pt : charfn) {
            SpectralSolution sol = solve_bounded(cfg.spec, Complex(pt.xi, 0.0));
            const Complex oracle = sol.value(y0);
            const bool ok = std::abs(pt.value - oracle) <= 3.0 * pt.se();
            pass = pass && ok;
            points.push_back({{"xi", pt.xi},
                              {"estimate", complex_pair(pt.value)},
                              {"se", pt.se()},
                              {"oracle", complex_pair(oracle)},
                              {"pass", ok}});
        }
        summary["charfn"] = points;
    }

    if (hits >= 10000) {
        KernelEstimate kernel = build_kernel(cfg.spec, y0).mirrored();
        const double ks = ks_test(samples, conditional_cdf(kernel));
        const bool ks_ok = ks <= ks_tol;
        pass = pass && ks_ok;
        summary["ks"] = ks;
        summary["ks_tol"] = ks_tol;
        summary["ks_pass"] = ks_ok;
    }

    summary["pass"] = pass;
    write_file(prefix + "_summary.json", summary.dump(2) + "\n");
    write_manifest(man, timer, prefix + "_manifest.json");
    if (!pass) throw VerificationError("simulation checks failed (see " + prefix + "_summary.json)");
}

void cmd_rogers(const std::string& spec_path, double lo, double hi, int n,
                const std::string& prefix, int workers) {
    Timer timer;
    OperatorSpec spec = load_spec(spec_path);
    std::vector<double> grid = log_grid(lo, hi, n);
    std::vector<Complex> zgrid;
    zgrid.reserve(grid.size());
    for (double x : grid) zgrid.emplace_back(x, 0.0);
    RogersSample sweep = psi_sweep(spec, zgrid, {}, workers);
    RogersReport rep = check_rogers(sweep);

    RunManifest man;
    man.command = "rogers";
    man.spec = spec.to_json();
    man.parameters = {{"xi_lo", lo}, {"xi_hi", hi}, {"xi_n", n}};
    man.tolerances = {{"re_ratio", 1e-9}};
    man.outputs = {prefix + ".csv", prefix + ".json"};

    std::ostringstream csv;
    csv << std::setprecision(17);
    csv << "# manifest=" << man.hash() << "\n";
    csv << "xi,psi_re,psi_im,re_ratio\n";
    for (std::size_t i = 0; i < sweep.xi.size(); ++i) {
        const Complex ratio = sweep.psi[i] / sweep.xi[i];
        csv << sweep.xi[i].real() << ',' << sweep.psi[i].real() << ',' << sweep.psi[i].imag()
            << ',' << ratio.real() << '\n';
    }
    write_file(prefix + ".csv", csv.str());

    nlohmann::json j{{"manifest", man.hash()},
                     {"min_re_ratio", rep.min_re_ratio},
                     {"at_xi", complex_pair(rep.at_xi)},
                     {"pass", rep.pass}};
    write_file(prefix + ".json", j.dump(2) + "\n");
    write_manifest(man, timer, prefix + ".manifest.json");
    if (!rep.pass) throw VerificationError("Rogers inequality verdict: fail (see " + prefix + ".json)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"boundary Poisson kernels of planar diffusions"};
    app.require_subcommand(1);
    int workers = 0;
    app.add_option("--workers", workers,
                   "worker threads (default: POISKERN_WORKERS or hardware concurrency)");

    auto* kernel = app.add_subcommand("kernel", "invert the boundary symbol into a kernel slice");
    std::string k_spec, k_out = "kernel";
    double k_y = 0.5, k_t = -1.0;
    int k_deriv = 0, k_bell = 2;
    kernel->add_option("--spec", k_spec, "operator spec JSON file")->required();
    kernel->add_option("--y", k_y, "slice height")->required();
    kernel->add_option("--t", k_t, "Gaussian smoothing time (default: library choice)");
    kernel->add_option("--derivative", k_deriv, "x-derivative order of the slice");
    kernel->add_option("--bellshape", k_bell, "max derivative order for the shape report; -1 skips");
    kernel->add_option("--out", k_out, "output prefix");

    auto* vfact = app.add_subcommand("verify-factorization",
                                     "split the operator and test the boundary factorisation");
    std::string f_spec, f_out = "factorization.json";
    double f_split = 0.5, f_tol = 1e-8, f_lo = 0.05, f_hi = 20.0;
    int f_n = 60;
    bool f_inject = false;
    vfact->add_option("--spec", f_spec, "operator spec JSON file")->required();
    vfact->add_option("--split", f_split, "interior split height")->required();
    vfact->add_option("--tol", f_tol, "residual tolerance");
    vfact->add_option("--xi-lo", f_lo, "lowest frequency");
    vfact->add_option("--xi-hi", f_hi, "highest frequency");
    vfact->add_option("--xi-n", f_n, "number of log-spaced frequencies");
    vfact->add_flag("--inject-fault", f_inject, "corrupt the solution values; the run must fail");
    vfact->add_option("--out", f_out, "report path");

    auto* vbell = app.add_subcommand("verify-bellshape",
                                     "count sign changes of smoothed kernel derivatives");
    std::string b_spec, b_out = "bellshape.json";
    double b_y = 0.5;
    int b_orders = 6;
    std::vector<double> b_ts;
    vbell->add_option("--spec", b_spec, "operator spec JSON file")->required();
    vbell->add_option("--y", b_y, "slice height")->required();
    vbell->add_option("--orders", b_orders, "highest derivative order");
    vbell->add_option("--t", b_ts, "smoothing times (default: 1e-3 1e-2)");
    vbell->add_option("--out", b_out, "report path");

    auto* cform = app.add_subcommand("closed-form", "tabulate a closed-form kernel profile");
    std::string c_family, c_out = "profile.csv";
    int c_d = 1, c_n = 801;
    double c_alpha = 1.0, c_p = 1.0, c_q = 0.0, c_mu = 1.0, c_y = 1.0;
    double c_xlo = -8.0, c_xhi = 8.0;
    cform->add_option("--family", c_family, "classical | cs | homogeneous")->required();
    cform->add_option("--d", c_d, "horizontal dimension (classical, cs)");
    cform->add_option("--alpha", c_alpha, "fractional order (cs)");
    cform->add_option("--p", c_p, "symmetric coefficient (homogeneous)");
    cform->add_option("--q", c_q, "drift coefficient (homogeneous)");
    cform->add_option("--mu", c_mu, "scaling exponent (homogeneous)");
    cform->add_option("--y", c_y, "height");
    cform->add_option("--x-lo", c_xlo, "grid start");
    cform->add_option("--x-hi", c_xhi, "grid end");
    cform->add_option("--n", c_n, "grid size");
    cform->add_option("--out", c_out, "CSV path");

    auto* sim = app.add_subcommand("simulate", "sample floor hits and compare to the solver");
    std::string s_spec, s_out = "simulate";
    double s_y0 = 0.5, s_dt = 1e-4, s_maxt = 1e3, s_band = 0.0, s_kstol = 0.01;
    int s_paths = 100000;
    std::uint64_t s_seed = 1;
    std::vector<double> s_xi;
    sim->add_option("--spec", s_spec, "operator spec JSON file")->required();
    sim->add_option("--y0", s_y0, "start height")->required();
    sim->add_option("--paths", s_paths, "number of paths");
    sim->add_option("--dt", s_dt, "Euler step");
    sim->add_option("--seed", s_seed, "master seed");
    sim->add_option("--max-time", s_maxt, "censoring horizon");
    sim->add_option("--atom-band", s_band, "local-time band half-width (default sqrt(dt))");
    sim->add_option("--xi", s_xi, "frequencies to compare (default 0.5 1 2)");
    sim->add_option("--ks-tol", s_kstol, "KS gate, applied when at least 10000 paths hit");
    sim->add_option("--out", s_out, "output prefix");

    auto* rog = app.add_subcommand("rogers", "sweep the boundary exponent and test its sign");
    std::string r_spec, r_out = "rogers";
    double r_lo = 0.05, r_hi = 50.0;
    int r_n = 100;
    rog->add_option("--spec", r_spec, "operator spec JSON file")->required();
    rog->add_option("--xi-lo", r_lo, "lowest frequency");
    rog->add_option("--xi-hi", r_hi, "highest frequency");
    rog->add_option("--xi-n", r_n, "number of log-spaced frequencies");
    rog->add_option("--out", r_out, "output prefix");

    try {
        app.parse(argc, argv);
        if (workers > 0) setenv("POISKERN_WORKERS", std::to_string(workers).c_str(), 1);
        if (*kernel) cmd_kernel(k_spec, k_y, k_t, k_deriv, k_bell, k_out);
        if (*vfact) cmd_verify_factorization(f_spec, f_split, f_tol, f_lo, f_hi, f_n, f_inject, f_out);
        if (*vbell) cmd_verify_bellshape(b_spec, b_y, b_orders, b_ts, b_out);
        if (*cform) cmd_closed_form(c_family, c_d, c_alpha, c_p, c_q, c_mu, c_y, c_xlo, c_xhi, c_n, c_out);
        if (*sim) cmd_simulate(s_spec, s_y0, s_paths, s_dt, s_seed, s_maxt, s_band, s_xi, s_kstol, s_out, workers);
        if (*rog) cmd_rogers(r_spec, r_lo, r_hi, r_n, r_out, workers);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const VerificationError& e) {
        std::cerr << "verification failed: " << e.what() << "\n";
        return 4;
    } catch (const SolverError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "malformed input: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
