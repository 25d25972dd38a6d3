// Command line front end: one subcommand per stage, JSON reports and CSV traces in --out.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "blowup/decomposition.hpp"
#include "blowup/error.hpp"
#include "blowup/feynman_kac.hpp"
#include "blowup/harness.hpp"
#include "blowup/parameter_dynamics.hpp"
#include "blowup/profiles.hpp"
#include "blowup/suite.hpp"

namespace fs = std::filesystem;
using namespace blowup;
using nlohmann::json;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> scenario;
    std::optional<double> p;
    std::optional<double> b0;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "flat key = value config file");
    sub->add_option("--seed", c.seed, "RNG seed (u64)");
    sub->add_option("--out", c.out, "output directory");
    sub->add_option("--scenario", c.scenario, "homogeneous | paper-family | custom");
    sub->add_option("--p", c.p, "nonlinearity exponent");
    sub->add_option("--b0", c.b0, "initial profile parameter b0");
}

ExperimentConfig resolve(const Common& c) {
    ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
    if (c.seed) cfg.seed = *c.seed;
    if (c.out) cfg.out = *c.out;
    if (c.scenario) cfg = parse_config("scenario = " + *c.scenario, cfg);
    if (c.p) cfg.p = *c.p;
    if (c.b0) cfg.b0 = *c.b0;
    return cfg;
}

void write_json(const fs::path& path, const json& j) {
    fs::create_directories(path.parent_path());
    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path.string());
    f << j.dump(2) << "\n";
}

json provenance(const ExperimentConfig& cfg) {
    return {{"config", to_json(cfg)}, {"config_hash", config_hash(cfg)}, {"seed", cfg.seed},
            {"version", library_version()}};
}

void print_check(const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] %-28s %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
}

std::string num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

int cmd_simulate(const ExperimentConfig& cfg) {
    const RunReport r = run_pipeline(cfg);
    write_run_outputs(r, cfg.out);
    if (r.status != "ok") {
        std::fprintf(stderr, "simulate: stage '%s' failed: %s\n", r.error_stage.c_str(), r.error_message.c_str());
        return 1;
    }
    if (r.t_star.method.size()) std::printf("t* = %.9g (%s)\n", r.t_star.t_star, r.t_star.method.c_str());
    for (const auto& c : r.checks) print_check(c.name, c.pass, num(c.value) + " vs " + num(c.limit) + "  " + c.note);
    std::printf("outputs in %s\n", cfg.out.c_str());
    return r.passed() ? 0 : 1;
}

int cmd_decompose(const ExperimentConfig& cfg) {
    const Grid g(cfg.L, cfg.N);
    const InitialData d = make_initial_data(cfg, g);
    const ProfileParams guess = ProfileParams::from_c(d.c0, d.b0, cfg.l);
    SplitOptions so;
    so.l = cfg.l;
    const SplitResult s = solve_g(d.u0, cfg.p, guess.a, std::max(d.b0, 1e-8), so);
    const Field V = profile(ProfileKind::V_ab, s.params, cfg.p, g);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < g.size(); ++i)
        rows.push_back({g.node(i), d.u0[i], V[i], s.deviation[i], s.xi[i]});
    fs::create_directories(cfg.out);
    write_csv(fs::path(cfg.out) / "split.csv", {"y", "v", "V", "deviation", "xi"}, rows);
    const double ortho = std::max(std::abs(s.ortho0), std::abs(s.ortho2));
    json j = provenance(cfg);
    j["split"] = {{"a", s.params.a}, {"b", s.params.b}, {"c", s.params.c}, {"ortho0", s.ortho0}, {"ortho2", s.ortho2},
                  {"iterations", s.iterations}, {"damped", s.damped}, {"in_window", s.in_window},
                  {"dev_weighted", weighted_sup_norm(s.deviation, WeightSpec{3, 0.0})},
                  {"initial_norm_n3", d.norm_n3}, {"initial_norm_n0", d.norm_n0}};
    const bool ok = ortho <= 1e-10 && s.in_window;
    j["passed"] = ok;
    write_json(fs::path(cfg.out) / "decompose.json", j);
    std::printf("g(v) = (a, b) = (%.12g, %.12g), c = %.12g, %d iterations\n", s.params.a, s.params.b, s.params.c,
                s.iterations);
    print_check("orthogonality", ortho <= 1e-10, num(ortho) + " vs 1e-10");
    print_check("a_window", s.in_window, num(s.params.a));
    return ok ? 0 : 1;
}

int cmd_spectrum(const ExperimentConfig& cfg) {
    const double q = cfg.p - 1.0;
    const double c0 = std::isnan(cfg.c0) ? 0.5 - cfg.b0 / q : cfg.c0;
    OperatorParams op;
    op.p = cfg.p;
    op.prof = ProfileParams::from_c(c0, cfg.b0, cfg.l);
    const Grid g(20.0, 2001);
    const std::size_t k = 8;
    const auto ev = extrapolated_eigenvalues(assemble(OperatorKind::L_abc, op, g), k);
    const auto ev0 = extrapolated_eigenvalues(assemble(OperatorKind::L0_a, op, g), k);
    const EigenBoundReport rep = check_eigen_bounds(cfg.p, op.prof, ev, 1e-5);
    double l0_err = 0.0;
    std::vector<std::vector<double>> rows;
    for (std::size_t n = 0; n < k; ++n) {
        const auto& r = rep.rows[n];
        l0_err = std::max(l0_err, std::abs(ev0[n] - op.prof.a * static_cast<double>(n)));
        rows.push_back({static_cast<double>(n), ev[n], r.lower, r.upper, r.margin, ev0[n]});
    }
    fs::create_directories(cfg.out);
    write_csv(fs::path(cfg.out) / "spectrum.csv", {"n", "lambda", "lower", "upper", "margin", "lambda_L0"}, rows);
    json j = provenance(cfg);
    j["params"] = {{"a", op.prof.a}, {"b", op.prof.b}, {"c", op.prof.c}};
    j["eigenvalues"] = ev;
    j["L0_eigenvalues"] = ev0;
    j["bounds_ok"] = rep.ok;
    j["L0_max_error"] = l0_err;
    const bool ok = rep.ok && l0_err <= 1e-5;
    j["passed"] = ok;
    write_json(fs::path(cfg.out) / "spectrum.json", j);
    for (std::size_t n = 0; n < k; ++n)
        std::printf("n=%zu  lambda=%.8f  in [%.8f, %.8f]\n", n, ev[n], rep.rows[n].lower, rep.rows[n].upper);
    print_check("eigenvalue_bounds", rep.ok, std::to_string(rep.violations.size()) + " violations");
    print_check("L0_spectrum", l0_err <= 1e-5, num(l0_err) + " vs 1e-5");
    return ok ? 0 : 1;
}

int cmd_fk(const ExperimentConfig& cfg) {
    const double alpha = 0.5, beta = 0.05, r = 1.0, p = cfg.p;
    std::vector<KernelPoint> pts;
    for (double x : {-1.0, -0.5, 0.0, 0.5, 1.0})
        for (double y : {-1.0, -0.5, 0.0, 0.5, 1.0}) pts.push_back({x, y});
    auto V = [&](double y) { return profile_potential(y, p, alpha, beta); };
    const FKComparison cmp = compare_fk_direct(V, alpha, r, pts, cfg.fk_paths, cfg.seed);
    const std::vector<double> durations{0.25, 0.5, 1.0};
    const std::vector<KernelPoint> dpts{{0.0, 0.5}, {0.5, 1.0}, {-0.5, 0.25}};
    const double K = profile_potential_gradient_bound(p, alpha, beta);
    const DerivativeBoundReport der = derivative_bound_check([&](double y, double) { return V(y); }, K, alpha,
                                                             durations, dpts, cfg.fk_paths / 10, cfg.seed);
    const MehlerCalibration cal = calibrate_mehler(alpha, r, pts);
    std::vector<std::vector<double>> rows;
    for (const auto& row : cmp.rows) rows.push_back({row.point.x, row.point.y, row.mc, row.mc_se, row.direct, row.z});
    fs::create_directories(cfg.out);
    write_csv(fs::path(cfg.out) / "fk.csv", {"x", "y", "mc", "mc_se", "direct", "z"}, rows);
    json j = provenance(cfg);
    j["comparison"] = {{"n_paths", cmp.n_paths}, {"max_abs_z", cmp.max_abs_z}, {"ok", cmp.ok}};
    json drows = json::array();
    for (const auto& d : der.rows)
        drows.push_back({{"r", d.r}, {"x", d.point.x}, {"y", d.point.y}, {"derivative", d.derivative},
                         {"std_error", d.std_error}, {"bound", d.bound}, {"ok", d.ok}});
    j["derivative_bound"] = {{"K", der.K}, {"rows", drows}, {"ok", der.ok}};
    j["mehler"] = {{"constant", cal.constant}, {"unnormalised_over_calibrated", cal.prefactor_ratio},
                   {"shape_error", cal.shape_error}};
    const bool ok = cmp.ok && der.ok;
    j["passed"] = ok;
    write_json(fs::path(cfg.out) / "fk.json", j);
    print_check("fk_vs_direct", cmp.ok, "max |z| " + num(cmp.max_abs_z) + " at " + std::to_string(cmp.n_paths) + " paths");
    print_check("derivative_bound", der.ok, "K = " + num(K));
    std::printf("Mehler prefactor: unnormalised / calibrated = %.6f\n", cal.prefactor_ratio);
    return ok ? 0 : 1;
}

int cmd_asymptotics(const ExperimentConfig& cfg) {
    const double p = cfg.p, q = p - 1.0;
    TruncatedOptions opt;
    opt.p = p;
    opt.l = cfg.l;
    for (int k = 0; k <= 400; ++k) opt.sample_times.push_back(0.25 * k);
    const auto traj = integrate_truncated({0.0, cfg.b0, 0.5 - cfg.b0 / q}, 100.0, opt);
    const LawFit fit = fit_inverse_b_slope(traj.states, p, 10.0, 100.0);
    const double gauge = truncated_gauge_ratio(traj.states, opt);
    const BetaLaw law{cfg.b0, p};
    std::vector<std::vector<double>> rows;
    for (const auto& s : traj.states) {
        const double a = opt.l * s.c + (1.0 - opt.l) * opt.s;
        rows.push_back({s.tau, s.b, s.c, a, law(s.tau), 1.0 / s.b});
    }
    fs::create_directories(cfg.out);
    write_csv(fs::path(cfg.out) / "truncated.csv", {"tau", "b", "c", "a", "beta", "inv_b"}, rows);
    json j = provenance(cfg);
    j["inv_b_slope"] = {{"fitted", fit.fitted}, {"target", fit.target}, {"rel_error", fit.rel_error},
                        {"window", {fit.window_lo, fit.window_hi}}};
    j["gauge_ratio_max"] = gauge;
    bool jac_ok = true;
    for (double l : {1.5, 2.0, 3.0}) {
        const auto jac = jacobian_at_equilibrium(l, p);
        jac_ok = jac_ok && std::abs(jac.eigenvalues[0] - (1.0 - l)) <= 1e-10 && std::abs(jac.eigenvalues[1]) <= 1e-10;
        j["jacobian"].push_back({{"l", l}, {"eigenvalues", jac.eigenvalues}});
    }
    const bool ok = fit.rel_error <= 0.01 && jac_ok && !traj.left_region;
    j["passed"] = ok;
    write_json(fs::path(cfg.out) / "asymptotics.json", j);
    print_check("inv_b_slope", fit.rel_error <= 0.01, num(fit.fitted) + " vs " + num(fit.target));
    print_check("equilibrium_jacobian", jac_ok, "eigenvalues {1 - l, 0}");
    std::printf("max |a - 1/2 + 2b/(p-1)| / beta^2 = %.4g\n", gauge);
    return ok ? 0 : 1;
}

int cmd_suite(const ExperimentConfig& cfg, const std::string& tag_list) {
    std::set<std::string> tags;
    std::stringstream ss(tag_list);
    std::string t;
    while (std::getline(ss, t, ','))
        if (!t.empty()) tags.insert(t);
    SuiteOptions opt;
    opt.seed = cfg.seed;
    opt.pipeline = cfg;
    opt.fk_paths = cfg.fk_paths;
    const SuiteReport rep = verify_suite(tags, opt, [](const CriterionResult& r) {
        std::printf("%s\n", format_line(r).c_str());
        std::fflush(stdout);
    });
    json j = to_json(rep);
    j["config_hash"] = config_hash(cfg);
    j["seed"] = cfg.seed;
    write_json(fs::path(cfg.out) / "suite.json", j);
    return rep.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-time blowup experiments for u_t = u_xx + |u|^{p-1} u"};
    app.require_subcommand(1);
    app.set_version_flag("--version", library_version());

    Common sim, dec, spec, fk, asym, suite;
    auto* s_sim = app.add_subcommand("simulate", "similarity-frame pipeline (or the homogeneous run)");
    auto* s_dec = app.add_subcommand("decompose", "split the initial datum into profile and fluctuation");
    auto* s_spec = app.add_subcommand("spectrum", "lowest eigenvalues against the bounds");
    auto* s_fk = app.add_subcommand("fk-verify", "Feynman-Kac kernel against the direct propagator");
    auto* s_asym = app.add_subcommand("asymptotics", "truncated parameter system and its laws");
    auto* s_suite = app.add_subcommand("suite", "acceptance criteria");
    add_common(s_sim, sim);
    add_common(s_dec, dec);
    add_common(s_spec, spec);
    add_common(s_fk, fk);
    add_common(s_asym, asym);
    add_common(s_suite, suite);
    std::string tags = "all";
    s_suite->add_option("--tags", tags, "comma separated criterion tags, or 'all'");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*s_sim) return cmd_simulate(resolve(sim));
        if (*s_dec) return cmd_decompose(resolve(dec));
        if (*s_spec) return cmd_spectrum(resolve(spec));
        if (*s_fk) return cmd_fk(resolve(fk));
        if (*s_asym) return cmd_asymptotics(resolve(asym));
        if (*s_suite) return cmd_suite(resolve(suite), tags);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
