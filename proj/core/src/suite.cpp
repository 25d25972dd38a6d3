#include "blowup/suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>

#include "blowup/decomposition.hpp"
#include "blowup/error.hpp"
#include "blowup/feynman_kac.hpp"
#include "blowup/heat_solver.hpp"
#include "blowup/parameter_dynamics.hpp"
#include "blowup/profiles.hpp"

namespace blowup {

namespace {

struct Criterion {
    int id;
    const char* tag;
    const char* name;
    double limit_s;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> c = {
        {1, "heat", "homogeneous blowup time", 30.0},
        {2, "local", "Duhamel vs IMEX on the local existence interval", 10.0},
        {3, "splitting", "splitting exactness and b0^2 stability", 5.0},
        {4, "spectral", "eigenvalue sandwich and harmonic oscillator spectrum", 60.0},
        {5, "laws", "slope of 1/b against tau", 300.0},
        {6, "parameters", "a, c -> 1/2 with the gauge defect O(beta^2)", 0.0},
        {7, "majorants", "majorant boundedness", 0.0},
        {8, "energy", "energy monotonicity", 0.0},
        {9, "criterion", "negative scaled energy forces blowup", 0.0},
        {10, "fk", "Feynman-Kac kernel against the direct propagator", 120.0},
        {11, "decay", "projected propagator decay", 0.0},
        {12, "equilibrium", "truncated system Jacobian at (0, 1/2)", 0.0},
        {13, "scaling", "scaling equivariance", 0.0},
    };
    return c;
}

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

struct Outcome {
    bool pass = false;
    std::string summary;
    nlohmann::json detail;
};

// ------------------------------------------------------------ 1: heat

Outcome heat_check() {
    const Grid g(20.0, 2001);
    HeatProblem hp{3.0, Field::sample(g, [](double) { return 1.0; }, Parity::even)};
    auto [trace, est] = solve_to_blowup(hp);
    const double exact = 0.5;
    const double rel = std::abs(est.t_star - exact) / exact;
    Outcome o;
    o.pass = rel <= 0.01 && trace.reason == Termination::blowup_detected;
    o.summary = "t* = " + fmt("%.6f", est.t_star) + ", rel error " + fmt("%.2e", rel) + " (limit 1e-2)";
    o.detail = {{"t_star", est.t_star}, {"exact", exact}, {"rel_error", rel}, {"method", est.method},
                {"termination", to_string(trace.reason)}, {"records", trace.records.size()}};
    return o;
}

// ------------------------------------------------------------ 2: local

Outcome local_check() {
    const double p = 3.0;
    // sqrt(T_local) is about 0.05, so the sampled heat kernel needs h well below that.
    const Grid g(6.0, 1201);
    HeatProblem hp{p, Field::sample(g, [](double x) { return std::exp(-x * x); }, Parity::even)};
    const DuhamelResult d = duhamel_local_solve(hp, 64);
    const double T = d.T_local;
    const std::size_t imex_steps = 640;
    Field u = hp.u0;
    double diff = 0.0;
    const std::size_t per_slice = imex_steps / (d.times.size() - 1);
    for (std::size_t m = 1; m < d.times.size(); ++m) {
        for (std::size_t k = 0; k < per_slice; ++k) u = step_imex(u, T / static_cast<double>(imex_steps), p);
        diff = std::max(diff, (u - d.trajectory[m]).sup_norm());
    }
    const double bound = 3.0 * std::cbrt(2.0);
    const bool t_ok = std::abs(T - 1.0 / 432.0) <= 1e-15;
    const bool bound_ok = std::abs(d.apriori_bound - bound) <= 1e-12 && d.max_sup <= bound;
    Outcome o;
    o.pass = diff <= 1e-4 && t_ok && bound_ok;
    o.summary = "sup difference " + fmt("%.2e", diff) + " (limit 1e-4), max |u| " + fmt("%.4f", d.max_sup) +
                " <= " + fmt("%.4f", bound);
    o.detail = {{"T_local", T}, {"sup_difference", diff}, {"apriori_bound", d.apriori_bound},
                {"max_sup", d.max_sup}, {"picard_iterations", d.iterations}};
    return o;
}

// ------------------------------------------------------------ 3: splitting

Outcome splitting_check() {
    const double p = 3.0, q = p - 1.0;
    const Grid g(60.0, 3001);
    Outcome o;
    // Exactness: the profile itself splits with zero fluctuation.
    const ProfileParams exact = ProfileParams::from_a(0.45, 0.05);
    const Field V = profile(ProfileKind::V_ab, exact, p, g);
    const SplitResult s0 = solve_g(V, p, exact.a + 0.02, exact.b * 1.3);
    const double err = std::max(std::abs(s0.params.a - exact.a), std::abs(s0.params.b - exact.b));
    o.detail["exactness_error"] = err;
    o.detail["exactness_iterations"] = s0.iterations;

    // Stability: a perturbation of size b0^2 moves the parameters and the weighted
    // fluctuation by amounts proportional to b0^2.
    std::vector<double> dmu, dev;
    for (double b0 : {0.1, 0.05, 0.025}) {
        const ProfileParams pp = ProfileParams::from_a(0.5 - 2.0 * b0 / q, b0);
        const Field base = profile(ProfileKind::V_ab, pp, p, g);
        const Field pert =
            Field::sample(g, [&](double y) { return b0 * b0 * std::cos(y) * std::exp(-y * y / 8.0); }, Parity::even);
        const Field v = base + pert;
        const SplitResult s = solve_g(v, p, pp.a, pp.b);
        const double d_mu = std::hypot(s.params.a - pp.a, s.params.b - pp.b);
        const double d_v = weighted_sup_norm(s.deviation, WeightSpec{3, 0.0});
        dmu.push_back(d_mu / (b0 * b0));
        dev.push_back(d_v / (b0 * b0));
        o.detail["sweep"].push_back({{"b0", b0}, {"dmu_over_b0sq", dmu.back()}, {"dev_over_b0sq", dev.back()},
                                     {"iterations", s.iterations}});
    }
    auto spread = [](const std::vector<double>& x) {
        return *std::max_element(x.begin(), x.end()) / *std::min_element(x.begin(), x.end());
    };
    const double sp_mu = spread(dmu), sp_dev = spread(dev);
    o.detail["spread_dmu"] = sp_mu;
    o.detail["spread_dev"] = sp_dev;
    o.pass = err <= 1e-12 && sp_mu < 2.0 && sp_dev < 2.0;
    o.summary = "exactness " + fmt("%.1e", err) + " (limit 1e-12), spreads " + fmt("%.3f", sp_mu) + " / " +
                fmt("%.3f", sp_dev) + " (limit 2)";
    return o;
}

// ------------------------------------------------------------ 4: spectral

Outcome spectral_check() {
    const double p = 3.0;
    const Grid g(20.0, 2001);
    const std::size_t k = 8;
    Outcome o;
    std::size_t cases = 0, failures = 0;
    double worst_margin = INFINITY;
    for (int ia = 0; ia < 5; ++ia)
        for (int ic = 0; ic < 5; ++ic)
            for (int ib = 0; ib < 5; ++ib) {
                OperatorParams op;
                op.p = p;
                op.prof = {0.25 + 0.75 * ia / 4.0, 0.2 * ib / 4.0, 0.25 + 0.75 * ic / 4.0, 2.0};
                const auto ev = extrapolated_eigenvalues(assemble(OperatorKind::L_abc, op, g), k);
                const EigenBoundReport rep = check_eigen_bounds(p, op.prof, ev, 1e-5);
                ++cases;
                for (const auto& r : rep.rows) worst_margin = std::min(worst_margin, r.margin);
                if (!rep.ok) {
                    ++failures;
                    o.detail["violations"].push_back({{"a", op.prof.a}, {"b", op.prof.b}, {"c", op.prof.c}});
                }
            }
    double l0_err = 0.0;
    for (double a : {0.25, 0.4375, 0.625, 0.8125, 1.0}) {
        OperatorParams op;
        op.prof = ProfileParams::from_a(a, 0.0);
        const auto ev = extrapolated_eigenvalues(assemble(OperatorKind::L0_a, op, g), k);
        for (std::size_t n = 0; n < ev.size(); ++n) l0_err = std::max(l0_err, std::abs(ev[n] - a * static_cast<double>(n)));
    }
    o.detail["cases"] = cases;
    o.detail["failures"] = failures;
    o.detail["smallest_margin"] = worst_margin;
    o.detail["L0_max_error"] = l0_err;
    o.pass = failures == 0 && l0_err <= 1e-5;
    o.summary = std::to_string(cases - failures) + "/" + std::to_string(cases) + " parameter triples inside, L0 error " +
                fmt("%.1e", l0_err) + " (limit 1e-5)";
    return o;
}

// ------------------------------------------------ 5-7: pipeline based

const Check* find_check(const RunReport& r, const std::string& name) {
    for (const auto& c : r.checks)
        if (c.name == name) return &c;
    return nullptr;
}

bool check_pass(const RunReport& r, const std::string& name) {
    const Check* c = find_check(r, name);
    return c && c->pass;
}

double check_value(const RunReport& r, const std::string& name) {
    const Check* c = find_check(r, name);
    return c ? c->value : NAN;
}

Outcome pipeline_failed(const RunReport& r) {
    Outcome o;
    o.summary = "pipeline failed in stage '" + r.error_stage + "': " + r.error_message;
    o.detail = {{"stage", r.error_stage}, {"message", r.error_message}};
    return o;
}

Outcome laws_check(const RunReport& r, double p) {
    if (r.status != "ok") return pipeline_failed(r);
    TruncatedOptions topt;
    topt.p = p;
    const double b0 = r.samples.front().b;
    const auto traj = integrate_truncated({0.0, b0, 0.5 - b0 / (p - 1.0)}, 100.0, topt);
    const LawFit control = fit_inverse_b_slope(traj.states, p, 10.0, 100.0);
    const LawFit& pipe = r.fits->inv_b_slope;
    Outcome o;
    o.pass = pipe.rel_error <= 0.15 && control.rel_error <= 0.01 && !traj.left_region;
    o.summary = "pipeline slope " + fmt("%.4f", pipe.fitted) + " (" + fmt("%.1f", 100 * pipe.rel_error) +
                "%, limit 15%), truncated " + fmt("%.5f", control.fitted) + " (" +
                fmt("%.2f", 100 * control.rel_error) + "%, limit 1%)";
    o.detail = {{"target", pipe.target},
                {"pipeline", {{"fitted", pipe.fitted}, {"rel_error", pipe.rel_error}, {"window", {pipe.window_lo, pipe.window_hi}},
                              {"count", pipe.count}}},
                {"truncated", {{"fitted", control.fitted}, {"rel_error", control.rel_error},
                               {"window", {control.window_lo, control.window_hi}}, {"count", control.count}}},
                {"lambda_exponent", r.fits->lambda_exponent.fitted},
                {"t_star", r.t_star.t_star}};
    return o;
}

Outcome parameters_check(const RunReport& r) {
    if (r.status != "ok") return pipeline_failed(r);
    Outcome o;
    o.pass = check_pass(r, "gauge_ratio_max") && check_pass(r, "a_to_half") && check_pass(r, "c_to_half");
    const auto& last = r.samples.back();
    o.summary = "max gauge ratio " + fmt("%.3f", r.max_gauge_ratio) + " (limit 10), a(end) - 1/2 = " +
                fmt("%.2e", last.a - 0.5) + ", c(end) - 1/2 = " + fmt("%.2e", last.c - 0.5);
    o.detail = {{"max_gauge_ratio", r.max_gauge_ratio},
                {"a_shrink", check_value(r, "a_to_half")},
                {"c_shrink", check_value(r, "c_to_half")},
                {"final", {{"tau", last.tau}, {"a", last.a}, {"b", last.b}, {"c", last.c}}}};
    return o;
}

Outcome majorants_check(const RunReport& base, const SuiteOptions& opt) {
    if (base.status != "ok") return pipeline_failed(base);
    Outcome o;
    bool pass = true;
    double worst_growth = 0.0, worst_m2 = 0.0;
    auto record = [&](double C, const RunReport& r) {
        if (r.status != "ok") {
            pass = false;
            o.detail["runs"].push_back({{"C", C}, {"error", r.error_message}});
            return;
        }
        const double growth = check_value(r, "majorant_growth"), m2 = check_value(r, "M2_max");
        worst_growth = std::max(worst_growth, growth);
        worst_m2 = std::max(worst_m2, m2);
        pass = pass && check_pass(r, "majorant_growth") && check_pass(r, "M2_max");
        nlohmann::json cds;
        for (const auto& m : r.majorants)
            cds.push_back({{"C_D", m.C_D}, {"M2", m.M2.back()}, {"coverage", m.cutoff_coverage}});
        o.detail["runs"].push_back({{"C", C},
                                    {"growth", growth},
                                    {"M1", r.majorants.front().M1.back()},
                                    {"scale", r.majorant_scale},
                                    {"M2_by_cutoff", cds}});
    };
    record(opt.pipeline.pert_C, base);
    for (double C : {0.5, 2.0}) {
        if (C == opt.pipeline.pert_C) continue;
        ExperimentConfig cfg = opt.pipeline;
        cfg.pert_C = C;
        record(C, run_pipeline(cfg));
    }
    o.pass = pass;
    o.summary = "worst final/scale " + fmt("%.3f", worst_growth) + " (limit 10), worst M2 " + fmt("%.4f", worst_m2) +
                " (limit 0.1) over C in {0.5, 1, 2}";
    return o;
}

// ------------------------------------------------------------ 8: energy

Outcome energy_check() {
    const double p = 3.0;
    Outcome o;
    // w-flow: data near the constant equilibrium, with a dip so the flow has work to do.
    const Grid gw(20.0, 801);
    Field w = Field::sample(gw, [](double y) { return 0.9 * std::exp(-y * y / 40.0) + 0.2 * std::exp(-y * y); }, Parity::even);
    double S_prev = lyapunov_S(w, p), S_rise = 0.0;
    const double S_first = S_prev;
    for (int k = 0; k < 500; ++k) {
        w = step_w_flow(w, 0.01, p);
        const double S = lyapunov_S(w, p);
        S_rise = std::max(S_rise, S - S_prev);
        S_prev = S;
    }
    // IMEX run of the heat equation; small data so it lives on the whole horizon.
    const Grid gu(20.0, 2001);
    HeatProblem hp{p, Field::sample(gu, [](double x) { return 0.8 * std::exp(-x * x / 2.0); }, Parity::even), 2.0};
    auto [trace, est] = solve_to_blowup(hp);
    (void)est;
    double E_rise = 0.0;
    for (std::size_t i = 1; i < trace.records.size(); ++i)
        E_rise = std::max(E_rise, trace.records[i].energy_E - trace.records[i - 1].energy_E);
    o.pass = S_rise <= 1e-8 && E_rise <= 1e-8;
    o.summary = "largest step increase: S " + fmt("%.1e", S_rise) + ", E " + fmt("%.1e", E_rise) + " (limit 1e-8)";
    o.detail = {{"S_initial", S_first}, {"S_final", S_prev}, {"S_max_increase", S_rise},
                {"E_initial", trace.records.front().energy_E}, {"E_final", trace.records.back().energy_E},
                {"E_max_increase", E_rise}, {"E_steps", trace.records.size()}};
    return o;
}

// ------------------------------------------------------------ 9: criterion

Outcome criterion_check() {
    const double p = 3.0;
    const Grid g(20.0, 2001);
    struct Case {
        double A, s, T;
    };
    const Case cases[] = {{3.0, 1.0, 1.0}, {4.0, 2.0, 0.5}, {2.0, 4.0, 2.0}, {5.0, 0.5, 0.25}, {2.5, 8.0, 1.5}};
    Outcome o;
    bool pass = true;
    std::size_t ok = 0;
    for (const auto& c : cases) {
        HeatProblem hp{p, Field::sample(g, [&](double x) { return c.A * std::exp(-x * x / c.s); }, Parity::even),
                       c.T * 1.5};
        const double S_T = scaled_energy_S_T(hp.u0, p, c.T);
        auto [trace, est] = solve_to_blowup(hp);
        const bool blew = trace.reason == Termination::blowup_detected;
        const bool good = S_T < 0.0 && blew && est.t_star <= c.T;
        if (good) ++ok;
        pass = pass && good;
        o.detail["cases"].push_back({{"A", c.A}, {"s", c.s}, {"T", c.T}, {"S_T", S_T}, {"t_star", est.t_star},
                                     {"termination", to_string(trace.reason)}});
    }
    o.pass = pass;
    o.summary = std::to_string(ok) + "/5 configurations with S_T < 0 blow up before T";
    return o;
}

// ------------------------------------------------------------ 10: fk

Outcome fk_check(const SuiteOptions& opt) {
    const double p = 3.0, alpha = 0.5, beta = 0.05, r = 1.0;
    std::vector<KernelPoint> pts;
    for (double x : {-1.0, -0.5, 0.0, 0.5, 1.0})
        for (double y : {-1.0, -0.5, 0.0, 0.5, 1.0}) pts.push_back({x, y});
    const FKComparison cmp = compare_fk_direct([&](double y) { return profile_potential(y, p, alpha, beta); }, alpha, r,
                                               pts, opt.fk_paths, opt.seed);
    const auto zero = fk_kernel_estimate([](double, double) { return 0.0; }, alpha, 0.0, r, pts, 1000, opt.seed);
    bool zero_exact = true;
    for (const auto& e : zero) zero_exact = zero_exact && e.weight.mean == 1.0 && e.weight.std_error == 0.0;
    const MehlerCalibration cal = calibrate_mehler(alpha, r, pts);
    Outcome o;
    o.pass = cmp.ok && zero_exact;
    o.summary = "max |z| " + fmt("%.3f", cmp.max_abs_z) + " (limit 3) at " + std::to_string(cmp.n_paths) +
                " paths; V = 0 weight exactly 1: " + (zero_exact ? "yes" : "no");
    nlohmann::json rows;
    for (const auto& row : cmp.rows)
        rows.push_back({{"x", row.point.x}, {"y", row.point.y}, {"mc", row.mc}, {"se", row.mc_se},
                        {"direct", row.direct}, {"z", row.z}});
    o.detail = {{"seed", cmp.seed}, {"n_paths", cmp.n_paths}, {"max_abs_z", cmp.max_abs_z}, {"rows", rows},
                {"zero_potential_exact", zero_exact},
                {"mehler", {{"constant", cal.constant}, {"unnormalised_over_calibrated", cal.prefactor_ratio},
                            {"shape_error", cal.shape_error}}}};
    return o;
}

// ------------------------------------------------------------ 11: decay

Outcome decay_check() {
    DecayOptions d;
    const DecayReport rep = propagator_decay_check(d, default_decay_tests(d.alpha));
    Outcome o;
    o.pass = rep.ok;
    o.summary = "min exponent " + fmt("%.4f", rep.min_exponent) + " (limit " + fmt("%.2f", rep.threshold) + ")";
    for (const auto& t : rep.traces) o.detail["exponents"][t.name] = t.exponent;
    o.detail["threshold"] = rep.threshold;
    return o;
}

// ------------------------------------------------------------ 12: equilibrium

Outcome equilibrium_check() {
    Outcome o;
    double err = 0.0;
    bool nonpositive = true;
    for (double l : {1.5, 2.0, 3.0}) {
        const auto jac = jacobian_at_equilibrium(l, 3.0);
        err = std::max({err, std::abs(jac.eigenvalues[0] - (1.0 - l)), std::abs(jac.eigenvalues[1])});
        nonpositive = nonpositive && jac.eigenvalues[1] <= 1e-10;
        o.detail["cases"].push_back({{"l", l}, {"eigenvalues", jac.eigenvalues}});
    }
    o.pass = err <= 1e-10 && nonpositive;
    o.summary = "eigenvalue error " + fmt("%.1e", err) + " (limit 1e-10)";
    return o;
}

// ------------------------------------------------------------ 13: scaling

Outcome scaling_check() {
    const double p = 3.0, q = p - 1.0, lam = 2.0, L = 20.0, T = 0.2;
    const std::size_t N = 2001;
    auto u0 = [](double x) { return 0.8 * std::exp(-x * x); };
    const Grid g1(L, N), g2(L / lam, N);
    HeatProblem a{p, Field::sample(g1, u0, Parity::even), T};
    HeatProblem b{p, Field::sample(g2, [&](double x) { return std::pow(lam, 2.0 / q) * u0(lam * x); }, Parity::even),
                  T / (lam * lam)};
    const auto ra = solve_to_blowup(a).first.final_state;
    const auto rb = solve_to_blowup(b).first.final_state;
    const double scale = std::pow(lam, 2.0 / q);
    double pde_err = 0.0;
    for (std::size_t i = 0; i < N; ++i) pde_err = std::max(pde_err, std::abs(rb[i] - scale * ra[i]));
    pde_err /= scale * ra.sup_norm();

    const double mu = 2.0, m2 = mu * mu;
    TruncatedOptions o1, o2;
    o1.tol = o2.tol = 1e-13;
    o2.s = o1.s * m2;
    const TruncatedState s0{0.0, 0.05, 0.475};
    std::vector<double> times;
    for (int k = 1; k <= 20; ++k) times.push_back(k * 2.0);
    o1.sample_times = times;
    for (double& t : times) t /= m2;
    o2.sample_times = times;
    const auto t1 = integrate_truncated(s0, 40.0, o1);
    const auto t2 = integrate_truncated({0.0, m2 * s0.b, m2 * s0.c}, 40.0 / m2, o2);
    double ode_err = 0.0;
    auto at = [](const TruncatedTrajectory& tr, double tau) {
        for (const auto& s : tr.states)
            if (std::abs(s.tau - tau) <= 1e-12 * std::max(1.0, tau)) return s;
        throw ConvergenceFailure("sample time missing from the truncated trajectory");
    };
    for (double tau : o1.sample_times) {
        const auto x = at(t1, tau), y = at(t2, tau / m2);
        ode_err = std::max({ode_err, std::abs(y.b - m2 * x.b) / (m2 * x.b), std::abs(y.c - m2 * x.c) / (m2 * x.c)});
    }
    Outcome o;
    o.pass = pde_err <= 1e-4 && ode_err <= 1e-8;
    o.summary = "solver " + fmt("%.1e", pde_err) + " (limit 1e-4), truncated system " + fmt("%.1e", ode_err) +
                " (limit 1e-8)";
    o.detail = {{"lambda", lam}, {"solver_rel_error", pde_err}, {"mu", mu}, {"truncated_rel_error", ode_err}};
    return o;
}

}  // namespace

const std::vector<std::string>& suite_tags() {
    static const std::vector<std::string> tags = [] {
        std::vector<std::string> t;
        for (const auto& c : criteria()) t.push_back(c.tag);
        return t;
    }();
    return tags;
}

bool SuiteReport::passed() const {
    return std::all_of(results.begin(), results.end(), [](const CriterionResult& r) { return r.pass; });
}

SuiteReport verify_suite(const std::set<std::string>& tags, const SuiteOptions& opt,
                         const std::function<void(const CriterionResult&)>& on_result) {
    for (const auto& t : tags)
        if (t != "all" && std::find(suite_tags().begin(), suite_tags().end(), t) == suite_tags().end())
            throw DomainError("unknown suite tag '" + t + "'");
    const bool all = tags.count("all") > 0;
    std::optional<RunReport> pipeline;
    auto get_pipeline = [&]() -> const RunReport& {
        if (!pipeline) pipeline = run_pipeline(opt.pipeline);
        return *pipeline;
    };

    SuiteReport rep;
    for (const auto& c : criteria()) {
        if (!all && !tags.count(c.tag)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            switch (c.id) {
                case 1: o = heat_check(); break;
                case 2: o = local_check(); break;
                case 3: o = splitting_check(); break;
                case 4: o = spectral_check(); break;
                case 5: o = laws_check(get_pipeline(), opt.pipeline.p); break;
                case 6: o = parameters_check(get_pipeline()); break;
                case 7: o = majorants_check(get_pipeline(), opt); break;
                case 8: o = energy_check(); break;
                case 9: o = criterion_check(); break;
                case 10: o = fk_check(opt); break;
                case 11: o = decay_check(); break;
                case 12: o = equilibrium_check(); break;
                case 13: o = scaling_check(); break;
            }
        } catch (const std::exception& e) {
            o.pass = false;
            o.summary = std::string("error: ") + e.what();
            o.detail = {{"error", e.what()}};
        }
        CriterionResult r;
        r.id = c.id;
        r.tag = c.tag;
        r.name = c.name;
        r.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        r.runtime_limit_s = c.limit_s;
        const bool in_time = c.limit_s <= 0.0 || r.runtime_s < c.limit_s;
        r.pass = o.pass && in_time;
        r.summary = o.summary + (in_time ? "" : "; over the time budget");
        r.detail = std::move(o.detail);
        r.detail["within_time_budget"] = in_time;
        if (on_result) on_result(r);
        rep.results.push_back(std::move(r));
    }
    return rep;
}

// Wall-clock runtimes stay out of the JSON so that reports are byte-identical across runs.
nlohmann::json to_json(const CriterionResult& r) {
    return {{"id", r.id},           {"tag", r.tag},         {"name", r.name},
            {"pass", r.pass},       {"summary", r.summary}, {"runtime_limit_s", r.runtime_limit_s},
            {"detail", r.detail}};
}

nlohmann::json to_json(const SuiteReport& r) {
    nlohmann::json j;
    j["criteria"] = nlohmann::json::array();
    for (const auto& c : r.results) j["criteria"].push_back(to_json(c));
    j["passed"] = r.passed();
    j["version"] = library_version();
    return j;
}

std::string format_line(const CriterionResult& r) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "[%s] %02d %-12s %s (%.1f s)", r.pass ? "PASS" : "FAIL", r.id, r.tag.c_str(),
                  r.summary.c_str(), r.runtime_s);
    return buf;
}

}  // namespace blowup
