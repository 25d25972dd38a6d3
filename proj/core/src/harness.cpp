#include "blowup/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "blowup/error.hpp"
#include "blowup/profiles.hpp"

#ifndef BLOWUP_VERSION
#define BLOWUP_VERSION "unknown"
#endif

namespace blowup {

std::string library_version() { return BLOWUP_VERSION; }

// ---------------------------------------------------------------- config

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        throw DomainError("config: '" + key + "' expects a number, got '" + v + "'");
    }
    if (used != v.size()) throw DomainError("config: '" + key + "' expects a number, got '" + v + "'");
    return x;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    unsigned long long x = 0;
    try {
        x = std::stoull(v, &used);
    } catch (const std::exception&) {
        throw DomainError("config: '" + key + "' expects an unsigned integer, got '" + v + "'");
    }
    if (used != v.size() || v.front() == '-')
        throw DomainError("config: '" + key + "' expects an unsigned integer, got '" + v + "'");
    return x;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw DomainError("config: '" + key + "' expects true/false, got '" + v + "'");
}

std::string fmt(double x) {
    if (std::isnan(x)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

struct Field_ {
    const char* key;
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

#define REAL(name)                                                                               \
    Field_{#name, [](ExperimentConfig& c, const std::string& v) { c.name = to_double(#name, v); }, \
           [](const ExperimentConfig& c) { return fmt(c.name); }}
#define SIZE(name)                                                                               \
    Field_{#name, [](ExperimentConfig& c, const std::string& v) { c.name = to_u64(#name, v); },  \
           [](const ExperimentConfig& c) { return std::to_string(c.name); }}

const std::vector<Field_>& config_fields() {
    static const std::vector<Field_> fields = {
        Field_{"scenario",
               [](ExperimentConfig& c, const std::string& v) {
                   if (v != "homogeneous" && v != "paper-family" && v != "custom")
                       throw DomainError("config: unknown scenario '" + v + "'");
                   c.scenario = v;
               },
               [](const ExperimentConfig& c) { return c.scenario; }},
        REAL(p), REAL(b0), REAL(c0), REAL(u0), REAL(pert_C), REAL(pert_amplitude), REAL(pert_k),
        REAL(pert_width), REAL(delta0),
        Field_{"rescale_k0", [](ExperimentConfig& c, const std::string& v) { c.rescale_k0 = to_bool("rescale_k0", v); },
               [](const ExperimentConfig& c) { return std::string(c.rescale_k0 ? "true" : "false"); }},
        REAL(L), SIZE(N), REAL(dtau), REAL(tau_end), SIZE(cadence), REAL(l), REAL(C_D),
        Field_{"C_D_sweep",
               [](ExperimentConfig& c, const std::string& v) {
                   c.C_D_sweep.clear();
                   std::stringstream ss(v);
                   std::string item;
                   while (std::getline(ss, item, ',')) c.C_D_sweep.push_back(to_double("C_D_sweep", trim(item)));
               },
               [](const ExperimentConfig& c) {
                   std::string s;
                   for (std::size_t i = 0; i < c.C_D_sweep.size(); ++i) s += (i ? "," : "") + fmt(c.C_D_sweep[i]);
                   return s;
               }},
        REAL(fit_tau_lo), REAL(fit_tau_hi), REAL(scale_tau), REAL(x_L), SIZE(x_N), REAL(dt_max), REAL(c_safe),
        REAL(sup_cap), SIZE(seed), SIZE(fk_paths),
        Field_{"out", [](ExperimentConfig& c, const std::string& v) { c.out = v; },
               [](const ExperimentConfig& c) { return c.out; }},
    };
    return fields;
}

#undef REAL
#undef SIZE

}  // namespace

ExperimentConfig parse_config(const std::string& text, ExperimentConfig cfg) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw DomainError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        const auto& fields = config_fields();
        auto it = std::find_if(fields.begin(), fields.end(), [&](const Field_& f) { return key == f.key; });
        if (it == fields.end()) throw DomainError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        it->set(cfg, value);
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
    std::ifstream f(path);
    if (!f) throw DomainError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str(), std::move(base));
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::string s;
    for (const auto& f : config_fields()) s += std::string(f.key) + " = " + f.get(cfg) + "\n";
    return s;
}

std::string config_hash(const ExperimentConfig& cfg) {
    // The output directory says where results go, not what they are.
    ExperimentConfig key = cfg;
    key.out.clear();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : serialize_config(key)) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    for (const auto& f : config_fields()) j[f.key] = f.get(cfg);
    return j;
}

// ---------------------------------------------------------- initial data

InitialData make_initial_data(const ExperimentConfig& cfg, const Grid& g) {
    if (!(cfg.p > 1.0)) throw DomainError("initial data need p > 1");
    const double p = cfg.p, q = p - 1.0;
    if (cfg.scenario == "homogeneous") {
        if (!(cfg.u0 > 0.0)) throw DomainError("homogeneous data need u0 > 0");
        InitialData d{Field::sample(g, [&](double) { return cfg.u0; }, Parity::even)};
        d.p = p;
        d.c0 = 0.5 * q * std::pow(cfg.u0, q);
        return d;
    }
    if (!(cfg.b0 >= 0.0)) throw DomainError("initial data need b0 >= 0");
    const double gauge_c0 = 0.5 - cfg.b0 / q;
    const double c0 = std::isnan(cfg.c0) ? gauge_c0 : cfg.c0;
    if (!(c0 > 0.0)) throw DomainError("initial data need c0 > 0");
    if (cfg.scenario == "paper-family") {
        // Either the two-parameter window or its one-parameter image under the k0 rescaling.
        const bool window = c0 >= 0.5 && c0 <= 2.0;
        const bool one_param = std::abs(c0 - gauge_c0) <= 1e-12;
        if (!window && !one_param)
            throw DomainError("paper-family data need 1/2 <= c0 <= 2 or c0 = 1/2 - b0/(p-1); got c0 = " + fmt(c0));
        if (cfg.b0 > 0.2) throw DomainError("paper-family data need a small b0 (<= 0.2); got " + fmt(cfg.b0));
    }
    const double delta3 = cfg.pert_C * cfg.b0 * cfg.b0;
    const double amp = std::isnan(cfg.pert_amplitude) ? delta3 : cfg.pert_amplitude;
    const double b0 = cfg.b0, k = cfg.pert_k, w = cfg.pert_width;
    auto original = [=](double x) {
        return std::pow(2.0 * c0 / (q + b0 * x * x), 1.0 / q) + amp * std::cos(k * x) * std::exp(-x * x / (2.0 * w * w));
    };
    double k0 = 1.0, b_eff = b0, c_eff = c0;
    if (cfg.rescale_k0) {
        k0 = 1.0 / std::sqrt(2.0 * c0 + 2.0 * b0 / q);
        b_eff = b0 * k0 * k0;
        c_eff = 0.5 - b_eff / q;
    }
    const double scale = std::pow(k0, 2.0 / q);
    InitialData d{Field::sample(g, [&](double x) { return scale * original(k0 * x); }, Parity::even)};
    d.p = p;
    d.k0 = k0;
    d.b0 = b_eff;
    d.c0 = c_eff;
    d.delta3 = delta3;
    const Field ref = Field::sample(
        g, [&](double x) { return std::pow(2.0 * c_eff / (q + b_eff * x * x), 1.0 / q); }, Parity::even);
    const Field diff = d.u0 - ref;
    d.norm_n0 = weighted_sup_norm(diff, WeightSpec{0, 0.0});
    d.norm_n3 = weighted_sup_norm(diff, WeightSpec{3, 0.0});
    if (d.norm_n3 > delta3 * (1.0 + 1e-12) + 1e-300 || d.norm_n0 > cfg.delta0)
        throw DomainError("initial perturbation too large: ||<x>^-3 (u0 - V)|| = " + fmt(d.norm_n3) +
                          " (limit " + fmt(delta3) + "), ||u0 - V|| = " + fmt(d.norm_n0) + " (limit " +
                          fmt(cfg.delta0) + ")");
    return d;
}

// ---------------------------------------------------------------- report

nlohmann::json to_json(const Check& c) {
    return {{"name", c.name}, {"value", c.value}, {"limit", c.limit}, {"pass", c.pass}, {"note", c.note}};
}

bool RunReport::passed() const {
    if (status != "ok") return false;
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

namespace {

Check make_check(std::string name, double value, double limit, bool pass, std::string note = {}) {
    return {std::move(name), value, limit, pass, std::move(note)};
}

nlohmann::json fit_json(const LawFit& f) {
    return {{"name", f.name}, {"target", f.target}, {"fitted", f.fitted}, {"rel_error", f.rel_error},
            {"rms_residual", f.rms_residual}, {"window", {f.window_lo, f.window_hi}}, {"count", f.count}};
}

void run_homogeneous(const ExperimentConfig& cfg, RunReport& rep, std::string& stage) {
    stage = "initial-data";
    const Grid g(cfg.x_L, cfg.x_N);
    rep.initial = make_initial_data(cfg, g);
    stage = "solve";
    SolverOptions so;
    so.dt_max = cfg.dt_max;
    so.c_safe = cfg.c_safe;
    so.sup_cap = cfg.sup_cap;
    auto [trace, est] = solve_to_blowup(HeatProblem{cfg.p, rep.initial->u0}, so);
    HomogeneousReport h;
    h.t_star_exact = 1.0 / ((cfg.p - 1.0) * std::pow(cfg.u0, cfg.p - 1.0));
    h.estimate = est;
    h.rel_error = std::abs(est.t_star - h.t_star_exact) / h.t_star_exact;
    h.records = trace.records.size();
    for (const auto& r : trace.records) {
        if (r.t > 0.9 * h.t_star_exact) break;
        const double exact = homogeneous_solution(cfg.u0, r.t, cfg.p);
        h.trajectory_error = std::max(h.trajectory_error, std::abs(r.sup_norm - exact) / exact);
    }
    rep.t_star = est;
    rep.homogeneous = h;
    stage = "checks";
    rep.checks.push_back(make_check("t_star_rel_error", h.rel_error, 0.01, h.rel_error <= 0.01));
    rep.checks.push_back(make_check("trajectory_rel_error", h.trajectory_error, 0.01, h.trajectory_error <= 0.01,
                                    "records with t <= 0.9 t*"));
    rep.checks.push_back(make_check("terminated_by_blowup", trace.reason == Termination::blowup_detected ? 1.0 : 0.0,
                                    1.0, trace.reason == Termination::blowup_detected, to_string(trace.reason)));
}

bool monotone_toward(const std::vector<PipelineSample>& s, double from_tau, double target,
                     double PipelineSample::*field) {
    double prev = INFINITY, next_tau = from_tau;
    for (const auto& x : s) {
        if (x.tau + 1e-9 < next_tau) continue;
        const double d = std::abs(x.*field - target);
        if (d > prev * (1.0 + 1e-9)) return false;
        prev = d;
        next_tau = x.tau + 1.0;
    }
    return true;
}

void run_similarity(const ExperimentConfig& cfg, RunReport& rep, std::string& stage) {
    const double p = cfg.p, q = p - 1.0;
    if (!(cfg.dtau > 0.0) || !(cfg.tau_end > 0.0)) throw DomainError("pipeline needs dtau > 0 and tau_end > 0");
    stage = "initial-data";
    const Grid g(cfg.L, cfg.N);
    rep.initial = make_initial_data(cfg, g);
    Field v = rep.initial->u0;

    std::vector<double> cutoffs = cfg.C_D_sweep;
    if (std::find(cutoffs.begin(), cutoffs.end(), cfg.C_D) == cutoffs.end()) cutoffs.push_back(cfg.C_D);
    const std::size_t cd_index =
        static_cast<std::size_t>(std::find(cutoffs.begin(), cutoffs.end(), cfg.C_D) - cutoffs.begin());

    SplitOptions so;
    so.l = cfg.l;
    const ProfileParams guess = ProfileParams::from_c(rep.initial->c0, rep.initial->b0, cfg.l);
    double a = guess.a, b = std::max(rep.initial->b0, 1e-8);
    double b_initial = 0.0;

    const std::size_t steps = static_cast<std::size_t>(std::llround(cfg.tau_end / cfg.dtau));
    std::vector<double> step_t(steps + 1, 0.0), step_dt(steps, 0.0), step_lambda(steps + 1, 1.0);
    std::vector<std::size_t> sample_step;
    std::vector<ProfileSnapshot> snaps;
    std::vector<std::size_t> snap_step;
    const double snap_every = 5.0, dense_from = cfg.tau_end - 5.0;
    double next_snap = snap_every;
    double lambda = 1.0, t = 0.0;

    stage = "evolve";
    for (std::size_t k = 0;; ++k) {
        const double tau = cfg.dtau * static_cast<double>(k);
        const bool fine = rep.samples.empty() || b < 2.0 * b_initial;
        if (k == 0 || k == steps || fine || k % std::max<std::size_t>(1, cfg.cadence) == 0) {
            stage = "split";
            const SplitResult s = solve_g(v, p, a, b, so);
            a = s.params.a;
            b = s.params.b;
            if (k == 0) b_initial = b;
            PipelineSample ps;
            ps.tau = tau;
            ps.t = t;
            ps.lambda = lambda;
            ps.a = a;
            ps.b = b;
            ps.c = s.params.c;
            ps.beta = beta_of_tau(tau, b_initial, p);
            ps.v_center = v.values[g.center()];
            ps.v_sup = v.sup_norm();
            ps.u_center = std::pow(lambda, 2.0 / q) * ps.v_center;
            ps.ortho0 = s.ortho0;
            ps.ortho2 = s.ortho2;
            ps.iterations = s.iterations;
            ps.damped = s.damped;
            ps.in_window = s.in_window;
            rep.splits.push_back(summarize_split(s, tau, p, b_initial, cutoffs));
            ps.dev_weighted = rep.splits.back().dev_weighted;
            rep.samples.push_back(ps);
            sample_step.push_back(k);
            stage = "evolve";
        }
        if (tau + 1e-9 >= next_snap && tau > 0.0) {
            snaps.push_back({0.0, lambda, v});
            snap_step.push_back(k);
            next_snap += tau + 1e-9 >= dense_from ? 0.5 : snap_every;
        }
        if (k == steps) break;
        v = step_rescaled(v, cfg.dtau, a, p);
        if (!v.all_finite()) throw ConvergenceFailure("similarity-frame step produced non-finite values");
        const double lambda_new = lambda * std::exp(a * cfg.dtau);
        step_dt[k] = 0.5 * cfg.dtau * (1.0 / (lambda * lambda) + 1.0 / (lambda_new * lambda_new));
        lambda = lambda_new;
        t += step_dt[k];
        step_t[k + 1] = t;
        step_lambda[k + 1] = lambda;
    }

    stage = "blowup-time";
    // t* - t as a suffix sum plus the tail lambda^{-2}/(2a) beyond tau_end; no cancellation.
    const double tail = 1.0 / (lambda * lambda) / (2.0 * a);
    std::vector<double> theta(steps + 1);
    theta[steps] = tail;
    for (std::size_t k = steps; k-- > 0;) theta[k] = theta[k + 1] + step_dt[k];
    rep.t_star.t_star = t + tail;
    rep.t_star.method = "similarity-frame time integral with tail lambda^-2/(2a)";
    rep.t_star.residual = tail / rep.t_star.t_star;
    rep.t_star.window = steps;
    for (std::size_t i = 0; i < rep.samples.size(); ++i) rep.samples[i].theta = theta[sample_step[i]];
    for (std::size_t i = 0; i < snaps.size(); ++i) snaps[i].theta = theta[snap_step[i]];

    stage = "majorants";
    for (std::size_t i = 0; i < cutoffs.size(); ++i)
        rep.majorants.push_back(compute_majorants(rep.splits, p, b_initial, i, cutoffs[i]));
    {
        const MajorantSeries& m = rep.majorants[cd_index];
        std::size_t at = 0;
        while (at + 1 < m.tau.size() && m.tau[at] + 1e-9 < cfg.scale_tau) ++at;
        // Initial scale = majorant over the initial layer [0, scale_tau]. Instantaneous values
        // are no good here: B(0) = 0 by construction and A passes through zero early on.
        rep.majorant_scale["M1"] = std::max(0.05, m.M1[at]);
        rep.majorant_scale["A"] = std::max(0.05, m.A[at]);
        rep.majorant_scale["B"] = std::max(0.05, m.B[at]);
    }

    stage = "gammas";
    {
        // Longest uniformly sampled suffix.
        std::size_t start = rep.samples.size() - 1;
        while (start > 0 && std::abs(rep.samples[start].tau - rep.samples[start - 1].tau - cfg.dtau) < 1e-9 * cfg.dtau + 1e-12)
            --start;
        std::vector<double> T, A, B, C;
        for (std::size_t i = start; i < rep.samples.size(); ++i) {
            T.push_back(rep.samples[i].tau);
            A.push_back(rep.samples[i].a);
            B.push_back(rep.samples[i].b);
            C.push_back(rep.samples[i].c);
        }
        if (T.size() >= 5) {
            rep.gammas = compute_gammas(T, A, B, C, p, cfg.l);
            for (std::size_t i = 0; i < T.size(); ++i) {
                if (T[i] < 1.0 || T[i] > 40.0) continue;
                const double be = beta_of_tau(T[i], b_initial, p);
                rep.remainder_b_ratio = std::max(rep.remainder_b_ratio, std::abs(rep.gammas->R_b[i]) / (be * be * be));
            }
        }
    }

    stage = "fits";
    {
        LawFitInput in;
        in.p = p;
        in.tau_lo = cfg.fit_tau_lo;
        in.tau_hi = cfg.fit_tau_hi;
        for (const auto& s : rep.samples) {
            in.tau.push_back(s.tau);
            in.b.push_back(s.b);
            in.lambda.push_back(s.lambda);
            in.theta.push_back(s.theta);
        }
        rep.fits = fit_blowup_laws(in);
    }

    stage = "profile-limit";
    try {
        std::vector<ProfileSnapshot> usable;
        for (const auto& s : snaps)
            if (s.theta > 0.0 && s.theta < 1.0) usable.push_back(s);
        rep.profile = profile_limit_check(usable, p, 2.0);
    } catch (const DomainError& e) {
        rep.checks.push_back(make_check("profile_limit_evaluated", 0.0, 1.0, false, e.what()));
    }

    stage = "checks";
    for (const auto& s : rep.samples) {
        rep.sup_bound_constant = std::max(rep.sup_bound_constant, s.v_sup);
        rep.max_gauge_ratio = std::max(rep.max_gauge_ratio, std::abs(s.a - 0.5 + 2.0 * s.b / q) / (s.beta * s.beta));
    }
    std::size_t out_of_window = 0, damped = 0;
    double ortho = 0.0;
    for (const auto& s : rep.samples) {
        if (!s.in_window) ++out_of_window;
        if (s.damped) ++damped;
        ortho = std::max({ortho, std::abs(s.ortho0), std::abs(s.ortho2)});
    }
    rep.checks.push_back(make_check("splits_outside_window", static_cast<double>(out_of_window), 0.0,
                                    out_of_window == 0,
                                    std::to_string(rep.samples.size()) + " splits, " + std::to_string(damped) + " damped"));
    rep.checks.push_back(make_check("orthogonality_residual", ortho, 1e-10, ortho <= 1e-10));
    const LawFit& slope = rep.fits->inv_b_slope;
    rep.checks.push_back(make_check("inv_b_slope_rel_error", slope.rel_error, 0.15, slope.rel_error <= 0.15,
                                    "fitted " + fmt(slope.fitted) + " vs " + fmt(slope.target)));
    rep.checks.push_back(make_check("gauge_ratio_max", rep.max_gauge_ratio, 10.0, rep.max_gauge_ratio <= 10.0,
                                    "|a - 1/2 + 2b/(p-1)| / beta^2"));
    const auto& first = rep.samples.front();
    const auto& last = rep.samples.back();
    const double a_shrink = std::abs(last.a - 0.5) / std::abs(first.a - 0.5);
    const double c_shrink = std::abs(last.c - 0.5) / std::abs(first.c - 0.5);
    const bool a_mono = monotone_toward(rep.samples, cfg.fit_tau_lo, 0.5, &PipelineSample::a);
    const bool c_mono = monotone_toward(rep.samples, cfg.fit_tau_lo, 0.5, &PipelineSample::c);
    rep.checks.push_back(make_check("a_to_half", a_shrink, 0.2, a_shrink <= 0.2 && a_mono,
                                    a_mono ? "monotone after the initial layer" : "not monotone"));
    rep.checks.push_back(make_check("c_to_half", c_shrink, 0.2, c_shrink <= 0.2 && c_mono,
                                    c_mono ? "monotone after the initial layer" : "not monotone"));
    {
        const MajorantSeries& m = rep.majorants[cd_index];
        const double r1 = m.M1.back() / rep.majorant_scale["M1"];
        const double rA = m.A.back() / rep.majorant_scale["A"];
        const double rB = m.B.back() / rep.majorant_scale["B"];
        const double worst = std::max({r1, rA, rB});
        rep.checks.push_back(make_check("majorant_growth", worst, 10.0, worst <= 10.0,
                                        "M1 x" + fmt(r1) + ", A x" + fmt(rA) + ", B x" + fmt(rB)));
        double m2 = 0.0, coverage = 1.0;
        for (const auto& ms : rep.majorants) {
            m2 = std::max(m2, ms.M2.back());
            coverage = std::min(coverage, ms.cutoff_coverage);
        }
        rep.checks.push_back(make_check("M2_max", m2, 0.1, m2 < 0.1,
                                        "lowest cutoff coverage " + fmt(coverage)));
    }
    if (rep.profile) {
        const auto& pr = *rep.profile;
        rep.checks.push_back(make_check("profile_limit_decreasing", pr.deviation.back(), pr.deviation.front(),
                                        pr.decreasing, "sup over |y| <= R of the distance to the limit profile"));
    }
    bool growing = true;
    for (std::size_t i = 1; i < rep.samples.size(); ++i)
        if (rep.samples[i].u_center < rep.samples[i - 1].u_center) growing = false;
    const double growth = last.u_center / first.u_center;
    rep.checks.push_back(make_check("center_growth", growth, 1e6, growing && growth >= 1e6,
                                    growing ? "u(0,t) increasing" : "u(0,t) not monotone"));
}

}  // namespace

RunReport run_pipeline(const ExperimentConfig& cfg) {
    RunReport rep;
    rep.config = cfg;
    rep.hash = config_hash(cfg);
    rep.version = library_version();
    std::string stage = "setup";
    try {
        if (cfg.scenario == "homogeneous")
            run_homogeneous(cfg, rep, stage);
        else
            run_similarity(cfg, rep, stage);
    } catch (const std::exception& e) {
        rep.status = "error";
        rep.error_stage = stage;
        rep.error_message = e.what();
    }
    return rep;
}

nlohmann::json to_json(const RunReport& r) {
    nlohmann::json j;
    j["config"] = to_json(r.config);
    j["config_hash"] = r.hash;
    j["seed"] = r.config.seed;
    j["version"] = r.version;
    j["status"] = r.status;
    if (r.status != "ok") j["error"] = {{"stage", r.error_stage}, {"message", r.error_message}};
    if (r.initial) {
        const auto& d = *r.initial;
        j["initial_data"] = {{"b0", d.b0}, {"c0", d.c0}, {"k0", d.k0}, {"delta3", d.delta3},
                             {"norm_n0", d.norm_n0}, {"norm_n3", d.norm_n3}};
    }
    if (r.t_star.method.size())
        j["t_star"] = {{"value", r.t_star.t_star}, {"method", r.t_star.method}, {"residual", r.t_star.residual},
                       {"window", r.t_star.window}};
    if (r.homogeneous) {
        const auto& h = *r.homogeneous;
        j["homogeneous"] = {{"t_star_exact", h.t_star_exact}, {"t_star_estimate", h.estimate.t_star},
                            {"rel_error", h.rel_error}, {"trajectory_error", h.trajectory_error},
                            {"records", h.records}};
    }
    if (!r.samples.empty()) {
        const auto& s0 = r.samples.front();
        const auto& s1 = r.samples.back();
        j["parameters"] = {{"samples", r.samples.size()},
                           {"initial", {{"tau", s0.tau}, {"a", s0.a}, {"b", s0.b}, {"c", s0.c}}},
                           {"final", {{"tau", s1.tau}, {"a", s1.a}, {"b", s1.b}, {"c", s1.c}, {"lambda", s1.lambda},
                                      {"theta", s1.theta}}},
                           {"max_gauge_ratio", r.max_gauge_ratio},
                           {"sup_bound_constant", r.sup_bound_constant}};
    }
    for (const auto& m : r.majorants) {
        j["majorants"].push_back({{"C_D", m.C_D}, {"kappa", m.kappa}, {"cutoff_coverage", m.cutoff_coverage},
                                  {"M1", m.M1.back()}, {"M2", m.M2.back()}, {"A", m.A.back()}, {"B", m.B.back()}});
    }
    if (!r.majorant_scale.empty()) j["majorant_scale"] = r.majorant_scale;
    if (r.gammas) j["remainder_b_over_beta3_max"] = r.remainder_b_ratio;
    if (r.fits) {
        j["fits"] = {fit_json(r.fits->inv_b_slope), fit_json(r.fits->lambda_exponent),
                     fit_json(r.fits->b_log_coefficient)};
    }
    if (r.profile) {
        j["profile_limit"] = {{"R", r.profile->R}, {"theta", r.profile->theta}, {"deviation", r.profile->deviation},
                              {"parity_defect", r.profile->parity_defect}, {"decreasing", r.profile->decreasing}};
    }
    for (const auto& c : r.checks) j["checks"].push_back(to_json(c));
    j["passed"] = r.passed();
    return j;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) f << (i ? "," : "") << header[i];
    f << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << fmt(row[i]);
        f << "\n";
    }
}

void write_run_outputs(const RunReport& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream f(dir / "report.json");
        if (!f) throw Error("cannot write " + (dir / "report.json").string());
        f << to_json(r).dump(2) << "\n";
    }
    if (!r.samples.empty()) {
        std::vector<std::vector<double>> rows;
        for (const auto& s : r.samples)
            rows.push_back({s.tau, s.t, s.theta, s.lambda, s.a, s.b, s.c, s.beta, s.v_center, s.v_sup, s.u_center,
                            s.dev_weighted, s.ortho0, s.ortho2, static_cast<double>(s.iterations)});
        write_csv(dir / "trace.csv",
                  {"tau", "t", "theta", "lambda", "a", "b", "c", "beta", "v_center", "v_sup", "u_center",
                   "dev_weighted", "ortho0", "ortho2", "iterations"},
                  rows);
    }
    if (!r.majorants.empty()) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        std::map<double, std::size_t> gi;
        if (r.gammas)
            for (std::size_t i = 0; i < r.gammas->tau.size(); ++i) gi[r.gammas->tau[i]] = i;
        std::vector<std::vector<double>> rows;
        for (const auto& m : r.majorants) {
            for (std::size_t i = 0; i < m.tau.size(); ++i) {
                const auto it = gi.find(m.tau[i]);
                const bool has = it != gi.end();
                const auto& g = *r.gammas;
                const std::size_t k = has ? it->second : 0;
                rows.push_back({m.C_D, m.tau[i], r.samples[i].a, r.samples[i].b, r.samples[i].c, m.beta[i], m.D[i],
                                m.M1[i], m.M2[i], m.A[i], m.B[i], has ? g.Gamma0[k] : nan, has ? g.Gamma1[k] : nan,
                                has ? g.R_b[k] : nan, has ? g.R_c[k] : nan, r.samples[i].ortho0, r.samples[i].ortho2});
            }
        }
        write_csv(dir / "decomposition.csv",
                  {"C_D", "tau", "a", "b", "c", "beta", "D", "M1", "M2", "A", "B", "Gamma0", "Gamma1", "R_b", "R_c",
                   "ortho0", "ortho2"},
                  rows);
    }
}

}  // namespace blowup
