#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "blowup/decomposition.hpp"
#include "blowup/grid.hpp"
#include "blowup/heat_solver.hpp"
#include "blowup/parameter_dynamics.hpp"

namespace blowup {

/// Flat experiment description. Key names in config files match the field names.
struct ExperimentConfig {
    std::string scenario = "paper-family";  // homogeneous | paper-family | custom
    double p = 3.0;
    double b0 = 0.05;
    /// NaN selects 1/2 - b0/(p-1), the one-parameter form reached by the k0 rescaling.
    double c0 = std::numeric_limits<double>::quiet_NaN();
    double u0 = 1.0;  // homogeneous level
    // Perturbation amp * cos(k x) exp(-x^2 / (2 w^2)); amp NaN means pert_C * b0^2.
    double pert_C = 1.0;
    double pert_amplitude = std::numeric_limits<double>::quiet_NaN();
    double pert_k = 1.0;
    double pert_width = 2.0;
    double delta0 = 0.1;
    bool rescale_k0 = false;
    // Similarity-frame grid and stepping.
    double L = 100.0;
    std::size_t N = 5001;
    double dtau = 0.01;
    double tau_end = 55.0;
    std::size_t cadence = 10;
    double l = 2.0;
    double C_D = 5.0;
    std::vector<double> C_D_sweep{3.0, 5.0, 10.0};
    double fit_tau_lo = 5.0;
    double fit_tau_hi = 50.0;
    double scale_tau = 1.0;  // end of the initial layer; majorant values there set the scale
    // Original-variable solver.
    double x_L = 20.0;
    std::size_t x_N = 2001;
    double dt_max = 1e-3;
    double c_safe = 0.01;
    double sup_cap = 1e6;
    std::uint64_t seed = 42;
    std::size_t fk_paths = 100000;
    std::string out = "out";
};

/// Parses `key = value` lines; '#' starts a comment. Unknown keys and bad values throw DomainError.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});
/// Canonical `key = value` text, one key per line in a fixed order.
std::string serialize_config(const ExperimentConfig& cfg);
/// FNV-1a of the canonical text with `out` left empty, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);
nlohmann::json to_json(const ExperimentConfig& cfg);

struct InitialData {
    Field u0;
    double p = 3.0;
    double b0 = 0.0;  // after the optional rescaling
    double c0 = 0.0;
    double k0 = 1.0;
    double delta3 = 0.0;
    double norm_n0 = 0.0;  // ||u0 - profile||_inf
    double norm_n3 = 0.0;  // ||<x>^{-3} (u0 - profile)||_inf
};

/// Builds the initial datum on `g` and checks the weighted closeness conditions.
/// Throws DomainError (with the measured norms) when they fail.
InitialData make_initial_data(const ExperimentConfig& cfg, const Grid& g);

struct Check {
    std::string name;
    double value = 0.0;
    double limit = 0.0;
    bool pass = false;
    std::string note;
};
nlohmann::json to_json(const Check& c);

/// One decomposition of the similarity-frame solution.
struct PipelineSample {
    double tau = 0.0;
    double t = 0.0;
    double theta = 0.0;  // t* - t
    double lambda = 1.0;
    double a = 0.0, b = 0.0, c = 0.0;
    double beta = 0.0;
    double v_center = 0.0;
    double v_sup = 0.0;
    double u_center = 0.0;  // lambda^{2/(p-1)} v(0)
    double dev_weighted = 0.0;
    double ortho0 = 0.0, ortho2 = 0.0;
    int iterations = 0;
    bool damped = false;
    bool in_window = true;
};

struct HomogeneousReport {
    double t_star_exact = 0.0;
    BlowupEstimate estimate;
    double rel_error = 0.0;
    double trajectory_error = 0.0;  // max relative sup-norm error for t <= 0.9 t*
    std::size_t records = 0;
};

struct RunReport {
    ExperimentConfig config;
    std::string hash;
    std::string version;
    std::string status = "ok";
    std::string error_stage;
    std::string error_message;
    std::optional<InitialData> initial;
    std::vector<PipelineSample> samples;
    std::vector<SplitSample> splits;
    std::vector<MajorantSeries> majorants;  // one per C_D in the sweep
    std::map<std::string, double> majorant_scale;
    std::optional<EffectiveRHS> gammas;
    double remainder_b_ratio = 0.0;  // max |R_b| / beta^3 on tau in [1, 40]
    std::optional<LawFitReport> fits;
    BlowupEstimate t_star;
    std::optional<ProfileLimitReport> profile;
    std::optional<HomogeneousReport> homogeneous;
    double sup_bound_constant = 0.0;  // max ||v||_inf = max ||u|| lambda^{-2/(p-1)}
    double max_gauge_ratio = 0.0;     // max |a - 1/2 + 2b/(p-1)| / beta^2
    std::vector<Check> checks;

    bool passed() const;
};

/// Runs the configured scenario. Homogeneous data are solved in the original variables;
/// the other scenarios run in similarity variables with the frame driven by a(tau).
/// Stage errors are caught and recorded, so a partial report is always returned.
RunReport run_pipeline(const ExperimentConfig& cfg);

nlohmann::json to_json(const RunReport& r);

/// Writes report.json, trace.csv, majorants.csv and gammas.csv into `dir`.
void write_run_outputs(const RunReport& r, const std::filesystem::path& dir);

/// Writes `rows` with `header` as CSV, numbers with 17 significant digits.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// Version string baked in at build time.
std::string library_version();

}  // namespace blowup
