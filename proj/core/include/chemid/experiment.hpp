#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "chemid/tikhonov.hpp"
#include "chemid/vtk.hpp"

namespace chemid {

/// Full experiment description. Defaults are the desk-scale profile
/// (refinement 4, 1089 vertices, dt = 0.05), which runs the whole pipeline
/// in minutes; apply_paper_scale() switches to the full-resolution profile
/// behind the CLI's --paper flag (refinement 5, 4225 vertices, dt = 0.025).
struct ExperimentConfig {
    ExperimentConfig() { model.dt = 0.05; }

    int refinement = 4;
    ModelConfig model;
    int parameter_grid = 1000;
    std::string true_f = "logistic";  // builtin name or CSV path
    std::string g = "identity";       // builtin name or CSV path
    bool rho0_constant = false;       // constant initial density instead of the bump
    double rho0_value = 0.0;
    double noise_delta = 0.05;
    std::uint64_t noise_seed = 42;
    NoiseKind noise_kind = NoiseKind::gaussian;
    DiscrepancyOptions discrepancy;
    double alpha_min = 1e-9;  // regularization floor for noiseless inversions
    CgneOptions solver;
    std::string output_dir = "out";

    void apply_paper_scale();
};

/// Strict JSON round-trip: unknown keys anywhere are an error, as are
/// out-of-range values. Serializing always emits every effective field.
ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const ExperimentConfig& cfg);

/// "logistic" = rho (1 - rho), "identity" = rho, both sampled on the
/// parameter grid; any other spec string is read as a CSV path. A CSV for
/// true_f must match the configured grid size (it defines the unknown's
/// discretization); g may live on its own grid.
PiecewiseLinear1D resolve_true_f(const ExperimentConfig& cfg);
PiecewiseLinear1D resolve_g(const ExperimentConfig& cfg);
NodalField resolve_rho0(const ExperimentConfig& cfg, const TriMesh& mesh);

/// Noise levels for rate studies: 5e-1 .. 5e-4, extended to 5e-6 at full
/// scale.
std::vector<double> default_rate_deltas(bool paper_scale);

/// Commands return process exit status (0 = success) and report failures on
/// stderr. All file output lands under cfg.output_dir/<command>/ together
/// with the effective config; outputs are byte-reproducible for a fixed
/// config.
int cmd_simulate(const ExperimentConfig& cfg);
int cmd_invert(const ExperimentConfig& cfg);
int cmd_rates(const ExperimentConfig& cfg, std::span<const double> deltas);

struct CheckHooks {
    bool negate_adjoint = false;  // fault injection: the adjoint check must then FAIL
};

/// Fast invariant battery on a small mesh: mass conservation, invariant
/// region, adjoint identity (PASS/FAIL), plus the modeling-assumption
/// diagnostics on f and g (PASS/WARN). Nonzero exit iff a FAIL occurred.
int cmd_check(const ExperimentConfig& cfg, const CheckHooks& hooks = {});

}  // namespace chemid
