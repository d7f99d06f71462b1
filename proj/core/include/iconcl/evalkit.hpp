#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "iconcl/inference.hpp"

namespace iconcl {

// Mean absolute difference over grid cells (the L1 metric of the studies).
double forward_error(const GridFunction& prediction, const GridFunction& truth);

// Reverse predictions are scored by pushing them through the exact forward
// operator: any feasible preimage scores near zero.
double reverse_error(const GridFunction& predicted_initial, const FluxSpec& flux, double tau,
                     const GridFunction& condition);

struct ErrorCurve {
    std::vector<double> abscissa;
    std::vector<double> mean_error;
    int n_instances = 0;
    std::string tag;
};

// For each predicted frame at time t < t0, simulate forward to t0 and
// compare against the truth there.
ErrorCurve recursive_reverse_error(const RolloutResult& predictions, const FluxSpec& flux,
                                   double t0, const GridFunction& truth_at_t0);

// ---------------------------------------------------------------------------
// In-distribution grid evaluation.

struct GridEvalConfig {
    int points_per_axis = 3; // uniform grid over [-1,1]^3
    int instances = 10;      // instances per operator
    std::vector<int> example_counts = {1, 2, 3};
    GenerationConfig gen; // evaluation-pool generation (held-out seeds)
    std::uint64_t seed = 1;
    int workers = 0;
};

struct GridEvalRow {
    double a = 0, b = 0, c = 0;
    int examples = 0;
    double forward_mean = 0;
    double reverse_mean = 0;
    int n = 0;
};

struct GridEvalResult {
    std::vector<GridEvalRow> rows;    // one per (operator, J)
    ErrorCurve forward_curve;         // error vs J, aggregated over operators
    ErrorCurve reverse_curve;
};

GridEvalResult grid_eval(const BackendFactory& factory, const GridEvalConfig& cfg);

// ---------------------------------------------------------------------------
// Rollout studies (generalization, change of variables, strides).

struct NamedFlux {
    std::string tag;
    FluxSpec flux;
    bool adaptive = false; // fit per instance to the initial-condition range
};

// Taylor + fixed-interval fits + adaptive fit, tagged as in the write-ups.
std::vector<NamedFlux> standard_baselines(const FluxSpec& flux_true);

struct StudyConfig {
    int instances = 32;
    double example_span = 0.1; // record history available for examples
    double t0_forward = 0.1;
    double horizon_forward = 0.5;
    double t0_reverse = 0.4;
    double horizon_reverse = 0.0;
    double dt = 0.01;
    double max_stride = 0.05;
    int examples_per_call = 3;
    bool comparison1 = true;
    bool comparison2 = true;
    bool forward = true;
    bool reverse = true;
    double grf_sigma = 1.0, grf_ell = 1.0, grf_clip = 3.0;
    std::uint64_t seed = 7;
    int workers = 0;
};

struct StudyCurves {
    // Comparison 1: rollout error per equation, examples from the matching
    // equation. Comparison 2: error against the true equation's ground
    // truth with examples generated from each listed equation; the initial
    // condition and first question condition are shared across equations.
    std::vector<ErrorCurve> comparison1_forward;
    std::vector<ErrorCurve> comparison1_reverse;
    std::vector<ErrorCurve> comparison2_forward;
    std::vector<ErrorCurve> comparison2_reverse;
};

StudyCurves generalization_study(const BackendFactory& factory, const FluxSpec& flux_true,
                                 const std::vector<NamedFlux>& baselines,
                                 const StudyConfig& cfg);

struct SweepResult {
    std::vector<ErrorCurve> forward;
    std::vector<ErrorCurve> reverse;
};

// Correct-example rollouts with the data transformed to [-r, r] per call;
// r <= 0 means no change of variables. One curve per setting.
SweepResult change_of_variables_sweep(const BackendFactory& factory, const FluxSpec& flux_true,
                                      const std::vector<double>& r_values,
                                      const StudyConfig& cfg);

// Correct-example rollouts with varying maximum stride S.
SweepResult stride_sweep(const BackendFactory& factory, const FluxSpec& flux_true,
                         const std::vector<double>& strides, const StudyConfig& cfg);

// ---------------------------------------------------------------------------
// Plot-data emission: one curve per file, '#' metadata header then
// abscissa,mean_error,n_instances,tag rows.

std::string study_filename(const std::string& study, const std::string& direction,
                           const std::string& flux_tag);
void write_curve_csv(const std::filesystem::path& path, const ErrorCurve& curve,
                     const std::vector<std::pair<std::string, std::string>>& metadata);

} // namespace iconcl
