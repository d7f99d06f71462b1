#pragma once

#include <filesystem>
#include <set>
#include <string>

#include "iconcl/evalkit.hpp"
#include "iconcl/training.hpp"

namespace iconcl {

/// Everything a run needs, read from one JSON config file. Paths are
/// resolved relative to the current working directory; every seed is
/// explicit so reruns are byte-identical.
struct RunConfig {
    std::uint64_t seed = 1;
    std::filesystem::path output_dir = "out";
    int workers = 0;

    int num_operators = 20;
    double coeff_range = 1.0; // cubic coefficients uniform in [-range, range]^3
    GenerationConfig gen;

    ModelConfig model;
    TrainConfig train;

    GridEvalConfig grid;
    FluxSpec study_flux = FluxSpec::sincos();
    StudyConfig study;
    std::vector<double> cov_r_values = {0.5, 1.0, 2.0, 3.0, 0.0}; // 0 = off
    std::vector<double> stride_values = {0.01, 0.02, 0.03, 0.04, 0.05};
    std::vector<std::string> stride_fluxes = {"sincos", "scale:3:sincos"};
};

RunConfig load_run_config(const std::filesystem::path& path);

// generate: one dataset directory per operator under <out>/data, plus a
// manifest listing them. Returns the number of operators written; operators
// whose simulation fails are skipped with a diagnostic on stderr.
int cmd_generate(const RunConfig& cfg);

// train: consumes <out>/data, writes <out>/train/{checkpoint/, loss.csv}.
int cmd_train(const RunConfig& cfg, bool resume);

struct PredictArgs {
    std::filesystem::path checkpoint;
    std::filesystem::path record_dir; // dataset directory holding records.f32
    int record_index = 0;
    std::filesystem::path out;
    RolloutPlan plan;
    double cov_r = 0.0; // change-of-variables half-width; 0 disables
};

// predict: recursive rollout from a stored record; writes records.f32 plus
// meta.json describing the plan.
int cmd_predict(const PredictArgs& args);

// eval: runs the requested studies against a checkpoint and writes one CSV
// per curve under <out>/eval. studies: subset of
// {"grid", "generalization", "cov", "stride"}; empty means all.
int cmd_eval(const RunConfig& cfg, const std::filesystem::path& checkpoint,
             const std::set<std::string>& studies);

} // namespace iconcl
