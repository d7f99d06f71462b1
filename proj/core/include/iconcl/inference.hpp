#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "iconcl/dataset.hpp"
#include "iconcl/model.hpp"
#include "iconcl/solver.hpp"

namespace iconcl {

/// An in-context operator: predicts the function `stride` time units ahead
/// (Forward) or behind (Reverse) of the question, inferring the operator
/// from the example pairs. Implementations must be safe to call from
/// multiple threads.
class OperatorBackend {
public:
    virtual ~OperatorBackend() = default;
    virtual GridFunction apply(const std::vector<CondQoIPair>& examples,
                               const GridFunction& question, double stride,
                               Orientation direction) const = 0;
    virtual int max_examples() const = 0;
};

// The trained transformer. Examples and question are tokenized, predictions
// are read at the question's token keys and interpolated back to the grid.
class ModelBackend : public OperatorBackend {
public:
    explicit ModelBackend(const ModelParams& params) : params_(params) {}
    GridFunction apply(const std::vector<CondQoIPair>& examples, const GridFunction& question,
                       double stride, Orientation direction) const override;
    int max_examples() const override { return params_.config.max_pairs - 1; }

private:
    const ModelParams& params_;
};

// Oracle backend for scheme validation: ignores the example data and applies
// the exact solver for the flux the examples were generated from. Reverse
// application integrates the coefficient-negated flux (cubic only).
class SolverBackend : public OperatorBackend {
public:
    explicit SolverBackend(FluxSpec flux) : flux_(std::move(flux)) {}
    GridFunction apply(const std::vector<CondQoIPair>& examples, const GridFunction& question,
                       double stride, Orientation direction) const override;
    int max_examples() const override { return 1 << 20; }

private:
    FluxSpec flux_;
};

// Factory keyed by the flux that generated the example pairs, so oracle
// backends can play the part of a perfect in-context learner.
using BackendFactory = std::function<std::shared_ptr<const OperatorBackend>(const FluxSpec&)>;
BackendFactory model_backend_factory(const ModelParams& params);
BackendFactory solver_backend_factory();

// One in-context application of the trained model (forward or reverse is
// decided by how the examples are oriented).
GridFunction apply_operator(const ModelParams& params, const std::vector<CondQoIPair>& examples,
                            const GridFunction& question);

struct RolloutPlan {
    double t0 = 0.1;         // time of the first question condition
    double dt = 0.01;        // prediction cadence
    double max_stride = 0.05; // S; integer multiple of dt
    double horizon = 0.5;    // absolute end time of the prediction window
    Orientation direction = Orientation::Forward;
    int examples_per_call = 5; // J
    std::uint64_t seed = 0;    // example-draw stream
};

struct RolloutResult {
    std::vector<GridFunction> frames; // prediction order, starting at t0 +/- dt
    double t0 = 0.0;                  // question time
    double dt = 0.0;
    int direction_sign = 1; // +1 forward, -1 reverse
    int calls = 0;

    double time_of(int i) const { return t0 + direction_sign * (i + 1) * dt; }
    int num_frames() const { return static_cast<int>(frames.size()); }
};

// Recursive prediction: strides dt..S fan out from u(t0), then stride S
// repeats from each predicted u(t - S) until the horizon. Examples for a
// stride-s call are drawn uniformly without replacement from the stride-s
// pairs of the given record (never from predicted frames); the draw is
// re-seeded per call from plan.seed. first_question, when given, replaces
// the record's t0 frame as the first question condition (the record still
// supplies the example pairs).
RolloutResult recursive_rollout(const OperatorBackend& backend, const Record& record,
                                const RolloutPlan& plan,
                                const GridFunction* first_question = nullptr);
RolloutResult recursive_rollout(const ModelParams& params, const Record& record,
                                const RolloutPlan& plan);

// Affine data transform v = (u - beta)/alpha and its inverse.
GridFunction transform_affine(const GridFunction& u, double alpha, double beta);
GridFunction inverse_affine(const GridFunction& v, double alpha, double beta);

// Change of variables around one operator application: data is rescaled so
// the value range maps onto [-r, r], the model is applied in the transformed
// variable, and the prediction is mapped back.
GridFunction change_of_variables_apply(const ModelParams& params,
                                       const std::vector<CondQoIPair>& examples,
                                       const GridFunction& question, double r);

// Backend wrapper applying the same change of variables per call.
std::shared_ptr<const OperatorBackend> with_change_of_variables(
    std::shared_ptr<const OperatorBackend> inner, double r);

// F_{kf,tau} = F_{f,k tau}: the scaled flux reasons about nonstandard
// strides with the trained stride.
FluxSpec stride_rescale(const FluxSpec& flux, double k);

} // namespace iconcl
