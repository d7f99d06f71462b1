#include "iconcl/inference.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "iconcl/errors.hpp"
#include "iconcl/rng.hpp"

namespace iconcl {

namespace {

int checked_ratio(double num, double den, const char* what) {
    const double real = num / den;
    const int steps = static_cast<int>(std::llround(real));
    if (steps < 0 || std::abs(real - steps) > 1e-9 * std::max(1.0, std::abs(real)))
        throw ArgumentError(std::string(what) + " must be an integer multiple of dt");
    return steps;
}

std::vector<CondQoIPair> draw_examples(const std::vector<CondQoIPair>& pool, int count,
                                       std::uint64_t seed) {
    if (static_cast<int>(pool.size()) < count)
        throw ArgumentError("rollout: only " + std::to_string(pool.size()) +
                            " example pairs available, need " + std::to_string(count));
    Rng rng(derive_seed(seed, 0xe9a));
    std::vector<int> chosen;
    chosen.reserve(static_cast<std::size_t>(count));
    while (static_cast<int>(chosen.size()) < count) {
        const int idx = static_cast<int>(rng.below(pool.size()));
        if (std::find(chosen.begin(), chosen.end(), idx) == chosen.end()) chosen.push_back(idx);
    }
    std::vector<CondQoIPair> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int idx : chosen) out.push_back(pool[static_cast<std::size_t>(idx)]);
    return out;
}

} // namespace

GridFunction ModelBackend::apply(const std::vector<CondQoIPair>& examples,
                                 const GridFunction& question, double /*stride*/,
                                 Orientation /*direction*/) const {
    return apply_operator(params_, examples, question);
}

GridFunction SolverBackend::apply(const std::vector<CondQoIPair>& /*examples*/,
                                  const GridFunction& question, double stride,
                                  Orientation direction) const {
    if (direction == Orientation::Forward) return exact_forward(question, flux_, stride);
    return exact_forward(question, negated_cubic(flux_), stride);
}

BackendFactory model_backend_factory(const ModelParams& params) {
    auto backend = std::make_shared<const ModelBackend>(params);
    return [backend](const FluxSpec&) -> std::shared_ptr<const OperatorBackend> {
        return backend;
    };
}

BackendFactory solver_backend_factory() {
    return [](const FluxSpec& flux) -> std::shared_ptr<const OperatorBackend> {
        return std::make_shared<const SolverBackend>(flux);
    };
}

GridFunction apply_operator(const ModelParams& params, const std::vector<CondQoIPair>& examples,
                            const GridFunction& question) {
    const int J = static_cast<int>(examples.size());
    if (J < 1 || J > params.config.max_pairs - 1)
        throw ArgumentError("apply_operator: example count " + std::to_string(J) +
                            " outside 1.." + std::to_string(params.config.max_pairs - 1));
    if (question.n() != params.config.grid_n)
        throw ArgumentError("apply_operator: question grid does not match model tokenizer");

    const int stride = params.config.token_stride;
    const PromptSequence prompt = build_prompt(examples, question, stride);
    const Predictions preds = forward(params, prompt);
    const Eigen::VectorXd& v = preds.values.back();

    GridFunction coarse = make_grid_function(
        std::vector<double>(v.data(), v.data() + v.size()),
        question.dx * stride);
    if (stride == 1) return coarse;
    return upsample_linear_periodic(coarse, stride);
}

RolloutResult recursive_rollout(const OperatorBackend& backend, const Record& record,
                                const RolloutPlan& plan, const GridFunction* first_question) {
    validate_record(record);
    if (!(plan.dt > 0.0)) throw ArgumentError("rollout: dt must be > 0");
    if (plan.examples_per_call < 1 || plan.examples_per_call > backend.max_examples())
        throw ArgumentError("rollout: examples_per_call outside backend capacity");
    const int stride_steps = checked_ratio(plan.max_stride, plan.dt, "max stride");
    if (stride_steps < 1) throw ArgumentError("rollout: max_stride must be >= dt");
    if (std::abs(record.dt - plan.dt) > 1e-12)
        throw ArgumentError("rollout: record frame spacing must equal plan dt");

    const int dir = plan.direction == Orientation::Forward ? 1 : -1;
    const int total = checked_ratio(dir * (plan.horizon - plan.t0), plan.dt, "horizon - t0");
    if (total < 1) throw ArgumentError("rollout: horizon does not reach past t0");

    // The question frame u(t0) must be the record's last frame in the
    // prediction direction, with at least S of history behind it.
    const int frames = record.num_frames();
    const int t0_index = dir > 0 ? frames - 1 : 0;
    if (std::abs(record.time_of(t0_index) - plan.t0) > 1e-9)
        throw ArgumentError("rollout: record does not end at t0");
    if (frames - 1 < stride_steps)
        throw ArgumentError("rollout: record too short for stride " +
                            std::to_string(plan.max_stride));

    RolloutResult result;
    result.t0 = plan.t0;
    result.dt = plan.dt;
    result.direction_sign = dir;
    result.frames.reserve(static_cast<std::size_t>(total));

    // Example pools per stride, built from the given record only.
    std::vector<std::vector<CondQoIPair>> pools(static_cast<std::size_t>(stride_steps) + 1);
    for (int s = 1; s <= stride_steps; ++s)
        pools[static_cast<std::size_t>(s)] = pairs_from_record(record, s, plan.direction);

    auto frame_at = [&](int m) -> const GridFunction& {
        // m: steps past t0 in the prediction direction; m <= 0 lives in the record.
        if (m == 0 && first_question) return *first_question;
        if (m <= 0) return record.frames[static_cast<std::size_t>(t0_index + dir * m)];
        return result.frames[static_cast<std::size_t>(m - 1)];
    };

    for (int m = 1; m <= total; ++m) {
        const int s = std::min(m, stride_steps);
        const GridFunction& question = frame_at(m - s);
        const auto examples =
            draw_examples(pools[static_cast<std::size_t>(s)], plan.examples_per_call,
                          derive_seed(plan.seed, static_cast<std::uint64_t>(m)));
        result.frames.push_back(
            backend.apply(examples, question, s * plan.dt, plan.direction));
        ++result.calls;
    }
    return result;
}

RolloutResult recursive_rollout(const ModelParams& params, const Record& record,
                                const RolloutPlan& plan) {
    return recursive_rollout(ModelBackend(params), record, plan);
}

GridFunction transform_affine(const GridFunction& u, double alpha, double beta) {
    if (!(alpha > 0.0)) throw ArgumentError("transform_affine: alpha must be > 0");
    GridFunction v = u;
    for (double& x : v.values) x = (x - beta) / alpha;
    return v;
}

GridFunction inverse_affine(const GridFunction& v, double alpha, double beta) {
    if (!(alpha > 0.0)) throw ArgumentError("inverse_affine: alpha must be > 0");
    GridFunction u = v;
    for (double& x : u.values) x = alpha * x + beta;
    return u;
}

namespace {

struct DataRange {
    double lo, hi;
};

DataRange value_range(const std::vector<CondQoIPair>& examples, const GridFunction& question) {
    DataRange r{min_value(question), max_value(question)};
    for (const auto& ex : examples) {
        r.lo = std::min({r.lo, min_value(ex.cond), min_value(ex.qoi)});
        r.hi = std::max({r.hi, max_value(ex.cond), max_value(ex.qoi)});
    }
    return r;
}

class CovBackend : public OperatorBackend {
public:
    CovBackend(std::shared_ptr<const OperatorBackend> inner, double r)
        : inner_(std::move(inner)), r_(r) {
        if (!(r_ > 0.0)) throw ArgumentError("change of variables: r must be > 0");
    }

    GridFunction apply(const std::vector<CondQoIPair>& examples, const GridFunction& question,
                       double stride, Orientation direction) const override {
        const DataRange range = value_range(examples, question);
        if (!(range.hi > range.lo))
            throw ArgumentError("change of variables: constant data has no range");
        const double beta = 0.5 * (range.hi + range.lo);
        const double alpha = (range.hi - range.lo) / (2.0 * r_);
        std::vector<CondQoIPair> tex = examples;
        for (auto& ex : tex) {
            ex.cond = transform_affine(ex.cond, alpha, beta);
            ex.qoi = transform_affine(ex.qoi, alpha, beta);
        }
        const GridFunction tq = transform_affine(question, alpha, beta);
        return inverse_affine(inner_->apply(tex, tq, stride, direction), alpha, beta);
    }

    int max_examples() const override { return inner_->max_examples(); }

private:
    std::shared_ptr<const OperatorBackend> inner_;
    double r_;
};

} // namespace

GridFunction change_of_variables_apply(const ModelParams& params,
                                       const std::vector<CondQoIPair>& examples,
                                       const GridFunction& question, double r) {
    auto backend = std::make_shared<const ModelBackend>(params);
    return CovBackend(backend, r).apply(examples, question, 0.0, Orientation::Forward);
}

std::shared_ptr<const OperatorBackend> with_change_of_variables(
    std::shared_ptr<const OperatorBackend> inner, double r) {
    return std::make_shared<const CovBackend>(std::move(inner), r);
}

FluxSpec stride_rescale(const FluxSpec& flux, double k) {
    if (!(k > 0.0)) throw ArgumentError("stride_rescale: k must be > 0");
    if (k == 1.0) return flux;
    return FluxSpec::scaled(flux, k);
}

} // namespace iconcl
