#include "iconcl/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>

#include "iconcl/errors.hpp"
#include "iconcl/parallel.hpp"
#include "iconcl/rng.hpp"

namespace iconcl {

double forward_error(const GridFunction& prediction, const GridFunction& truth) {
    return mean_abs_diff(prediction, truth);
}

double reverse_error(const GridFunction& predicted_initial, const FluxSpec& flux, double tau,
                     const GridFunction& condition) {
    return forward_error(exact_forward(predicted_initial, flux, tau), condition);
}

ErrorCurve recursive_reverse_error(const RolloutResult& predictions, const FluxSpec& flux,
                                   double t0, const GridFunction& truth_at_t0) {
    ErrorCurve curve;
    curve.n_instances = 1;
    for (int i = 0; i < predictions.num_frames(); ++i) {
        const double t = predictions.time_of(i);
        if (t >= t0 - 1e-12) throw ArgumentError("recursive_reverse_error: frame not before t0");
        curve.abscissa.push_back(t);
        curve.mean_error.push_back(forward_error(
            exact_forward(predictions.frames[static_cast<std::size_t>(i)], flux, t0 - t),
            truth_at_t0));
    }
    return curve;
}

// ---------------------------------------------------------------------------

namespace {

int frame_index(const Record& rec, double t) {
    const double real = (t - rec.t0) / rec.dt;
    const int idx = static_cast<int>(std::llround(real));
    if (idx < 0 || idx >= rec.num_frames() || std::abs(real - idx) > 1e-6)
        throw ArgumentError("no frame at t=" + std::to_string(t));
    return idx;
}

Record slice_record(const Record& rec, double from, double to) {
    Record out;
    out.dt = rec.dt;
    out.t0 = from;
    const int a = frame_index(rec, from), b = frame_index(rec, to);
    for (int i = a; i <= b; ++i) out.frames.push_back(rec.frames[static_cast<std::size_t>(i)]);
    return out;
}

std::string format_g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

} // namespace

GridEvalResult grid_eval(const BackendFactory& factory, const GridEvalConfig& cfg) {
    if (cfg.points_per_axis < 1 || cfg.instances < 1 || cfg.example_counts.empty())
        throw ArgumentError("grid_eval: bad configuration");
    const int P = cfg.points_per_axis;
    const int num_ops = P * P * P;
    const int max_examples =
        *std::max_element(cfg.example_counts.begin(), cfg.example_counts.end());

    struct OpOut {
        std::vector<GridEvalRow> rows;
        bool skipped = false;
        std::string diagnostic;
    };
    std::vector<OpOut> per_op(static_cast<std::size_t>(num_ops));

    auto axis = [&](int i) { return P == 1 ? 0.0 : -1.0 + 2.0 * i / (P - 1); };

    const int workers = cfg.workers > 0 ? cfg.workers : default_worker_count();
    parallel_for(num_ops, workers, [&](int op) {
        const double a = axis(op / (P * P));
        const double b = axis((op / P) % P);
        const double c = axis(op % P);
        const FluxSpec flux = FluxSpec::cubic(a, b, c);
        OpOut& out = per_op[static_cast<std::size_t>(op)];
        try {
            const OperatorDataset ds = generate_operator_dataset(
                flux, cfg.gen, derive_seed(cfg.seed, static_cast<std::uint64_t>(op)));
            const auto backend = factory(flux);

            std::vector<double> fsum(cfg.example_counts.size(), 0.0);
            std::vector<double> rsum(cfg.example_counts.size(), 0.0);
            for (int inst = 0; inst < cfg.instances; ++inst) {
                // One draw of max_examples + 1 pairs serves every J: the
                // question is the last pair, examples are prefixes.
                const auto seq = sample_training_sequence(
                    ds, max_examples + 1, Orientation::Forward,
                    derive_seed(derive_seed(cfg.seed, static_cast<std::uint64_t>(op)),
                                0x1000 + static_cast<std::uint64_t>(inst)));
                const CondQoIPair& question = seq.pairs.back();
                for (std::size_t ji = 0; ji < cfg.example_counts.size(); ++ji) {
                    const int J = cfg.example_counts[ji];
                    std::vector<CondQoIPair> fwd(seq.pairs.begin(), seq.pairs.begin() + J);
                    fsum[ji] += forward_error(
                        backend->apply(fwd, question.cond, ds.tau, Orientation::Forward),
                        question.qoi);
                    std::vector<CondQoIPair> rev = fwd;
                    for (auto& p : rev) std::swap(p.cond, p.qoi);
                    rsum[ji] += reverse_error(
                        backend->apply(rev, question.qoi, ds.tau, Orientation::Reverse), flux,
                        ds.tau, question.qoi);
                }
            }
            for (std::size_t ji = 0; ji < cfg.example_counts.size(); ++ji) {
                GridEvalRow row;
                row.a = a;
                row.b = b;
                row.c = c;
                row.examples = cfg.example_counts[ji];
                row.forward_mean = fsum[ji] / cfg.instances;
                row.reverse_mean = rsum[ji] / cfg.instances;
                row.n = cfg.instances;
                out.rows.push_back(row);
            }
        } catch (const std::exception& e) {
            out.skipped = true;
            out.diagnostic = e.what();
        }
    });

    GridEvalResult result;
    std::vector<double> fagg(cfg.example_counts.size(), 0.0);
    std::vector<double> ragg(cfg.example_counts.size(), 0.0);
    int ops_used = 0;
    for (const auto& out : per_op) {
        if (out.skipped) {
            std::fprintf(stderr, "grid_eval: operator skipped: %s\n", out.diagnostic.c_str());
            continue;
        }
        ++ops_used;
        for (std::size_t ji = 0; ji < out.rows.size(); ++ji) {
            fagg[ji] += out.rows[ji].forward_mean;
            ragg[ji] += out.rows[ji].reverse_mean;
        }
        result.rows.insert(result.rows.end(), out.rows.begin(), out.rows.end());
    }
    if (ops_used == 0) throw NumericError("grid_eval: every operator failed");

    result.forward_curve.tag = "forward";
    result.reverse_curve.tag = "reverse";
    result.forward_curve.n_instances = ops_used * cfg.instances;
    result.reverse_curve.n_instances = ops_used * cfg.instances;
    for (std::size_t ji = 0; ji < cfg.example_counts.size(); ++ji) {
        result.forward_curve.abscissa.push_back(cfg.example_counts[ji]);
        result.forward_curve.mean_error.push_back(fagg[ji] / ops_used);
        result.reverse_curve.abscissa.push_back(cfg.example_counts[ji]);
        result.reverse_curve.mean_error.push_back(ragg[ji] / ops_used);
    }
    return result;
}

// ---------------------------------------------------------------------------

std::vector<NamedFlux> standard_baselines(const FluxSpec& flux_true) {
    std::vector<NamedFlux> out;
    switch (flux_true.kind) {
        case FluxKind::SinCos:
            out.push_back({"taylor", FluxSpec::cubic(kSinCosTaylor[0], kSinCosTaylor[1],
                                                     kSinCosTaylor[2])});
            break;
        case FluxKind::Tanh:
            out.push_back(
                {"taylor", FluxSpec::cubic(kTanhTaylor[0], kTanhTaylor[1], kTanhTaylor[2])});
            break;
        case FluxKind::Cubic:
            out.push_back({"taylor", flux_true});
            break;
        case FluxKind::Scaled: {
            auto inner = standard_baselines(*flux_true.inner);
            const auto& t = inner.front().flux;
            out.push_back({"taylor", FluxSpec::cubic(flux_true.k * t.a, flux_true.k * t.b,
                                                     flux_true.k * t.c)});
            break;
        }
    }
    const CubicFit f1 = cubic_fit(flux_true, -1.0, 1.0);
    out.push_back({"fit11", FluxSpec::cubic(f1.a, f1.b, f1.c)});
    const CubicFit f2 = cubic_fit(flux_true, -2.0, 2.0);
    out.push_back({"fit22", FluxSpec::cubic(f2.a, f2.b, f2.c)});
    out.push_back({"adaptive", flux_true, true});
    return out;
}

namespace {

struct InstanceCurves {
    // errors[eq][time] accumulated for one instance; layout mirrors the
    // final StudyCurves vectors.
    std::vector<std::vector<double>> c1f, c1r, c2f, c2r;
    bool ok = true;
    std::string diagnostic;
};

struct StudyContext {
    const BackendFactory& factory;
    const FluxSpec& flux_true;
    const std::vector<NamedFlux>& equations; // "correct" first, then baselines
    const StudyConfig& cfg;
};

FluxSpec instance_flux(const NamedFlux& eq, const FluxSpec& flux_true, const GridFunction& u0) {
    if (!eq.adaptive) return eq.flux;
    const CubicFit fit = adaptive_cubic_fit(flux_true, min_value(u0), max_value(u0));
    return FluxSpec::cubic(fit.a, fit.b, fit.c);
}

InstanceCurves run_study_instance(const StudyContext& ctx, int instance) {
    const StudyConfig& cfg = ctx.cfg;
    InstanceCurves out;
    const std::size_t neq = ctx.equations.size();
    out.c1f.resize(neq);
    out.c1r.resize(neq);
    out.c2f.resize(neq);
    out.c2r.resize(neq);
    try {
        const GrfConfig grf{cfg.grf_sigma, cfg.grf_ell, 100, cfg.grf_clip};
        const GridFunction u0 =
            GrfSampler(grf).sample(derive_seed(cfg.seed, 0x9000 + static_cast<std::uint64_t>(instance)));
        const int record_stride = static_cast<int>(std::llround(cfg.dt / kSolverDt));

        // Full records per equation from the shared initial condition.
        std::vector<Record> full(neq);
        std::vector<FluxSpec> fluxes(neq);
        for (std::size_t e = 0; e < neq; ++e) {
            fluxes[e] = instance_flux(ctx.equations[e], ctx.flux_true, u0);
            full[e] = simulate(u0, fluxes[e], cfg.horizon_forward, kSolverDt, record_stride);
        }
        const Record& full_true = full[0]; // equations[0] is the correct one

        for (std::size_t e = 0; e < neq; ++e) {
            const std::uint64_t eq_seed =
                derive_seed(derive_seed(cfg.seed, static_cast<std::uint64_t>(instance)),
                            static_cast<std::uint64_t>(e));
            const auto backend = ctx.factory(fluxes[e]);

            if (cfg.forward) {
                const Record ex_rec = slice_record(full[e], 0.0, cfg.t0_forward);
                RolloutPlan plan{cfg.t0_forward, cfg.dt, cfg.max_stride, cfg.horizon_forward,
                                 Orientation::Forward, cfg.examples_per_call,
                                 derive_seed(eq_seed, 1)};
                if (cfg.comparison1) {
                    const RolloutResult r = recursive_rollout(*backend, ex_rec, plan);
                    auto& acc = out.c1f[e];
                    for (int i = 0; i < r.num_frames(); ++i)
                        acc.push_back(forward_error(
                            r.frames[static_cast<std::size_t>(i)],
                            full[e].frames[static_cast<std::size_t>(
                                frame_index(full[e], r.time_of(i)))]));
                }
                if (cfg.comparison2) {
                    const GridFunction& q =
                        full_true.frames[static_cast<std::size_t>(frame_index(full_true, cfg.t0_forward))];
                    plan.seed = derive_seed(eq_seed, 2);
                    const RolloutResult r = recursive_rollout(*backend, ex_rec, plan, &q);
                    auto& acc = out.c2f[e];
                    for (int i = 0; i < r.num_frames(); ++i)
                        acc.push_back(forward_error(
                            r.frames[static_cast<std::size_t>(i)],
                            full_true.frames[static_cast<std::size_t>(
                                frame_index(full_true, r.time_of(i)))]));
                }
            }
            if (cfg.reverse) {
                const Record ex_rec = slice_record(full[e], cfg.t0_reverse, cfg.horizon_forward);
                RolloutPlan plan{cfg.t0_reverse, cfg.dt, cfg.max_stride, cfg.horizon_reverse,
                                 Orientation::Reverse, cfg.examples_per_call,
                                 derive_seed(eq_seed, 3)};
                if (cfg.comparison1) {
                    const RolloutResult r = recursive_rollout(*backend, ex_rec, plan);
                    out.c1r[e] = recursive_reverse_error(
                                     r, fluxes[e], cfg.t0_reverse,
                                     full[e].frames[static_cast<std::size_t>(
                                         frame_index(full[e], cfg.t0_reverse))])
                                     .mean_error;
                }
                if (cfg.comparison2) {
                    const GridFunction& q = full_true.frames[static_cast<std::size_t>(
                        frame_index(full_true, cfg.t0_reverse))];
                    plan.seed = derive_seed(eq_seed, 4);
                    const RolloutResult r = recursive_rollout(*backend, ex_rec, plan, &q);
                    out.c2r[e] = recursive_reverse_error(r, ctx.flux_true, cfg.t0_reverse, q)
                                     .mean_error;
                }
            }
        }
    } catch (const std::exception& e) {
        out.ok = false;
        out.diagnostic = e.what();
    }
    return out;
}

std::vector<double> study_times(const StudyConfig& cfg, Orientation dir) {
    std::vector<double> t;
    if (dir == Orientation::Forward) {
        const int n = static_cast<int>(std::llround((cfg.horizon_forward - cfg.t0_forward) / cfg.dt));
        for (int i = 1; i <= n; ++i) t.push_back(cfg.t0_forward + i * cfg.dt);
    } else {
        const int n = static_cast<int>(std::llround((cfg.t0_reverse - cfg.horizon_reverse) / cfg.dt));
        for (int i = 1; i <= n; ++i) t.push_back(cfg.t0_reverse - i * cfg.dt);
    }
    return t;
}

std::vector<ErrorCurve> aggregate_curves(const std::vector<InstanceCurves>& instances,
                                         std::vector<std::vector<double>> InstanceCurves::*member,
                                         const std::vector<NamedFlux>& equations,
                                         const std::vector<double>& times) {
    std::vector<ErrorCurve> curves;
    for (std::size_t e = 0; e < equations.size(); ++e) {
        ErrorCurve c;
        c.tag = equations[e].tag;
        c.abscissa = times;
        c.mean_error.assign(times.size(), 0.0);
        int used = 0;
        for (const auto& inst : instances) {
            if (!inst.ok) continue;
            const auto& errs = (inst.*member)[e];
            if (errs.size() != times.size()) continue;
            for (std::size_t i = 0; i < errs.size(); ++i) c.mean_error[i] += errs[i];
            ++used;
        }
        if (used > 0)
            for (auto& v : c.mean_error) v /= used;
        c.n_instances = used;
        curves.push_back(std::move(c));
    }
    return curves;
}

} // namespace

StudyCurves generalization_study(const BackendFactory& factory, const FluxSpec& flux_true,
                                 const std::vector<NamedFlux>& baselines,
                                 const StudyConfig& cfg) {
    std::vector<NamedFlux> equations;
    equations.push_back({"correct", flux_true});
    equations.insert(equations.end(), baselines.begin(), baselines.end());

    StudyContext ctx{factory, flux_true, equations, cfg};
    std::vector<InstanceCurves> per_instance(static_cast<std::size_t>(cfg.instances));
    const int workers = cfg.workers > 0 ? cfg.workers : default_worker_count();
    parallel_for(cfg.instances, workers,
                 [&](int i) { per_instance[static_cast<std::size_t>(i)] = run_study_instance(ctx, i); });

    for (const auto& inst : per_instance)
        if (!inst.ok)
            std::fprintf(stderr, "generalization_study: instance skipped: %s\n",
                         inst.diagnostic.c_str());

    StudyCurves out;
    const auto tf = study_times(cfg, Orientation::Forward);
    const auto tr = study_times(cfg, Orientation::Reverse);
    if (cfg.forward && cfg.comparison1)
        out.comparison1_forward = aggregate_curves(per_instance, &InstanceCurves::c1f, equations, tf);
    if (cfg.forward && cfg.comparison2)
        out.comparison2_forward = aggregate_curves(per_instance, &InstanceCurves::c2f, equations, tf);
    if (cfg.reverse && cfg.comparison1)
        out.comparison1_reverse = aggregate_curves(per_instance, &InstanceCurves::c1r, equations, tr);
    if (cfg.reverse && cfg.comparison2)
        out.comparison2_reverse = aggregate_curves(per_instance, &InstanceCurves::c2r, equations, tr);
    return out;
}

SweepResult change_of_variables_sweep(const BackendFactory& factory, const FluxSpec& flux_true,
                                      const std::vector<double>& r_values,
                                      const StudyConfig& cfg) {
    SweepResult result;
    for (double r : r_values) {
        BackendFactory wrapped = factory;
        std::string tag = "off";
        if (r > 0.0) {
            tag = "r" + format_g(r);
            wrapped = [factory, r](const FluxSpec& flux) {
                return with_change_of_variables(factory(flux), r);
            };
        }
        StudyConfig sub = cfg;
        sub.comparison1 = true;
        sub.comparison2 = false;
        sub.seed = derive_seed(cfg.seed, std::hash<std::string>{}(tag));
        const StudyCurves curves = generalization_study(wrapped, flux_true, {}, sub);
        if (cfg.forward) {
            ErrorCurve c = curves.comparison1_forward.front();
            c.tag = tag;
            result.forward.push_back(std::move(c));
        }
        if (cfg.reverse) {
            ErrorCurve c = curves.comparison1_reverse.front();
            c.tag = tag;
            result.reverse.push_back(std::move(c));
        }
    }
    return result;
}

SweepResult stride_sweep(const BackendFactory& factory, const FluxSpec& flux_true,
                         const std::vector<double>& strides, const StudyConfig& cfg) {
    SweepResult result;
    for (double S : strides) {
        StudyConfig sub = cfg;
        sub.max_stride = S;
        sub.comparison1 = true;
        sub.comparison2 = false;
        const std::string tag = "S" + format_g(S);
        const StudyCurves curves = generalization_study(factory, flux_true, {}, sub);
        if (cfg.forward) {
            ErrorCurve c = curves.comparison1_forward.front();
            c.tag = tag;
            result.forward.push_back(std::move(c));
        }
        if (cfg.reverse) {
            ErrorCurve c = curves.comparison1_reverse.front();
            c.tag = tag;
            result.reverse.push_back(std::move(c));
        }
    }
    return result;
}

std::string study_filename(const std::string& study, const std::string& direction,
                           const std::string& flux_tag) {
    auto sanitize = [](std::string s) {
        for (char& ch : s)
            if (ch == ':' || ch == ',' || ch == '/' || ch == ' ') ch = '-';
        return s;
    };
    return sanitize(study) + "_" + sanitize(direction) + "_" + sanitize(flux_tag) + ".csv";
}

void write_curve_csv(const std::filesystem::path& path, const ErrorCurve& curve,
                     const std::vector<std::pair<std::string, std::string>>& metadata) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    for (const auto& [k, v] : metadata) out << "# " << k << "=" << v << "\n";
    out << "abscissa,mean_error,n_instances,tag\n";
    char buf[192];
    for (std::size_t i = 0; i < curve.abscissa.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%d,%s\n", curve.abscissa[i],
                      curve.mean_error[i], curve.n_instances, curve.tag.c_str());
        out << buf;
    }
}

} // namespace iconcl
