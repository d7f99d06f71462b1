#include "iconcl/flux.hpp"

#include <cmath>
#include <cstdio>
#include <vector>

#include <Eigen/Dense>

#include "iconcl/errors.hpp"

namespace iconcl {

FluxSpec FluxSpec::cubic(double a, double b, double c) {
    FluxSpec s;
    s.kind = FluxKind::Cubic;
    s.a = a;
    s.b = b;
    s.c = c;
    return s;
}

FluxSpec FluxSpec::sincos() {
    FluxSpec s;
    s.kind = FluxKind::SinCos;
    return s;
}

FluxSpec FluxSpec::tanh() {
    FluxSpec s;
    s.kind = FluxKind::Tanh;
    return s;
}

FluxSpec FluxSpec::scaled(FluxSpec inner, double k) {
    if (!(k > 0.0)) throw ArgumentError("scaled flux: multiplier must be > 0");
    FluxSpec s;
    s.kind = FluxKind::Scaled;
    s.k = k;
    s.inner = std::make_shared<const FluxSpec>(std::move(inner));
    return s;
}

void validate_flux(const FluxSpec& spec) {
    switch (spec.kind) {
        case FluxKind::Cubic:
            if (!std::isfinite(spec.a) || !std::isfinite(spec.b) || !std::isfinite(spec.c))
                throw ConfigError("cubic flux: non-finite coefficient");
            return;
        case FluxKind::SinCos:
        case FluxKind::Tanh:
            return;
        case FluxKind::Scaled:
            if (!(spec.k > 0.0) || !std::isfinite(spec.k))
                throw ConfigError("scaled flux: multiplier must be a positive real");
            if (!spec.inner) throw ConfigError("scaled flux: missing inner flux");
            validate_flux(*spec.inner);
            return;
    }
    throw ConfigError("unknown flux kind");
}

double eval_flux(const FluxSpec& spec, double u) {
    switch (spec.kind) {
        case FluxKind::Cubic: return ((spec.a * u + spec.b) * u + spec.c) * u;
        case FluxKind::SinCos: return std::sin(u) - std::cos(u);
        case FluxKind::Tanh: return std::tanh(u);
        case FluxKind::Scaled: return spec.k * eval_flux(*spec.inner, u);
    }
    throw ConfigError("unknown flux kind");
}

double flux_derivative(const FluxSpec& spec, double u) {
    switch (spec.kind) {
        case FluxKind::Cubic: return (3.0 * spec.a * u + 2.0 * spec.b) * u + spec.c;
        case FluxKind::SinCos: return std::cos(u) + std::sin(u);
        case FluxKind::Tanh: {
            const double t = std::tanh(u);
            return 1.0 - t * t;
        }
        case FluxKind::Scaled: return spec.k * flux_derivative(*spec.inner, u);
    }
    throw ConfigError("unknown flux kind");
}

double max_wave_speed(const FluxSpec& spec, double u_lo, double u_hi) {
    if (u_lo > u_hi) std::swap(u_lo, u_hi);
    double m = std::max(std::abs(flux_derivative(spec, u_lo)),
                        std::abs(flux_derivative(spec, u_hi)));
    // |f'| is piecewise monotone for every registered kind; a dense scan of
    // the interval plus the endpoints bounds it to well below 1%.
    const int kSamples = 256;
    for (int i = 1; i < kSamples; ++i) {
        const double u = u_lo + (u_hi - u_lo) * i / kSamples;
        m = std::max(m, std::abs(flux_derivative(spec, u)));
    }
    // Cubic: include the interior extremum of f'' = 0 exactly.
    if (spec.kind == FluxKind::Cubic && spec.a != 0.0) {
        const double u_star = -spec.b / (3.0 * spec.a);
        if (u_star > u_lo && u_star < u_hi)
            m = std::max(m, std::abs(flux_derivative(spec, u_star)));
    }
    return m;
}

std::string encode_flux(const FluxSpec& spec) {
    validate_flux(spec);
    char buf[128];
    switch (spec.kind) {
        case FluxKind::Cubic:
            std::snprintf(buf, sizeof buf, "cubic:%.17g,%.17g,%.17g", spec.a, spec.b, spec.c);
            return buf;
        case FluxKind::SinCos: return "sincos";
        case FluxKind::Tanh: return "tanh";
        case FluxKind::Scaled:
            std::snprintf(buf, sizeof buf, "scale:%.17g:", spec.k);
            return std::string(buf) + encode_flux(*spec.inner);
    }
    throw ConfigError("unknown flux kind");
}

FluxSpec parse_flux(const std::string& text) {
    if (text == "sincos") return FluxSpec::sincos();
    if (text == "tanh") return FluxSpec::tanh();
    if (text.rfind("cubic:", 0) == 0) {
        double a = 0, b = 0, c = 0;
        if (std::sscanf(text.c_str() + 6, "%lf,%lf,%lf", &a, &b, &c) != 3)
            throw ConfigError("bad cubic flux encoding: " + text);
        return FluxSpec::cubic(a, b, c);
    }
    if (text.rfind("scale:", 0) == 0) {
        const auto sep = text.find(':', 6);
        if (sep == std::string::npos)
            throw ConfigError("bad scaled flux encoding: " + text);
        double k = 0;
        if (std::sscanf(text.substr(6, sep - 6).c_str(), "%lf", &k) != 1)
            throw ConfigError("bad scale factor in: " + text);
        return FluxSpec::scaled(parse_flux(text.substr(sep + 1)), k);
    }
    throw ConfigError("unknown flux encoding: " + text);
}

CubicFit cubic_fit(const FluxSpec& spec, double lo, double hi) {
    validate_flux(spec);
    if (!(lo < hi)) throw ArgumentError("cubic_fit: need lo < hi");

    // min sum_j (f(u_j) - (a u^3 + b u^2 + c u + d))^2 over 101 uniform
    // samples, solved by QR on the design matrix; d is fitted and discarded.
    const int kPoints = 101;
    Eigen::MatrixXd design(kPoints, 4);
    Eigen::VectorXd rhs(kPoints);
    for (int j = 0; j < kPoints; ++j) {
        const double u = lo + (hi - lo) * j / (kPoints - 1);
        design(j, 0) = u * u * u;
        design(j, 1) = u * u;
        design(j, 2) = u;
        design(j, 3) = 1.0;
        rhs[j] = eval_flux(spec, u);
    }
    const Eigen::Vector4d sol = design.colPivHouseholderQr().solve(rhs);
    return CubicFit{sol[0], sol[1], sol[2], false};
}

CubicFit adaptive_cubic_fit(const FluxSpec& spec, double u_min, double u_max) {
    if (u_min > u_max) std::swap(u_min, u_max);
    bool widened = false;
    if (u_max - u_min < 1e-12) {
        u_min -= 0.5;
        u_max += 0.5;
        widened = true;
    }
    CubicFit fit = cubic_fit(spec, u_min, u_max);
    fit.widened = widened;
    return fit;
}

FluxSpec cubic_affine_substitution(const FluxSpec& cubic, double alpha, double beta) {
    if (cubic.kind != FluxKind::Cubic)
        throw ArgumentError("cubic_affine_substitution: cubic flux required");
    if (!(alpha > 0.0)) throw ArgumentError("cubic_affine_substitution: alpha must be > 0");
    // f(alpha v + beta)/alpha, constant term dropped.
    const double a = cubic.a, b = cubic.b, c = cubic.c;
    return FluxSpec::cubic(a * alpha * alpha,
                           (3.0 * a * beta + b) * alpha,
                           3.0 * a * beta * beta + 2.0 * b * beta + c);
}

FluxSpec negated_cubic(const FluxSpec& cubic) {
    if (cubic.kind != FluxKind::Cubic)
        throw ArgumentError("negated_cubic: cubic flux required");
    return FluxSpec::cubic(-cubic.a, -cubic.b, -cubic.c);
}

} // namespace iconcl
