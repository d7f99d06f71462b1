#pragma once

#include <array>
#include <memory>
#include <string>

namespace iconcl {

enum class FluxKind { Cubic, SinCos, Tanh, Scaled };

/// Flux function f(u) for the conservation law du/dt + d/dx f(u) = 0.
/// Cubic: a u^3 + b u^2 + c u. SinCos: sin(u) - cos(u). Tanh: tanh(u).
/// Scaled: k * inner(u) with k > 0.
struct FluxSpec {
    FluxKind kind = FluxKind::Cubic;
    double a = 0.0, b = 0.0, c = 0.0;   // cubic coefficients
    double k = 1.0;                     // scale factor (Scaled only)
    std::shared_ptr<const FluxSpec> inner; // wrapped flux (Scaled only)

    static FluxSpec cubic(double a, double b, double c);
    static FluxSpec sincos();
    static FluxSpec tanh();
    static FluxSpec scaled(FluxSpec inner, double k);
};

void validate_flux(const FluxSpec& spec);

double eval_flux(const FluxSpec& spec, double u);
double flux_derivative(const FluxSpec& spec, double u);

// Max of |f'| over an interval; wave-speed bound for CFL and LF splitting.
double max_wave_speed(const FluxSpec& spec, double u_lo, double u_hi);

// Textual encoding: "cubic:a,b,c" | "sincos" | "tanh" | "scale:k:<inner>".
std::string encode_flux(const FluxSpec& spec);
FluxSpec parse_flux(const std::string& text);

struct CubicFit {
    double a = 0.0, b = 0.0, c = 0.0;
    bool widened = false; // degenerate interval was widened by +-0.5
};

// Least-squares cubic fit of f over [lo, hi]; the constant term is solved
// for and dropped. The fit minimizes the squared error on a uniform sample
// of the interval (101 points), which is what the reference coefficients
// for sin(u)-cos(u) correspond to.
CubicFit cubic_fit(const FluxSpec& spec, double lo, double hi);

// Fit over the range of the given data; a zero-width range is widened to
// [v-0.5, v+0.5] and flagged.
CubicFit adaptive_cubic_fit(const FluxSpec& spec, double u_min, double u_max);

// Cubic Taylor polynomial of sin(u)-cos(u) at 0, constant dropped.
inline constexpr std::array<double, 3> kSinCosTaylor = {-1.0 / 6.0, 0.5, 1.0};
// Cubic Taylor polynomial of tanh(u) at 0.
inline constexpr std::array<double, 3> kTanhTaylor = {-1.0 / 3.0, 0.0, 1.0};

// Substitute u = alpha*v + beta into a cubic flux and divide by alpha:
// g(v) = f(alpha v + beta)/alpha, again cubic after dropping the constant.
FluxSpec cubic_affine_substitution(const FluxSpec& cubic, double alpha, double beta);

// Coefficient-negated cubic; -f generates the time-reversed dynamics.
FluxSpec negated_cubic(const FluxSpec& cubic);

} // namespace iconcl
