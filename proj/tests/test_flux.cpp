#include "iconcl/flux.hpp"

#include <cmath>

#include "iconcl/errors.hpp"
#include "iconcl/rng.hpp"
#include "test_harness.hpp"

using namespace iconcl;

namespace {

// Independent oracle for the cubic fit: discrete least squares on a dense
// sample, solved by brute-force 4x4 Gaussian elimination on long doubles.
CubicFit brute_force_fit(const FluxSpec& f, double lo, double hi, int points) {
    long double g[4][5] = {};
    for (int j = 0; j < points; ++j) {
        const double u = lo + (hi - lo) * j / (points - 1);
        const long double phi[4] = {static_cast<long double>(u) * u * u,
                                    static_cast<long double>(u) * u, u, 1.0L};
        const long double y = eval_flux(f, u);
        for (int r = 0; r < 4; ++r) {
            for (int c = 0; c < 4; ++c) g[r][c] += phi[r] * phi[c];
            g[r][4] += phi[r] * y;
        }
    }
    for (int col = 0; col < 4; ++col) {
        int piv = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::abs(static_cast<double>(g[r][col])) >
                std::abs(static_cast<double>(g[piv][col])))
                piv = r;
        for (int c = 0; c < 5; ++c) std::swap(g[col][c], g[piv][c]);
        for (int r = 0; r < 4; ++r) {
            if (r == col) continue;
            const long double factor = g[r][col] / g[col][col];
            for (int c = 0; c < 5; ++c) g[r][c] -= factor * g[col][c];
        }
    }
    return CubicFit{static_cast<double>(g[0][4] / g[0][0]), static_cast<double>(g[1][4] / g[1][1]),
                    static_cast<double>(g[2][4] / g[2][2]), false};
}

FluxSpec random_flux(Rng& rng) {
    switch (rng.below(4)) {
        case 0:
            return FluxSpec::cubic(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
        case 1: return FluxSpec::sincos();
        case 2: return FluxSpec::tanh();
        default:
            return FluxSpec::scaled(
                FluxSpec::cubic(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)),
                rng.uniform(0.1, 3.0));
    }
}

} // namespace

int main() {
    // eval_flux basics.
    CHECK_NEAR("cubic(0,0,0) at 0.7 is zero", eval_flux(FluxSpec::cubic(0, 0, 0), 0.7), 0.0, 0.0);
    CHECK_NEAR("cubic(1,1,1) at 1 sums coefficients", eval_flux(FluxSpec::cubic(1, 1, 1), 1.0),
               3.0, 1e-15);
    CHECK_NEAR("sincos at 0", eval_flux(FluxSpec::sincos(), 0.0), -1.0, 1e-15);
    CHECK_NEAR("tanh at 0.5", eval_flux(FluxSpec::tanh(), 0.5), std::tanh(0.5), 1e-15);

    // flux_derivative basics.
    CHECK_NEAR("cubic(1,0,0)' at 2", flux_derivative(FluxSpec::cubic(1, 0, 0), 2.0), 12.0, 1e-12);
    CHECK_NEAR("sincos' at 0", flux_derivative(FluxSpec::sincos(), 0.0), 1.0, 1e-15);
    CHECK_NEAR("tanh' at 0", flux_derivative(FluxSpec::tanh(), 0.0), 1.0, 1e-15);

    // Derivative agrees with a centered difference at 100 random points.
    {
        Rng rng(42);
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            const FluxSpec f = random_flux(rng);
            const double u = rng.uniform(-3, 3);
            const double h = 1e-5;
            const double fd = (eval_flux(f, u + h) - eval_flux(f, u - h)) / (2 * h);
            const double an = flux_derivative(f, u);
            const double rel = std::abs(fd - an) / std::max(1.0, std::abs(an));
            worst = std::max(worst, rel);
        }
        CHECK_LE("derivative matches centered difference", worst, 1e-6);
    }

    // Scaling is exact.
    {
        Rng rng(7);
        bool exact = true;
        for (int i = 0; i < 50; ++i) {
            const FluxSpec inner =
                FluxSpec::cubic(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
            const double k = rng.uniform(0.1, 5.0);
            const double u = rng.uniform(-3, 3);
            exact = exact &&
                    eval_flux(FluxSpec::scaled(inner, k), u) == k * eval_flux(inner, u);
        }
        CHECK("scaled flux is k*f exactly", exact);
    }

    // Paper coefficients for the sin-cos fits.
    {
        const CubicFit f1 = cubic_fit(FluxSpec::sincos(), -1.0, 1.0);
        CHECK_NEAR("fit [-1,1] a", f1.a, -0.157, 1e-3);
        CHECK_NEAR("fit [-1,1] b", f1.b, 0.465, 1e-3);
        CHECK_NEAR("fit [-1,1] c", f1.c, 0.998, 1e-3);
        const CubicFit f2 = cubic_fit(FluxSpec::sincos(), -2.0, 2.0);
        CHECK_NEAR("fit [-2,2] a", f2.a, -0.132, 1e-3);
        CHECK_NEAR("fit [-2,2] b", f2.b, 0.370, 1e-3);
        CHECK_NEAR("fit [-2,2] c", f2.c, 0.971, 1e-3);

        // Against the brute-force oracle at the same sampling density.
        const CubicFit o1 = brute_force_fit(FluxSpec::sincos(), -1.0, 1.0, 101);
        CHECK_NEAR("fit matches oracle a", f1.a, o1.a, 1e-9);
        CHECK_NEAR("fit matches oracle b", f1.b, o1.b, 1e-9);
        CHECK_NEAR("fit matches oracle c", f1.c, o1.c, 1e-9);
    }

    // Fitting a cubic with a cubic returns the coefficients.
    {
        Rng rng(3);
        double worst = 0.0;
        for (int i = 0; i < 20; ++i) {
            const double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1), c = rng.uniform(-1, 1);
            const double lo = rng.uniform(-3, 0.5);
            const CubicFit fit = cubic_fit(FluxSpec::cubic(a, b, c), lo, lo + rng.uniform(0.5, 4));
            worst = std::max({worst, std::abs(fit.a - a), std::abs(fit.b - b),
                              std::abs(fit.c - c)});
        }
        CHECK_LE("cubic_fit idempotent on cubics", worst, 1e-10);
    }

    // Adaptive fit widens a degenerate range and flags it.
    {
        const CubicFit fit = adaptive_cubic_fit(FluxSpec::sincos(), 0.3, 0.3);
        CHECK("degenerate range widened", fit.widened);
        const CubicFit manual = cubic_fit(FluxSpec::sincos(), -0.2, 0.8);
        CHECK_NEAR("widened interval is [v-0.5, v+0.5]", fit.a, manual.a, 1e-12);
        CHECK("non-degenerate range not widened",
              !adaptive_cubic_fit(FluxSpec::sincos(), -1.0, 2.0).widened);
    }

    // Taylor constants.
    CHECK_NEAR("sincos Taylor a", kSinCosTaylor[0], -1.0 / 6.0, 0.0);
    CHECK_NEAR("sincos Taylor b", kSinCosTaylor[1], 0.5, 0.0);
    CHECK_NEAR("sincos Taylor c", kSinCosTaylor[2], 1.0, 0.0);

    // Textual encoding round trip.
    {
        const FluxSpec f = FluxSpec::scaled(FluxSpec::cubic(0.25, -0.5, 1.0 / 3.0), 3.0);
        const FluxSpec back = parse_flux(encode_flux(f));
        CHECK("encode/parse round trip",
              eval_flux(back, 1.37) == eval_flux(f, 1.37) && back.kind == FluxKind::Scaled);
        CHECK("parse sincos", parse_flux("sincos").kind == FluxKind::SinCos);
        CHECK("parse cubic", eval_flux(parse_flux("cubic:1,-2,0.5"), 2.0) == 8.0 - 8.0 + 1.0);
        CHECK("unknown encoding throws",
              harness::throws<ConfigError>([] { parse_flux("quartic:1"); }));
        CHECK("bad scale throws",
              harness::throws<ArgumentError>([] { FluxSpec::scaled(FluxSpec::sincos(), -1.0); }));
    }

    // Affine substitution: g(v) = f(alpha v + beta)/alpha on cubics.
    {
        Rng rng(11);
        double worst = 0.0;
        for (int i = 0; i < 30; ++i) {
            const FluxSpec f =
                FluxSpec::cubic(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
            const double alpha = rng.uniform(0.5, 3.0), beta = rng.uniform(-1, 1);
            const FluxSpec g = cubic_affine_substitution(f, alpha, beta);
            for (int s = 0; s < 5; ++s) {
                const double v = rng.uniform(-2, 2);
                // Constant offset is dropped, so compare differences.
                const double want = (eval_flux(f, alpha * v + beta) - eval_flux(f, beta)) / alpha;
                const double got = eval_flux(g, v) - eval_flux(g, 0.0);
                worst = std::max(worst, std::abs(want - got));
            }
        }
        CHECK_LE("affine substitution matches f(alpha v + beta)/alpha", worst, 1e-12);
    }

    {
        CHECK("degenerate fit interval throws",
              harness::throws<ArgumentError>([] { cubic_fit(FluxSpec::sincos(), 1.0, 1.0); }));
        CHECK("negated_cubic flips sign",
              eval_flux(negated_cubic(FluxSpec::cubic(1, -2, 3)), 0.7) ==
                  -eval_flux(FluxSpec::cubic(1, -2, 3), 0.7));
    }

    return harness::summary("test_flux");
}
