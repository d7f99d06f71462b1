#include "iconcl/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "iconcl/errors.hpp"

namespace iconcl {

void validate_grid_function(const GridFunction& g) {
    if (g.values.empty() || g.dx <= 0.0)
        throw ArgumentError("GridFunction: empty values or non-positive dx");
    if (std::abs(g.n() * g.dx - 1.0) > 1e-12)
        throw ArgumentError("GridFunction: n*dx must equal 1, got " +
                            std::to_string(g.n() * g.dx));
    for (int i = 0; i < g.n(); ++i)
        if (!std::isfinite(g.values[static_cast<std::size_t>(i)]))
            throw NumericError("GridFunction: non-finite value at cell " + std::to_string(i));
}

GridFunction make_grid_function(std::vector<double> values, double dx) {
    GridFunction g{std::move(values), dx};
    validate_grid_function(g);
    return g;
}

GridFunction uniform_grid_function(int n, double value) {
    return make_grid_function(std::vector<double>(static_cast<std::size_t>(n), value),
                              1.0 / n);
}

void validate_record(const Record& rec) {
    if (rec.frames.empty()) throw ArgumentError("Record: needs at least one frame");
    if (rec.dt <= 0.0) throw ArgumentError("Record: non-positive dt");
    const int n = rec.frames.front().n();
    const double dx = rec.frames.front().dx;
    for (const auto& f : rec.frames) {
        if (f.n() != n || f.dx != dx)
            throw ArgumentError("Record: frames disagree on grid shape");
        validate_grid_function(f);
    }
}

double total_mass(const GridFunction& g) {
    double s = 0.0;
    for (double v : g.values) s += v;
    return s * g.dx;
}

double mean_abs(const GridFunction& g) {
    double s = 0.0;
    for (double v : g.values) s += std::abs(v);
    return s / g.n();
}

double min_value(const GridFunction& g) {
    return *std::min_element(g.values.begin(), g.values.end());
}

double max_value(const GridFunction& g) {
    return *std::max_element(g.values.begin(), g.values.end());
}

static void require_same_shape(const GridFunction& a, const GridFunction& b) {
    if (a.n() != b.n() || a.dx != b.dx)
        throw ArgumentError("grid shape mismatch: " + std::to_string(a.n()) + " vs " +
                            std::to_string(b.n()));
}

double mean_abs_diff(const GridFunction& a, const GridFunction& b) {
    require_same_shape(a, b);
    double s = 0.0;
    for (int i = 0; i < a.n(); ++i)
        s += std::abs(a.values[static_cast<std::size_t>(i)] - b.values[static_cast<std::size_t>(i)]);
    return s / a.n();
}

double max_abs_diff(const GridFunction& a, const GridFunction& b) {
    require_same_shape(a, b);
    double m = 0.0;
    for (int i = 0; i < a.n(); ++i)
        m = std::max(m, std::abs(a.values[static_cast<std::size_t>(i)] -
                                 b.values[static_cast<std::size_t>(i)]));
    return m;
}

GridFunction cell_average_from_antiderivative(int n,
                                              const std::function<double(double)>& antiderivative) {
    const double dx = 1.0 / n;
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        v[static_cast<std::size_t>(i)] =
            (antiderivative((i + 1) * dx) - antiderivative(i * dx)) / dx;
    return make_grid_function(std::move(v), dx);
}

GridFunction subsample(const GridFunction& g, int stride) {
    if (stride < 1 || g.n() % stride != 0)
        throw ArgumentError("subsample: stride must divide n");
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(g.n() / stride));
    for (int i = 0; i < g.n(); i += stride) v.push_back(g.values[static_cast<std::size_t>(i)]);
    return make_grid_function(std::move(v), g.dx * stride);
}

GridFunction upsample_linear_periodic(const GridFunction& g, int factor) {
    if (factor < 1) throw ArgumentError("upsample: factor must be >= 1");
    const int n = g.n();
    std::vector<double> v(static_cast<std::size_t>(n) * factor);
    for (int i = 0; i < n; ++i) {
        const double a = g.values[static_cast<std::size_t>(i)];
        const double b = g.values[static_cast<std::size_t>((i + 1) % n)];
        for (int j = 0; j < factor; ++j) {
            const double w = static_cast<double>(j) / factor;
            v[static_cast<std::size_t>(i * factor + j)] = (1.0 - w) * a + w * b;
        }
    }
    return make_grid_function(std::move(v), g.dx / factor);
}

GridFunction translate_periodic(const GridFunction& g, double shift) {
    const int n = g.n();
    const double dx = g.dx;
    // Shift in cells, split into integer part and fraction in [0,1); shifts
    // within 1e-9 of a whole cell snap to the exact cyclic reindex.
    double cells = shift / dx;
    if (std::abs(cells - std::round(cells)) < 1e-9) cells = std::round(cells);
    double intpart = 0.0;
    double frac = std::modf(cells, &intpart);
    long k = static_cast<long>(intpart);
    if (frac < 0.0) {
        frac += 1.0;
        k -= 1;
    }
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        // Cell average of the shifted piecewise-constant function: a weighted
        // mix of the two source cells that overlap cell i.
        long src = i - k;
        const long a = ((src % n) + n) % n;
        const long b = ((src - 1) % n + n) % n;
        v[static_cast<std::size_t>(i)] =
            (1.0 - frac) * g.values[static_cast<std::size_t>(a)] +
            frac * g.values[static_cast<std::size_t>(b)];
    }
    return make_grid_function(std::move(v), dx);
}

} // namespace iconcl
