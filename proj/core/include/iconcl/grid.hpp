#pragma once

#include <functional>
#include <vector>

namespace iconcl {

/// A function on the periodic unit interval stored as cell averages.
/// values[i] is the average of u over [i*dx, (i+1)*dx); n * dx == 1.
struct GridFunction {
    std::vector<double> values;
    double dx = 0.0;

    int n() const { return static_cast<int>(values.size()); }
    double key(int i) const { return i * dx; }
};

/// A time-ordered sequence of frames with uniform spacing dt, starting at t0.
struct Record {
    std::vector<GridFunction> frames;
    double dt = 0.0;
    double t0 = 0.0;

    int num_frames() const { return static_cast<int>(frames.size()); }
    double time_of(int i) const { return t0 + i * dt; }
};

// Validating constructor; throws ArgumentError / NumericError.
GridFunction make_grid_function(std::vector<double> values, double dx);
GridFunction uniform_grid_function(int n, double value);

// Throws unless n*dx == 1 within 1e-12 and all values are finite.
void validate_grid_function(const GridFunction& g);
void validate_record(const Record& rec);

double total_mass(const GridFunction& g);         // sum(values) * dx
double mean_abs(const GridFunction& g);           // (1/n) sum |values|
double min_value(const GridFunction& g);
double max_value(const GridFunction& g);

// Mean absolute difference over cells; grids must match in shape.
double mean_abs_diff(const GridFunction& a, const GridFunction& b);
double max_abs_diff(const GridFunction& a, const GridFunction& b);

// Sample a pointwise function into exact cell averages via its antiderivative:
// values[i] = (F((i+1)dx) - F(i dx)) / dx.
GridFunction cell_average_from_antiderivative(int n,
                                              const std::function<double(double)>& antiderivative);

// Every stride-th cell as a coarser GridFunction (n must divide evenly).
GridFunction subsample(const GridFunction& g, int stride);

// Periodic linear interpolation back onto a finer grid with `factor` times
// the cells, placing the coarse values at their original keys.
GridFunction upsample_linear_periodic(const GridFunction& g, int factor);

// u(x - shift) resampled as cell averages, shift an arbitrary real; used by
// advection oracles. Exact for piecewise-constant cell-average data.
GridFunction translate_periodic(const GridFunction& g, double shift);

} // namespace iconcl
