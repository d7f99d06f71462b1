#pragma once

#include "iconcl/flux.hpp"
#include "iconcl/grid.hpp"

namespace iconcl {

/// Third-order finite-volume WENO with global Lax-Friedrichs splitting and
/// classical RK4 in time, on the periodic unit interval.

inline constexpr double kSolverDt = 0.0005;  // base time step for data generation
inline constexpr double kCflNumber = 0.5;
inline constexpr double kEpsSpeed = 1e-8;
inline constexpr double kWenoEps = 1e-6;     // smoothness-indicator regularizer

// Semi-discrete rate -(Fhat_{i+1/2} - Fhat_{i-1/2})/dx from third-order WENO
// reconstruction of the split fluxes, alpha = max_cells |f'(u)|.
std::vector<double> weno3_rhs(const GridFunction& state, const FluxSpec& flux);

// Largest stable step: cfl * dx / max(|f'(u)|, eps_speed).
double cfl_dt(const GridFunction& state, const FluxSpec& flux);

// One classical four-stage Runge-Kutta step. Throws StabilityError if dt
// exceeds cfl_dt, NumericError if the result is not finite.
GridFunction rk4_step(const GridFunction& state, const FluxSpec& flux, double dt);

// Advance by an arbitrary dt, subdividing into equal RK4 substeps when the
// CFL bound demands. Pure in (state, flux, dt), so composed calls reproduce
// a single longer run bit for bit.
GridFunction advance_frame(const GridFunction& state, const FluxSpec& flux, double dt);

// Evolve from t=0 to t_end with step dt, saving every save_every-th step
// (first frame is the input). t_end must be an integer multiple of dt and
// save_every must divide the step count.
Record simulate(const GridFunction& initial, const FluxSpec& flux, double t_end,
                double dt, int save_every);

// The forward operator F_{f,tau}: final state after time tau, integrated
// with the largest internal step <= kSolverDt that divides tau evenly.
GridFunction exact_forward(const GridFunction& u0, const FluxSpec& flux, double tau);

} // namespace iconcl
