#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "iconcl/grid.hpp"

namespace iconcl {

/// Periodic Gaussian random field on the unit interval, used for initial
/// conditions. Kernel: sigma^2 * exp(-(1 - cos(2 pi (x-x'))) / ell^2).
struct GrfConfig {
    double sigma = 1.0;
    double ell = 1.0;
    int n = 100;
    double clip = 3.0; // samples with any |value| > clip are redrawn
};

double periodic_kernel(double x, double xp, const GrfConfig& cfg);

// Spectral sampler for the circulant covariance: the kernel's circulant
// matrix is diagonalized in the Fourier basis once, then each sample is a
// product of the scaled real eigenbasis with an i.i.d. normal vector, which
// realizes the covariance exactly.
class GrfSampler {
public:
    explicit GrfSampler(const GrfConfig& cfg);

    // Deterministic given seed. Rejection-resamples until all values lie in
    // [-clip, clip]; throws ConfigError after 1000 consecutive rejections.
    GridFunction sample(std::uint64_t seed) const;

    const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
    const GrfConfig& config() const { return cfg_; }

private:
    GrfConfig cfg_;
    Eigen::VectorXd eigenvalues_; // circulant spectrum, clamped at 0
    Eigen::MatrixXd basis_;       // column k = sqrt(lambda_k) * eigenvector k
};

// One-shot convenience wrapper around GrfSampler.
GridFunction sample_grf(const GrfConfig& cfg, std::uint64_t seed);

} // namespace iconcl
