#include "iconcl/grf.hpp"

#include <cmath>
#include <string>

#include "iconcl/errors.hpp"
#include "iconcl/rng.hpp"

namespace iconcl {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kEigenvalueTolerance = 1e-10;
constexpr int kMaxRejections = 1000;
} // namespace

double periodic_kernel(double x, double xp, const GrfConfig& cfg) {
    const double d = x - xp;
    return cfg.sigma * cfg.sigma *
           std::exp(-(1.0 - std::cos(kTwoPi * d)) / (cfg.ell * cfg.ell));
}

GrfSampler::GrfSampler(const GrfConfig& cfg) : cfg_(cfg) {
    if (cfg.sigma <= 0.0 || cfg.ell <= 0.0 || cfg.n <= 0 || !(cfg.clip > 0.0))
        throw ConfigError("GrfConfig: sigma, ell, n, clip must be positive");

    const int n = cfg.n;
    const double dx = 1.0 / n;

    // First row of the covariance circulant and its spectrum (the DFT of a
    // symmetric real row is real).
    Eigen::VectorXd row(n);
    for (int m = 0; m < n; ++m) row[m] = periodic_kernel(0.0, m * dx, cfg);

    eigenvalues_.resize(n);
    for (int q = 0; q < n; ++q) {
        double lambda = 0.0;
        for (int m = 0; m < n; ++m) lambda += row[m] * std::cos(kTwoPi * q * m / n);
        if (lambda < -kEigenvalueTolerance)
            throw NumericError("GRF covariance not positive semidefinite: eigenvalue " +
                               std::to_string(lambda) + " at mode " + std::to_string(q));
        eigenvalues_[q] = std::max(lambda, 0.0);
    }

    // Real orthonormal eigenbasis of the symmetric circulant: constant mode,
    // cos/sin pairs for 0 < q < n/2, alternating mode at q = n/2 for even n.
    // Columns are pre-scaled by sqrt(lambda) so that sample = basis * xi.
    basis_.resize(n, n);
    int col = 0;
    basis_.col(col++) = Eigen::VectorXd::Constant(n, std::sqrt(eigenvalues_[0] / n));
    for (int q = 1; 2 * q < n; ++q) {
        const double s = std::sqrt(eigenvalues_[q] * 2.0 / n);
        for (int j = 0; j < n; ++j) {
            basis_(j, col) = s * std::cos(kTwoPi * q * j / n);
            basis_(j, col + 1) = s * std::sin(kTwoPi * q * j / n);
        }
        col += 2;
    }
    if (n % 2 == 0) {
        const double s = std::sqrt(eigenvalues_[n / 2] / n);
        for (int j = 0; j < n; ++j) basis_(j, col) = (j % 2 == 0 ? s : -s);
        ++col;
    }
}

GridFunction GrfSampler::sample(std::uint64_t seed) const {
    const int n = cfg_.n;
    Rng rng(derive_seed(seed, 0x67726600)); // "grf"-tagged stream
    Eigen::VectorXd xi(n);
    for (int attempt = 0; attempt <= kMaxRejections; ++attempt) {
        for (int j = 0; j < n; ++j) xi[j] = rng.normal();
        Eigen::VectorXd x = basis_ * xi;
        if (x.lpNorm<Eigen::Infinity>() <= cfg_.clip) {
            std::vector<double> v(x.data(), x.data() + n);
            return make_grid_function(std::move(v), 1.0 / n);
        }
    }
    throw ConfigError("GRF sampling: rejection bound " + std::to_string(cfg_.clip) +
                      " too tight for sigma " + std::to_string(cfg_.sigma));
}

GridFunction sample_grf(const GrfConfig& cfg, std::uint64_t seed) {
    return GrfSampler(cfg).sample(seed);
}

} // namespace iconcl
