#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qdpc/operators.hpp"

namespace qdpc {

struct TikhonovConfig {
    double alpha = 1e-4;
    void validate() const;
};

struct TvConfig {
    double alpha = 0.01;
    /// Starting coupling weight; defaults to alpha.
    std::optional<double> beta0_init;
    double beta_max = 1e5;
    double growth = 2.0;
    /// Fixed-point sweeps per beta0 stop once ||dphi|| / ||phi|| drops below this.
    double inner_tolerance = 1e-3;
    int max_inner = 4;
    void validate() const;
};

struct HqsConfig {
    double alpha = 0.1;
    double beta = 0.05;
    double alpha_max = 1e3;
    double beta_max = 1e5;
    double growth = 2.0;
    double initial_phi = 1.0;
    void validate() const;
};

struct RldConfig {
    double alpha = 0.1;
    double beta = 0.05;
    double c = 10.0;
    double eta = 0.05;
    double rho1 = 0.9;
    double rho2 = 0.999;
    double xi = 1e-8;
    int t_max = 150;
    double abs_epsilon = 1e-8;
    void validate() const;
};

/// N-Adam moments.
struct OptimizerState {
    RealImage m;
    RealImage v;
    int t = 1;

    static OptimizerState zeros(int width, int height);
};

struct Reconstruction {
    PhaseImage phase;
    /// One objective value per outer iteration (per step for RLD).
    std::vector<double> cost_trace;
    /// Quadratic solves (Tikhonov, TV, HQS) or gradient steps (RLD).
    int iterations = 0;
    int outer_iterations = 0;
};

/// Number of passes of `while (x < max) x *= growth` starting at init.
[[nodiscard]] int geometric_trip_count(double init, double max, double growth);

[[nodiscard]] Reconstruction tikhonov_reconstruct(const DpcStack& stack, const TikhonovConfig& cfg);
[[nodiscard]] Reconstruction tikhonov_reconstruct(SpectralStack& spectra, const TikhonovConfig& cfg);

/// Joint group threshold: a pixel survives in all N images iff sum_n |x_n|^2 > threshold.
[[nodiscard]] SparseField hqs_hard_threshold(const SparseField& fields, double threshold);
[[nodiscard]] RealImage soft_threshold(const RealImage& x, double threshold);
[[nodiscard]] HessianField soft_threshold(const HessianField& g, double threshold);

/// Exact minimizer of sum ||K phi - s||^2 + alpha0 sum ||K phi - psi||^2 + beta0 ||H phi - G||^2
/// with the unobservable DC component set to 0.
[[nodiscard]] PhaseImage hqs_quadratic_solve(const DpcStack& stack, const SparseField& psi,
                                             const HessianField& g, double alpha0, double beta0);
[[nodiscard]] PhaseImage hqs_quadratic_solve(SpectralStack& spectra, const SparseField& psi,
                                             const HessianField& g, double alpha0, double beta0);

[[nodiscard]] Reconstruction hqs_reconstruct(const DpcStack& stack, const HqsConfig& cfg);
[[nodiscard]] Reconstruction tv_reconstruct(const DpcStack& stack, const TvConfig& cfg);

/// f(x) = 1 - exp(-c |x|).
[[nodiscard]] double l0_surrogate(double x, double c);
/// c exp(-c|x|) x / |x|_eps with |x|_eps = sqrt(x^2 + eps^2).
[[nodiscard]] double l0_surrogate_grad(double x, double c, double eps);
[[nodiscard]] RealImage l0_surrogate(const RealImage& x, double c);
[[nodiscard]] RealImage l0_surrogate_grad(const RealImage& x, double c, double eps);

struct CostGradient {
    double cost = 0.0;
    RealImage gradient;
};

/// E(phi) = sum ||K phi - s||^2 + alpha sum (1 - exp(-c|K phi|)) + beta ||H phi||_1 and its
/// gradient, with |.| smoothed by cfg.abs_epsilon everywhere.
[[nodiscard]] CostGradient rld_cost_and_gradient(const PhaseImage& phi, const DpcStack& stack,
                                                 const RldConfig& cfg);
[[nodiscard]] CostGradient rld_cost_and_gradient(const PhaseImage& phi, SpectralStack& spectra,
                                                 const RldConfig& cfg);

/// One N-Adam update of phi in place; advances state.t.
void nadam_step(OptimizerState& state, const RealImage& grad, PhaseImage& phi, const RldConfig& cfg);

[[nodiscard]] Reconstruction rld_reconstruct(const DpcStack& stack, const RldConfig& cfg);

}  // namespace qdpc
