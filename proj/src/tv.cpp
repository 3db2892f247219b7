#include <cmath>

#include "qdpc/solvers.hpp"

namespace qdpc {

void TvConfig::validate() const {
    auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!positive(alpha)) {
        throw ConfigError("tv: alpha must be finite and > 0");
    }
    if (beta0_init && !positive(*beta0_init)) {
        throw ConfigError("tv: beta0_init must be finite and > 0");
    }
    if (!positive(beta_max) || !(beta_max > beta0_init.value_or(alpha))) {
        throw ConfigError("tv: beta_max must exceed the initial beta0");
    }
    if (!(growth > 1.0) || !std::isfinite(growth)) {
        throw ConfigError("tv: growth must be > 1");
    }
    if (!positive(inner_tolerance) || max_inner < 1) {
        throw ConfigError("tv: inner_tolerance > 0 and max_inner >= 1 are required");
    }
}

Reconstruction tv_reconstruct(const DpcStack& stack, const TvConfig& cfg) {
    cfg.validate();
    SpectralStack spectra(stack);
    auto& fft = spectra.fft();
    const RealImage& dp = spectra.data_power();
    const RealImage& gp = spectra.gradient_power();
    const ComplexImage& rhs = spectra.data_rhs();

    Reconstruction out;
    PhaseImage phi(spectra.width(), spectra.height());
    PhaseImage next;
    ComplexImage phi_hat(rhs.width(), rhs.height());
    ComplexImage tmp;

    for (double beta0 = cfg.beta0_init.value_or(cfg.alpha); beta0 < cfg.beta_max;
         beta0 *= cfg.growth) {
        const double threshold = cfg.alpha / beta0;
        for (int k = 0; k < cfg.max_inner; ++k) {
            const GradientField grad = gradient_apply(phi);
            const GradientField d{soft_threshold(grad.dx, threshold),
                                  soft_threshold(grad.dy, threshold)};
            fft.forward(gradient_adjoint(d), tmp);
            for (std::size_t i = 0; i < phi_hat.size(); ++i) {
                const double den = dp[i] + beta0 * gp[i];
                phi_hat[i] = den == 0.0 ? 0.0 : (rhs[i] + beta0 * tmp[i]) / den;
            }
            fft.inverse(phi_hat, next);
            ++out.iterations;

            double diff = 0.0;
            double norm = 0.0;
            for (std::size_t i = 0; i < next.size(); ++i) {
                diff += (next[i] - phi[i]) * (next[i] - phi[i]);
                norm += next[i] * next[i];
            }
            std::swap(phi, next);
            if (diff <= cfg.inner_tolerance * cfg.inner_tolerance * norm) {
                break;
            }
        }
        ++out.outer_iterations;

        // Objective via Parseval for the data term, spatially for TV.
        double cost = 0.0;
        for (std::size_t n = 0; n < spectra.count(); ++n) {
            const ComplexImage& h = spectra.transfer(n);
            const ComplexImage& s = spectra.data(n);
            for (std::size_t i = 0; i < tmp.size(); ++i) {
                tmp[i] = h[i] * phi_hat[i] - s[i];
            }
            cost += spectra.energy(tmp);
        }
        const GradientField grad = gradient_apply(phi);
        double tv = 0.0;
        for (std::size_t i = 0; i < phi.size(); ++i) {
            tv += std::abs(grad.dx[i]) + std::abs(grad.dy[i]);
        }
        out.cost_trace.push_back(cost + cfg.alpha * tv);
    }
    out.phase = std::move(phi);
    return out;
}

}  // namespace qdpc
