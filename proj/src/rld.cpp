#include <cmath>

#include "qdpc/solvers.hpp"

namespace qdpc {

void RldConfig::validate() const {
    auto finite_nonneg = [](double v) { return v >= 0.0 && std::isfinite(v); };
    auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!finite_nonneg(alpha) || !finite_nonneg(beta)) {
        throw ConfigError("dsp-rld: alpha and beta must be finite and >= 0");
    }
    if (!positive(c) || !positive(eta) || !positive(xi) || !positive(abs_epsilon)) {
        throw ConfigError("dsp-rld: c, eta, xi and abs_epsilon must be > 0");
    }
    if (!(rho1 > 0.0 && rho1 < 1.0) || !(rho2 > 0.0 && rho2 < 1.0)) {
        throw ConfigError("dsp-rld: rho1 and rho2 must lie in (0, 1)");
    }
    if (t_max < 1) {
        throw ConfigError("dsp-rld: t_max must be >= 1");
    }
}

OptimizerState OptimizerState::zeros(int width, int height) {
    return {RealImage(width, height), RealImage(width, height), 1};
}

double l0_surrogate(double x, double c) { return 1.0 - std::exp(-c * std::abs(x)); }

double l0_surrogate_grad(double x, double c, double eps) {
    const double a = std::sqrt(x * x + eps * eps);
    return c * std::exp(-c * a) * x / a;
}

RealImage l0_surrogate(const RealImage& x, double c) {
    RealImage out(x.width(), x.height());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = l0_surrogate(x[i], c);
    }
    return out;
}

RealImage l0_surrogate_grad(const RealImage& x, double c, double eps) {
    RealImage out(x.width(), x.height());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = l0_surrogate_grad(x[i], c, eps);
    }
    return out;
}

namespace {

// Buffers for repeated cost/gradient evaluations on one stack.
class RldEvaluator {
public:
    RldEvaluator(SpectralStack& spectra, const RldConfig& cfg) : spectra_(spectra), cfg_(cfg) {}

    double evaluate(const PhaseImage& phi, RealImage& gradient) {
        const DpcStack& stack = spectra_.stack();
        require_same_shape(phi, stack.images.front().values, "rld_cost_and_gradient");
        auto& fft = spectra_.fft();
        const double eps2 = cfg_.abs_epsilon * cfg_.abs_epsilon;

        fft.forward(phi, phi_hat_);

        // Data term 2 sum K^T (K phi - s), diagonal in Fourier.
        const RealImage& dp = spectra_.data_power();
        const ComplexImage& rhs = spectra_.data_rhs();
        if (!grad_hat_.same_shape(phi_hat_)) {
            grad_hat_ = ComplexImage(phi_hat_.width(), phi_hat_.height());
            tmp_ = ComplexImage(phi_hat_.width(), phi_hat_.height());
        }
        for (std::size_t i = 0; i < grad_hat_.size(); ++i) {
            grad_hat_[i] = 2.0 * (dp[i] * phi_hat_[i] - rhs[i]);
        }

        double cost = 0.0;
        if (cfg_.alpha == 0.0) {
            for (std::size_t n = 0; n < spectra_.count(); ++n) {
                const ComplexImage& h = spectra_.transfer(n);
                const ComplexImage& s = spectra_.data(n);
                for (std::size_t i = 0; i < tmp_.size(); ++i) {
                    tmp_[i] = h[i] * phi_hat_[i] - s[i];
                }
                cost += spectra_.energy(tmp_);
            }
        } else {
            if (!q_.same_shape(phi)) {
                q_ = RealImage(phi.width(), phi.height());
            }
            const double ac = cfg_.alpha * cfg_.c;
            for (std::size_t n = 0; n < spectra_.count(); ++n) {
                const ComplexImage& h = spectra_.transfer(n);
                for (std::size_t i = 0; i < tmp_.size(); ++i) {
                    tmp_[i] = h[i] * phi_hat_[i];
                }
                fft.inverse(tmp_, kphi_);
                const RealImage& s = stack.images[n].values;
                double data = 0.0;
                double sparse = 0.0;
                for (std::size_t i = 0; i < kphi_.size(); ++i) {
                    const double k = kphi_[i];
                    const double r = k - s[i];
                    const double a = std::sqrt(k * k + eps2);
                    const double e = std::exp(-cfg_.c * a);
                    data += r * r;
                    sparse += 1.0 - e;
                    q_[i] = ac * e * k / a;
                }
                cost += data + cfg_.alpha * sparse;
                fft.forward(q_, tmp_);
                for (std::size_t i = 0; i < tmp_.size(); ++i) {
                    grad_hat_[i] += std::conj(h[i]) * tmp_[i];
                }
            }
        }
        fft.inverse(grad_hat_, gradient);

        if (cfg_.beta != 0.0) {
            hessian_apply(phi, hphi_);
            double l1 = 0.0;
            for (RealImage* comp : {&hphi_.xx, &hphi_.yy, &hphi_.xy}) {
                for (double& v : *comp) {
                    const double a = std::sqrt(v * v + eps2);
                    l1 += a;
                    v /= a;
                }
            }
            cost += cfg_.beta * l1;
            hessian_adjoint_add(hphi_, cfg_.beta, gradient);
        }
        return cost;
    }

private:
    SpectralStack& spectra_;
    const RldConfig& cfg_;
    ComplexImage phi_hat_;
    ComplexImage grad_hat_;
    ComplexImage tmp_;
    RealImage kphi_;
    RealImage q_;
    HessianField hphi_;
};

}  // namespace

CostGradient rld_cost_and_gradient(const PhaseImage& phi, const DpcStack& stack,
                                   const RldConfig& cfg) {
    SpectralStack spectra(stack);
    return rld_cost_and_gradient(phi, spectra, cfg);
}

CostGradient rld_cost_and_gradient(const PhaseImage& phi, SpectralStack& spectra,
                                   const RldConfig& cfg) {
    RldEvaluator eval(spectra, cfg);
    CostGradient out;
    out.cost = eval.evaluate(phi, out.gradient);
    return out;
}

void nadam_step(OptimizerState& state, const RealImage& grad, PhaseImage& phi, const RldConfig& cfg) {
    require_same_shape(grad, phi, "nadam_step");
    if (state.m.empty() && state.v.empty()) {
        state = OptimizerState::zeros(phi.width(), phi.height());
    }
    require_same_shape(state.m, phi, "nadam_step");
    require_same_shape(state.v, phi, "nadam_step");
    if (state.t < 1) {
        throw ConfigError("nadam_step: iteration counter must start at 1");
    }
    const double bias1 = 1.0 - std::pow(cfg.rho1, state.t);
    const double bias2 = 1.0 - std::pow(cfg.rho2, state.t);
    for (std::size_t i = 0; i < phi.size(); ++i) {
        const double g = grad[i];
        state.m[i] = cfg.rho1 * state.m[i] + (1.0 - cfg.rho1) * g;
        state.v[i] = cfg.rho2 * state.v[i] + (1.0 - cfg.rho2) * g * g;
        const double m_hat = state.m[i] / bias1;
        const double v_hat = state.v[i] / bias2;
        phi[i] -= cfg.eta * (cfg.rho1 * m_hat + (1.0 - cfg.rho1) * g) / std::sqrt(v_hat + cfg.xi);
    }
    ++state.t;
}

Reconstruction rld_reconstruct(const DpcStack& stack, const RldConfig& cfg) {
    cfg.validate();
    SpectralStack spectra(stack);
    Reconstruction out;
    PhaseImage phi = tikhonov_reconstruct(spectra, TikhonovConfig{1.0}).phase;
    OptimizerState state = OptimizerState::zeros(phi.width(), phi.height());
    out.cost_trace.reserve(static_cast<std::size_t>(cfg.t_max));
    RldEvaluator eval(spectra, cfg);
    RealImage gradient;
    for (int t = 1; t <= cfg.t_max; ++t) {
        const double cost = eval.evaluate(phi, gradient);
        if (!std::isfinite(cost)) {
            throw DivergenceError("dsp-rld: cost became non-finite", t);
        }
        out.cost_trace.push_back(cost);
        nadam_step(state, gradient, phi, cfg);
        ++out.iterations;
    }
    out.outer_iterations = out.iterations;

    double mean = 0.0;
    for (double v : phi) {
        mean += v;
    }
    mean /= static_cast<double>(phi.size());
    for (double& v : phi) {
        v -= mean;
    }
    out.phase = std::move(phi);
    return out;
}

}  // namespace qdpc
