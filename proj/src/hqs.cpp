#include <algorithm>
#include <cmath>

#include "qdpc/solvers.hpp"

namespace qdpc {

namespace {

void check_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw ConfigError(std::string("dsp-hqs: ") + what + " must be finite and > 0");
    }
}

double soft(double x, double t) {
    const double mag = std::abs(x) - t;
    return mag > 0.0 ? std::copysign(mag, x) : 0.0;
}

// K_n phi for every n from the half spectrum of phi.
SparseField apply_stack(SpectralStack& spectra, const ComplexImage& phi_hat) {
    SparseField out(spectra.count());
    ComplexImage tmp(phi_hat.width(), phi_hat.height());
    for (std::size_t n = 0; n < spectra.count(); ++n) {
        const ComplexImage& h = spectra.transfer(n);
        for (std::size_t i = 0; i < tmp.size(); ++i) {
            tmp[i] = h[i] * phi_hat[i];
        }
        spectra.fft().inverse(tmp, out[n]);
    }
    return out;
}

double l1_norm(const HessianField& g) {
    double acc = 0.0;
    for (const RealImage* c : {&g.xx, &g.yy, &g.xy}) {
        for (double v : *c) {
            acc += std::abs(v);
        }
    }
    return acc;
}

// Full objective, the L0 term counted on the jointly thresholded field.
double hqs_objective(const SpectralStack& spectra, const SparseField& kphi, const SparseField& psi,
                     const PhaseImage& phi, double alpha, double beta) {
    double data = 0.0;
    long long nonzero = 0;
    for (std::size_t n = 0; n < kphi.size(); ++n) {
        const RealImage& s = spectra.stack().images[n].values;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double r = kphi[n][i] - s[i];
            data += r * r;
            nonzero += psi[n][i] != 0.0 ? 1 : 0;
        }
    }
    return data + alpha * static_cast<double>(nonzero) + beta * l1_norm(hessian_apply(phi));
}

}  // namespace

void HqsConfig::validate() const {
    check_positive(alpha, "alpha");
    check_positive(beta, "beta");
    check_positive(alpha_max, "alpha_max");
    check_positive(beta_max, "beta_max");
    if (!(alpha_max > alpha) || !(beta_max > beta)) {
        throw ConfigError("dsp-hqs: alpha_max > alpha and beta_max > beta are required");
    }
    if (!(growth > 1.0) || !std::isfinite(growth)) {
        throw ConfigError("dsp-hqs: growth must be > 1");
    }
    if (!std::isfinite(initial_phi)) {
        throw ConfigError("dsp-hqs: initial phi must be finite");
    }
}

SparseField hqs_hard_threshold(const SparseField& fields, double threshold) {
    if (!(threshold >= 0.0)) {
        throw ConfigError("hard threshold must be >= 0");
    }
    SparseField out = fields;
    if (fields.empty()) {
        return out;
    }
    for (const auto& f : fields) {
        require_same_shape(f, fields.front(), "hqs_hard_threshold");
    }
    const std::size_t pixels = fields.front().size();
    for (std::size_t i = 0; i < pixels; ++i) {
        double energy = 0.0;
        for (const auto& f : fields) {
            energy += f[i] * f[i];
        }
        if (!(energy > threshold)) {
            for (auto& f : out) {
                f[i] = 0.0;
            }
        }
    }
    return out;
}

RealImage soft_threshold(const RealImage& x, double threshold) {
    if (!(threshold >= 0.0)) {
        throw ConfigError("soft threshold must be >= 0");
    }
    RealImage out(x.width(), x.height());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = soft(x[i], threshold);
    }
    return out;
}

HessianField soft_threshold(const HessianField& g, double threshold) {
    return {soft_threshold(g.xx, threshold), soft_threshold(g.yy, threshold),
            soft_threshold(g.xy, threshold)};
}

PhaseImage hqs_quadratic_solve(const DpcStack& stack, const SparseField& psi, const HessianField& g,
                               double alpha0, double beta0) {
    SpectralStack spectra(stack);
    return hqs_quadratic_solve(spectra, psi, g, alpha0, beta0);
}

PhaseImage hqs_quadratic_solve(SpectralStack& spectra, const SparseField& psi, const HessianField& g,
                               double alpha0, double beta0) {
    if (!(alpha0 >= 0.0) || !(beta0 >= 0.0)) {
        throw ConfigError("hqs_quadratic_solve: alpha0 and beta0 must be >= 0");
    }
    if (psi.size() != spectra.count()) {
        throw DimensionError("hqs_quadratic_solve: need one psi image per DPC image");
    }
    const RealImage& ref = spectra.stack().images.front().values;
    for (const auto& p : psi) {
        require_same_shape(p, ref, "hqs_quadratic_solve");
    }
    require_same_shape(g.xx, ref, "hqs_quadratic_solve");

    ComplexImage num = spectra.data_rhs();
    ComplexImage tmp;
    for (std::size_t n = 0; n < psi.size(); ++n) {
        spectra.fft().forward(psi[n], tmp);
        const ComplexImage& h = spectra.transfer(n);
        for (std::size_t i = 0; i < num.size(); ++i) {
            num[i] += alpha0 * std::conj(h[i]) * tmp[i];
        }
    }
    spectra.fft().forward(hessian_adjoint(g), tmp);
    const RealImage& dp = spectra.data_power();
    const RealImage& hp = spectra.hessian_power();
    for (std::size_t i = 0; i < num.size(); ++i) {
        const double den = (1.0 + alpha0) * dp[i] + beta0 * hp[i];
        const std::complex<double> top = num[i] + beta0 * tmp[i];
        if (den == 0.0) {
            if (i != 0) {
                throw SingularError("hqs_quadratic_solve: zero denominator away from DC");
            }
            num[i] = 0.0;
        } else {
            num[i] = top / den;
        }
    }
    PhaseImage phi;
    spectra.fft().inverse(num, phi);
    return phi;
}

Reconstruction hqs_reconstruct(const DpcStack& stack, const HqsConfig& cfg) {
    cfg.validate();
    SpectralStack spectra(stack);
    const int w = spectra.width();
    const int h = spectra.height();
    auto& fft = spectra.fft();

    Reconstruction out;
    PhaseImage phi(w, h, cfg.initial_phi);
    ComplexImage phi_hat;
    fft.forward(phi, phi_hat);

    const RealImage& dp = spectra.data_power();
    const RealImage& hp = spectra.hessian_power();
    ComplexImage fixed(phi_hat.width(), phi_hat.height());
    ComplexImage tmp;
    SparseField kphi;
    SparseField psi;
    HessianField g;
    RealImage adjoint(w, h);

    for (double alpha0 = cfg.alpha; alpha0 < cfg.alpha_max; alpha0 *= cfg.growth) {
        kphi = apply_stack(spectra, phi_hat);
        psi = hqs_hard_threshold(kphi, cfg.alpha / alpha0);
        out.cost_trace.push_back(hqs_objective(spectra, kphi, psi, phi, cfg.alpha, cfg.beta));

        // Everything in the phi numerator that does not depend on G.
        fixed = spectra.data_rhs();
        for (std::size_t n = 0; n < psi.size(); ++n) {
            fft.forward(psi[n], tmp);
            const ComplexImage& hn = spectra.transfer(n);
            for (std::size_t i = 0; i < fixed.size(); ++i) {
                fixed[i] += alpha0 * std::conj(hn[i]) * tmp[i];
            }
        }

        for (double beta0 = cfg.beta; beta0 < cfg.beta_max; beta0 *= cfg.growth) {
            const double threshold = cfg.beta / beta0;
            hessian_apply(phi, g);
            for (RealImage* c : {&g.xx, &g.yy, &g.xy}) {
                for (double& v : *c) {
                    v = soft(v, threshold);
                }
            }
            std::fill(adjoint.begin(), adjoint.end(), 0.0);
            hessian_adjoint_add(g, 1.0, adjoint);
            fft.forward(adjoint, tmp);
            for (std::size_t i = 0; i < phi_hat.size(); ++i) {
                const double den = (1.0 + alpha0) * dp[i] + beta0 * hp[i];
                phi_hat[i] = den == 0.0 ? 0.0 : (fixed[i] + beta0 * tmp[i]) / den;
            }
            fft.inverse(phi_hat, phi);
            ++out.iterations;
        }
        ++out.outer_iterations;
    }

    kphi = apply_stack(spectra, phi_hat);
    psi = hqs_hard_threshold(kphi, cfg.alpha / cfg.alpha_max);
    out.cost_trace.push_back(hqs_objective(spectra, kphi, psi, phi, cfg.alpha, cfg.beta));
    out.phase = std::move(phi);
    return out;
}

}  // namespace qdpc
