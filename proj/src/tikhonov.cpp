#include <cmath>

#include "qdpc/solvers.hpp"

namespace qdpc {

void TikhonovConfig::validate() const {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        throw ConfigError("tikhonov: alpha must be a finite value >= 0");
    }
}

int geometric_trip_count(double init, double max, double growth) {
    if (!(init > 0.0) || !(growth > 1.0)) {
        throw ConfigError("geometric schedule needs init > 0 and growth > 1");
    }
    int trips = 0;
    for (double x = init; x < max; x *= growth) {
        ++trips;
    }
    return trips;
}

Reconstruction tikhonov_reconstruct(const DpcStack& stack, const TikhonovConfig& cfg) {
    SpectralStack spectra(stack);
    return tikhonov_reconstruct(spectra, cfg);
}

Reconstruction tikhonov_reconstruct(SpectralStack& spectra, const TikhonovConfig& cfg) {
    cfg.validate();
    const RealImage& power = spectra.data_power();
    const ComplexImage& rhs = spectra.data_rhs();
    ComplexImage spec(rhs.width(), rhs.height());
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const double den = power[i] + cfg.alpha;
        if (den == 0.0) {
            throw SingularError("tikhonov: zero denominator in the spectral division (alpha = 0 "
                                "and the transfer functions vanish at some frequency)");
        }
        spec[i] = rhs[i] / den;
    }
    Reconstruction out;
    spectra.fft().inverse(spec, out.phase);
    out.iterations = 1;
    out.outer_iterations = 1;

    double residual = 0.0;
    for (std::size_t n = 0; n < spectra.count(); ++n) {
        const ComplexImage& h = spectra.transfer(n);
        const ComplexImage& s = spectra.data(n);
        ComplexImage r(h.width(), h.height());
        for (std::size_t i = 0; i < r.size(); ++i) {
            r[i] = h[i] * spec[i] - s[i];
        }
        residual += spectra.energy(r);
    }
    out.cost_trace.push_back(residual + cfg.alpha * spectra.energy(spec));
    return out;
}

}  // namespace qdpc
