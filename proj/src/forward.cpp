#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "qdpc/fft.hpp"
#include "qdpc/forward.hpp"

namespace qdpc {

namespace {

constexpr double kResidueTolerance = 1e-10;

// Re IDFT[H . DFT[phase]], checking that the discarded imaginary part is round-off.
RealImage apply_transfer(const PhaseImage& phase, const ComplexImage& transfer, const char* what) {
    require_same_shape(phase, transfer, what);
    fft::ComplexFft2d plan(phase.width(), phase.height());
    ComplexImage buf(phase.width(), phase.height());
    std::copy(phase.begin(), phase.end(), buf.begin());
    ComplexImage spec;
    plan.forward(buf, spec);
    for (std::size_t i = 0; i < spec.size(); ++i) {
        spec[i] *= transfer[i];
    }
    plan.inverse(spec, buf);
    RealImage out(phase.width(), phase.height());
    double max_re = 0.0;
    double max_im = 0.0;
    for (std::size_t i = 0; i < buf.size(); ++i) {
        out[i] = buf[i].real();
        max_re = std::max(max_re, std::abs(buf[i].real()));
        max_im = std::max(max_im, std::abs(buf[i].imag()));
    }
    double in_scale = 0.0;
    for (double v : phase) {
        in_scale = std::max(in_scale, std::abs(v));
    }
    double h_scale = 0.0;
    for (const auto& v : transfer) {
        h_scale = std::max(h_scale, std::abs(v));
    }
    if (max_im > kResidueTolerance * std::max(max_re, in_scale * h_scale)) {
        std::ostringstream msg;
        msg << what << ": imaginary residue " << max_im << " is not round-off relative to " << max_re;
        throw SymmetryError(msg.str());
    }
    return out;
}

void check_finite(const RealImage& image, const char* what) {
    for (double v : image) {
        if (!std::isfinite(v)) {
            throw ConfigError(std::string(what) + ": image contains non-finite values");
        }
    }
}

}  // namespace

NoiseMode parse_noise_mode(const std::string& name) {
    if (name == "range-fraction") return NoiseMode::RangeFraction;
    if (name == "snr-db") return NoiseMode::SnrDb;
    throw ConfigError("unknown noise mode '" + name + "'");
}

std::string to_string(NoiseMode mode) {
    return mode == NoiseMode::RangeFraction ? "range-fraction" : "snr-db";
}

double NoiseSpec::sigma_for(const RealImage& image) const {
    if (image.empty()) {
        return 0.0;
    }
    if (mode == NoiseMode::RangeFraction) {
        if (!(level >= 0.0) || !std::isfinite(level)) {
            throw ConfigError("range-fraction noise level must be a finite value >= 0");
        }
        const auto [lo, hi] = std::minmax_element(image.begin(), image.end());
        return level * (*hi - *lo);
    }
    if (std::isnan(level) || level == -std::numeric_limits<double>::infinity()) {
        throw ConfigError("snr-db noise level must be finite or +inf");
    }
    if (level == std::numeric_limits<double>::infinity()) {
        return 0.0;
    }
    const auto [lo, hi] = std::minmax_element(image.begin(), image.end());
    if (*lo == *hi) {
        // Rounding in the mean would otherwise leave a tiny nonzero rms.
        return 0.0;
    }
    double mean = 0.0;
    for (double v : image) {
        mean += v;
    }
    mean /= static_cast<double>(image.size());
    double ss = 0.0;
    for (double v : image) {
        ss += (v - mean) * (v - mean);
    }
    const double rms = std::sqrt(ss / static_cast<double>(image.size()));
    return rms / std::pow(10.0, level / 20.0);
}

DpcImage simulate_dpc(const PhaseImage& phase, const TransferFunction& ptf) {
    check_finite(phase, "simulate_dpc");
    return {apply_transfer(phase, ptf.values, "simulate_dpc"), ptf.axis};
}

RawImagePair simulate_raw_pair(const PhaseImage& phase, const TransferFunction& single_pos,
                               const TransferFunction& single_neg) {
    check_finite(phase, "simulate_raw_pair");
    RawImagePair pair{apply_transfer(phase, single_pos.values, "simulate_raw_pair"),
                      apply_transfer(phase, single_neg.values, "simulate_raw_pair"),
                      single_pos.axis + "/" + single_neg.axis, 0};
    for (RealImage* side : {&pair.i_pos, &pair.i_neg}) {
        for (double& v : *side) {
            v += 1.0;
            if (v < 0.0) {
                v = 0.0;
                ++pair.clamped_pixels;
            }
        }
    }
    return pair;
}

DpcImage compose_dpc(const RawImagePair& pair) {
    require_same_shape(pair.i_pos, pair.i_neg, "compose_dpc");
    long long bad = 0;
    for (std::size_t i = 0; i < pair.i_pos.size(); ++i) {
        if (!(pair.i_pos[i] + pair.i_neg[i] > 0.0)) {
            ++bad;
        }
    }
    if (bad > 0) {
        throw DivisionError("compose_dpc: I_pos + I_neg is not positive", bad);
    }
    DpcImage out{RealImage(pair.i_pos.width(), pair.i_pos.height()), pair.axis};
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const double a = pair.i_pos[i];
        const double b = pair.i_neg[i];
        out.values[i] = (a - b) / (a + b);
    }
    return out;
}

RealImage add_noise(const RealImage& image, const NoiseSpec& spec) {
    check_finite(image, "add_noise");
    const double sigma = spec.sigma_for(image);
    if (sigma == 0.0) {
        return image;
    }
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, sigma);
    RealImage out = image;
    for (double& v : out) {
        v += gauss(rng);
    }
    return out;
}

RawImagePair add_noise(const RawImagePair& pair, const NoiseSpec& spec) {
    NoiseSpec second = spec;
    second.seed = spec.seed + 1;
    RawImagePair out = pair;
    out.i_pos = add_noise(pair.i_pos, spec);
    out.i_neg = add_noise(pair.i_neg, second);
    return out;
}

}  // namespace qdpc
