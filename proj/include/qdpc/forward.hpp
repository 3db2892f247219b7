#pragma once

#include <cstdint>
#include <string>

#include "qdpc/array2d.hpp"
#include "qdpc/optics.hpp"

namespace qdpc {

/// Sample phase in radians.
using PhaseImage = RealImage;

struct DpcImage {
    RealImage values;
    std::string axis;
};

struct RawImagePair {
    RealImage i_pos;
    RealImage i_neg;
    std::string axis;
    /// Pixels clamped to zero because the linearized intensity went negative.
    long long clamped_pixels = 0;
};

enum class PhantomKind { SiemensStar, BinaryBlobs, BarTarget, SmoothBumps, TextMask };

[[nodiscard]] PhantomKind parse_phantom_kind(const std::string& name);
[[nodiscard]] std::string to_string(PhantomKind kind);

struct PhantomSpec {
    PhantomKind kind = PhantomKind::BinaryBlobs;
    int width = 256;
    int height = 256;
    double lo = 0.0;
    double hi = 1.0;
    std::uint64_t seed = 0;
    /// Periodic Gaussian blur sigma in pixels applied before scaling; 0 keeps hard edges.
    double smoothing_px = 0.0;
};

enum class NoiseMode { RangeFraction, SnrDb };

[[nodiscard]] NoiseMode parse_noise_mode(const std::string& name);
[[nodiscard]] std::string to_string(NoiseMode mode);

struct NoiseSpec {
    NoiseMode mode = NoiseMode::SnrDb;
    /// Fraction of (max - min) in RangeFraction mode; SNR in dB in SnrDb mode
    /// (+infinity means noise-free).
    double level = 0.0;
    std::uint64_t seed = 0;

    /// Gaussian standard deviation this spec assigns to `image`.
    [[nodiscard]] double sigma_for(const RealImage& image) const;
};

/// Deterministic in (spec); values confined to [lo, hi].
[[nodiscard]] PhaseImage generate_phantom(const PhantomSpec& spec);

/// s = Re IDFT[H . DFT[phase]].
[[nodiscard]] DpcImage simulate_dpc(const PhaseImage& phase, const TransferFunction& ptf);

/// Linearized single-sided intensities I = 1 + Re IDFT[H_side . DFT[phase]], clamped at 0.
[[nodiscard]] RawImagePair simulate_raw_pair(const PhaseImage& phase,
                                             const TransferFunction& single_pos,
                                             const TransferFunction& single_neg);

/// (I_pos - I_neg) / (I_pos + I_neg).
[[nodiscard]] DpcImage compose_dpc(const RawImagePair& pair);

/// Adds i.i.d. Gaussian noise with sigma = spec.sigma_for(image).
[[nodiscard]] RealImage add_noise(const RealImage& image, const NoiseSpec& spec);

/// Noise on each side of a raw pair, seeds spec.seed and spec.seed + 1.
[[nodiscard]] RawImagePair add_noise(const RawImagePair& pair, const NoiseSpec& spec);

}  // namespace qdpc
