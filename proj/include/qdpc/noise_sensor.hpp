#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qdpc/operators.hpp"

namespace qdpc {

struct NoiseEstimate {
    double a = 0.0;
    /// One term per DPC image; a is their mean.
    std::vector<double> per_image;
};

struct PenaltyParams {
    double alpha = 0.0;
    double beta = 0.0;
    /// Set when regularization had to be disabled.
    std::optional<std::string> warning;
};

/// (1/20) sqrt(pi/2) mean over images and pixels of |s (*) L| with the 3x3 kernel
/// [-1 2 -1; -2 4 -2; -1 2 -1]. Borders replicate the nearest pixel.
[[nodiscard]] NoiseEstimate estimate_noise(const DpcStack& stack);
[[nodiscard]] double estimate_noise(const RealImage& image);

/// alpha = A, beta = A / 2 unless beta_override is given.
[[nodiscard]] PenaltyParams auto_params(const NoiseEstimate& estimate,
                                        std::optional<double> beta_override = std::nullopt);

}  // namespace qdpc
