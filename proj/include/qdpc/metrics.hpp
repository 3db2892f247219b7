#pragma once

#include <optional>
#include <vector>

#include "qdpc/array2d.hpp"

namespace qdpc {

inline constexpr double kLsnrCapDb = 300.0;

struct LsnrResult {
    double lsnr_db = 0.0;
    /// mean(truth - recon), the additive constant removed before scoring.
    double offset = 0.0;
};

/// 10 log10(||t||^2 / ||t - r - b||^2) with the optimal b, capped at kLsnrCapDb.
[[nodiscard]] LsnrResult lsnr(const RealImage& truth, const RealImage& recon);

/// Number of pixels with |value| > epsilon.
[[nodiscard]] long long l0_count(const RealImage& image, double epsilon);

/// epsilon = 1e-3 * max |image|.
[[nodiscard]] double default_l0_epsilon(const RealImage& image);

struct SparsityReport {
    /// Fixed threshold, or empty when each image used default_l0_epsilon.
    std::optional<double> epsilon;
    std::vector<long long> counts;
    /// counts / pixel count.
    std::vector<double> fractions;
    /// bins + 1 edges over [0, 1].
    std::vector<double> bin_edges;
    /// Images per bin; sums to the image count.
    std::vector<double> masses;
    /// Empirical CDF of the fractions at each right bin edge; ends at 1.
    std::vector<double> cdf;

    /// Fraction of images whose nonzero fraction is <= x.
    [[nodiscard]] double cdf_at(double x) const;
};

[[nodiscard]] SparsityReport sparsity_stats(const std::vector<RealImage>& images,
                                            std::optional<double> epsilon, int bins);

}  // namespace qdpc
