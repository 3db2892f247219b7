#include "qdpc/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace qdpc {

LsnrResult lsnr(const RealImage& truth, const RealImage& recon) {
    require_same_shape(truth, recon, "lsnr");
    if (truth.empty()) {
        throw ReferenceError("lsnr: empty reference");
    }
    double signal = 0.0;
    double offset = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        signal += truth[i] * truth[i];
        offset += truth[i] - recon[i];
    }
    if (signal == 0.0) {
        throw ReferenceError("lsnr: reference image is identically zero");
    }
    offset /= static_cast<double>(truth.size());
    double residual = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double r = truth[i] - recon[i] - offset;
        residual += r * r;
    }
    LsnrResult out{kLsnrCapDb, offset};
    if (residual > 0.0) {
        out.lsnr_db = std::min(kLsnrCapDb, 10.0 * std::log10(signal / residual));
    }
    return out;
}

long long l0_count(const RealImage& image, double epsilon) {
    if (!(epsilon >= 0.0)) {
        throw ConfigError("l0_count: epsilon must be >= 0");
    }
    return std::count_if(image.begin(), image.end(),
                         [epsilon](double v) { return std::abs(v) > epsilon; });
}

double default_l0_epsilon(const RealImage& image) {
    double peak = 0.0;
    for (double v : image) {
        peak = std::max(peak, std::abs(v));
    }
    return 1e-3 * peak;
}

double SparsityReport::cdf_at(double x) const {
    if (fractions.empty()) {
        return 0.0;
    }
    const auto below = std::count_if(fractions.begin(), fractions.end(),
                                     [x](double f) { return f <= x; });
    return static_cast<double>(below) / static_cast<double>(fractions.size());
}

SparsityReport sparsity_stats(const std::vector<RealImage>& images, std::optional<double> epsilon,
                              int bins) {
    if (images.size() < 2) {
        throw ConfigError("sparsity_stats: at least two images are required");
    }
    if (bins < 1) {
        throw ConfigError("sparsity_stats: bins must be >= 1");
    }
    SparsityReport out;
    out.epsilon = epsilon;
    for (const auto& img : images) {
        const double eps = epsilon ? *epsilon : default_l0_epsilon(img);
        out.counts.push_back(l0_count(img, eps));
        out.fractions.push_back(img.empty() ? 0.0
                                            : static_cast<double>(out.counts.back()) /
                                                  static_cast<double>(img.size()));
    }
    out.bin_edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int b = 0; b <= bins; ++b) {
        out.bin_edges[b] = static_cast<double>(b) / bins;
    }
    out.masses.assign(static_cast<std::size_t>(bins), 0.0);
    for (double f : out.fractions) {
        const int b = std::min(bins - 1, static_cast<int>(f * bins));
        out.masses[b] += 1.0;
    }
    out.cdf.resize(static_cast<std::size_t>(bins));
    double running = 0.0;
    for (int b = 0; b < bins; ++b) {
        running += out.masses[b];
        out.cdf[b] = running / static_cast<double>(images.size());
    }
    return out;
}

}  // namespace qdpc
