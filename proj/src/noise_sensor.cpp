#include "qdpc/noise_sensor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qdpc {

namespace {

constexpr double kKernel[3][3] = {{-1.0, 2.0, -1.0}, {-2.0, 4.0, -2.0}, {-1.0, 2.0, -1.0}};

}  // namespace

double estimate_noise(const RealImage& image) {
    const int w = image.width();
    const int h = image.height();
    if (w == 0 || h == 0) {
        throw DimensionError("estimate_noise: empty image");
    }
    double acc = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double v = 0.0;
            for (int j = -1; j <= 1; ++j) {
                const int yy = std::clamp(y + j, 0, h - 1);
                for (int i = -1; i <= 1; ++i) {
                    const int xx = std::clamp(x + i, 0, w - 1);
                    v += kKernel[j + 1][i + 1] * image(xx, yy);
                }
            }
            acc += std::abs(v);
        }
    }
    const double scale = std::sqrt(0.5 * std::numbers::pi) / 20.0;
    return scale * acc / (static_cast<double>(w) * h);
}

NoiseEstimate estimate_noise(const DpcStack& stack) {
    if (stack.images.empty()) {
        throw ConfigError("estimate_noise: stack is empty");
    }
    NoiseEstimate out;
    for (const auto& img : stack.images) {
        require_same_shape(img.values, stack.images.front().values, "estimate_noise");
        out.per_image.push_back(estimate_noise(img.values));
        out.a += out.per_image.back();
    }
    out.a /= static_cast<double>(out.per_image.size());
    return out;
}

PenaltyParams auto_params(const NoiseEstimate& estimate, std::optional<double> beta_override) {
    if (!(estimate.a >= 0.0) || !std::isfinite(estimate.a)) {
        throw ConfigError("auto_params: noise estimate must be finite and >= 0");
    }
    if (beta_override && (!(*beta_override >= 0.0) || !std::isfinite(*beta_override))) {
        throw ConfigError("auto_params: beta override must be finite and >= 0");
    }
    PenaltyParams out;
    if (estimate.a == 0.0) {
        out.warning = "noise estimate is 0; regularization disabled (alpha = beta = 0)";
        return out;
    }
    out.alpha = estimate.a;
    out.beta = beta_override.value_or(estimate.a / 2.0);
    return out;
}

}  // namespace qdpc
