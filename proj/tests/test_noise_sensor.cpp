#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "qdpc/noise_sensor.hpp"

using namespace qdpc;

namespace {

const double kScale = std::sqrt(std::numbers::pi / 2.0) / 20.0;

RealImage gaussian(int w, int h, double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, sigma);
    RealImage img(w, h);
    for (double& v : img) v = g(rng);
    return img;
}

// The printed 3x3 kernel applied at (x, y), edge pixels repeated.
double kernel_at(const RealImage& img, int x, int y) {
    static const double k[3][3] = {{-1, 2, -1}, {-2, 4, -2}, {-1, 2, -1}};
    double v = 0.0;
    for (int j = 0; j < 3; ++j) {
        for (int i = 0; i < 3; ++i) {
            const int xx = std::min(std::max(x + i - 1, 0), img.width() - 1);
            const int yy = std::min(std::max(y + j - 1, 0), img.height() - 1);
            v += k[j][i] * img(xx, yy);
        }
    }
    return v;
}

DpcStack stack_of(std::vector<RealImage> imgs) {
    DpcStack st;
    for (auto& i : imgs) st.images.push_back({std::move(i), "x"});
    return st;
}

}  // namespace

TEST_CASE("sensor matches a direct evaluation of the estimator") {
    const RealImage img = gaussian(37, 23, 0.8, 5);
    double acc = 0.0;
    for (int y = 0; y < 23; ++y) {
        for (int x = 0; x < 37; ++x) acc += std::abs(kernel_at(img, x, y));
    }
    CHECK(estimate_noise(img) == doctest::Approx(kScale * acc / (37.0 * 23.0)).epsilon(1e-12));
}

TEST_CASE("sensor is blind to constants and ramps") {
    CHECK(estimate_noise(RealImage(64, 64, 0.7)) == 0.0);
    CHECK(estimate_noise(stack_of({RealImage(32, 32, 1.0), RealImage(32, 32, -2.0)})).a == 0.0);

    const int w = 40;
    const int h = 30;
    RealImage ramp(w, h);
    const double slope = 0.01;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) ramp(x, y) = 0.3 + slope * x - 0.02 * y;
    }
    for (int y = 1; y < h - 1; ++y) {
        for (int x = 1; x < w - 1; ++x) CHECK(std::abs(kernel_at(ramp, x, y)) <= 1e-14);
    }
    // Only the two repeated edge columns respond, each with 4 * slope.
    CHECK(estimate_noise(ramp) == doctest::Approx(kScale * 2.0 * h * 4.0 * slope / (w * h)).epsilon(1e-10));
}

TEST_CASE("sensor reads 0.3 sigma on white Gaussian noise") {
    for (double sigma : {0.05, 1.0}) {
        for (std::uint64_t seed : {1u, 2u}) {
            const double a = estimate_noise(gaussian(512, 512, sigma, seed));
            CHECK(a == doctest::Approx(0.3 * sigma).epsilon(0.03));
        }
    }
}

TEST_CASE("sensor is scale equivariant and monotone in noise") {
    const RealImage img = gaussian(64, 64, 1.0, 9);
    RealImage twice = img;
    RealImage third = img;
    for (double& v : twice) v *= 2.0;
    for (double& v : third) v *= 3.0;
    CHECK(estimate_noise(twice) == 2.0 * estimate_noise(img));
    CHECK(estimate_noise(third) == doctest::Approx(3.0 * estimate_noise(img)).epsilon(1e-14));

    // Clean smooth image, then sigma in {0, 0.05, 0.1, 0.2} x range.
    RealImage clean(128, 128);
    for (int y = 0; y < 128; ++y) {
        for (int x = 0; x < 128; ++x) clean(x, y) = std::sin(0.05 * x) * std::cos(0.07 * y);
    }
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        double prev = -1.0;
        for (double frac : {0.0, 0.05, 0.1, 0.2}) {
            const RealImage n = gaussian(128, 128, frac * 2.0, seed);
            RealImage noisy = clean;
            for (std::size_t i = 0; i < noisy.size(); ++i) noisy[i] += n[i];
            const double a = estimate_noise(noisy);
            CHECK(a >= prev);
            prev = a;
        }
    }
}

TEST_CASE("stack estimate averages per-image terms") {
    const NoiseEstimate e = estimate_noise(stack_of({gaussian(32, 32, 1, 1), gaussian(32, 32, 2, 2)}));
    REQUIRE(e.per_image.size() == 2);
    CHECK(e.a == doctest::Approx((e.per_image[0] + e.per_image[1]) / 2.0));
    CHECK_THROWS_AS(estimate_noise(DpcStack{}), ConfigError);
    CHECK_THROWS_AS(estimate_noise(stack_of({RealImage(8, 8), RealImage(9, 8)})), DimensionError);
}

TEST_CASE("penalty parameters from the noise level") {
    const PenaltyParams p = auto_params({0.123, {0.123}});
    CHECK(p.alpha == 0.123);
    CHECK(p.beta == doctest::Approx(0.0615).epsilon(1e-15));
    CHECK_FALSE(p.warning);

    const PenaltyParams z = auto_params({0.0, {0.0}});
    CHECK(z.alpha == 0.0);
    CHECK(z.beta == 0.0);
    CHECK(z.warning);

    const PenaltyParams o = auto_params({0.1, {0.1}}, 0.2);
    CHECK(o.alpha == 0.1);
    CHECK(o.beta == 0.2);
    CHECK_THROWS_AS(auto_params({-1.0, {}}), ConfigError);
}
