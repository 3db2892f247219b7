#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "qdpc/forward.hpp"
#include "qdpc/metrics.hpp"

using namespace qdpc;

namespace {

RealImage gaussian(int w, int h, double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, sigma);
    RealImage img(w, h);
    for (double& v : img) v = g(rng);
    return img;
}

}  // namespace

TEST_CASE("LSNR cap and offset") {
    const RealImage t = gaussian(32, 32, 1.0, 1);
    const LsnrResult same = lsnr(t, t);
    CHECK(same.lsnr_db == kLsnrCapDb);
    CHECK(same.offset == 0.0);

    RealImage shifted = t;
    for (double& v : shifted) v += 0.7;
    const LsnrResult s = lsnr(t, shifted);
    CHECK(s.lsnr_db >= 250.0);
    CHECK(s.offset == doctest::Approx(-0.7));
}

TEST_CASE("LSNR of a known Gaussian residual") {
    RealImage t = gaussian(512, 512, 1.0, 2);
    double ss = 0.0;
    for (double v : t) ss += v * v;
    const double rms = std::sqrt(ss / static_cast<double>(t.size()));
    for (double& v : t) v /= rms;
    for (double sigma : {0.3, 0.05}) {
        const RealImage n = gaussian(512, 512, sigma, 3);
        RealImage r = t;
        for (std::size_t i = 0; i < r.size(); ++i) r[i] += n[i];
        CHECK(std::abs(lsnr(t, r).lsnr_db - 10.0 * std::log10(1.0 / (sigma * sigma))) <= 0.2);
    }
}

TEST_CASE("LSNR invariances") {
    const RealImage t = gaussian(40, 30, 1.0, 4);
    RealImage r = t;
    const RealImage n = gaussian(40, 30, 0.2, 5);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += n[i];
    const double base = lsnr(t, r).lsnr_db;

    RealImage moved = r;
    for (double& v : moved) v -= 12.5;
    CHECK(lsnr(t, moved).lsnr_db == doctest::Approx(base).epsilon(1e-12));

    std::vector<std::size_t> perm(t.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::mt19937_64 rng(6);
    std::shuffle(perm.begin(), perm.end(), rng);
    RealImage tp(40, 30);
    RealImage rp(40, 30);
    for (std::size_t i = 0; i < perm.size(); ++i) {
        tp[i] = t[perm[i]];
        rp[i] = r[perm[i]];
    }
    CHECK(lsnr(tp, rp).lsnr_db == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("LSNR errors") {
    CHECK_THROWS_AS(lsnr(RealImage(8, 8), RealImage(8, 8, 1.0)), ReferenceError);
    CHECK_THROWS_AS(lsnr(RealImage(8, 8, 1.0), RealImage(8, 7)), DimensionError);
}

TEST_CASE("L0 counts") {
    CHECK(l0_count(RealImage(5, 5), 0.0) == 0);
    RealImage v(3, 1);
    v[0] = 0.5;
    v[1] = -0.2;
    v[2] = 0.0001;
    CHECK(l0_count(v, 0.001) == 2);
    const RealImage g = gaussian(64, 64, 1.0, 7);
    long long prev = l0_count(g, 0.0);
    for (double eps : {0.01, 0.1, 0.5, 1.0, 3.0, 10.0}) {
        const long long c = l0_count(g, eps);
        CHECK(c <= prev);
        prev = c;
    }
    CHECK_THROWS_AS(l0_count(g, -1.0), ConfigError);
    CHECK(default_l0_epsilon(v) == doctest::Approx(5e-4));
}

TEST_CASE("sparsity report bookkeeping") {
    const RealImage a = gaussian(16, 16, 1.0, 8);
    const SparsityReport same = sparsity_stats({a, a}, std::nullopt, 10);
    CHECK(same.counts[0] == same.counts[1]);
    CHECK(same.bin_edges.size() == 11u);
    double total = 0.0;
    for (double m : same.masses) total += m;
    CHECK(total == 2.0);
    CHECK(same.cdf.back() == 1.0);
    CHECK(std::is_sorted(same.cdf.begin(), same.cdf.end()));
    // Both images sit in one bin: a single jump from 0 to 1.
    CHECK(std::count_if(same.masses.begin(), same.masses.end(), [](double m) { return m > 0; }) == 1);

    RealImage sparse(16, 16);
    sparse[3] = 1.0;
    const SparsityReport r = sparsity_stats({sparse, a, RealImage(16, 16)}, 0.5, 4);
    CHECK(r.counts[0] == 1);
    CHECK(r.counts[2] == 0);
    CHECK(r.cdf_at(0.0) == doctest::Approx(1.0 / 3.0));
    CHECK(r.cdf_at(1.0) == 1.0);
    CHECK_THROWS_AS(sparsity_stats({a}, std::nullopt, 4), ConfigError);
    CHECK_THROWS_AS(sparsity_stats({a, a}, std::nullopt, 0), ConfigError);
}

TEST_CASE("noise-free DPC cohort is stochastically sparser") {
    OpticalConfig c;
    c.width = 64;
    c.height = 64;
    const auto ax = build_axis_optics(c, {Axis::left_right()}, SourceGeometry::half_disc());
    std::vector<RealImage> clean;
    std::vector<RealImage> noisy;
    for (int d = 0; d < 50; ++d) {
        PhantomSpec ps;
        ps.kind = d % 2 ? PhantomKind::BinaryBlobs : PhantomKind::TextMask;
        ps.width = 64;
        ps.height = 64;
        ps.seed = static_cast<std::uint64_t>(d);
        const RealImage s = simulate_dpc(generate_phantom(ps), ax[0].pair).values;
        clean.push_back(s);
        noisy.push_back(add_noise(s, {NoiseMode::SnrDb, 20.0, static_cast<std::uint64_t>(1000 + d)}));
    }
    const SparsityReport rc = sparsity_stats(clean, std::nullopt, 50);
    const SparsityReport rn = sparsity_stats(noisy, std::nullopt, 50);
    int dominated = 0;
    for (std::size_t b = 0; b < rc.cdf.size(); ++b) {
        if (rc.cdf[b] >= rn.cdf[b]) ++dominated;
    }
    CHECK(dominated >= static_cast<int>(0.95 * rc.cdf.size()));
}
