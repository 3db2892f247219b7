#include <doctest.h>

#include <cmath>
#include <random>

#include "qdpc/fft.hpp"
#include "qdpc/metrics.hpp"
#include "qdpc/solvers.hpp"

using namespace qdpc;

namespace {

RealImage random_image(int w, int h, std::mt19937_64& rng, double sd = 1.0) {
    std::normal_distribution<double> g(0.0, sd);
    RealImage img(w, h);
    for (double& v : img) v = g(rng);
    return img;
}

std::vector<AxisOptics> optics(int n) {
    OpticalConfig c;
    c.width = n;
    c.height = n;
    return build_axis_optics(c, {Axis::left_right(), Axis::top_bottom()}, SourceGeometry::half_disc());
}

DpcStack stack_from(const PhaseImage& phi, const std::vector<AxisOptics>& ax) {
    DpcStack st;
    for (const auto& a : ax) {
        st.images.push_back(simulate_dpc(phi, a.pair));
        st.transfer_functions.push_back(a.pair);
    }
    return st;
}

PhaseImage smooth_phantom(int n, std::uint64_t seed) {
    PhantomSpec ps;
    ps.kind = PhantomKind::BinaryBlobs;
    ps.width = n;
    ps.height = n;
    ps.seed = seed;
    ps.smoothing_px = 2.0;
    return generate_phantom(ps);
}

double norm(const RealImage& a) { return std::sqrt(inner(a, a)); }

double mean(const RealImage& a) {
    double s = 0.0;
    for (double v : a) s += v;
    return s / static_cast<double>(a.size());
}

}  // namespace

TEST_CASE("Tikhonov matches the closed form computed on the full spectrum") {
    std::mt19937_64 rng(1);
    const int n = 32;
    const auto ax = optics(n);
    DpcStack st;
    for (const auto& a : ax) {
        st.images.push_back({random_image(n, n, rng), a.axis.name});
        st.transfer_functions.push_back(a.pair);
    }
    const double alpha = 0.03;
    const PhaseImage fast = tikhonov_reconstruct(st, {alpha}).phase;

    fft::ComplexFft2d plan(n, n);
    ComplexImage num(n, n);
    RealImage den(n, n, alpha);
    for (std::size_t k = 0; k < st.count(); ++k) {
        ComplexImage s(n, n);
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = st.images[k].values[i];
        ComplexImage shat;
        plan.forward(s, shat);
        const ComplexImage& h = st.transfer_functions[k].values;
        for (std::size_t i = 0; i < num.size(); ++i) {
            num[i] += std::conj(h[i]) * shat[i];
            den[i] += std::norm(h[i]);
        }
    }
    for (std::size_t i = 0; i < num.size(); ++i) num[i] /= den[i];
    ComplexImage slow;
    plan.inverse(num, slow);
    double worst = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < fast.size(); ++i) {
        worst = std::max(worst, std::abs(fast[i] - slow[i].real()));
        scale = std::max(scale, std::abs(slow[i].real()));
    }
    CHECK(worst <= 1e-12 * scale);
    CHECK(std::abs(mean(fast)) <= 1e-12 * scale);
}

TEST_CASE("Tikhonov edge cases") {
    const auto ax = optics(32);
    DpcStack zero = stack_from(PhaseImage(32, 32), ax);
    for (double v : tikhonov_reconstruct(zero, {1e-4}).phase) CHECK(v == 0.0);
    CHECK_THROWS_AS(tikhonov_reconstruct(zero, {0.0}), SingularError);
    CHECK_THROWS_AS(tikhonov_reconstruct(zero, {-1.0}), ConfigError);
}

TEST_CASE("Tikhonov round trip on a band-limited phantom") {
    const int n = 128;
    const PhaseImage truth = smooth_phantom(n, 4);
    const DpcStack st = stack_from(truth, optics(n));
    CHECK(lsnr(truth, tikhonov_reconstruct(st, {1e-6}).phase).lsnr_db >= 30.0);
}

TEST_CASE("geometric schedules") {
    CHECK(geometric_trip_count(0.1, 1e3, 2.0) == 14);
    CHECK(geometric_trip_count(0.1, 1e5, 2.0) == 20);
    CHECK(geometric_trip_count(1.0, 1.0, 2.0) == 0);
    CHECK_THROWS_AS(geometric_trip_count(0.0, 1.0, 2.0), ConfigError);
}

TEST_CASE("hard threshold is joint across images") {
    SparseField f{RealImage(3, 1), RealImage(3, 1)};
    // energies: 0.05, 0.03, 0
    f[0][0] = std::sqrt(0.03);
    f[1][0] = std::sqrt(0.02);
    f[0][1] = std::sqrt(0.01);
    f[1][1] = -std::sqrt(0.02);
    const SparseField t = hqs_hard_threshold(f, 0.04);
    CHECK(t[0][0] == f[0][0]);
    CHECK(t[1][0] == f[1][0]);
    CHECK(t[0][1] == 0.0);
    CHECK(t[1][1] == 0.0);
    const SparseField same = hqs_hard_threshold(f, 0.0);
    CHECK(same[0] == f[0]);
    CHECK(same[1] == f[1]);
    CHECK_THROWS_AS(hqs_hard_threshold(f, -1.0), ConfigError);
}

TEST_CASE("soft threshold") {
    RealImage x(3, 1);
    x[0] = 0.5;
    x[1] = -0.1;
    x[2] = -0.7;
    const RealImage y = soft_threshold(x, 0.2);
    CHECK(y[0] == doctest::Approx(0.3));
    CHECK(y[1] == 0.0);
    CHECK(y[2] == doctest::Approx(-0.5));
    CHECK(soft_threshold(x, 0.0) == x);
    const HessianField g = soft_threshold(HessianField{x, x, x}, 0.2);
    CHECK(g.xy == y);
}

TEST_CASE("HQS quadratic solve satisfies its normal equations") {
    std::mt19937_64 rng(7);
    const int n = 32;
    const auto ax = optics(n);
    DpcStack st;
    SparseField psi;
    for (const auto& a : ax) {
        st.images.push_back({random_image(n, n, rng), a.axis.name});
        st.transfer_functions.push_back(a.pair);
        psi.push_back(random_image(n, n, rng));
    }
    const HessianField g{random_image(n, n, rng), random_image(n, n, rng), random_image(n, n, rng)};
    const double a0 = 0.8;
    const double b0 = 0.3;
    const PhaseImage phi = hqs_quadratic_solve(st, psi, g, a0, b0);

    RealImage lhs = hessian_adjoint(hessian_apply(phi));
    for (double& v : lhs) v *= b0;
    RealImage rhs = hessian_adjoint(g);
    for (double& v : rhs) v *= b0;
    for (std::size_t k = 0; k < st.count(); ++k) {
        const auto& tf = st.transfer_functions[k];
        const RealImage ktk = convolve_adjoint(convolve_apply(phi, tf), tf);
        const RealImage ks = convolve_adjoint(st.images[k].values, tf);
        const RealImage kp = convolve_adjoint(psi[k], tf);
        for (std::size_t i = 0; i < lhs.size(); ++i) {
            lhs[i] += (1.0 + a0) * ktk[i];
            rhs[i] += ks[i] + a0 * kp[i];
        }
    }
    RealImage diff = lhs;
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= rhs[i];
    CHECK(norm(diff) <= 1e-8 * norm(rhs));
}

TEST_CASE("HQS quadratic solve recovers a consistent system") {
    const int n = 64;
    const auto ax = optics(n);
    PhaseImage truth = smooth_phantom(n, 2);
    for (double& v : truth) v += 0.4;  // offset is unobservable
    const DpcStack st = stack_from(truth, ax);
    SparseField psi;
    for (const auto& img : st.images) psi.push_back(img.values);
    const PhaseImage phi = hqs_quadratic_solve(st, psi, hessian_apply(truth), 2.0, 0.5);
    CHECK(lsnr(truth, phi).lsnr_db >= 60.0);

    const DpcStack zero = stack_from(PhaseImage(n, n), ax);
    const SparseField zpsi(2, RealImage(n, n));
    for (double v : hqs_quadratic_solve(zero, zpsi, hessian_apply(PhaseImage(n, n)), 1.0, 1.0)) CHECK(v == 0.0);
    CHECK_THROWS_AS(hqs_quadratic_solve(st, SparseField(1, RealImage(n, n)), hessian_apply(truth), 1, 1),
                    DimensionError);
}

TEST_CASE("HQS loop structure") {
    const int n = 32;
    const DpcStack st = stack_from(smooth_phantom(n, 1), optics(n));
    HqsConfig cfg;
    cfg.alpha = 0.1;
    cfg.beta = 0.1;
    const Reconstruction r = hqs_reconstruct(st, cfg);
    CHECK(r.outer_iterations == 14);
    CHECK(r.iterations == 14 * 20);
    CHECK(r.cost_trace.size() == 15u);

    HqsConfig bad = cfg;
    bad.alpha_max = 0.05;
    CHECK_THROWS_AS(hqs_reconstruct(st, bad), ConfigError);
    bad = cfg;
    bad.growth = 1.0;
    CHECK_THROWS_AS(hqs_reconstruct(st, bad), ConfigError);
    bad = cfg;
    bad.beta = 0.0;
    CHECK_THROWS_AS(hqs_reconstruct(st, bad), ConfigError);
}

TEST_CASE("TV solver basics") {
    const int n = 64;
    const PhaseImage truth = smooth_phantom(n, 3);
    const DpcStack st = stack_from(truth, optics(n));
    TvConfig cfg;
    cfg.alpha = 1e-5;
    const Reconstruction r = tv_reconstruct(st, cfg);
    CHECK(r.outer_iterations == geometric_trip_count(cfg.alpha, cfg.beta_max, cfg.growth));
    CHECK(r.cost_trace.size() == static_cast<std::size_t>(r.outer_iterations));
    CHECK(lsnr(truth, r.phase).lsnr_db >= 20.0);
    TvConfig bad;
    bad.growth = 0.5;
    CHECK_THROWS_AS(tv_reconstruct(st, bad), ConfigError);
}

TEST_CASE("L0 surrogate values") {
    CHECK(l0_surrogate(0.0, 10.0) == 0.0);
    CHECK(std::abs(l0_surrogate(10.0, 10.0) - 1.0) <= 1e-12);
    CHECK(l0_surrogate(0.1, 10.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
    CHECK(l0_surrogate(-0.1, 10.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
    CHECK(l0_surrogate_grad(0.0, 10.0, 1e-8) == 0.0);
    CHECK(l0_surrogate_grad(0.2, 10.0, 1e-8) == doctest::Approx(10.0 * std::exp(-2.0)));
    CHECK(l0_surrogate_grad(-0.2, 10.0, 1e-8) == doctest::Approx(-10.0 * std::exp(-2.0)));
}

TEST_CASE("RLD cost decomposes and vanishes at the exact solution") {
    const int n = 32;
    std::mt19937_64 rng(11);
    const PhaseImage truth = random_image(n, n, rng);
    const DpcStack st = stack_from(truth, optics(n));
    RldConfig cfg;
    cfg.alpha = 0.0;
    cfg.beta = 0.0;
    const CostGradient at_truth = rld_cost_and_gradient(truth, st, cfg);
    double data_scale = 0.0;
    for (const auto& img : st.images) data_scale = std::max(data_scale, norm(img.values));
    CHECK(norm(at_truth.gradient) <= 1e-8 * data_scale);

    const PhaseImage phi = random_image(n, n, rng);
    double direct = 0.0;
    for (std::size_t k = 0; k < st.count(); ++k) {
        const RealImage kp = convolve_apply(phi, st.transfer_functions[k]);
        for (std::size_t i = 0; i < kp.size(); ++i) {
            const double r = kp[i] - st.images[k].values[i];
            direct += r * r;
        }
    }
    CHECK(rld_cost_and_gradient(phi, st, cfg).cost == doctest::Approx(direct).epsilon(1e-10));
}

TEST_CASE("RLD gradient matches central finite differences") {
    const int n = 16;
    std::mt19937_64 rng(21);
    const auto ax = optics(n);
    DpcStack st;
    for (const auto& a : ax) {
        st.images.push_back({random_image(n, n, rng, 0.1), a.axis.name});
        st.transfer_functions.push_back(a.pair);
    }
    const PhaseImage phi = random_image(n, n, rng);
    RldConfig cfg;
    cfg.alpha = 0.3;
    cfg.beta = 0.2;

    // Stay clear of the smoothed kinks.
    double min_abs = INFINITY;
    for (const auto& tf : st.transfer_functions) {
        for (double v : convolve_apply(phi, tf)) min_abs = std::min(min_abs, std::abs(v));
    }
    const HessianField hf = hessian_apply(phi);
    for (const RealImage* c : {&hf.xx, &hf.yy, &hf.xy}) {
        for (double v : *c) min_abs = std::min(min_abs, std::abs(v));
    }
    REQUIRE(min_abs >= 10.0 * cfg.abs_epsilon);

    const CostGradient cg = rld_cost_and_gradient(phi, st, cfg);
    const double h = 1e-6;
    double err = 0.0;
    double ref = 0.0;
    PhaseImage probe = phi;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        probe[i] = phi[i] + h;
        const double up = rld_cost_and_gradient(probe, st, cfg).cost;
        probe[i] = phi[i] - h;
        const double down = rld_cost_and_gradient(probe, st, cfg).cost;
        probe[i] = phi[i];
        const double fd = (up - down) / (2.0 * h);
        err += (fd - cg.gradient[i]) * (fd - cg.gradient[i]);
        ref += fd * fd;
    }
    CHECK(std::sqrt(err / ref) <= 1e-4);
}

TEST_CASE("N-Adam update by hand") {
    RldConfig cfg;
    PhaseImage phi(4, 3, 1.0);
    OptimizerState st = OptimizerState::zeros(4, 3);
    nadam_step(st, RealImage(4, 3, 2.0), phi, cfg);
    const double step = 0.05 * (0.9 * 2.0 + 0.1 * 2.0) / std::sqrt(4.0 + 1e-8);
    for (double v : phi) CHECK(v == doctest::Approx(1.0 - step).epsilon(1e-14));
    CHECK(st.t == 2);
    CHECK(st.m[0] == doctest::Approx(0.2));
    CHECK(st.v[0] == doctest::Approx(0.004));

    PhaseImage still(4, 3, 0.5);
    OptimizerState z = OptimizerState::zeros(4, 3);
    nadam_step(z, RealImage(4, 3), still, cfg);
    for (double v : still) CHECK(v == 0.5);

    // Adaptive normalization: 1000x gradient, near-identical step.
    PhaseImage a(1, 1, 0.0);
    PhaseImage b(1, 1, 0.0);
    OptimizerState sa = OptimizerState::zeros(1, 1);
    OptimizerState sb = OptimizerState::zeros(1, 1);
    nadam_step(sa, RealImage(1, 1, 0.37), a, cfg);
    nadam_step(sb, RealImage(1, 1, 370.0), b, cfg);
    CHECK(std::abs(b[0] / a[0] - 1.0) < 1e-3);

    OptimizerState bad = OptimizerState::zeros(4, 3);
    bad.t = 0;
    CHECK_THROWS_AS(nadam_step(bad, RealImage(4, 3), phi, cfg), ConfigError);
}

TEST_CASE("RLD reconstruction: trace, zero mean, divergence") {
    const int n = 32;
    const PhaseImage truth = smooth_phantom(n, 6);
    const DpcStack st = stack_from(truth, optics(n));
    RldConfig cfg;
    cfg.alpha = 1e-3;
    cfg.beta = 5e-4;
    cfg.t_max = 40;
    const Reconstruction r = rld_reconstruct(st, cfg);
    CHECK(r.cost_trace.size() == 40u);
    CHECK(r.iterations == 40);
    CHECK(std::abs(mean(r.phase)) <= 1e-12);
    CHECK(r.cost_trace.back() < r.cost_trace.front());

    RldConfig wild = cfg;
    wild.eta = 1e308;
    CHECK_THROWS_AS(rld_reconstruct(st, wild), DivergenceError);
    RldConfig bad = cfg;
    bad.rho1 = 1.0;
    CHECK_THROWS_AS(rld_reconstruct(st, bad), ConfigError);
}
