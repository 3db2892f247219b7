#include <doctest.h>

#include <cmath>
#include <random>

#include "qdpc/fft.hpp"
#include "qdpc/operators.hpp"

using namespace qdpc;

namespace {

RealImage random_image(int w, int h, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    RealImage img(w, h);
    for (double& v : img) v = g(rng);
    return img;
}

HessianField random_field(int w, int h, std::mt19937_64& rng) {
    return {random_image(w, h, rng), random_image(w, h, rng), random_image(w, h, rng)};
}

DpcStack make_stack(int n, std::mt19937_64& rng) {
    OpticalConfig c;
    c.width = n;
    c.height = n;
    DpcStack st;
    for (const auto& ax : build_axis_optics(c, {Axis::left_right(), Axis::top_bottom()}, SourceGeometry::half_disc())) {
        st.images.push_back({random_image(n, n, rng), ax.axis.name});
        st.transfer_functions.push_back(ax.pair);
    }
    return st;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

}  // namespace

TEST_CASE("K_n, Hessian and gradient adjoints hold for 20 random pairs") {
    std::mt19937_64 rng(42);
    const DpcStack st = make_stack(24, rng);
    for (int trial = 0; trial < 20; ++trial) {
        const int w = 24;
        const int h = 24;
        const RealImage phi = random_image(w, h, rng);
        const RealImage y = random_image(w, h, rng);
        for (const auto& tf : st.transfer_functions) {
            CHECK(rel(inner(convolve_apply(phi, tf), y), inner(phi, convolve_adjoint(y, tf))) <= 1e-10);
        }
        const HessianField g = random_field(w, h, rng);
        CHECK(rel(inner(hessian_apply(phi), g), inner(phi, hessian_adjoint(g))) <= 1e-10);

        const GradientField d{random_image(w, h, rng), random_image(w, h, rng)};
        const GradientField gp = gradient_apply(phi);
        CHECK(rel(inner(gp.dx, d.dx) + inner(gp.dy, d.dy), inner(phi, gradient_adjoint(d))) <= 1e-10);
    }
    // Non-square too.
    const RealImage phi = random_image(17, 11, rng);
    const HessianField g = random_field(17, 11, rng);
    CHECK(rel(inner(hessian_apply(phi), g), inner(phi, hessian_adjoint(g))) <= 1e-10);
}

TEST_CASE("Hessian stencils by hand") {
    const int n = 9;
    RealImage phi(n, n);
    std::mt19937_64 rng(5);
    phi = random_image(n, n, rng);
    const HessianField hf = hessian_apply(phi);
    auto at = [&](int x, int y) { return phi((x + n) % n, (y + n) % n); };
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            CHECK(hf.xx(x, y) == doctest::Approx(at(x + 1, y) - 2 * at(x, y) + at(x - 1, y)));
            CHECK(hf.yy(x, y) == doctest::Approx(at(x, y + 1) - 2 * at(x, y) + at(x, y - 1)));
            CHECK(hf.xy(x, y) ==
                  doctest::Approx(std::sqrt(2.0) * (at(x + 1, y + 1) - at(x + 1, y) - at(x, y + 1) + at(x, y))));
        }
    }
    const HessianField flat = hessian_apply(RealImage(n, n, 3.0));
    for (const RealImage* c : {&flat.xx, &flat.yy, &flat.xy}) {
        for (double v : *c) CHECK(v == 0.0);
    }
    const GradientField gf = gradient_apply(phi);
    CHECK(gf.dx(2, 3) == doctest::Approx(at(3, 3) - at(2, 3)));
    CHECK(gf.dy(2, 3) == doctest::Approx(at(2, 4) - at(2, 3)));
}

TEST_CASE("buffer-reusing Hessian forms agree with the allocating ones") {
    std::mt19937_64 rng(9);
    const RealImage phi = random_image(20, 14, rng);
    HessianField out;
    hessian_apply(phi, out);
    CHECK(out.xx == hessian_apply(phi).xx);
    CHECK(out.xy == hessian_apply(phi).xy);
    RealImage acc(20, 14, 1.0);
    hessian_adjoint_add(out, -0.5, acc);
    const RealImage ref = hessian_adjoint(out);
    for (std::size_t i = 0; i < acc.size(); ++i) CHECK(acc[i] == doctest::Approx(1.0 - 0.5 * ref[i]));
}

TEST_CASE("spectral stack diagonalizes the operators") {
    std::mt19937_64 rng(3);
    const DpcStack st = make_stack(32, rng);
    SpectralStack sp(st);
    const RealImage phi = random_image(32, 32, rng);
    ComplexImage phat;
    sp.fft().forward(phi, phat);

    // ||H phi||^2 and sum ||K phi||^2 spatially vs Parseval on the diagonal spectra.
    double hess_spatial = 0.0;
    const HessianField hf = hessian_apply(phi);
    hess_spatial = inner(hf, hf);
    double data_spatial = 0.0;
    for (const auto& tf : st.transfer_functions) {
        const RealImage k = convolve_apply(phi, tf);
        data_spatial += inner(k, k);
    }
    const GradientField gf = gradient_apply(phi);
    const double grad_spatial = inner(gf.dx, gf.dx) + inner(gf.dy, gf.dy);

    auto weighted = [&](const RealImage& wgt) {
        ComplexImage tmp = phat;
        for (std::size_t i = 0; i < tmp.size(); ++i) tmp[i] *= std::sqrt(wgt[i]);
        return sp.energy(tmp);
    };
    CHECK(rel(weighted(sp.hessian_power()), hess_spatial) <= 1e-10);
    CHECK(rel(weighted(sp.data_power()), data_spatial) <= 1e-10);
    CHECK(rel(weighted(sp.gradient_power()), grad_spatial) <= 1e-10);
    CHECK(rel(sp.energy(phat), inner(phi, phi)) <= 1e-12);
}

TEST_CASE("stack validation") {
    std::mt19937_64 rng(1);
    DpcStack st = make_stack(16, rng);
    CHECK_NOTHROW(st.validate());

    DpcStack empty;
    CHECK_THROWS_AS(empty.validate(), ConfigError);

    DpcStack uneven = st;
    uneven.transfer_functions.pop_back();
    CHECK_THROWS(uneven.validate());

    DpcStack wrong = st;
    wrong.images[1].values = RealImage(16, 8);
    CHECK_THROWS_AS(wrong.validate(), DimensionError);

    DpcStack nan = st;
    nan.images[0].values[5] = NAN;
    CHECK_THROWS(nan.validate());

    DpcStack dc = st;
    dc.transfer_functions[0].values(0, 0) = {0.0, 1e-3};
    CHECK_THROWS_AS(dc.validate(), SymmetryError);

    DpcStack even = st;
    even.transfer_functions[0].values(1, 0) = {0.0, 0.7};
    CHECK_THROWS_AS(even.validate(), SymmetryError);
}
