#include "qdpc/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <mutex>

namespace qdpc::fft {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

void check_dims(int width, int height) {
    if (width <= 0 || height <= 0) {
        throw DimensionError("FFT dimensions must be positive");
    }
}

}  // namespace

struct RealFft2d::Impl {
    int width;
    int height;
    int half;
    double* real = nullptr;
    fftw_complex* spec = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan inv = nullptr;

    Impl(int w, int h) : width(w), height(h), half(w / 2 + 1) {
        const std::size_t n_real = static_cast<std::size_t>(w) * h;
        const std::size_t n_spec = static_cast<std::size_t>(half) * h;
        std::lock_guard lock(planner_mutex());
        real = fftw_alloc_real(n_real);
        spec = fftw_alloc_complex(n_spec);
        if (real == nullptr || spec == nullptr) {
            fftw_free(real);
            fftw_free(spec);
            throw Error("FFTW allocation failed");
        }
        fwd = fftw_plan_dft_r2c_2d(h, w, real, spec, FFTW_ESTIMATE);
        inv = fftw_plan_dft_c2r_2d(h, w, spec, real, FFTW_ESTIMATE);
    }
    ~Impl() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(inv);
        fftw_free(real);
        fftw_free(spec);
    }
};

RealFft2d::RealFft2d(int width, int height) {
    check_dims(width, height);
    impl_ = std::make_unique<Impl>(width, height);
}
RealFft2d::~RealFft2d() = default;
RealFft2d::RealFft2d(RealFft2d&&) noexcept = default;
RealFft2d& RealFft2d::operator=(RealFft2d&&) noexcept = default;

int RealFft2d::width() const noexcept { return impl_->width; }
int RealFft2d::height() const noexcept { return impl_->height; }

void RealFft2d::forward(const RealImage& in, ComplexImage& out) {
    if (in.width() != impl_->width || in.height() != impl_->height) {
        throw DimensionError("RealFft2d::forward: input size does not match plan");
    }
    if (out.width() != impl_->half || out.height() != impl_->height) {
        out = ComplexImage(impl_->half, impl_->height);
    }
    // r2c keeps its input, so caller buffers can be used directly when the
    // alignment matches what the plan was made for.
    auto* dst = reinterpret_cast<fftw_complex*>(out.data());
    auto* src = const_cast<double*>(in.data());
    if (fftw_alignment_of(src) == fftw_alignment_of(impl_->real) &&
        fftw_alignment_of(reinterpret_cast<double*>(dst)) == fftw_alignment_of(reinterpret_cast<double*>(impl_->spec))) {
        fftw_execute_dft_r2c(impl_->fwd, src, dst);
        return;
    }
    std::memcpy(impl_->real, in.data(), in.size() * sizeof(double));
    fftw_execute(impl_->fwd);
    std::memcpy(static_cast<void*>(out.data()), impl_->spec, out.size() * sizeof(fftw_complex));
}

void RealFft2d::inverse(const ComplexImage& in, RealImage& out) {
    if (in.width() != impl_->half || in.height() != impl_->height) {
        throw DimensionError("RealFft2d::inverse: spectrum size does not match plan");
    }
    // c2r overwrites its input, so the spectrum always goes through the plan buffer.
    std::memcpy(impl_->spec, static_cast<const void*>(in.data()), in.size() * sizeof(fftw_complex));
    if (out.width() != impl_->width || out.height() != impl_->height) {
        out = RealImage(impl_->width, impl_->height);
    }
    const double scale = 1.0 / (static_cast<double>(impl_->width) * impl_->height);
    if (fftw_alignment_of(out.data()) == fftw_alignment_of(impl_->real)) {
        fftw_execute_dft_c2r(impl_->inv, impl_->spec, out.data());
        for (double& v : out) {
            v *= scale;
        }
        return;
    }
    fftw_execute(impl_->inv);
    const double* src = impl_->real;
    std::transform(src, src + out.size(), out.data(), [scale](double v) { return v * scale; });
}

struct ComplexFft2d::Impl {
    int width;
    int height;
    fftw_complex* in = nullptr;
    fftw_complex* out = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan inv = nullptr;

    Impl(int w, int h) : width(w), height(h) {
        const std::size_t n = static_cast<std::size_t>(w) * h;
        std::lock_guard lock(planner_mutex());
        in = fftw_alloc_complex(n);
        out = fftw_alloc_complex(n);
        if (in == nullptr || out == nullptr) {
            fftw_free(in);
            fftw_free(out);
            throw Error("FFTW allocation failed");
        }
        fwd = fftw_plan_dft_2d(h, w, in, out, FFTW_FORWARD, FFTW_ESTIMATE);
        inv = fftw_plan_dft_2d(h, w, in, out, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~Impl() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(inv);
        fftw_free(in);
        fftw_free(out);
    }

    void run(fftw_plan plan, const ComplexImage& src, ComplexImage& dst, double scale) {
        if (src.width() != width || src.height() != height) {
            throw DimensionError("ComplexFft2d: input size does not match plan");
        }
        std::memcpy(in, static_cast<const void*>(src.data()), src.size() * sizeof(fftw_complex));
        fftw_execute(plan);
        if (!dst.same_shape(src)) {
            dst = ComplexImage(width, height);
        }
        std::memcpy(static_cast<void*>(dst.data()), out, dst.size() * sizeof(fftw_complex));
        if (scale != 1.0) {
            for (auto& v : dst) {
                v *= scale;
            }
        }
    }
};

ComplexFft2d::ComplexFft2d(int width, int height) {
    check_dims(width, height);
    impl_ = std::make_unique<Impl>(width, height);
}
ComplexFft2d::~ComplexFft2d() = default;
ComplexFft2d::ComplexFft2d(ComplexFft2d&&) noexcept = default;
ComplexFft2d& ComplexFft2d::operator=(ComplexFft2d&&) noexcept = default;

void ComplexFft2d::forward(const ComplexImage& in, ComplexImage& out) {
    impl_->run(impl_->fwd, in, out, 1.0);
}

void ComplexFft2d::inverse(const ComplexImage& in, ComplexImage& out) {
    impl_->run(impl_->inv, in, out, 1.0 / (static_cast<double>(impl_->width) * impl_->height));
}

ComplexImage fft2(const ComplexImage& in) {
    ComplexFft2d plan(in.width(), in.height());
    ComplexImage out;
    plan.forward(in, out);
    return out;
}

ComplexImage fft2(const RealImage& in) {
    ComplexImage c(in.width(), in.height());
    std::copy(in.begin(), in.end(), c.begin());
    return fft2(c);
}

ComplexImage ifft2(const ComplexImage& in) {
    ComplexFft2d plan(in.width(), in.height());
    ComplexImage out;
    plan.inverse(in, out);
    return out;
}

ComplexImage expand_half_spectrum(const ComplexImage& half, int width) {
    if (half.width() != width / 2 + 1) {
        throw DimensionError("expand_half_spectrum: half width does not match image width");
    }
    const int height = half.height();
    ComplexImage full(width, height);
    for (int y = 0; y < height; ++y) {
        const int my = (height - y) % height;
        for (int x = 0; x < width; ++x) {
            if (x < half.width()) {
                full(x, y) = half(x, y);
            } else {
                full(x, y) = std::conj(half(width - x, my));
            }
        }
    }
    return full;
}

ComplexImage crop_half_spectrum(const ComplexImage& full) {
    const int half = full.width() / 2 + 1;
    ComplexImage out(half, full.height());
    for (int y = 0; y < full.height(); ++y) {
        for (int x = 0; x < half; ++x) {
            out(x, y) = full(x, y);
        }
    }
    return out;
}

}  // namespace qdpc::fft
