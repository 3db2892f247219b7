#pragma once

#include <complex>
#include <memory>

#include "qdpc/array2d.hpp"

namespace qdpc::fft {

// Thin RAII wrappers over FFTW. Every plan is created with FFTW_ESTIMATE, so the
// chosen algorithm (and therefore the floating-point result) is the same on every
// run. Plan creation and destruction are serialized internally; executing
// different plan objects from different threads is safe, one object is not.

/// Real-to-complex transform of a W x H image. The half spectrum is
/// (W/2 + 1) x H, row y holding frequencies ky(y) and kx = 0 .. W/2.
class RealFft2d {
public:
    RealFft2d(int width, int height);
    ~RealFft2d();
    RealFft2d(RealFft2d&&) noexcept;
    RealFft2d& operator=(RealFft2d&&) noexcept;
    RealFft2d(const RealFft2d&) = delete;
    RealFft2d& operator=(const RealFft2d&) = delete;

    [[nodiscard]] int width() const noexcept;
    [[nodiscard]] int height() const noexcept;
    [[nodiscard]] int spectrum_width() const noexcept { return width() / 2 + 1; }

    /// Unnormalized forward DFT (exp(-2 pi i k x / N) convention).
    void forward(const RealImage& in, ComplexImage& out);
    /// Inverse DFT scaled by 1 / (W H), so inverse(forward(x)) == x.
    void inverse(const ComplexImage& in, RealImage& out);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// In-place style complex 2D transform of a W x H array.
class ComplexFft2d {
public:
    ComplexFft2d(int width, int height);
    ~ComplexFft2d();
    ComplexFft2d(ComplexFft2d&&) noexcept;
    ComplexFft2d& operator=(ComplexFft2d&&) noexcept;
    ComplexFft2d(const ComplexFft2d&) = delete;
    ComplexFft2d& operator=(const ComplexFft2d&) = delete;

    void forward(const ComplexImage& in, ComplexImage& out);
    /// Scaled by 1 / (W H).
    void inverse(const ComplexImage& in, ComplexImage& out);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

ComplexImage fft2(const ComplexImage& in);
ComplexImage fft2(const RealImage& in);
ComplexImage ifft2(const ComplexImage& in);

/// Expand a half spectrum of a real W x H image to the full Hermitian spectrum.
ComplexImage expand_half_spectrum(const ComplexImage& half, int width);
/// Keep the kx = 0 .. W/2 columns of a full spectrum.
ComplexImage crop_half_spectrum(const ComplexImage& full);

}  // namespace qdpc::fft
