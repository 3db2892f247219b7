#pragma once

#include <vector>

#include "qdpc/array2d.hpp"
#include "qdpc/fft.hpp"
#include "qdpc/forward.hpp"
#include "qdpc/optics.hpp"

namespace qdpc {

/// N DPC images with their index-aligned transfer functions.
struct DpcStack {
    std::vector<DpcImage> images;
    std::vector<TransferFunction> transfer_functions;

    [[nodiscard]] int width() const;
    [[nodiscard]] int height() const;
    [[nodiscard]] std::size_t count() const noexcept { return images.size(); }
    /// Throws ConfigError / DimensionError / SymmetryError.
    void validate() const;
};

/// Second-difference Hessian {Dxx, Dyy, sqrt(2) Dxy}, periodic boundary.
struct HessianField {
    RealImage xx;
    RealImage yy;
    RealImage xy;  // already scaled by sqrt(2)
};

/// Forward-difference gradient {Dx, Dy}, periodic boundary.
struct GradientField {
    RealImage dx;
    RealImage dy;
};

/// One auxiliary image per DPC axis.
using SparseField = std::vector<RealImage>;

[[nodiscard]] HessianField hessian_apply(const RealImage& phi);
[[nodiscard]] RealImage hessian_adjoint(const HessianField& field);
/// Buffer-reusing forms: `out` is resized only when its shape differs.
void hessian_apply(const RealImage& phi, HessianField& out);
/// out += scale * H^T field.
void hessian_adjoint_add(const HessianField& field, double scale, RealImage& out);
[[nodiscard]] GradientField gradient_apply(const RealImage& phi);
[[nodiscard]] RealImage gradient_adjoint(const GradientField& field);

/// K phi = h (*) phi (circular), via the transfer function.
[[nodiscard]] RealImage convolve_apply(const RealImage& phi, const TransferFunction& ptf);
/// K^T y, multiplication by conj(H).
[[nodiscard]] RealImage convolve_adjoint(const RealImage& y, const TransferFunction& ptf);

/// Euclidean inner product over every element (and component).
[[nodiscard]] double inner(const RealImage& a, const RealImage& b);
[[nodiscard]] double inner(const HessianField& a, const HessianField& b);

/// Fourier-domain view of a stack shared by all solvers: half spectra of the
/// transfer functions and data, plus the diagonalized regularizer spectra.
class SpectralStack {
public:
    explicit SpectralStack(const DpcStack& stack);

    [[nodiscard]] int width() const noexcept { return width_; }
    [[nodiscard]] int height() const noexcept { return height_; }
    [[nodiscard]] std::size_t count() const noexcept { return transfer_.size(); }
    [[nodiscard]] const DpcStack& stack() const noexcept { return *stack_; }

    /// Half spectrum of H_n.
    [[nodiscard]] const ComplexImage& transfer(std::size_t n) const { return transfer_[n]; }
    /// Half spectrum of s_n.
    [[nodiscard]] const ComplexImage& data(std::size_t n) const { return data_[n]; }
    /// sum_n |H_n|^2.
    [[nodiscard]] const RealImage& data_power() const noexcept { return data_power_; }
    /// sum_n conj(H_n) S_n.
    [[nodiscard]] const ComplexImage& data_rhs() const noexcept { return data_rhs_; }
    /// |Dxx|^2 + |Dyy|^2 + 2 |Dxy|^2.
    [[nodiscard]] const RealImage& hessian_power() const noexcept { return hessian_power_; }
    /// |Dx|^2 + |Dy|^2.
    [[nodiscard]] const RealImage& gradient_power() const noexcept { return gradient_power_; }

    fft::RealFft2d& fft() noexcept { return fft_; }

    /// Parseval: spatial sum of squares of the real image whose half spectrum is given.
    [[nodiscard]] double energy(const ComplexImage& half_spectrum) const;

private:
    const DpcStack* stack_;
    int width_;
    int height_;
    fft::RealFft2d fft_;
    std::vector<ComplexImage> transfer_;
    std::vector<ComplexImage> data_;
    RealImage data_power_;
    ComplexImage data_rhs_;
    RealImage hessian_power_;
    RealImage gradient_power_;
};

}  // namespace qdpc
