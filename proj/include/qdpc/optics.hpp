#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qdpc/array2d.hpp"

namespace qdpc {

/// Microscope geometry. Lengths in micrometers.
struct OpticalConfig {
    double wavelength_um = 0.530;
    double na = 0.3;
    double magnification = 10.0;
    double pixel_size_um = 3.46;
    int width = 256;
    int height = 256;

    /// Object-plane sampling pitch.
    [[nodiscard]] double sampling_um() const { return pixel_size_um / magnification; }
    /// Coherent pupil cutoff NA / wavelength, cycles per micrometer.
    [[nodiscard]] double cutoff() const { return na / wavelength_um; }
    [[nodiscard]] double nyquist() const { return 0.5 / sampling_um(); }

    /// Throws ConfigError for any invalid field, including a pupil cutoff
    /// that is not strictly inside the Nyquist bound.
    void validate() const;
};

/// Spatial frequencies of the unshifted DFT layout: sample 0 is DC, the signed
/// index of sample i is i for i < ceil(N/2) and i - N otherwise.
class FrequencyGrid {
public:
    FrequencyGrid(int width, int height, double sampling_um);

    [[nodiscard]] int width() const noexcept { return width_; }
    [[nodiscard]] int height() const noexcept { return height_; }
    [[nodiscard]] double sampling_um() const noexcept { return sampling_; }
    [[nodiscard]] double dkx() const noexcept { return dkx_; }
    [[nodiscard]] double dky() const noexcept { return dky_; }
    [[nodiscard]] double nyquist() const noexcept { return 0.5 / sampling_; }

    [[nodiscard]] int signed_x(int x) const noexcept { return x < (width_ + 1) / 2 ? x : x - width_; }
    [[nodiscard]] int signed_y(int y) const noexcept { return y < (height_ + 1) / 2 ? y : y - height_; }
    [[nodiscard]] double kx(int x) const noexcept { return signed_x(x) * dkx_; }
    [[nodiscard]] double ky(int y) const noexcept { return signed_y(y) * dky_; }
    [[nodiscard]] double k_mag(int x, int y) const;

    /// Index of -k.
    [[nodiscard]] int mirror_x(int x) const noexcept { return (width_ - x) % width_; }
    [[nodiscard]] int mirror_y(int y) const noexcept { return (height_ - y) % height_; }
    /// The -Nyquist column/row of an even dimension is its own mirror.
    [[nodiscard]] bool is_nyquist_x(int x) const noexcept { return width_ % 2 == 0 && x == width_ / 2; }
    [[nodiscard]] bool is_nyquist_y(int y) const noexcept { return height_ % 2 == 0 && y == height_ / 2; }

private:
    int width_;
    int height_;
    double sampling_;
    double dkx_;
    double dky_;
};

/// Binary disc membership used by every mask: kx^2 + ky^2 <= radius^2.
[[nodiscard]] inline bool in_disc(double kx, double ky, double radius) {
    return kx * kx + ky * ky <= radius * radius;
}

struct PupilMask {
    RealImage values;
};

enum class SourceShape { HalfDisc, HalfAnnulus };

struct SourceGeometry {
    SourceShape shape = SourceShape::HalfDisc;
    /// Inner radius as a fraction of NA / wavelength; used by HalfAnnulus only.
    double inner_factor = 0.0;

    static SourceGeometry half_disc() { return {}; }
    static SourceGeometry half_annulus(double inner) { return {SourceShape::HalfAnnulus, inner}; }
    [[nodiscard]] std::string name() const;
};

/// Illumination axis. The positive source occupies the half plane k . u > 0,
/// the negative source is its point mirror.
struct Axis {
    std::string name;
    std::string pos_label;
    std::string neg_label;
    double ux = 1.0;
    double uy = 0.0;

    static Axis left_right();
    static Axis top_bottom();
    static Axis from_angle(double degrees);
    /// "left-right" | "lr" | "top-bottom" | "tb" | "angle:<degrees>".
    static Axis parse(const std::string& text);
};

struct SourceMask {
    RealImage values;
    std::string direction;
    SourceGeometry geometry;
};

/// Purely imaginary, odd phase transfer function on the unshifted grid.
struct TransferFunction {
    ComplexImage values;
    std::string axis;
};

/// Real-space point spread function, origin at index (0, 0).
struct ConvolutionKernel {
    RealImage values;
    std::string axis;
};

[[nodiscard]] FrequencyGrid make_frequency_grid(const OpticalConfig& config);
[[nodiscard]] PupilMask make_pupil(const FrequencyGrid& grid, const OpticalConfig& config);
[[nodiscard]] std::pair<SourceMask, SourceMask> make_source_pair(const FrequencyGrid& grid,
                                                                 const OpticalConfig& config,
                                                                 const Axis& axis,
                                                                 const SourceGeometry& geometry);

/// H(k) = i [A(k) - A(-k)] / B with A(k) = sum_q Sd(q) P(q) P(q + k), Sd = S_pos - S_neg
/// and B = sum_q (S_pos + S_neg) P^2. The correlation runs on a zero-padded
/// 2W x 2H grid so nothing wraps. DC and even-size Nyquist lines are set to 0.
/// Pass an all-zero source_neg to get the single-sided transfer function.
[[nodiscard]] TransferFunction compute_ptf(const PupilMask& pupil, const SourceMask& source_pos,
                                           const SourceMask& source_neg);

[[nodiscard]] ConvolutionKernel kernel_from_ptf(const TransferFunction& ptf);

/// max over symmetric pairs of |H(k) + H(-k)|, Nyquist lines excluded.
[[nodiscard]] double odd_symmetry_residual(const ComplexImage& values);
[[nodiscard]] double max_abs(const ComplexImage& values);
[[nodiscard]] double max_abs_real(const ComplexImage& values);

/// Everything the forward model and the solvers need for one illumination axis.
struct AxisOptics {
    Axis axis;
    TransferFunction pair;      // DPC transfer function of the anti-symmetric pair
    TransferFunction single_pos;
    TransferFunction single_neg;
};

[[nodiscard]] std::vector<AxisOptics> build_axis_optics(const OpticalConfig& config,
                                                        const std::vector<Axis>& axes,
                                                        const SourceGeometry& geometry);

}  // namespace qdpc
