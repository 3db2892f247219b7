#include "qdpc/optics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qdpc/fft.hpp"

namespace qdpc {

namespace {

constexpr int kMinDimension = 8;
constexpr double kSymmetryTolerance = 1e-10;

void check_positive(double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw ConfigError(std::string(name) + " must be a positive finite number");
    }
}

void check_cutoff(const FrequencyGrid& grid, const OpticalConfig& config) {
    if (!(config.cutoff() < grid.nyquist())) {
        std::ostringstream msg;
        msg << "pupil cutoff NA/lambda = " << config.cutoff()
            << " cyc/um is not inside the Nyquist bound " << grid.nyquist() << " cyc/um";
        throw ConfigError(msg.str());
    }
}

// Snap cos/sin round-off so that axis-aligned custom angles behave like the named axes.
double snap(double v) { return std::abs(v) < 1e-15 ? 0.0 : v; }

std::string format_angle(double degrees) {
    std::ostringstream s;
    s << "angle:" << degrees;
    return s.str();
}

}  // namespace

void OpticalConfig::validate() const {
    check_positive(wavelength_um, "wavelength_um");
    check_positive(magnification, "magnification");
    check_positive(pixel_size_um, "pixel_size_um");
    if (!(na > 0.0 && na < 1.0)) {
        throw ConfigError("na must lie in (0, 1)");
    }
    if (width < kMinDimension || height < kMinDimension) {
        throw ConfigError("image dimensions must be at least 8x8");
    }
    if (!(cutoff() < nyquist())) {
        std::ostringstream msg;
        msg << "pupil cutoff NA/lambda = " << cutoff() << " cyc/um is not inside the Nyquist bound "
            << nyquist() << " cyc/um";
        throw ConfigError(msg.str());
    }
}

FrequencyGrid::FrequencyGrid(int width, int height, double sampling_um)
    : width_(width), height_(height), sampling_(sampling_um),
      dkx_(1.0 / (width * sampling_um)), dky_(1.0 / (height * sampling_um)) {
    if (width < kMinDimension || height < kMinDimension) {
        throw ConfigError("frequency grid dimensions must be at least 8x8");
    }
    check_positive(sampling_um, "sampling");
}

double FrequencyGrid::k_mag(int x, int y) const { return std::hypot(kx(x), ky(y)); }

std::string SourceGeometry::name() const {
    if (shape == SourceShape::HalfDisc) {
        return "half-disc";
    }
    std::ostringstream s;
    s << "half-annulus(" << inner_factor << ")";
    return s.str();
}

Axis Axis::left_right() { return {"left-right", "right", "left", 1.0, 0.0}; }
Axis Axis::top_bottom() { return {"top-bottom", "top", "bottom", 0.0, 1.0}; }

Axis Axis::from_angle(double degrees) {
    if (!std::isfinite(degrees)) {
        throw ConfigError("axis angle must be finite");
    }
    const double rad = degrees * std::numbers::pi / 180.0;
    return {format_angle(degrees), format_angle(degrees), format_angle(degrees + 180.0),
            snap(std::cos(rad)), snap(std::sin(rad))};
}

Axis Axis::parse(const std::string& text) {
    if (text == "left-right" || text == "lr") {
        return left_right();
    }
    if (text == "top-bottom" || text == "tb") {
        return top_bottom();
    }
    if (text.rfind("angle:", 0) == 0) {
        try {
            std::size_t used = 0;
            const std::string num = text.substr(6);
            const double deg = std::stod(num, &used);
            if (used == num.size()) {
                return from_angle(deg);
            }
        } catch (const std::logic_error&) {
        }
    }
    throw ConfigError("unknown illumination axis '" + text + "'");
}

FrequencyGrid make_frequency_grid(const OpticalConfig& config) {
    check_positive(config.magnification, "magnification");
    check_positive(config.pixel_size_um, "pixel_size_um");
    return FrequencyGrid(config.width, config.height, config.sampling_um());
}

PupilMask make_pupil(const FrequencyGrid& grid, const OpticalConfig& config) {
    check_cutoff(grid, config);
    const double r = config.cutoff();
    PupilMask pupil{RealImage(grid.width(), grid.height())};
    for (int y = 0; y < grid.height(); ++y) {
        for (int x = 0; x < grid.width(); ++x) {
            pupil.values(x, y) = in_disc(grid.kx(x), grid.ky(y), r) ? 1.0 : 0.0;
        }
    }
    return pupil;
}

std::pair<SourceMask, SourceMask> make_source_pair(const FrequencyGrid& grid,
                                                   const OpticalConfig& config, const Axis& axis,
                                                   const SourceGeometry& geometry) {
    check_cutoff(grid, config);
    if (geometry.shape == SourceShape::HalfAnnulus &&
        !(geometry.inner_factor >= 0.0 && geometry.inner_factor < 1.0)) {
        throw ConfigError("annulus inner factor must lie in [0, 1)");
    }
    if (axis.ux == 0.0 && axis.uy == 0.0) {
        throw ConfigError("axis direction must be non-zero");
    }
    const double outer = config.cutoff();
    const double inner =
        geometry.shape == SourceShape::HalfAnnulus ? geometry.inner_factor * outer : 0.0;

    SourceMask pos{RealImage(grid.width(), grid.height()), axis.pos_label, geometry};
    SourceMask neg{RealImage(grid.width(), grid.height()), axis.neg_label, geometry};
    for (int y = 0; y < grid.height(); ++y) {
        for (int x = 0; x < grid.width(); ++x) {
            const double kx = grid.kx(x);
            const double ky = grid.ky(y);
            const bool ring = in_disc(kx, ky, outer) && kx * kx + ky * ky >= inner * inner;
            const bool half = kx * axis.ux + ky * axis.uy > 0.0;
            pos.values(x, y) = (ring && half) ? 1.0 : 0.0;
        }
    }
    for (int y = 0; y < grid.height(); ++y) {
        for (int x = 0; x < grid.width(); ++x) {
            neg.values(x, y) = pos.values(grid.mirror_x(x), grid.mirror_y(y));
        }
    }
    return {std::move(pos), std::move(neg)};
}

TransferFunction compute_ptf(const PupilMask& pupil, const SourceMask& source_pos,
                             const SourceMask& source_neg) {
    const RealImage& p = pupil.values;
    require_same_shape(p, source_pos.values, "compute_ptf");
    require_same_shape(p, source_neg.values, "compute_ptf");
    const int w = p.width();
    const int h = p.height();

    double background = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        background += (source_pos.values[i] + source_neg.values[i]) * p[i] * p[i];
    }
    if (!(background > 0.0)) {
        throw DegenerateOpticsError("illumination source does not overlap the pupil");
    }

    // Zero-padded correlation A(m) = sum_j f(j) g(j + m), f = (S_pos - S_neg) P, g = P.
    const int pw = 2 * w;
    const int ph = 2 * h;
    auto signed_of = [](int i, int n) { return i < (n + 1) / 2 ? i : i - n; };
    auto wrap = [](int s, int n) { return ((s % n) + n) % n; };
    ComplexImage f(pw, ph);
    ComplexImage g(pw, ph);
    for (int y = 0; y < h; ++y) {
        const int py = wrap(signed_of(y, h), ph);
        for (int x = 0; x < w; ++x) {
            const int px = wrap(signed_of(x, w), pw);
            const double pv = p(x, y);
            f(px, py) = (source_pos.values(x, y) - source_neg.values(x, y)) * pv;
            g(px, py) = pv;
        }
    }
    fft::ComplexFft2d plan(pw, ph);
    ComplexImage fs;
    ComplexImage gs;
    plan.forward(f, fs);
    plan.forward(g, gs);
    for (std::size_t i = 0; i < fs.size(); ++i) {
        fs[i] = std::conj(fs[i]) * gs[i];
    }
    ComplexImage corr;
    plan.inverse(fs, corr);

    auto a_at = [&](int sx, int sy) { return corr(wrap(sx, pw), wrap(sy, ph)).real(); };

    TransferFunction ptf{ComplexImage(w, h), source_pos.direction + "/" + source_neg.direction};
    for (int y = 0; y < h; ++y) {
        const int sy = signed_of(y, h);
        const bool nyq_y = h % 2 == 0 && y == h / 2;
        for (int x = 0; x < w; ++x) {
            const int sx = signed_of(x, w);
            const bool nyq_x = w % 2 == 0 && x == w / 2;
            if (nyq_x || nyq_y || (x == 0 && y == 0)) {
                continue;
            }
            const double odd = (a_at(sx, sy) - a_at(-sx, -sy)) / background;
            ptf.values(x, y) = {0.0, odd};
        }
    }
    return ptf;
}

ConvolutionKernel kernel_from_ptf(const TransferFunction& ptf) {
    const ComplexImage spatial = fft::ifft2(ptf.values);
    ConvolutionKernel kernel{RealImage(spatial.width(), spatial.height()), ptf.axis};
    double max_real = 0.0;
    double max_imag = 0.0;
    for (std::size_t i = 0; i < spatial.size(); ++i) {
        kernel.values[i] = spatial[i].real();
        max_real = std::max(max_real, std::abs(spatial[i].real()));
        max_imag = std::max(max_imag, std::abs(spatial[i].imag()));
    }
    if (max_imag > kSymmetryTolerance * max_real && max_imag > 0.0) {
        std::ostringstream msg;
        msg << "transfer function is not Hermitian: imaginary kernel residue " << max_imag
            << " exceeds " << kSymmetryTolerance << " x " << max_real;
        throw SymmetryError(msg.str());
    }
    return kernel;
}

double odd_symmetry_residual(const ComplexImage& values) {
    const int w = values.width();
    const int h = values.height();
    double worst = 0.0;
    for (int y = 0; y < h; ++y) {
        if (h % 2 == 0 && y == h / 2) {
            continue;
        }
        for (int x = 0; x < w; ++x) {
            if (w % 2 == 0 && x == w / 2) {
                continue;
            }
            const auto sum = values(x, y) + values((w - x) % w, (h - y) % h);
            worst = std::max(worst, std::abs(sum));
        }
    }
    return worst;
}

double max_abs(const ComplexImage& values) {
    double m = 0.0;
    for (const auto& v : values) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

double max_abs_real(const ComplexImage& values) {
    double m = 0.0;
    for (const auto& v : values) {
        m = std::max(m, std::abs(v.real()));
    }
    return m;
}

std::vector<AxisOptics> build_axis_optics(const OpticalConfig& config,
                                          const std::vector<Axis>& axes,
                                          const SourceGeometry& geometry) {
    config.validate();
    if (axes.empty()) {
        throw ConfigError("at least one illumination axis is required");
    }
    const FrequencyGrid grid = make_frequency_grid(config);
    const PupilMask pupil = make_pupil(grid, config);
    std::vector<AxisOptics> out;
    out.reserve(axes.size());
    for (const Axis& axis : axes) {
        auto [pos, neg] = make_source_pair(grid, config, axis, geometry);
        SourceMask dark_pos{RealImage(config.width, config.height), "none", geometry};
        AxisOptics optics{axis, compute_ptf(pupil, pos, neg), compute_ptf(pupil, pos, dark_pos),
                          compute_ptf(pupil, neg, dark_pos)};
        optics.pair.axis = axis.name;
        optics.single_pos.axis = axis.pos_label;
        optics.single_neg.axis = axis.neg_label;
        out.push_back(std::move(optics));
    }
    return out;
}

}  // namespace qdpc
