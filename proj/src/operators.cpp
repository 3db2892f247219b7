#include "qdpc/operators.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace qdpc {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

// Periodic neighbour tables.
struct Wrap {
    std::vector<int> next;
    std::vector<int> prev;
    explicit Wrap(int n) : next(n), prev(n) {
        for (int i = 0; i < n; ++i) {
            next[i] = (i + 1) % n;
            prev[i] = (i + n - 1) % n;
        }
    }
};

ComplexImage real_half_spectrum(fft::RealFft2d& plan, const RealImage& image) {
    ComplexImage out;
    plan.forward(image, out);
    return out;
}

}  // namespace

int DpcStack::width() const { return images.empty() ? 0 : images.front().values.width(); }
int DpcStack::height() const { return images.empty() ? 0 : images.front().values.height(); }

void DpcStack::validate() const {
    if (images.empty()) {
        throw ConfigError("DPC stack must contain at least one image");
    }
    if (images.size() != transfer_functions.size()) {
        throw ConfigError("DPC stack needs one transfer function per image");
    }
    for (std::size_t n = 0; n < images.size(); ++n) {
        require_same_shape(images[n].values, images.front().values, "DpcStack");
        require_same_shape(transfer_functions[n].values, images.front().values, "DpcStack");
        for (double v : images[n].values) {
            if (!std::isfinite(v)) {
                throw ConfigError("DPC image contains non-finite values");
            }
        }
        const ComplexImage& h = transfer_functions[n].values;
        const double scale = max_abs(h);
        if (h[0] != std::complex<double>(0.0, 0.0)) {
            throw SymmetryError("transfer function must vanish at DC");
        }
        if (odd_symmetry_residual(h) > 1e-10 * scale || max_abs_real(h) > 1e-10 * scale) {
            std::ostringstream msg;
            msg << "transfer function " << n << " is not purely imaginary and odd";
            throw SymmetryError(msg.str());
        }
    }
}

void hessian_apply(const RealImage& phi, HessianField& out) {
    const int w = phi.width();
    const int h = phi.height();
    for (RealImage* c : {&out.xx, &out.yy, &out.xy}) {
        if (!c->same_shape(phi)) {
            *c = RealImage(w, h);
        }
    }
    const Wrap wx(w);
    const Wrap wy(h);
    for (int y = 0; y < h; ++y) {
        const double* row = &phi(0, y);
        const double* row_n = &phi(0, wy.next[y]);
        const double* row_p = &phi(0, wy.prev[y]);
        double* xx = &out.xx(0, y);
        double* yy = &out.yy(0, y);
        double* xy = &out.xy(0, y);
        for (int x = 0; x < w; ++x) {
            const int xn = wx.next[x];
            const double c = row[x];
            xx[x] = row[xn] - 2.0 * c + row[wx.prev[x]];
            yy[x] = row_n[x] - 2.0 * c + row_p[x];
            xy[x] = kSqrt2 * (row_n[xn] - row[xn] - row_n[x] + c);
        }
    }
}

HessianField hessian_apply(const RealImage& phi) {
    HessianField out;
    hessian_apply(phi, out);
    return out;
}

void hessian_adjoint_add(const HessianField& field, double scale, RealImage& out) {
    require_same_shape(field.xx, field.yy, "hessian_adjoint");
    require_same_shape(field.xx, field.xy, "hessian_adjoint");
    require_same_shape(field.xx, out, "hessian_adjoint");
    const int w = field.xx.width();
    const int h = field.xx.height();
    const Wrap wx(w);
    const Wrap wy(h);
    for (int y = 0; y < h; ++y) {
        const int yn = wy.next[y];
        const int yp = wy.prev[y];
        const double* xx = &field.xx(0, y);
        const double* yy = &field.yy(0, y);
        const double* yy_n = &field.yy(0, yn);
        const double* yy_p = &field.yy(0, yp);
        const double* xy = &field.xy(0, y);
        const double* xy_p = &field.xy(0, yp);
        double* o = &out(0, y);
        for (int x = 0; x < w; ++x) {
            const int xp = wx.prev[x];
            const double gxx = xx[wx.next[x]] - 2.0 * xx[x] + xx[xp];
            const double gyy = yy_n[x] - 2.0 * yy[x] + yy_p[x];
            const double gxy = xy_p[xp] - xy[xp] - xy_p[x] + xy[x];
            o[x] += scale * (gxx + gyy + kSqrt2 * gxy);
        }
    }
}

RealImage hessian_adjoint(const HessianField& field) {
    RealImage out(field.xx.width(), field.xx.height());
    hessian_adjoint_add(field, 1.0, out);
    return out;
}

GradientField gradient_apply(const RealImage& phi) {
    const int w = phi.width();
    const int h = phi.height();
    const Wrap wx(w);
    const Wrap wy(h);
    GradientField out{RealImage(w, h), RealImage(w, h)};
    for (int y = 0; y < h; ++y) {
        const int yn = wy.next[y];
        for (int x = 0; x < w; ++x) {
            out.dx(x, y) = phi(wx.next[x], y) - phi(x, y);
            out.dy(x, y) = phi(x, yn) - phi(x, y);
        }
    }
    return out;
}

RealImage gradient_adjoint(const GradientField& field) {
    require_same_shape(field.dx, field.dy, "gradient_adjoint");
    const int w = field.dx.width();
    const int h = field.dx.height();
    const Wrap wx(w);
    const Wrap wy(h);
    RealImage out(w, h);
    for (int y = 0; y < h; ++y) {
        const int yp = wy.prev[y];
        for (int x = 0; x < w; ++x) {
            out(x, y) = field.dx(wx.prev[x], y) - field.dx(x, y) + field.dy(x, yp) - field.dy(x, y);
        }
    }
    return out;
}

RealImage convolve_apply(const RealImage& phi, const TransferFunction& ptf) {
    require_same_shape(phi, ptf.values, "convolve_apply");
    fft::RealFft2d plan(phi.width(), phi.height());
    ComplexImage spec = real_half_spectrum(plan, phi);
    const ComplexImage h = fft::crop_half_spectrum(ptf.values);
    for (std::size_t i = 0; i < spec.size(); ++i) {
        spec[i] *= h[i];
    }
    RealImage out;
    plan.inverse(spec, out);
    return out;
}

RealImage convolve_adjoint(const RealImage& y, const TransferFunction& ptf) {
    require_same_shape(y, ptf.values, "convolve_adjoint");
    fft::RealFft2d plan(y.width(), y.height());
    ComplexImage spec = real_half_spectrum(plan, y);
    const ComplexImage h = fft::crop_half_spectrum(ptf.values);
    for (std::size_t i = 0; i < spec.size(); ++i) {
        spec[i] *= std::conj(h[i]);
    }
    RealImage out;
    plan.inverse(spec, out);
    return out;
}

double inner(const RealImage& a, const RealImage& b) {
    require_same_shape(a, b, "inner");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

double inner(const HessianField& a, const HessianField& b) {
    return inner(a.xx, b.xx) + inner(a.yy, b.yy) + inner(a.xy, b.xy);
}

SpectralStack::SpectralStack(const DpcStack& stack)
    : stack_(&stack), width_(stack.width()), height_(stack.height()),
      fft_((stack.validate(), stack.width()), stack.height()) {
    const int half = width_ / 2 + 1;
    data_power_ = RealImage(half, height_);
    data_rhs_ = ComplexImage(half, height_);
    for (std::size_t n = 0; n < stack.count(); ++n) {
        transfer_.push_back(fft::crop_half_spectrum(stack.transfer_functions[n].values));
        data_.push_back(real_half_spectrum(fft_, stack.images[n].values));
        const ComplexImage& hn = transfer_.back();
        const ComplexImage& sn = data_.back();
        for (std::size_t i = 0; i < hn.size(); ++i) {
            data_power_[i] += std::norm(hn[i]);
            data_rhs_[i] += std::conj(hn[i]) * sn[i];
        }
    }

    // Regularizer spectra from the operators' impulse responses.
    RealImage delta(width_, height_);
    delta(0, 0) = 1.0;
    const HessianField hd = hessian_apply(delta);
    const GradientField gd = gradient_apply(delta);
    hessian_power_ = RealImage(half, height_);
    gradient_power_ = RealImage(half, height_);
    for (const RealImage* comp : {&hd.xx, &hd.yy, &hd.xy}) {
        const ComplexImage s = real_half_spectrum(fft_, *comp);
        for (std::size_t i = 0; i < s.size(); ++i) {
            hessian_power_[i] += std::norm(s[i]);
        }
    }
    for (const RealImage* comp : {&gd.dx, &gd.dy}) {
        const ComplexImage s = real_half_spectrum(fft_, *comp);
        for (std::size_t i = 0; i < s.size(); ++i) {
            gradient_power_[i] += std::norm(s[i]);
        }
    }
}

double SpectralStack::energy(const ComplexImage& half_spectrum) const {
    const int half = half_spectrum.width();
    double acc = 0.0;
    for (int y = 0; y < half_spectrum.height(); ++y) {
        for (int x = 0; x < half; ++x) {
            const bool single = x == 0 || (width_ % 2 == 0 && x == width_ / 2);
            acc += (single ? 1.0 : 2.0) * std::norm(half_spectrum(x, y));
        }
    }
    return acc / (static_cast<double>(width_) * height_);
}

}  // namespace qdpc
