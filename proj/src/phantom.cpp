#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <string_view>

#include "qdpc/forward.hpp"

namespace qdpc {

namespace {

using Pattern = RealImage;

Pattern siemens_star(int w, int h) {
    constexpr int kSpokes = 16;
    Pattern p(w, h);
    const double cx = 0.5 * w;
    const double cy = 0.5 * h;
    const double radius = 0.42 * std::min(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double dx = x + 0.5 - cx;
            const double dy = y + 0.5 - cy;
            if (dx * dx + dy * dy > radius * radius) {
                continue;
            }
            p(x, y) = std::sin(kSpokes * std::atan2(dy, dx)) >= 0.0 ? 1.0 : 0.0;
        }
    }
    return p;
}

Pattern binary_blobs(int w, int h, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double scale = std::min(w, h);
    const int count = 10 + static_cast<int>(unit(rng) * 8.0);
    Pattern p(w, h);
    for (int b = 0; b < count; ++b) {
        const double cx = (0.1 + 0.8 * unit(rng)) * w;
        const double cy = (0.1 + 0.8 * unit(rng)) * h;
        const double ra = (0.04 + 0.08 * unit(rng)) * scale;
        const double rb = (0.04 + 0.08 * unit(rng)) * scale;
        const double theta = unit(rng) * std::numbers::pi;
        const double c = std::cos(theta);
        const double s = std::sin(theta);
        const int x0 = std::max(0, static_cast<int>(cx - std::max(ra, rb) - 1));
        const int x1 = std::min(w - 1, static_cast<int>(cx + std::max(ra, rb) + 1));
        const int y0 = std::max(0, static_cast<int>(cy - std::max(ra, rb) - 1));
        const int y1 = std::min(h - 1, static_cast<int>(cy + std::max(ra, rb) + 1));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const double dx = x + 0.5 - cx;
                const double dy = y + 0.5 - cy;
                const double u = (c * dx + s * dy) / ra;
                const double v = (-s * dx + c * dy) / rb;
                if (u * u + v * v <= 1.0) {
                    p(x, y) = 1.0;
                }
            }
        }
    }
    return p;
}

void fill_rect(Pattern& p, double x0, double y0, double x1, double y1) {
    const int ix0 = std::max(0, static_cast<int>(std::lround(x0)));
    const int iy0 = std::max(0, static_cast<int>(std::lround(y0)));
    const int ix1 = std::min(p.width(), static_cast<int>(std::lround(x1)));
    const int iy1 = std::min(p.height(), static_cast<int>(std::lround(y1)));
    for (int y = iy0; y < iy1; ++y) {
        for (int x = ix0; x < ix1; ++x) {
            p(x, y) = 1.0;
        }
    }
}

// Three groups of three bars per orientation, bar width shrinking group by group.
Pattern bar_target(int w, int h) {
    Pattern p(w, h);
    const double s = std::min(w, h);
    constexpr std::array<double, 3> kBarWidth{0.05, 0.032, 0.02};
    const double length = 0.22 * s;
    double offset = 0.08 * s;
    for (double bw : kBarWidth) {
        const double bar = bw * s;
        for (int i = 0; i < 3; ++i) {
            // vertical bars in the upper half, horizontal bars in the lower half
            const double x = offset + 2.0 * i * bar;
            fill_rect(p, x, 0.12 * h, x + bar, 0.12 * h + length);
            const double y = 0.55 * h + 2.0 * i * bar;
            fill_rect(p, offset, y, offset + length, y + bar);
        }
        offset += 6.0 * bar + 0.06 * s;
    }
    return p;
}

Pattern smooth_bumps(int w, int h, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double scale = std::min(w, h);
    const int count = 8 + static_cast<int>(unit(rng) * 6.0);
    Pattern p(w, h);
    for (int b = 0; b < count; ++b) {
        const double cx = unit(rng) * w;
        const double cy = unit(rng) * h;
        const double sigma = (0.03 + 0.07 * unit(rng)) * scale;
        const double amp = 0.3 + 0.7 * unit(rng);
        const double inv = 1.0 / (2.0 * sigma * sigma);
        for (int y = 0; y < h; ++y) {
            // periodic distance keeps the phantom seamless under circular convolution
            double dy = std::abs(y + 0.5 - cy);
            dy = std::min(dy, h - dy);
            for (int x = 0; x < w; ++x) {
                double dx = std::abs(x + 0.5 - cx);
                dx = std::min(dx, w - dx);
                p(x, y) += amp * std::exp(-(dx * dx + dy * dy) * inv);
            }
        }
    }
    const double peak = *std::max_element(p.begin(), p.end());
    if (peak > 0.0) {
        for (auto& v : p) {
            v /= peak;
        }
    }
    return p;
}

// 5x7 glyphs, one row per string, '#' set.
struct Glyph {
    char c;
    std::array<std::string_view, 7> rows;
};

constexpr std::array<Glyph, 8> kFont{{
    {'A', {" ### ", "#   #", "#   #", "#####", "#   #", "#   #", "#   #"}},
    {'C', {" ####", "#    ", "#    ", "#    ", "#    ", "#    ", " ####"}},
    {'D', {"#### ", "#   #", "#   #", "#   #", "#   #", "#   #", "#### "}},
    {'E', {"#####", "#    ", "#    ", "#### ", "#    ", "#    ", "#####"}},
    {'H', {"#   #", "#   #", "#   #", "#####", "#   #", "#   #", "#   #"}},
    {'P', {"#### ", "#   #", "#   #", "#### ", "#    ", "#    ", "#    "}},
    {'Q', {" ### ", "#   #", "#   #", "#   #", "# # #", "#  # ", " ## #"}},
    {'S', {" ####", "#    ", "#    ", " ### ", "    #", "    #", "#### "}},
}};

const Glyph* find_glyph(char c) {
    for (const auto& g : kFont) {
        if (g.c == c) {
            return &g;
        }
    }
    return nullptr;
}

void draw_text(Pattern& p, std::string_view text, double left, double top, double cell) {
    for (std::size_t i = 0; i < text.size(); ++i) {
        const Glyph* g = find_glyph(text[i]);
        if (g == nullptr) {
            continue;
        }
        const double gx = left + static_cast<double>(i) * 6.0 * cell;
        for (int r = 0; r < 7; ++r) {
            for (int c = 0; c < 5; ++c) {
                if (g->rows[r][c] == '#') {
                    fill_rect(p, gx + c * cell, top + r * cell, gx + (c + 1) * cell,
                              top + (r + 1) * cell);
                }
            }
        }
    }
}

Pattern text_mask(int w, int h) {
    Pattern p(w, h);
    // "PHASE" is 5 glyphs = 29 cells wide; leave a margin on both sides.
    const double cell = std::min(w / 36.0, h / 22.0);
    const double left = 0.5 * (w - 29.0 * cell);
    draw_text(p, "PHASE", left, 0.5 * h - 9.0 * cell, cell);
    draw_text(p, "QDPC", left + 3.0 * cell, 0.5 * h + 2.0 * cell, cell);
    return p;
}

std::vector<double> gaussian_taps(double sigma) {
    const int radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
    std::vector<double> taps(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        taps[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
        sum += taps[i + radius];
    }
    for (auto& t : taps) {
        t /= sum;
    }
    return taps;
}

Pattern periodic_blur(const Pattern& in, double sigma) {
    const auto taps = gaussian_taps(sigma);
    const int radius = static_cast<int>(taps.size() / 2);
    const int w = in.width();
    const int h = in.height();
    Pattern tmp(w, h);
    Pattern out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                acc += taps[k + radius] * in(((x + k) % w + w) % w, y);
            }
            tmp(x, y) = acc;
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                acc += taps[k + radius] * tmp(x, ((y + k) % h + h) % h);
            }
            out(x, y) = acc;
        }
    }
    return out;
}

}  // namespace

PhantomKind parse_phantom_kind(const std::string& name) {
    if (name == "siemens-star") return PhantomKind::SiemensStar;
    if (name == "binary-blobs") return PhantomKind::BinaryBlobs;
    if (name == "bar-target") return PhantomKind::BarTarget;
    if (name == "smooth-bumps") return PhantomKind::SmoothBumps;
    if (name == "text-mask") return PhantomKind::TextMask;
    throw ConfigError("unknown phantom kind '" + name + "'");
}

std::string to_string(PhantomKind kind) {
    switch (kind) {
        case PhantomKind::SiemensStar: return "siemens-star";
        case PhantomKind::BinaryBlobs: return "binary-blobs";
        case PhantomKind::BarTarget: return "bar-target";
        case PhantomKind::SmoothBumps: return "smooth-bumps";
        case PhantomKind::TextMask: return "text-mask";
    }
    return "unknown";
}

PhaseImage generate_phantom(const PhantomSpec& spec) {
    if (spec.width < 1 || spec.height < 1) {
        throw ConfigError("phantom size must be positive");
    }
    if (!(spec.hi >= spec.lo) || !std::isfinite(spec.lo) || !std::isfinite(spec.hi)) {
        throw ConfigError("phantom phase range must satisfy lo <= hi");
    }
    if (!(spec.smoothing_px >= 0.0)) {
        throw ConfigError("phantom smoothing must be non-negative");
    }
    const int w = spec.width;
    const int h = spec.height;
    Pattern pattern;
    switch (spec.kind) {
        case PhantomKind::SiemensStar: pattern = siemens_star(w, h); break;
        case PhantomKind::BinaryBlobs: pattern = binary_blobs(w, h, spec.seed); break;
        case PhantomKind::BarTarget: pattern = bar_target(w, h); break;
        case PhantomKind::SmoothBumps: pattern = smooth_bumps(w, h, spec.seed); break;
        case PhantomKind::TextMask: pattern = text_mask(w, h); break;
    }
    if (spec.smoothing_px > 0.0) {
        pattern = periodic_blur(pattern, spec.smoothing_px);
    }
    PhaseImage phase(w, h);
    const double span = spec.hi - spec.lo;
    for (std::size_t i = 0; i < phase.size(); ++i) {
        const double t = std::clamp(pattern[i], 0.0, 1.0);
        if (t == 0.0) {
            phase[i] = spec.lo;
        } else if (t == 1.0) {
            phase[i] = spec.hi;
        } else {
            phase[i] = std::clamp(spec.lo + span * t, spec.lo, spec.hi);
        }
    }
    return phase;
}

}  // namespace qdpc
