#include "qdpc/config_io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

namespace qdpc {

namespace {

using EvpCtx = std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)>;

std::string to_hex(const unsigned char* digest, unsigned int len) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0x0f]);
    }
    return out;
}

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
            throw Error("sha256: OpenSSL digest init failed");
        }
    }
    void update(const void* data, std::size_t n) {
        if (EVP_DigestUpdate(ctx_.get(), data, n) != 1) {
            throw Error("sha256: digest update failed");
        }
    }
    std::string hex() {
        std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx_.get(), digest.data(), &len) != 1) {
            throw Error("sha256: digest final failed");
        }
        return to_hex(digest.data(), len);
    }

private:
    EvpCtx ctx_;
};

template <typename T>
void read_key(const Json& j, const char* key, T& out, const char* what) {
    if (!j.contains(key)) {
        return;
    }
    try {
        out = j.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw ConfigError(std::string(what) + "." + key + ": " + e.what());
    }
}

void require_object(const Json& j, const char* what) {
    if (!j.is_object()) {
        throw ConfigError(std::string(what) + ": expected a JSON object");
    }
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
    Sha256 h;
    h.update(bytes.data(), bytes.size());
    return h.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string() + " for hashing");
    }
    Sha256 h;
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0) {
            h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
        }
    }
    return h.hex();
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const Json& value) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << value.dump(2) << '\n';
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

void require_known_keys(const Json& j, const std::vector<std::string>& allowed, const char* what) {
    require_object(j, what);
    for (const auto& item : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
            throw ConfigError(std::string(what) + ": unknown key '" + item.key() + "'");
        }
    }
}

Json to_json(const OpticalConfig& c) {
    return {{"wavelength_um", c.wavelength_um}, {"na", c.na},
            {"magnification", c.magnification}, {"pixel_size_um", c.pixel_size_um},
            {"width", c.width},                 {"height", c.height}};
}

OpticalConfig optical_config_from_json(const Json& j, OpticalConfig base) {
    require_known_keys(j, {"wavelength_um", "na", "magnification", "pixel_size_um", "width", "height"},
                       "optics");
    read_key(j, "wavelength_um", base.wavelength_um, "optics");
    read_key(j, "na", base.na, "optics");
    read_key(j, "magnification", base.magnification, "optics");
    read_key(j, "pixel_size_um", base.pixel_size_um, "optics");
    read_key(j, "width", base.width, "optics");
    read_key(j, "height", base.height, "optics");
    base.validate();
    return base;
}

Json to_json(const SourceGeometry& g) {
    if (g.shape == SourceShape::HalfDisc) {
        return {{"shape", "half-disc"}};
    }
    return {{"shape", "half-annulus"}, {"inner_factor", g.inner_factor}};
}

SourceGeometry source_geometry_from_json(const Json& j) {
    require_known_keys(j, {"shape", "inner_factor"}, "source");
    std::string shape = "half-disc";
    double inner = 0.0;
    read_key(j, "shape", shape, "source");
    read_key(j, "inner_factor", inner, "source");
    if (shape == "half-disc") {
        return SourceGeometry::half_disc();
    }
    if (shape == "half-annulus") {
        if (!(inner >= 0.0 && inner < 1.0)) {
            throw ConfigError("source.inner_factor must lie in [0, 1)");
        }
        return SourceGeometry::half_annulus(inner);
    }
    throw ConfigError("source.shape: unknown shape '" + shape + "'");
}

Json axes_to_json(const std::vector<Axis>& axes) {
    Json out = Json::array();
    for (const auto& a : axes) {
        out.push_back(a.name);
    }
    return out;
}

std::vector<Axis> axes_from_json(const Json& j) {
    if (!j.is_array() || j.empty()) {
        throw ConfigError("axes: expected a non-empty array of axis names");
    }
    std::vector<Axis> out;
    for (const auto& item : j) {
        if (!item.is_string()) {
            throw ConfigError("axes: every entry must be a string");
        }
        out.push_back(Axis::parse(item.get<std::string>()));
    }
    return out;
}

Json to_json(const PhantomSpec& p) {
    return {{"kind", to_string(p.kind)}, {"width", p.width}, {"height", p.height},
            {"lo", p.lo},                {"hi", p.hi},       {"seed", p.seed},
            {"smoothing_px", p.smoothing_px}};
}

PhantomSpec phantom_spec_from_json(const Json& j, PhantomSpec base) {
    require_known_keys(j, {"kind", "width", "height", "lo", "hi", "seed", "smoothing_px", "id"},
                       "phantom");
    if (j.contains("kind")) {
        std::string kind;
        read_key(j, "kind", kind, "phantom");
        base.kind = parse_phantom_kind(kind);
    }
    read_key(j, "width", base.width, "phantom");
    read_key(j, "height", base.height, "phantom");
    read_key(j, "lo", base.lo, "phantom");
    read_key(j, "hi", base.hi, "phantom");
    read_key(j, "seed", base.seed, "phantom");
    read_key(j, "smoothing_px", base.smoothing_px, "phantom");
    if (!(base.hi >= base.lo) || !std::isfinite(base.lo) || !std::isfinite(base.hi)) {
        throw ConfigError("phantom: need finite lo <= hi");
    }
    if (!(base.smoothing_px >= 0.0)) {
        throw ConfigError("phantom.smoothing_px must be >= 0");
    }
    return base;
}

Json to_json(const NoiseSpec& n) {
    Json level = std::isinf(n.level) ? Json("inf") : Json(n.level);
    return {{"mode", to_string(n.mode)}, {"level", level}, {"seed", n.seed}};
}

NoiseSpec noise_spec_from_json(const Json& j, NoiseSpec base) {
    require_known_keys(j, {"mode", "level", "seed"}, "noise");
    if (j.contains("mode")) {
        std::string mode;
        read_key(j, "mode", mode, "noise");
        base.mode = parse_noise_mode(mode);
    }
    if (j.contains("level") && j.at("level").is_string()) {
        if (j.at("level").get<std::string>() != "inf") {
            throw ConfigError("noise.level: expected a number or \"inf\"");
        }
        base.level = INFINITY;
    } else {
        read_key(j, "level", base.level, "noise");
    }
    read_key(j, "seed", base.seed, "noise");
    if (base.mode == NoiseMode::RangeFraction && !(base.level >= 0.0 && std::isfinite(base.level))) {
        throw ConfigError("noise.level: range fraction must be finite and >= 0");
    }
    if (base.mode == NoiseMode::SnrDb && std::isnan(base.level)) {
        throw ConfigError("noise.level: SNR must be a number");
    }
    return base;
}

Json to_json(const TikhonovConfig& c) { return {{"alpha", c.alpha}}; }

Json to_json(const TvConfig& c) {
    Json j = {{"alpha", c.alpha},
              {"beta_max", c.beta_max},
              {"growth", c.growth},
              {"inner_tolerance", c.inner_tolerance},
              {"max_inner", c.max_inner}};
    if (c.beta0_init) {
        j["beta0_init"] = *c.beta0_init;
    }
    return j;
}

Json to_json(const HqsConfig& c) {
    return {{"alpha", c.alpha},         {"beta", c.beta},     {"alpha_max", c.alpha_max},
            {"beta_max", c.beta_max},   {"growth", c.growth}, {"initial_phi", c.initial_phi}};
}

Json to_json(const RldConfig& c) {
    return {{"alpha", c.alpha}, {"beta", c.beta},   {"c", c.c},         {"eta", c.eta},
            {"rho1", c.rho1},   {"rho2", c.rho2},   {"xi", c.xi},       {"t_max", c.t_max},
            {"abs_epsilon", c.abs_epsilon}};
}

TikhonovConfig tikhonov_config_from_json(const Json& j, TikhonovConfig base) {
    require_known_keys(j, {"alpha"}, "tikhonov");
    read_key(j, "alpha", base.alpha, "tikhonov");
    return base;
}

TvConfig tv_config_from_json(const Json& j, TvConfig base) {
    require_known_keys(j, {"alpha", "beta0_init", "beta_max", "growth", "inner_tolerance", "max_inner"},
                       "tv");
    read_key(j, "alpha", base.alpha, "tv");
    if (j.contains("beta0_init")) {
        double b = 0.0;
        read_key(j, "beta0_init", b, "tv");
        base.beta0_init = b;
    }
    read_key(j, "beta_max", base.beta_max, "tv");
    read_key(j, "growth", base.growth, "tv");
    read_key(j, "inner_tolerance", base.inner_tolerance, "tv");
    read_key(j, "max_inner", base.max_inner, "tv");
    return base;
}

HqsConfig hqs_config_from_json(const Json& j, HqsConfig base) {
    require_known_keys(j, {"alpha", "beta", "alpha_max", "beta_max", "growth", "initial_phi"},
                       "dsp-hqs");
    read_key(j, "alpha", base.alpha, "dsp-hqs");
    read_key(j, "beta", base.beta, "dsp-hqs");
    read_key(j, "alpha_max", base.alpha_max, "dsp-hqs");
    read_key(j, "beta_max", base.beta_max, "dsp-hqs");
    read_key(j, "growth", base.growth, "dsp-hqs");
    read_key(j, "initial_phi", base.initial_phi, "dsp-hqs");
    return base;
}

RldConfig rld_config_from_json(const Json& j, RldConfig base) {
    require_known_keys(j, {"alpha", "beta", "c", "eta", "rho1", "rho2", "xi", "t_max", "abs_epsilon"},
                       "dsp-rld");
    read_key(j, "alpha", base.alpha, "dsp-rld");
    read_key(j, "beta", base.beta, "dsp-rld");
    read_key(j, "c", base.c, "dsp-rld");
    read_key(j, "eta", base.eta, "dsp-rld");
    read_key(j, "rho1", base.rho1, "dsp-rld");
    read_key(j, "rho2", base.rho2, "dsp-rld");
    read_key(j, "xi", base.xi, "dsp-rld");
    read_key(j, "t_max", base.t_max, "dsp-rld");
    read_key(j, "abs_epsilon", base.abs_epsilon, "dsp-rld");
    return base;
}

}  // namespace qdpc
