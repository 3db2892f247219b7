#include "qdpc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "qdpc/metrics.hpp"
#include "qdpc/pfm.hpp"

namespace qdpc {

namespace fs = std::filesystem;

// ---- seeds ----------------------------------------------------------------

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    std::uint64_t state = master;
    std::uint64_t out = splitmix64(state);
    for (std::uint64_t v : path) {
        state = out ^ (v * 0xD1B54A32D192ED03ull + 0x632BE59BD9B4E019ull);
        out = splitmix64(state);
    }
    return out;
}

int default_jobs() {
    if (const char* env = std::getenv("QDPC_JOBS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) {
            return static_cast<int>(std::min<long>(v, 1024));
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// ---- methods ----------------------------------------------------------------

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string status_of(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return "config_error";
    if (dynamic_cast<const DivergenceError*>(&e)) return "diverged";
    if (dynamic_cast<const SingularError*>(&e)) return "singular";
    if (dynamic_cast<const DimensionError*>(&e)) return "dimension_error";
    return "error";
}

std::optional<double> number_key(const Json& j, const char* key) {
    if (!j.contains(key)) {
        return std::nullopt;
    }
    if (!j.at(key).is_number()) {
        throw ConfigError(std::string("method.") + key + " must be a number");
    }
    return j.at(key).get<double>();
}

}  // namespace

const std::vector<std::string>& method_names() {
    static const std::vector<std::string> names{"tikhonov", "tv", "dsp-hqs", "dsp-rld"};
    return names;
}

Method parse_method(const std::string& name) {
    if (name == "tikhonov") return Method::Tikhonov;
    if (name == "tv") return Method::Tv;
    if (name == "dsp-hqs") return Method::DspHqs;
    if (name == "dsp-rld") return Method::DspRld;
    throw ConfigError("unknown method '" + name + "' (expected tikhonov, tv, dsp-hqs or dsp-rld)");
}

std::string to_string(Method m) {
    return method_names()[static_cast<std::size_t>(m)];
}

MethodSpec method_spec_from_json(const Json& j) {
    if (j.is_string()) {
        return {parse_method(j.get<std::string>()), Json::object()};
    }
    if (!j.is_object() || !j.contains("name") || !j.at("name").is_string()) {
        throw ConfigError("method: expected a name string or an object with \"name\"");
    }
    MethodSpec spec{parse_method(j.at("name").get<std::string>()), j};
    spec.params.erase("name");
    // Validate keys up front so a typo fails before any compute.
    switch (spec.method) {
        case Method::Tikhonov: (void)tikhonov_config_from_json(spec.params); break;
        case Method::Tv: (void)tv_config_from_json(spec.params); break;
        case Method::DspHqs: (void)hqs_config_from_json(spec.params); break;
        case Method::DspRld: (void)rld_config_from_json(spec.params); break;
    }
    return spec;
}

Json to_json(const MethodSpec& m) {
    Json j = m.params;
    j["name"] = to_string(m.method);
    return j;
}

SolveOutcome solve(const DpcStack& stack, const MethodSpec& spec) {
    SolveOutcome out;
    out.sensor = estimate_noise(stack);
    const auto alpha_override = number_key(spec.params, "alpha");
    const auto beta_override = number_key(spec.params, "beta");
    const PenaltyParams auto_p = auto_params(out.sensor, beta_override);

    const auto t0 = std::chrono::steady_clock::now();
    switch (spec.method) {
        case Method::Tikhonov: {
            const TikhonovConfig cfg = tikhonov_config_from_json(spec.params);
            out.alpha_used = cfg.alpha;
            out.parameters = to_json(cfg);
            out.recon = tikhonov_reconstruct(stack, cfg);
            break;
        }
        case Method::Tv: {
            TvConfig cfg = tv_config_from_json(spec.params);
            if (!alpha_override) {
                cfg.alpha = auto_p.alpha;
                out.warning = auto_p.warning;
            }
            out.alpha_used = cfg.alpha;
            out.parameters = to_json(cfg);
            out.recon = tv_reconstruct(stack, cfg);
            break;
        }
        case Method::DspHqs:
        case Method::DspRld: {
            double alpha = auto_p.alpha;
            double beta = auto_p.beta;
            if (alpha_override) {
                alpha = *alpha_override;
                beta = beta_override.value_or(alpha / 2.0);
            } else {
                out.warning = auto_p.warning;
            }
            out.alpha_used = alpha;
            out.beta_used = beta;
            if (spec.method == Method::DspHqs) {
                HqsConfig cfg = hqs_config_from_json(spec.params);
                cfg.alpha = alpha;
                cfg.beta = beta;
                out.parameters = to_json(cfg);
                out.recon = hqs_reconstruct(stack, cfg);
            } else {
                RldConfig cfg = rld_config_from_json(spec.params);
                cfg.alpha = alpha;
                cfg.beta = beta;
                out.parameters = to_json(cfg);
                out.recon = rld_reconstruct(stack, cfg);
            }
            break;
        }
    }
    out.wall_ms = elapsed_ms(t0);
    return out;
}

// ---- simulate / manifest ------------------------------------------------------

namespace {

std::vector<AxisOptics> optics_for(const OpticalConfig& optics, const std::vector<Axis>& axes,
                                   const SourceGeometry& source) {
    return build_axis_optics(optics, axes, source);
}

// Removes tracked files unless dismissed.
class OutputGuard {
public:
    void track(const fs::path& p) { paths_.push_back(p); }
    void dismiss() { paths_.clear(); }
    ~OutputGuard() {
        for (const auto& p : paths_) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }

private:
    std::vector<fs::path> paths_;
};

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
    }
}

Json optics_block(const Json& j) {
    if (!j.contains("optics")) {
        return Json::object();
    }
    return j.at("optics");
}

}  // namespace

SimulateConfig simulate_config_from_json(const Json& j) {
    require_known_keys(j, {"optics", "axes", "source", "phantom", "noise", "output_dir"}, "simulate");
    SimulateConfig cfg;
    cfg.optics = optical_config_from_json(optics_block(j));
    if (j.contains("axes")) cfg.axes = axes_from_json(j.at("axes"));
    if (j.contains("source")) cfg.source = source_geometry_from_json(j.at("source"));
    PhantomSpec base;
    base.width = cfg.optics.width;
    base.height = cfg.optics.height;
    cfg.phantom = phantom_spec_from_json(j.value("phantom", Json::object()), base);
    if (cfg.phantom.width != cfg.optics.width || cfg.phantom.height != cfg.optics.height) {
        throw ConfigError("phantom size must match optics width/height");
    }
    cfg.noise = noise_spec_from_json(j.value("noise", Json::object()));
    if (j.contains("output_dir")) {
        if (!j.at("output_dir").is_string()) {
            throw ConfigError("simulate.output_dir must be a string");
        }
        cfg.output_dir = j.at("output_dir").get<std::string>();
    }
    return cfg;
}

Json Manifest::to_json() const {
    Json files_j = Json::array();
    for (const auto& f : files) {
        Json e = {{"role", f.role}, {"path", f.path}, {"sha256", f.sha256}};
        if (f.index >= 0) {
            e["index"] = f.index;
            e["axis"] = f.axis;
        }
        files_j.push_back(e);
    }
    return {{"format", "qdpc-manifest"},
            {"version", 1},
            {"optics", qdpc::to_json(optics)},
            {"axes", axes_to_json(axes)},
            {"source", qdpc::to_json(source)},
            {"phantom", qdpc::to_json(phantom)},
            {"noise", qdpc::to_json(noise)},
            {"noise_seeds", noise_seeds},
            {"files", files_j}};
}

const ManifestFile& Manifest::file(const std::string& role, int index) const {
    for (const auto& f : files) {
        if (f.role == role && f.index == index) {
            return f;
        }
    }
    throw IoError("manifest has no '" + role + "' entry" +
                  (index >= 0 ? " for image " + std::to_string(index) : std::string()));
}

Manifest run_simulate(const SimulateConfig& cfg) {
    cfg.optics.validate();
    const auto axes = optics_for(cfg.optics, cfg.axes, cfg.source);
    PhantomSpec ps = cfg.phantom;
    ps.width = cfg.optics.width;
    ps.height = cfg.optics.height;

    ensure_dir(cfg.output_dir);
    OutputGuard guard;
    Manifest m;
    m.dir = cfg.output_dir;
    m.optics = cfg.optics;
    m.axes = cfg.axes;
    m.source = cfg.source;
    m.phantom = ps;
    m.noise = cfg.noise;

    auto emit = [&](const RealImage& img, const std::string& name, const std::string& role, int index,
                    const std::string& axis) {
        const fs::path p = cfg.output_dir / name;
        guard.track(p);
        write_pfm(p, img);
        m.files.push_back({role, index, axis, name, sha256_file(p)});
    };

    const PhaseImage phantom = generate_phantom(ps);
    emit(phantom, "phantom.pfm", "phantom", -1, "");
    for (std::size_t n = 0; n < axes.size(); ++n) {
        const DpcImage clean = simulate_dpc(phantom, axes[n].pair);
        NoiseSpec ns = cfg.noise;
        ns.seed = derive_seed(cfg.noise.seed, {n});
        m.noise_seeds.push_back(ns.seed);
        const int idx = static_cast<int>(n);
        emit(clean.values, "dpc_" + std::to_string(n) + ".pfm", "dpc", idx, axes[n].axis.name);
        emit(add_noise(clean.values, ns), "dpc_noisy_" + std::to_string(n) + ".pfm", "dpc_noisy", idx,
             axes[n].axis.name);
    }
    const fs::path mpath = cfg.output_dir / "manifest.json";
    guard.track(mpath);
    write_json_file(mpath, m.to_json());
    guard.dismiss();
    return m;
}

Manifest load_manifest(const fs::path& path, bool verify) {
    const Json j = read_json_file(path);
    if (!j.is_object() || j.value("format", "") != "qdpc-manifest") {
        throw ConfigError(path.string() + " is not a qdpc manifest");
    }
    Manifest m;
    m.dir = path.parent_path();
    try {
        m.optics = optical_config_from_json(j.at("optics"));
        m.axes = axes_from_json(j.at("axes"));
        m.source = source_geometry_from_json(j.at("source"));
        m.phantom = phantom_spec_from_json(j.at("phantom"));
        m.noise = noise_spec_from_json(j.at("noise"));
        m.noise_seeds = j.value("noise_seeds", std::vector<std::uint64_t>{});
        for (const auto& f : j.at("files")) {
            m.files.push_back({f.at("role").get<std::string>(), f.value("index", -1),
                               f.value("axis", std::string()), f.at("path").get<std::string>(),
                               f.at("sha256").get<std::string>()});
        }
    } catch (const Json::exception& e) {
        throw ConfigError(path.string() + ": malformed manifest: " + e.what());
    }
    if (verify) {
        for (const auto& f : m.files) {
            const fs::path p = m.dir / f.path;
            if (!fs::exists(p)) {
                throw IoError("manifest lists missing file " + p.string());
            }
            if (sha256_file(p) != f.sha256) {
                throw IoError("stale checksum for " + p.string() +
                              " (file changed after the manifest was written)");
            }
        }
    }
    return m;
}

DpcStack load_stack(const Manifest& m, bool noisy) {
    const auto axes = optics_for(m.optics, m.axes, m.source);
    DpcStack stack;
    for (std::size_t n = 0; n < axes.size(); ++n) {
        const ManifestFile& f = m.file(noisy ? "dpc_noisy" : "dpc", static_cast<int>(n));
        RealImage img = read_pfm(m.dir / f.path);
        if (img.width() != m.optics.width || img.height() != m.optics.height) {
            throw DimensionError(f.path + " is " + std::to_string(img.width()) + "x" +
                                 std::to_string(img.height()) + " but the optics grid is " +
                                 std::to_string(m.optics.width) + "x" +
                                 std::to_string(m.optics.height));
        }
        stack.images.push_back({std::move(img), axes[n].axis.name});
        stack.transfer_functions.push_back(axes[n].pair);
    }
    stack.validate();
    return stack;
}

// ---- reconstruct / ptf / sensor -------------------------------------------------

Json run_reconstruct(const ReconstructRequest& req) {
    const Manifest m = load_manifest(req.manifest, true);
    const DpcStack stack = load_stack(m, req.noisy);
    const SolveOutcome r = solve(stack, req.method);

    ensure_dir(req.output_dir);
    const fs::path phase_path = req.output_dir / "phase.pfm";
    write_pfm(phase_path, r.recon.phase);

    Json report = {{"method", to_string(req.method.method)},
                   {"input", req.noisy ? "dpc_noisy" : "dpc"},
                   {"manifest", fs::absolute(req.manifest).string()},
                   {"alpha_used", r.alpha_used},
                   {"beta_used", r.beta_used},
                   {"sensor", {{"A", r.sensor.a}, {"per_image", r.sensor.per_image}}},
                   {"parameters", r.parameters},
                   {"cost_trace", r.recon.cost_trace},
                   {"final_cost", r.recon.cost_trace.empty() ? 0.0 : r.recon.cost_trace.back()},
                   {"iterations", r.recon.iterations},
                   {"outer_iterations", r.recon.outer_iterations},
                   {"wall_ms", r.wall_ms},
                   {"output", "phase.pfm"},
                   {"output_sha256", sha256_file(phase_path)}};
    if (r.warning) {
        report["warning"] = *r.warning;
    }
    try {
        const RealImage truth = read_pfm(m.dir / m.file("phantom").path);
        const LsnrResult q = lsnr(truth, r.recon.phase);
        report["lsnr_db"] = q.lsnr_db;
        report["lsnr_offset"] = q.offset;
    } catch (const ReferenceError&) {
        // Constant phantom: no score.
    }
    write_json_file(req.output_dir / "report.json", report);
    return report;
}

Json run_ptf(const Json& cfg, const fs::path& output_dir) {
    if (!cfg.is_object()) {
        throw ConfigError("ptf: expected a JSON object");
    }
    const OpticalConfig optics = optical_config_from_json(optics_block(cfg));
    std::vector<Axis> axes{Axis::left_right(), Axis::top_bottom()};
    if (cfg.contains("axes")) axes = axes_from_json(cfg.at("axes"));
    SourceGeometry source;
    if (cfg.contains("source")) source = source_geometry_from_json(cfg.at("source"));
    const auto built = build_axis_optics(optics, axes, source);

    ensure_dir(output_dir);
    OutputGuard guard;
    Json listing = {{"optics", to_json(optics)}, {"source", to_json(source)},
                    {"layout", "unshifted DFT, index (0,0) is DC"}, {"axes", Json::array()}};
    for (std::size_t n = 0; n < built.size(); ++n) {
        const ComplexImage& h = built[n].pair.values;
        RealImage re(h.width(), h.height());
        RealImage im(h.width(), h.height());
        for (std::size_t i = 0; i < h.size(); ++i) {
            re[i] = h[i].real();
            im[i] = h[i].imag();
        }
        const std::string stem = "ptf_" + std::to_string(n);
        for (const auto& [name, img] : {std::pair{stem + "_real.pfm", &re}, std::pair{stem + "_imag.pfm", &im}}) {
            guard.track(output_dir / name);
            write_pfm(output_dir / name, *img);
        }
        listing["axes"].push_back({{"index", n},
                                   {"axis", built[n].axis.name},
                                   {"real", stem + "_real.pfm"},
                                   {"imag", stem + "_imag.pfm"},
                                   {"max_abs", max_abs(h)},
                                   {"odd_residual", odd_symmetry_residual(h)},
                                   {"max_abs_real", max_abs_real(h)}});
    }
    guard.track(output_dir / "ptf.json");
    write_json_file(output_dir / "ptf.json", listing);
    guard.dismiss();
    return listing;
}

Json run_sensor(const fs::path& manifest, bool noisy, std::optional<double> beta_override) {
    const Manifest m = load_manifest(manifest, true);
    const DpcStack stack = load_stack(m, noisy);
    const NoiseEstimate est = estimate_noise(stack);
    const PenaltyParams p = auto_params(est, beta_override);
    Json out = {{"A", est.a}, {"alpha", p.alpha}, {"beta", p.beta}, {"per_image", est.per_image}};
    if (p.warning) {
        out["warning"] = *p.warning;
    }
    return out;
}

// ---- benchmark ----------------------------------------------------------------

void RunConfig::validate() const {
    optics.validate();
    if (trials < 1) throw ConfigError("run: trials must be >= 1");
    if (phantoms.empty()) throw ConfigError("run: at least one phantom is required");
    if (levels.empty()) throw ConfigError("run: at least one noise level is required");
    if (methods.empty()) throw ConfigError("run: at least one method is required");
    if (axes.empty()) throw ConfigError("run: at least one axis is required");
    for (std::size_t i = 0; i < phantoms.size(); ++i) {
        for (std::size_t k = i + 1; k < phantoms.size(); ++k) {
            if (phantoms[i].id == phantoms[k].id) {
                throw ConfigError("run: duplicate phantom id '" + phantoms[i].id + "'");
            }
        }
    }
}

Json RunConfig::to_json() const {
    Json ph = Json::array();
    for (const auto& p : phantoms) {
        Json e = qdpc::to_json(p.spec);
        e["id"] = p.id;
        if (!p.seed_fixed) {
            e.erase("seed");
        }
        e.erase("width");
        e.erase("height");
        ph.push_back(e);
    }
    Json me = Json::array();
    for (const auto& m : methods) {
        me.push_back(qdpc::to_json(m));
    }
    return {{"optics", qdpc::to_json(optics)},
            {"axes", axes_to_json(axes)},
            {"source", qdpc::to_json(source)},
            {"phantoms", ph},
            {"noise", {{"mode", to_string(noise_mode)}, {"levels", levels}}},
            {"methods", me},
            {"trials", trials},
            {"master_seed", master_seed},
            {"output_dir", output_dir.string()}};
}

RunConfig run_config_from_json(const Json& j) {
    require_known_keys(j, {"optics", "axes", "source", "phantoms", "noise", "methods", "trials",
                           "master_seed", "output_dir"},
                       "run");
    RunConfig cfg;
    cfg.optics = optical_config_from_json(optics_block(j));
    if (j.contains("axes")) cfg.axes = axes_from_json(j.at("axes"));
    if (j.contains("source")) cfg.source = source_geometry_from_json(j.at("source"));
    try {
        for (const auto& p : j.at("phantoms")) {
            PhantomEntry e;
            e.spec.width = cfg.optics.width;
            e.spec.height = cfg.optics.height;
            e.spec = phantom_spec_from_json(p, e.spec);
            if (e.spec.width != cfg.optics.width || e.spec.height != cfg.optics.height) {
                throw ConfigError("run: phantom size must match optics width/height");
            }
            e.id = p.value("id", to_string(e.spec.kind));
            e.seed_fixed = p.contains("seed");
            cfg.phantoms.push_back(e);
        }
        const Json& noise = j.at("noise");
        require_known_keys(noise, {"mode", "levels"}, "run.noise");
        cfg.noise_mode = parse_noise_mode(noise.value("mode", std::string("snr-db")));
        for (const auto& level : noise.at("levels")) {
            if (level.is_string() && level.get<std::string>() == "inf") {
                cfg.levels.push_back(INFINITY);
            } else {
                cfg.levels.push_back(level.get<double>());
            }
        }
        for (const auto& m : j.at("methods")) {
            cfg.methods.push_back(method_spec_from_json(m));
        }
        cfg.trials = j.value("trials", 1);
        cfg.master_seed = j.value("master_seed", std::uint64_t{0});
        if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("run config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

RunConfig preset_run_config(const std::string& name) {
    RunConfig cfg;
    int size = 0;
    if (name == "table1") {
        size = 600;
        cfg.trials = 10;
    } else if (name == "quick") {
        size = 256;
        cfg.trials = 3;
    } else {
        throw ConfigError("unknown preset '" + name + "' (expected table1 or quick)");
    }
    cfg.optics.width = size;
    cfg.optics.height = size;
    for (PhantomKind k : {PhantomKind::SiemensStar, PhantomKind::BinaryBlobs, PhantomKind::BarTarget,
                          PhantomKind::SmoothBumps, PhantomKind::TextMask}) {
        PhantomEntry e;
        e.id = to_string(k);
        e.spec.kind = k;
        e.spec.width = size;
        e.spec.height = size;
        e.spec.lo = 0.0;
        e.spec.hi = 1.0;
        cfg.phantoms.push_back(e);
    }
    cfg.noise_mode = NoiseMode::SnrDb;
    cfg.levels = {10.0, 15.0, 20.0, 30.0};
    cfg.methods = {{Method::Tikhonov, Json{{"alpha", 1e-4}}},
                   {Method::Tv, Json::object()},
                   {Method::DspHqs, Json::object()},
                   {Method::DspRld, Json::object()}};
    cfg.master_seed = 20240601;
    cfg.output_dir = "benchmark_" + name;
    return cfg;
}

int BenchmarkResult::failed() const {
    return static_cast<int>(std::count_if(records.begin(), records.end(),
                                          [](const BenchmarkRecord& r) { return r.status != "ok"; }));
}

double BenchmarkResult::failed_fraction() const {
    return records.empty() ? 0.0 : static_cast<double>(failed()) / static_cast<double>(records.size());
}

const SummaryCell* BenchmarkResult::average(double snr_db, const std::string& method) const {
    for (const auto& c : averages) {
        if (c.snr_db == snr_db && c.method == method) {
            return &c;
        }
    }
    return nullptr;
}

namespace {

SummaryCell summarize(const std::string& phantom, double level, const std::string& method,
                      const std::vector<const BenchmarkRecord*>& recs) {
    SummaryCell c{phantom, level, method};
    double sum = 0.0;
    double wall = 0.0;
    for (const auto* r : recs) {
        if (r->status == "ok") {
            ++c.n_ok;
            sum += r->lsnr_db;
            wall += r->wall_ms;
        } else {
            ++c.n_failed;
        }
    }
    if (c.n_ok > 0) {
        c.lsnr_mean = sum / c.n_ok;
        c.wall_ms_mean = wall / c.n_ok;
    }
    if (c.n_ok > 1) {
        double ss = 0.0;
        for (const auto* r : recs) {
            if (r->status == "ok") {
                ss += (r->lsnr_db - c.lsnr_mean) * (r->lsnr_db - c.lsnr_mean);
            }
        }
        c.lsnr_std = std::sqrt(ss / (c.n_ok - 1));
    }
    return c;
}

}  // namespace

BenchmarkResult run_benchmark(const RunConfig& cfg, int jobs, ProgressFn progress) {
    cfg.validate();
    const auto axes = build_axis_optics(cfg.optics, cfg.axes, cfg.source);

    // Ground truth and clean DPC images are shared, read-only, across trials.
    std::vector<PhaseImage> truths;
    std::vector<std::vector<RealImage>> clean;
    for (std::size_t p = 0; p < cfg.phantoms.size(); ++p) {
        PhantomSpec ps = cfg.phantoms[p].spec;
        if (!cfg.phantoms[p].seed_fixed) {
            ps.seed = derive_seed(cfg.master_seed, {1, p});
        }
        truths.push_back(generate_phantom(ps));
        std::vector<RealImage> s;
        for (const auto& ax : axes) {
            s.push_back(simulate_dpc(truths.back(), ax.pair).values);
        }
        clean.push_back(std::move(s));
    }

    const std::size_t np = cfg.phantoms.size();
    const std::size_t nl = cfg.levels.size();
    const std::size_t nt = static_cast<std::size_t>(cfg.trials);
    const std::size_t nm = cfg.methods.size();
    const std::size_t total = np * nl * nt;

    BenchmarkResult result;
    result.records.resize(total * nm);
    std::atomic<std::size_t> next{0};
    std::atomic<int> done{0};
    std::mutex progress_mutex;

    auto worker = [&] {
        for (std::size_t job = next++; job < total; job = next++) {
            const std::size_t p = job / (nl * nt);
            const std::size_t l = (job / nt) % nl;
            const std::size_t t = job % nt;

            DpcStack stack;
            for (std::size_t n = 0; n < axes.size(); ++n) {
                NoiseSpec ns{cfg.noise_mode, cfg.levels[l], derive_seed(cfg.master_seed, {2, p, l, t, n})};
                stack.images.push_back({add_noise(clean[p][n], ns), axes[n].axis.name});
                stack.transfer_functions.push_back(axes[n].pair);
            }
            for (std::size_t m = 0; m < nm; ++m) {
                BenchmarkRecord& rec = result.records[job * nm + m];
                rec.phantom = cfg.phantoms[p].id;
                rec.snr_db = cfg.levels[l];
                rec.method = to_string(cfg.methods[m].method);
                rec.trial = static_cast<int>(t);
                try {
                    const SolveOutcome r = solve(stack, cfg.methods[m]);
                    rec.alpha_used = r.alpha_used;
                    rec.beta_used = r.beta_used;
                    rec.wall_ms = r.wall_ms;
                    rec.lsnr_db = lsnr(truths[p], r.recon.phase).lsnr_db;
                    rec.status = std::isfinite(rec.lsnr_db) ? "ok" : "non_finite";
                } catch (const std::exception& e) {
                    rec.status = status_of(e);
                }
            }
            const int d = ++done;
            if (progress) {
                std::lock_guard lock(progress_mutex);
                progress(d, static_cast<int>(total));
            }
        }
    };

    const int threads = std::max(1, std::min(jobs, static_cast<int>(total)));
    std::vector<std::thread> pool;
    for (int i = 1; i < threads; ++i) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& th : pool) {
        th.join();
    }

    for (std::size_t l = 0; l < nl; ++l) {
        for (std::size_t m = 0; m < nm; ++m) {
            const std::string method = to_string(cfg.methods[m].method);
            std::vector<const BenchmarkRecord*> all;
            for (std::size_t p = 0; p < np; ++p) {
                std::vector<const BenchmarkRecord*> recs;
                for (std::size_t t = 0; t < nt; ++t) {
                    recs.push_back(&result.records[((p * nl + l) * nt + t) * nm + m]);
                }
                all.insert(all.end(), recs.begin(), recs.end());
                result.cells.push_back(summarize(cfg.phantoms[p].id, cfg.levels[l], method, recs));
            }
            result.averages.push_back(summarize("average", cfg.levels[l], method, all));
        }
    }
    // Cells in phantom-major order, matching the record order.
    std::stable_sort(result.cells.begin(), result.cells.end(),
                     [&](const SummaryCell& a, const SummaryCell& b) {
                         auto idx = [&](const std::string& id) {
                             for (std::size_t p = 0; p < np; ++p) {
                                 if (cfg.phantoms[p].id == id) return p;
                             }
                             return np;
                         };
                         return idx(a.phantom) < idx(b.phantom);
                     });
    return result;
}

namespace {

std::string level_str(double v) { return std::isinf(v) ? "inf" : fmt("%g", v); }

std::string cells_csv(const std::vector<SummaryCell>& cells) {
    std::ostringstream out;
    out << "phantom,snr_db,method,n_ok,n_failed,lsnr_mean,lsnr_std,wall_ms_mean\n";
    for (const auto& c : cells) {
        out << c.phantom << ',' << level_str(c.snr_db) << ',' << c.method << ',' << c.n_ok << ','
            << c.n_failed << ',' << (c.n_ok > 0 ? fmt("%.6f", c.lsnr_mean) : "") << ','
            << (c.n_ok > 0 ? fmt("%.6f", c.lsnr_std) : "") << ',' << fmt("%.3f", c.wall_ms_mean)
            << '\n';
    }
    return out.str();
}

Json cells_json(const std::vector<SummaryCell>& cells) {
    Json out = Json::array();
    for (const auto& c : cells) {
        out.push_back({{"phantom", c.phantom},
                       {"snr_db", c.snr_db},
                       {"method", c.method},
                       {"n_ok", c.n_ok},
                       {"n_failed", c.n_failed},
                       {"lsnr_mean", c.lsnr_mean},
                       {"lsnr_std", c.lsnr_std},
                       {"wall_ms_mean", c.wall_ms_mean}});
    }
    return out;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + p.string() + " for writing");
    }
    out << text;
    if (!out) {
        throw IoError("write failed for " + p.string());
    }
}

}  // namespace

std::string records_csv(const BenchmarkResult& r) {
    std::ostringstream out;
    out << "phantom,snr_db,method,trial,status,lsnr_db,alpha_used,beta_used,wall_ms\n";
    for (const auto& rec : r.records) {
        const bool ok = rec.status == "ok";
        out << rec.phantom << ',' << level_str(rec.snr_db) << ',' << rec.method << ',' << rec.trial
            << ',' << rec.status << ',' << (ok ? fmt("%.6f", rec.lsnr_db) : "") << ','
            << fmt("%.9g", rec.alpha_used) << ',' << fmt("%.9g", rec.beta_used) << ','
            << fmt("%.3f", rec.wall_ms) << '\n';
    }
    return out.str();
}

std::string summary_csv(const BenchmarkResult& r) { return cells_csv(r.cells); }
std::string average_csv(const BenchmarkResult& r) { return cells_csv(r.averages); }

void write_benchmark_outputs(const BenchmarkResult& r, const RunConfig& cfg, const fs::path& dir) {
    ensure_dir(dir);
    write_text(dir / "records.csv", records_csv(r));
    write_text(dir / "summary.csv", summary_csv(r));
    write_text(dir / "average.csv", average_csv(r));
    write_json_file(dir / "summary.json", {{"config", cfg.to_json()},
                                           {"records", r.records.size()},
                                           {"failed", r.failed()},
                                           {"failed_fraction", r.failed_fraction()},
                                           {"cells", cells_json(r.cells)},
                                           {"averages", cells_json(r.averages)}});
}

std::string format_table(const BenchmarkResult& r, const RunConfig& cfg) {
    std::map<std::tuple<std::string, double, std::string>, const SummaryCell*> lookup;
    for (const auto& c : r.cells) lookup[{c.phantom, c.snr_db, c.method}] = &c;
    for (const auto& c : r.averages) lookup[{c.phantom, c.snr_db, c.method}] = &c;

    std::vector<std::string> rows;
    for (const auto& p : cfg.phantoms) rows.push_back(p.id);
    rows.push_back("average");

    std::ostringstream out;
    const char* unit = cfg.noise_mode == NoiseMode::SnrDb ? " dB" : " (range fraction)";
    for (double level : cfg.levels) {
        out << "SNR " << level_str(level) << unit << '\n';
        char buf[64];
        std::snprintf(buf, sizeof buf, "  %-14s", "phantom");
        out << buf;
        for (const auto& m : cfg.methods) {
            std::snprintf(buf, sizeof buf, "%20s", to_string(m.method).c_str());
            out << buf;
        }
        out << '\n';
        for (const auto& row : rows) {
            std::snprintf(buf, sizeof buf, "  %-14s", row.c_str());
            out << buf;
            for (const auto& m : cfg.methods) {
                const auto it = lookup.find({row, level, to_string(m.method)});
                if (it == lookup.end() || it->second->n_ok == 0) {
                    std::snprintf(buf, sizeof buf, "%20s", "n/a");
                } else {
                    std::snprintf(buf, sizeof buf, "%11.3f +- %6.3f", it->second->lsnr_mean,
                                  it->second->lsnr_std);
                }
                out << buf;
            }
            out << '\n';
        }
    }
    return out.str();
}

}  // namespace qdpc
