#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include "qdpc/config_io.hpp"
#include "qdpc/forward.hpp"
#include "qdpc/noise_sensor.hpp"
#include "qdpc/operators.hpp"
#include "qdpc/solvers.hpp"

namespace qdpc {

// ---- seeds ----------------------------------------------------------------

/// One splitmix64 step: advances state and returns the mixed output.
[[nodiscard]] std::uint64_t splitmix64(std::uint64_t& state);

/// Seed for a position in the sweep (e.g. {phantom, level, trial, image}).
/// Depends only on master and path, never on execution order.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

/// QDPC_JOBS if set and positive, else the hardware thread count (at least 1).
[[nodiscard]] int default_jobs();

// ---- methods ----------------------------------------------------------------

enum class Method { Tikhonov, Tv, DspHqs, DspRld };

[[nodiscard]] Method parse_method(const std::string& name);
[[nodiscard]] std::string to_string(Method m);
[[nodiscard]] const std::vector<std::string>& method_names();

/// A method and its JSON settings. Missing alpha/beta are filled in at solve
/// time: tikhonov keeps its default alpha, tv takes alpha = A, the DSP methods
/// take alpha = A and beta = alpha / 2 from the noise sensor.
struct MethodSpec {
    Method method = Method::DspHqs;
    Json params = Json::object();
};

/// {"name": "...", other keys as in the method's config}.
[[nodiscard]] MethodSpec method_spec_from_json(const Json& j);
[[nodiscard]] Json to_json(const MethodSpec& m);

struct SolveOutcome {
    Reconstruction recon;
    double alpha_used = 0.0;
    double beta_used = 0.0;
    NoiseEstimate sensor;
    std::optional<std::string> warning;
    /// Full solver configuration actually used.
    Json parameters;
    /// Solver only; sensor and setup excluded.
    double wall_ms = 0.0;
};

[[nodiscard]] SolveOutcome solve(const DpcStack& stack, const MethodSpec& spec);

// ---- simulate / manifest ------------------------------------------------------

struct SimulateConfig {
    OpticalConfig optics;
    std::vector<Axis> axes{Axis::left_right(), Axis::top_bottom()};
    SourceGeometry source;
    PhantomSpec phantom;
    NoiseSpec noise;
    std::filesystem::path output_dir = "simulated";
};

/// Phantom width/height default to the optical grid and must match it.
[[nodiscard]] SimulateConfig simulate_config_from_json(const Json& j);

struct ManifestFile {
    std::string role;  // phantom | dpc | dpc_noisy
    int index = -1;
    std::string axis;
    std::string path;  // relative to the manifest directory
    std::string sha256;
};

struct Manifest {
    std::filesystem::path dir;
    OpticalConfig optics;
    std::vector<Axis> axes;
    SourceGeometry source;
    PhantomSpec phantom;
    NoiseSpec noise;
    std::vector<std::uint64_t> noise_seeds;
    std::vector<ManifestFile> files;

    [[nodiscard]] Json to_json() const;
    [[nodiscard]] const ManifestFile& file(const std::string& role, int index = -1) const;
};

/// Writes phantom.pfm, dpc_<n>.pfm, dpc_noisy_<n>.pfm and manifest.json.
/// Anything written before a failure is removed again.
Manifest run_simulate(const SimulateConfig& cfg);

/// With verify, every listed checksum is recomputed and a mismatch throws
/// IoError before any compute happens.
[[nodiscard]] Manifest load_manifest(const std::filesystem::path& path, bool verify = true);

/// DPC images plus transfer functions rebuilt from the manifest's optics.
[[nodiscard]] DpcStack load_stack(const Manifest& m, bool noisy);

// ---- reconstruct / ptf / sensor -------------------------------------------------

struct ReconstructRequest {
    std::filesystem::path manifest;
    MethodSpec method;
    bool noisy = true;
    std::filesystem::path output_dir = "reconstruction";
};

/// Writes phase.pfm and report.json; returns the report.
Json run_reconstruct(const ReconstructRequest& req);

/// Writes ptf_<n>_real.pfm / ptf_<n>_imag.pfm (unshifted DFT layout) and ptf.json.
/// `cfg` holds "optics" and optionally "axes" and "source"; other keys are ignored.
Json run_ptf(const Json& cfg, const std::filesystem::path& output_dir);

/// {"A", "alpha", "beta", "per_image"[, "warning"]}.
[[nodiscard]] Json run_sensor(const std::filesystem::path& manifest, bool noisy,
                              std::optional<double> beta_override = std::nullopt);

// ---- benchmark ----------------------------------------------------------------

struct PhantomEntry {
    std::string id;
    PhantomSpec spec;
    /// Explicit seed from the config; otherwise derived from the master seed.
    bool seed_fixed = false;
};

struct RunConfig {
    OpticalConfig optics;
    std::vector<Axis> axes{Axis::left_right(), Axis::top_bottom()};
    SourceGeometry source;
    std::vector<PhantomEntry> phantoms;
    NoiseMode noise_mode = NoiseMode::SnrDb;
    std::vector<double> levels;
    std::vector<MethodSpec> methods;
    int trials = 1;
    std::uint64_t master_seed = 0;
    std::filesystem::path output_dir = "benchmark";

    void validate() const;
    [[nodiscard]] Json to_json() const;
};

[[nodiscard]] RunConfig run_config_from_json(const Json& j);

/// "table1": 600x600, five stand-ins in [0, 1] rad, SNR {10, 15, 20, 30} dB,
/// four methods, 10 trials. "quick": the same at 256x256 with 3 trials.
[[nodiscard]] RunConfig preset_run_config(const std::string& name);

struct BenchmarkRecord {
    std::string phantom;
    double snr_db = 0.0;
    std::string method;
    int trial = 0;
    std::string status;
    double lsnr_db = 0.0;
    double alpha_used = 0.0;
    double beta_used = 0.0;
    double wall_ms = 0.0;
};

struct SummaryCell {
    std::string phantom;
    double snr_db = 0.0;
    std::string method;
    int n_ok = 0;
    int n_failed = 0;
    double lsnr_mean = 0.0;
    /// Sample (n - 1) standard deviation; 0 when n_ok < 2.
    double lsnr_std = 0.0;
    double wall_ms_mean = 0.0;
};

struct BenchmarkResult {
    std::vector<BenchmarkRecord> records;
    std::vector<SummaryCell> cells;
    /// Per (level, method) over every phantom; phantom = "average".
    std::vector<SummaryCell> averages;

    [[nodiscard]] int failed() const;
    [[nodiscard]] double failed_fraction() const;
    [[nodiscard]] const SummaryCell* average(double snr_db, const std::string& method) const;
};

/// Called after each finished (phantom, level, trial) job with done/total.
using ProgressFn = std::function<void(int done, int total)>;

[[nodiscard]] BenchmarkResult run_benchmark(const RunConfig& cfg, int jobs, ProgressFn progress = {});

[[nodiscard]] std::string records_csv(const BenchmarkResult& r);
[[nodiscard]] std::string summary_csv(const BenchmarkResult& r);
[[nodiscard]] std::string average_csv(const BenchmarkResult& r);

/// records.csv, summary.csv, average.csv and summary.json.
void write_benchmark_outputs(const BenchmarkResult& r, const RunConfig& cfg,
                             const std::filesystem::path& dir);

/// Text table: one row per phantom (plus the average), one column per
/// method, grouped by level.
[[nodiscard]] std::string format_table(const BenchmarkResult& r, const RunConfig& cfg);

}  // namespace qdpc
