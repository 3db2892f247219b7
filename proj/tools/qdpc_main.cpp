#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "qdpc/harness.hpp"

namespace {

using qdpc::Json;

constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kUsage = 2;

struct Options {
    std::string config;
    std::string manifest;
    std::string method;
    std::string method_config;
    std::string out;
    std::string preset;
    std::optional<double> alpha;
    std::optional<double> beta;
    std::optional<int> jobs;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    bool clean = false;
    bool quick = false;
};

int do_simulate(const Options& o) {
    qdpc::SimulateConfig cfg = qdpc::simulate_config_from_json(qdpc::read_json_file(o.config));
    if (!o.out.empty()) cfg.output_dir = o.out;
    const qdpc::Manifest m = qdpc::run_simulate(cfg);
    std::cout << (cfg.output_dir / "manifest.json").string() << '\n';
    std::cerr << "wrote " << m.files.size() << " images\n";
    return kOk;
}

int do_reconstruct(const Options& o) {
    qdpc::ReconstructRequest req;
    req.manifest = o.manifest;
    Json params = Json::object();
    if (!o.method_config.empty()) {
        params = qdpc::read_json_file(o.method_config);
        if (!params.is_object()) {
            throw qdpc::ConfigError("method config must be a JSON object");
        }
        if (params.contains("name") && params.at("name") != o.method) {
            throw qdpc::ConfigError("method config is for '" + params.at("name").dump() +
                                    "', not '" + o.method + "'");
        }
    }
    params["name"] = o.method;
    if (o.alpha) params["alpha"] = *o.alpha;
    if (o.beta) params["beta"] = *o.beta;
    req.method = qdpc::method_spec_from_json(params);
    req.noisy = !o.clean;
    if (!o.out.empty()) req.output_dir = o.out;
    const Json report = qdpc::run_reconstruct(req);
    Json brief = {{"method", report["method"]},
                  {"alpha_used", report["alpha_used"]},
                  {"beta_used", report["beta_used"]},
                  {"iterations", report["iterations"]},
                  {"wall_ms", report["wall_ms"]}};
    if (report.contains("lsnr_db")) brief["lsnr_db"] = report["lsnr_db"];
    if (report.contains("warning")) std::cerr << "warning: " << report["warning"].get<std::string>() << '\n';
    std::cout << brief.dump(2) << '\n';
    return kOk;
}

int do_benchmark(const Options& o) {
    qdpc::RunConfig cfg;
    std::string preset = o.quick ? "quick" : o.preset;
    if (!o.config.empty() && !preset.empty()) {
        throw qdpc::ConfigError("give either --config or a preset, not both");
    }
    if (!o.config.empty()) {
        cfg = qdpc::run_config_from_json(qdpc::read_json_file(o.config));
    } else if (!preset.empty()) {
        cfg = qdpc::preset_run_config(preset);
    } else {
        throw qdpc::ConfigError("benchmark needs --config or --preset");
    }
    if (!o.out.empty()) cfg.output_dir = o.out;
    if (o.seed) cfg.master_seed = *o.seed;
    if (o.trials) cfg.trials = *o.trials;
    cfg.validate();
    const int jobs = o.jobs.value_or(qdpc::default_jobs());
    if (jobs < 1) {
        throw qdpc::ConfigError("--jobs must be >= 1");
    }

    const qdpc::BenchmarkResult r = qdpc::run_benchmark(cfg, jobs, [](int done, int total) {
        std::fprintf(stderr, "\r%d/%d", done, total);
        if (done == total) std::fputc('\n', stderr);
    });
    qdpc::write_benchmark_outputs(r, cfg, cfg.output_dir);
    std::cout << qdpc::format_table(r, cfg);
    std::cout << "records: " << r.records.size() << ", failed: " << r.failed() << '\n';
    if (r.failed_fraction() > 0.10) {
        std::cerr << "more than 10% of runs failed\n";
        return kRuntime;
    }
    return kOk;
}

int do_ptf(const Options& o) {
    const Json listing = qdpc::run_ptf(qdpc::read_json_file(o.config), o.out.empty() ? "ptf" : o.out);
    std::cout << listing.dump(2) << '\n';
    return kOk;
}

int do_sensor(const Options& o) {
    const Json out = qdpc::run_sensor(o.manifest, !o.clean, o.beta);
    if (out.contains("warning")) std::cerr << "warning: " << out["warning"].get<std::string>() << '\n';
    std::cout << out.dump(2) << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DPC phase reconstruction toolkit"};
    app.require_subcommand(1);
    Options o;

    auto* sim = app.add_subcommand("simulate", "Generate a phantom and its clean and noisy DPC images");
    sim->add_option("config,--config", o.config, "Simulation config (JSON)")->required()->check(CLI::ExistingFile);
    sim->add_option("-o,--out", o.out, "Output directory (overrides output_dir)");

    auto* rec = app.add_subcommand("reconstruct", "Recover phase from a simulated DPC stack");
    rec->add_option("manifest,--manifest", o.manifest, "manifest.json from simulate")->required();
    rec->add_option("-m,--method", o.method, "tikhonov | tv | dsp-hqs | dsp-rld")->required();
    rec->add_option("-c,--config", o.method_config, "Method parameters (JSON object)")->check(CLI::ExistingFile);
    rec->add_option("--alpha", o.alpha, "Override alpha (default: noise sensor)");
    rec->add_option("--beta", o.beta, "Override beta (default: alpha / 2)");
    rec->add_flag("--clean", o.clean, "Use the noise-free DPC images");
    rec->add_option("-o,--out", o.out, "Output directory");

    auto* bench = app.add_subcommand("benchmark", "Run a phantom x SNR x method x trial sweep");
    bench->add_option("-c,--config", o.config, "Run config (JSON)")->check(CLI::ExistingFile);
    bench->add_option("--preset", o.preset, "table1 | quick");
    bench->add_flag("--quick", o.quick, "Same as --preset quick");
    bench->add_option("-j,--jobs", o.jobs, "Parallel jobs (default: QDPC_JOBS or core count)");
    bench->add_option("--seed", o.seed, "Master seed override");
    bench->add_option("--trials", o.trials, "Trial count override");
    bench->add_option("-o,--out", o.out, "Output directory");

    auto* ptf = app.add_subcommand("ptf", "Write the DPC transfer functions as PFM planes");
    ptf->add_option("config,--config", o.config, "Config with an \"optics\" block")->required()->check(CLI::ExistingFile);
    ptf->add_option("-o,--out", o.out, "Output directory");

    auto* sensor = app.add_subcommand("sensor", "Estimate the noise level and penalty weights");
    sensor->add_option("manifest,--manifest", o.manifest, "manifest.json from simulate")->required();
    sensor->add_flag("--clean", o.clean, "Use the noise-free DPC images");
    sensor->add_option("--beta", o.beta, "Manual beta");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*sim) return do_simulate(o);
        if (*rec) return do_reconstruct(o);
        if (*bench) return do_benchmark(o);
        if (*ptf) return do_ptf(o);
        if (*sensor) return do_sensor(o);
    } catch (const qdpc::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        if (*rec) std::cerr << rec->help();
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntime;
    }
    return kUsage;
}
