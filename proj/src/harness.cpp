#include "cola/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cola/io.hpp"
#include "cola/reference.hpp"

namespace cola {

namespace {

namespace fs = std::filesystem;

void ensure_parent_dir(const std::string& path) {
    fs::path parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
}

double reference_gap_target(const RunConfig& config, const RunInputs& inputs) {
    const double at_zero =
        inputs.problem.objective(inputs.A, std::vector<double>(inputs.A.n_cols(), 0.0));
    return config.reference_gap_rel * (1.0 + std::abs(at_zero));
}

int do_run(const RunConfig& config, bool quiet) {
    RunInputs inputs = build_run_inputs(config);
    Engine engine(inputs.A, inputs.problem, inputs.partition, inputs.schedule, inputs.engine);

    const auto start = std::chrono::steady_clock::now();
    engine.run();
    const double wall_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const RunTrace& trace = engine.trace();
    const std::string trace_path = resolve_output_path(config.output);
    ensure_parent_dir(trace_path);
    emit_trace(trace, trace_path);
    if (!config.certs_output.empty()) {
        const std::string certs_path = resolve_output_path(config.certs_output);
        ensure_parent_dir(certs_path);
        emit_certs(trace, certs_path);
    }
    if (!config.meta_output.empty()) {
        const std::string meta_path = resolve_output_path(config.meta_output);
        ensure_parent_dir(meta_path);
        emit_meta(trace, config, meta_path);
    }

    if (!quiet) {
        std::printf("rounds=%zu final_FA=%s final_gap=%s beta=%s sigma_prime=%s wall_s=%.3f\n",
                    trace.rounds() == 0 ? std::size_t{0} : trace.rounds() - 1,
                    format_double(trace.FA.back()).c_str(),
                    format_double(trace.gap.back()).c_str(), format_double(trace.beta).c_str(),
                    format_double(trace.sigma_prime).c_str(), wall_s);
        std::printf("trace written to %s\n", trace_path.c_str());
    }
    return 0;
}

std::string sweep_file_name(std::size_t kappa, const std::string& topology, double dropout_p) {
    std::ostringstream name;
    name << "trace_kappa" << kappa << "_" << topology << "_p" << dropout_p << ".csv";
    return name.str();
}

int do_sweep(const RunConfig& base) {
    if (!base.sweep) {
        std::cerr << "sweep: config has no sweep section\n";
        return 2;
    }
    const SweepConfig& sweep = *base.sweep;
    std::vector<std::size_t> kappas = sweep.kappa.empty() ? std::vector<std::size_t>{base.kappa}
                                                          : sweep.kappa;
    std::vector<std::string> topologies =
        sweep.topology.empty() ? std::vector<std::string>{base.topology.kind} : sweep.topology;
    std::vector<double> dropouts =
        sweep.dropout_p.empty() ? std::vector<double>{base.dropout_p} : sweep.dropout_p;

    const fs::path out_dir = resolve_output_path(sweep.output_dir);
    fs::create_directories(out_dir);

    for (std::size_t kappa : kappas) {
        for (const std::string& topology : topologies) {
            for (double dropout : dropouts) {
                RunConfig variant = base;
                variant.sweep.reset();
                variant.kappa = kappa;
                variant.topology.kind = topology;
                variant.dropout_p = dropout;
                variant.output = (out_dir / sweep_file_name(kappa, topology, dropout)).string();
                variant.certs_output.clear();
                variant.meta_output.clear();
                int rc = do_run(variant, true);
                if (rc != 0) return rc;
                std::printf("sweep point kappa=%zu topology=%s p=%g -> %s\n", kappa,
                            topology.c_str(), dropout, variant.output.c_str());
            }
        }
    }
    return 0;
}

int do_certify(const RunConfig& config_in, double epsilon_override) {
    RunConfig config = config_in;
    if (epsilon_override > 0.0) config.cert_epsilon = epsilon_override;
    if (config.cert_every == 0) config.cert_every = 10;
    if (config.certs_output.empty()) config.certs_output = "certs.csv";

    RunInputs inputs = build_run_inputs(config);
    Engine engine(inputs.A, inputs.problem, inputs.partition, inputs.schedule, inputs.engine);
    engine.run();

    const RunTrace& trace = engine.trace();
    const std::string trace_path = resolve_output_path(config.output);
    const std::string certs_path = resolve_output_path(config.certs_output);
    ensure_parent_dir(trace_path);
    ensure_parent_dir(certs_path);
    emit_trace(trace, trace_path);
    emit_certs(trace, certs_path);

    for (const CertRoundLog& log : trace.cert_rounds) {
        if (log.all_pass) {
            std::printf("first all-pass round %zu: gap_at_v=%s (epsilon=%s, slack ratio %s)\n",
                        log.round, format_double(log.gap_at_v).c_str(),
                        format_double(config.cert_epsilon).c_str(),
                        format_double(log.gap_at_v / config.cert_epsilon).c_str());
            return 0;
        }
    }
    std::printf("no round passed all local certificates at epsilon=%s\n",
                format_double(config.cert_epsilon).c_str());
    return 0;
}

int do_reference(const RunConfig& config) {
    RunInputs inputs = build_run_inputs(config);
    const double target = reference_gap_target(config, inputs);
    ReferenceOptimum ref = cached_reference(inputs.A, inputs.problem, config.reference_budget,
                                            target, resolve_output_path(config.cache_dir));
    std::printf("f_star=%s residual_gap=%s updates_used=%llu reached_target=%d\n",
                format_double(ref.f_star).c_str(), format_double(ref.residual_gap).c_str(),
                static_cast<unsigned long long>(ref.updates_used), ref.reached_target ? 1 : 0);
    if (!ref.reached_target) {
        std::printf("warning: gap target %s not reached within budget\n",
                    format_double(target).c_str());
    }
    return 0;
}

int do_validate(const RunConfig& config) {
    std::vector<std::string> errors = validate_config(config);
    if (errors.empty()) {
        std::printf("config valid\n");
        return 0;
    }
    for (const std::string& error : errors) std::fprintf(stderr, "invalid: %s\n", error.c_str());
    return 1;
}

}  // namespace

int cli_main(int argc, char** argv) {
    CLI::App app{"decentralized linear learning experiment harness"};
    app.require_subcommand(1);

    std::string config_path;
    double epsilon_override = 0.0;
    std::string output_override;
    std::size_t threads_override = 0;

    CLI::App* cmd_run = app.add_subcommand("run", "execute one configured run");
    cmd_run->add_option("--config", config_path, "JSON config file")->required();
    cmd_run->add_option("--output", output_override, "override the trace output path");
    cmd_run->add_option("--threads", threads_override, "override the worker count");

    CLI::App* cmd_sweep = app.add_subcommand("sweep", "run the configured sweep axes");
    cmd_sweep->add_option("--config", config_path, "JSON config file")->required();

    CLI::App* cmd_certify =
        app.add_subcommand("certify", "run with periodic local certificates");
    cmd_certify->add_option("--config", config_path, "JSON config file")->required();
    cmd_certify->add_option("--epsilon", epsilon_override, "certificate target epsilon");

    CLI::App* cmd_reference =
        app.add_subcommand("reference", "compute or fetch the cached reference optimum");
    cmd_reference->add_option("--config", config_path, "JSON config file")->required();

    CLI::App* cmd_validate = app.add_subcommand("validate-config", "preflight a config file");
    cmd_validate->add_option("--config", config_path, "JSON config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        RunConfig config = load_run_config_file(config_path);
        if (!output_override.empty()) config.output = output_override;
        if (threads_override > 0) config.threads = threads_override;

        if (cmd_run->parsed()) return do_run(config, false);
        if (cmd_sweep->parsed()) return do_sweep(config);
        if (cmd_certify->parsed()) return do_certify(config, epsilon_override);
        if (cmd_reference->parsed()) return do_reference(config);
        if (cmd_validate->parsed()) return do_validate(config);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}

}  // namespace cola
