#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <doctest.h>

#include "cola/engine.hpp"
#include "cola/io.hpp"

using namespace cola;
namespace fs = std::filesystem;

namespace {

RunConfig full_config() {
    RunConfig c;
    c.problem.kind = "lasso";
    c.problem.lambda = 0.25;
    c.problem.lambda_rel = 0.3;
    c.problem.L = 4.5;
    c.data.source = "synthetic";
    c.data.d = 30;
    c.data.n = 48;
    c.data.density = 0.4;
    c.data.noise = 1.5;
    c.data.seed = 12;
    c.topology.kind = "cycle2";
    c.topology.K = 6;
    c.topology.B = 2;
    c.gamma = 0.75;
    c.sigma_prime = "refined";
    c.kappa = 3;
    c.rounds = 17;
    c.dropout_p = 0.9;
    c.dropout_reset = true;
    c.cert_every = 5;
    c.cert_epsilon = 2e-3;
    c.seeds.partition = 4;
    c.seeds.solver = 5;
    c.seeds.dropout = 6;
    c.threads = 2;
    c.permutation_sweeps = true;
    c.output = "out/trace.csv";
    c.certs_output = "out/certs.csv";
    c.meta_output = "out/meta.json";
    c.reference_budget = 1'000'000;
    c.reference_gap_rel = 1e-8;
    c.cache_dir = "cachehere";
    SweepConfig sweep;
    sweep.kappa = {1, 5};
    sweep.topology = {"ring", "complete"};
    sweep.dropout_p = {0.5, 1.0};
    sweep.output_dir = "sweepdir";
    c.sweep = sweep;
    return c;
}

}  // namespace

TEST_CASE("configurations survive a serialization round trip") {
    RunConfig a = full_config();
    RunConfig b = parse_run_config(serialize_run_config(a));

    CHECK(b.problem.kind == a.problem.kind);
    CHECK(b.problem.lambda == a.problem.lambda);
    CHECK(b.problem.lambda_rel == a.problem.lambda_rel);
    CHECK(b.problem.L == a.problem.L);
    CHECK(b.data.source == a.data.source);
    CHECK(b.data.d == a.data.d);
    CHECK(b.data.n == a.data.n);
    CHECK(b.data.density == a.data.density);
    CHECK(b.data.noise == a.data.noise);
    CHECK(b.data.seed == a.data.seed);
    CHECK(b.topology.kind == a.topology.kind);
    CHECK(b.topology.K == a.topology.K);
    CHECK(b.topology.B == a.topology.B);
    CHECK(b.gamma == a.gamma);
    CHECK(b.sigma_prime == a.sigma_prime);
    CHECK(b.kappa == a.kappa);
    CHECK(b.rounds == a.rounds);
    CHECK(b.dropout_p == a.dropout_p);
    CHECK(b.dropout_reset == a.dropout_reset);
    CHECK(b.cert_every == a.cert_every);
    CHECK(b.cert_epsilon == a.cert_epsilon);
    CHECK(b.seeds.partition == a.seeds.partition);
    CHECK(b.seeds.solver == a.seeds.solver);
    CHECK(b.seeds.dropout == a.seeds.dropout);
    CHECK(b.threads == a.threads);
    CHECK(b.permutation_sweeps == a.permutation_sweeps);
    CHECK(b.output == a.output);
    CHECK(b.certs_output == a.certs_output);
    CHECK(b.meta_output == a.meta_output);
    CHECK(b.reference_budget == a.reference_budget);
    CHECK(b.reference_gap_rel == a.reference_gap_rel);
    CHECK(b.cache_dir == a.cache_dir);
    REQUIRE(b.sweep.has_value());
    CHECK(b.sweep->kappa == a.sweep->kappa);
    CHECK(b.sweep->topology == a.sweep->topology);
    CHECK(b.sweep->dropout_p == a.sweep->dropout_p);
    CHECK(b.sweep->output_dir == a.sweep->output_dir);

    CHECK_THROWS_AS(parse_run_config("{ not json"), std::exception);
}

TEST_CASE("validation flags each invalid field") {
    auto has = [](const std::vector<std::string>& errors, const std::string& needle) {
        for (const std::string& e : errors) {
            if (e.find(needle) != std::string::npos) return true;
        }
        return false;
    };

    RunConfig ok;
    ok.problem.kind = "lasso";
    ok.problem.lambda = 0.5;
    ok.data.d = 10;
    ok.data.n = 20;
    ok.topology.K = 4;
    CHECK(validate_config(ok).empty());

    RunConfig c = ok;
    c.problem.kind = "svm";
    CHECK(has(validate_config(c), "problem.kind"));

    c = ok;
    c.problem.kind = "ridge";
    c.problem.lambda_rel = 0.5;
    CHECK(has(validate_config(c), "lasso only"));

    c = ok;
    c.problem.lambda_rel = 1.5;
    CHECK(has(validate_config(c), "(0, 1)"));

    c = ok;
    c.problem.lambda = -1.0;
    CHECK(has(validate_config(c), "lambda must be positive"));

    c = ok;
    c.data.density = 0.0;
    CHECK(has(validate_config(c), "density"));

    c = ok;
    c.data.source = "libsvm";
    CHECK(has(validate_config(c), "path"));

    c = ok;
    c.gamma = 0.0;
    CHECK(has(validate_config(c), "gamma"));

    c = ok;
    c.kappa = 0;
    CHECK(has(validate_config(c), "kappa"));

    c = ok;
    c.dropout_p = 0.0;
    CHECK(has(validate_config(c), "dropout_p"));

    c = ok;
    c.sigma_prime = "0.5";
    c.gamma = 0.9;
    CHECK(has(validate_config(c), ">= gamma"));

    c = ok;
    c.sigma_prime = "bogus";
    CHECK(has(validate_config(c), "sigma_prime"));

    c = ok;
    c.topology.kind = "custom";
    c.topology.adjacency_file = "/nonexistent/file.txt";
    CHECK(!validate_config(c).empty());
}

TEST_CASE("floating point formatting round-trips exactly") {
    for (double value : {0.1, 1.0 / 3.0, 149.93308810551264, -2.2250738585072014e-308,
                         1.7976931348623157e308, 0.0}) {
        const double back = std::stod(format_double(value));
        CHECK(back == value);
    }
}

TEST_CASE("trace files use the pinned header and exact float cells") {
    RunConfig c;
    c.problem.kind = "lasso";
    c.problem.lambda_rel = 0.5;
    c.data.d = 20;
    c.data.n = 32;
    c.data.density = 0.5;
    c.data.noise = 1.0;
    c.data.seed = 2;
    c.topology.kind = "ring";
    c.topology.K = 4;
    c.rounds = 12;
    c.cert_every = 4;

    RunInputs inputs = build_run_inputs(c);
    Engine engine(inputs.A, inputs.problem, inputs.partition, inputs.schedule, inputs.engine);
    engine.run();

    const fs::path path = fs::temp_directory_path() / "io_unit_trace.csv";
    emit_trace(engine.trace(), path.string());

    std::ifstream in(path);
    std::string header;
    REQUIRE(std::getline(in, header));
    CHECK(header ==
          "round,FA,HA,gap,consensus_violation,active_nodes,cert_all_pass,elapsed_ms");

    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        REQUIRE(cells.size() == 8);
        CHECK(std::stoul(cells[0]) == rows);
        CHECK(std::stod(cells[1]) == engine.trace().FA[rows]);
        CHECK(std::stod(cells[3]) == engine.trace().gap[rows]);
        const int flag = std::stoi(cells[6]);
        if (rows % 4 == 0) {
            CHECK((flag == 0 || flag == 1));
        } else {
            CHECK(flag == -1);
        }
        ++rows;
    }
    CHECK(rows == 13);  // round 0 plus 12 rounds
    fs::remove(path);

    const fs::path certs = fs::temp_directory_path() / "io_unit_certs.csv";
    const fs::path meta = fs::temp_directory_path() / "io_unit_meta.json";
    emit_certs(engine.trace(), certs.string());
    emit_meta(engine.trace(), c, meta.string());
    CHECK(fs::file_size(certs) > 0);
    std::ifstream meta_in(meta);
    std::stringstream meta_text;
    meta_text << meta_in.rdbuf();
    CHECK(meta_text.str().find("sigma_prime") != std::string::npos);
    CHECK(meta_text.str().find("beta") != std::string::npos);
    fs::remove(certs);
    fs::remove(meta);
}

TEST_CASE("relative outputs resolve against the configured root") {
    // Absolute paths pass through untouched.
    CHECK(resolve_output_path("/tmp/x.csv") == "/tmp/x.csv");

#ifndef _WIN32
    setenv("COLA_OUT_DIR", "/tmp/cola_out_unit", 1);
    const std::string resolved = resolve_output_path("rel/trace.csv");
    CHECK(resolved == "/tmp/cola_out_unit/rel/trace.csv");
    unsetenv("COLA_OUT_DIR");
#endif
    CHECK(resolve_output_path("rel/trace.csv") == "rel/trace.csv");
}

TEST_CASE("derived problem inputs resolve the relative penalty") {
    RunConfig c;
    c.problem.kind = "lasso";
    c.problem.lambda_rel = 0.4;
    c.data.d = 25;
    c.data.n = 30;
    c.data.density = 0.6;
    c.data.noise = 0.5;
    c.data.seed = 7;
    c.topology.K = 5;

    RunInputs inputs = build_run_inputs(c);
    double lambda_max = 0.0;
    for (std::size_t i = 0; i < inputs.A.n_cols(); ++i) {
        lambda_max = std::max(lambda_max, std::abs(inputs.A.dot_column(i, inputs.b)));
    }
    CHECK(inputs.lambda_effective == doctest::Approx(0.4 * lambda_max).epsilon(1e-15));
    CHECK(inputs.problem.separable.lambda == inputs.lambda_effective);
    CHECK(inputs.problem.separable.L > 0.0);
    CHECK(inputs.beta > 0.0);
    CHECK(inputs.beta < 1.0);

    // At lambda >= lambda_max the all-zero vector is optimal; the derived
    // default radius still leaves room to move below it.
    CHECK(inputs.partition.K() == 5);
    CHECK(inputs.engine.kappa == c.kappa);

    // Config loading from disk matches in-memory parsing.
    const fs::path path = fs::temp_directory_path() / "io_unit_config.json";
    {
        std::ofstream out(path);
        out << serialize_run_config(c);
    }
    RunConfig loaded = load_run_config_file(path.string());
    CHECK(loaded.problem.lambda_rel == c.problem.lambda_rel);
    CHECK(loaded.data.seed == c.data.seed);
    fs::remove(path);
}
