#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <doctest.h>

#include "cola/baselines.hpp"
#include "cola/problem.hpp"

using namespace cola;

namespace {

struct RidgeTask {
    SparseColMatrix X;        // sample-major: rows = samples
    SparseColMatrix samples;  // columns = samples (the baseline layout)
    std::vector<double> y;
    Partition split;
    DigingProblem problem;
    double lambda = 2.0;

    RidgeTask() {
        synthesize_regression(24, 10, 0.6, 0.4, 33, X, y);
        samples = X.transposed();
        split = partition_columns(24, 4, 13);
        problem.A = &samples;
        problem.b = &y;
        problem.partition = &split;
        problem.lambda = lambda;
    }
};

Eigen::MatrixXd dense_of(const SparseColMatrix& A) {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(long(A.n_rows()), long(A.n_cols()));
    for (std::size_t i = 0; i < A.n_cols(); ++i) {
        ColumnView col = A.column(i);
        for (std::size_t t = 0; t < col.nnz; ++t) D(col.rows[t], long(i)) = col.values[t];
    }
    return D;
}

}  // namespace

TEST_CASE("local gradients sum to the global gradient") {
    RidgeTask task;
    std::vector<double> w(10);
    for (std::size_t i = 0; i < 10; ++i) w[i] = 0.3 * double(i) - 1.0;

    std::vector<double> total(10, 0.0), local(10);
    for (std::size_t k = 0; k < 4; ++k) {
        task.problem.local_grad(k, w, local);
        for (std::size_t i = 0; i < 10; ++i) total[i] += local[i];
    }

    // Dense gradient of lambda/2 ||w||^2 + 1/2 ||X w - y||^2.
    const Eigen::MatrixXd X = dense_of(task.X);
    Eigen::VectorXd we(10), ye(24);
    for (int i = 0; i < 10; ++i) we(i) = w[std::size_t(i)];
    for (int r = 0; r < 24; ++r) ye(r) = task.y[std::size_t(r)];
    const Eigen::VectorXd expected = task.lambda * we + X.transpose() * (X * we - ye);
    for (int i = 0; i < 10; ++i) {
        CHECK(total[std::size_t(i)] == doctest::Approx(expected(i)).epsilon(1e-10));
    }
    CHECK(task.problem.objective(w) ==
          doctest::Approx(0.5 * task.lambda * we.squaredNorm() +
                          0.5 * (X * we - ye).squaredNorm())
              .epsilon(1e-12));
}

TEST_CASE("gradient tracking holds along the trajectory") {
    RidgeTask task;
    MixingMatrix W = metropolis_weights(build_graph(GraphKind::ring, 4));
    DigingState state = diging_init(task.problem, 1e-3);
    CHECK(tracking_identity_error(state, task.problem) <= 1e-12);
    for (int step = 0; step < 200; ++step) {
        diging_step(state, W, task.problem);
        CHECK(tracking_identity_error(state, task.problem) <= 1e-9);
    }
}

TEST_CASE("tracked descent converges to the dense ridge optimum") {
    RidgeTask task;
    MixingMatrix W = metropolis_weights(build_graph(GraphKind::ring, 4));

    const Eigen::MatrixXd X = dense_of(task.X);
    Eigen::VectorXd ye(24);
    for (int r = 0; r < 24; ++r) ye(r) = task.y[std::size_t(r)];
    const Eigen::VectorXd w_opt =
        (X.transpose() * X + task.lambda * Eigen::MatrixXd::Identity(10, 10)).ldlt().solve(
            X.transpose() * ye);
    std::vector<double> w_std(10);
    for (int i = 0; i < 10; ++i) w_std[std::size_t(i)] = w_opt(i);
    const double f_opt = task.problem.objective(w_std);

    std::vector<double> history = diging_run(task.problem, W, 2e-3, 20000);
    REQUIRE(history.size() == 20001);
    CHECK(history.front() == doctest::Approx(task.problem.objective(std::vector<double>(10, 0.0))));
    CHECK(history.back() - f_opt <= 1e-8 * (1.0 + std::abs(f_opt)));

    // Consensus: individual copies approach the mean.
    DigingState state = diging_init(task.problem, 2e-3);
    for (int step = 0; step < 20000; ++step) diging_step(state, W, task.problem);
    for (std::size_t k = 1; k < 4; ++k) {
        double diff = 0.0;
        for (std::size_t i = 0; i < 10; ++i) {
            diff += (state.w[k][i] - state.w[0][i]) * (state.w[k][i] - state.w[0][i]);
        }
        CHECK(std::sqrt(diff) <= 1e-6);
    }
}

TEST_CASE("the baseline objective is an affine rescaling of the composite one") {
    RidgeTask task;
    // Composite quadratic over feature columns with the matching lambda:
    // P(w) = lambda * F(w) + ||y||^2 / 2.
    ProblemSpec spec = make_ridge(task.X, task.y, task.lambda, RidgeOrientation::primal);
    double y_norm_sq = 0.0;
    for (double value : task.y) y_norm_sq += value * value;

    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> w(10);
        for (std::size_t i = 0; i < 10; ++i) w[i] = 0.1 * double(trial) - 0.05 * double(i);
        const double composite = spec.objective(task.X, w);
        const double baseline = task.problem.objective(w);
        CHECK(baseline ==
              doctest::Approx(task.lambda * composite + 0.5 * y_norm_sq).epsilon(1e-10));
    }
}

TEST_CASE("step-size search returns a stable candidate and rejects divergence") {
    RidgeTask task;
    MixingMatrix W = metropolis_weights(build_graph(GraphKind::ring, 4));

    const double alpha = grid_search_alpha(task.problem, W, {1e-4, 1e-3, 1e2}, 300);
    CHECK(alpha >= 1e-4);
    CHECK(alpha <= 1e-3);  // the huge candidate diverges and is disqualified

    CHECK_THROWS_AS(grid_search_alpha(task.problem, W, {1e3, 1e4}, 300), std::runtime_error);
}
