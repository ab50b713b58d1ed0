#include "cola/problem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cola {

namespace {

double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

double clamp(double u, double lo, double hi) { return std::min(std::max(u, lo), hi); }

}  // namespace

double SmoothPart::eval(const std::vector<double>& v) const {
    double acc = 0.0;
    if (kind == SmoothKind::quadratic_least_squares) {
        if (v.size() != offset.size()) throw std::invalid_argument("f_eval: dimension mismatch");
        for (std::size_t r = 0; r < v.size(); ++r) {
            double e = v[r] - offset[r];
            acc += e * e;
        }
        return 0.5 * acc;
    }
    for (double value : v) acc += value * value;
    return acc / (2.0 * tau);
}

void SmoothPart::grad(const std::vector<double>& v, std::vector<double>& out) const {
    out.resize(v.size());
    if (kind == SmoothKind::quadratic_least_squares) {
        if (v.size() != offset.size()) throw std::invalid_argument("f_grad: dimension mismatch");
        for (std::size_t r = 0; r < v.size(); ++r) out[r] = v[r] - offset[r];
        return;
    }
    for (std::size_t r = 0; r < v.size(); ++r) out[r] = v[r] / tau;
}

double SmoothPart::conj(const std::vector<double>& w) const {
    double acc = 0.0;
    if (kind == SmoothKind::quadratic_least_squares) {
        if (w.size() != offset.size()) throw std::invalid_argument("f_conj: dimension mismatch");
        for (std::size_t r = 0; r < w.size(); ++r) acc += 0.5 * w[r] * w[r] + w[r] * offset[r];
        return acc;
    }
    for (double value : w) acc += value * value;
    return tau * acc / 2.0;
}

double SeparablePart::eval(std::size_t i, double u) const {
    if (kind == SeparableKind::l1_bounded) {
        if (std::abs(u) > L) return std::numeric_limits<double>::infinity();
        return lambda * std::abs(u);
    }
    return 0.5 * u * u - linear[i] * u;
}

double SeparablePart::conj(std::size_t i, double s) const {
    if (kind == SeparableKind::l1_bounded) {
        return L * std::max(0.0, std::abs(s) - lambda);
    }
    double t = s + linear[i];
    return 0.5 * t * t;
}

double SeparablePart::prox(std::size_t i, double z, double step) const {
    if (!(step > 0.0)) throw std::invalid_argument("prox: step must be positive");
    if (kind == SeparableKind::l1_bounded) {
        // Threshold first, then clamp: the exact prox of the Lipschitzized g.
        return clamp(soft_threshold(z, step * lambda), -L, L);
    }
    return (z + step * linear[i]) / (1.0 + step);
}

double ProblemSpec::g_total(const std::vector<double>& x) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += separable.eval(i, x[i]);
    return acc;
}

double ProblemSpec::objective(const SparseColMatrix& A, const std::vector<double>& x) const {
    std::vector<double> v;
    A.multiply(x, v);
    return objective_at_v(v, x);
}

double ProblemSpec::objective_at_v(const std::vector<double>& v, const std::vector<double>& x) const {
    return smooth.eval(v) + g_total(x);
}

double default_support_radius(const SparseColMatrix& A, const std::vector<double>& b,
                              double lambda) {
    double min_col = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < A.n_cols(); ++i) {
        double norm_sq = A.column_norm_sq(i);
        if (norm_sq > 0.0) min_col = std::min(min_col, norm_sq);
    }
    double b_norm_sq = 0.0;
    for (double value : b) b_norm_sq += value * value;
    constexpr double kCap = 1e6;
    if (!std::isfinite(min_col) || min_col == 0.0) return kCap;
    return std::min(kCap, b_norm_sq / (lambda * min_col));
}

ProblemSpec make_lasso(const SparseColMatrix& A, const std::vector<double>& b, double lambda,
                       double L) {
    if (!(lambda > 0.0)) throw std::invalid_argument("make_lasso: lambda must be positive");
    if (b.size() != A.n_rows()) throw std::invalid_argument("make_lasso: b length must equal rows");
    ProblemSpec spec;
    spec.smooth.kind = SmoothKind::quadratic_least_squares;
    spec.smooth.offset = b;
    spec.smooth.tau = 1.0;
    spec.separable.kind = SeparableKind::l1_bounded;
    spec.separable.lambda = lambda;
    spec.separable.L = L > 0.0 ? L : default_support_radius(A, b, lambda);
    spec.mu_g = 0.0;
    spec.mapping = Formulation::A;
    return spec;
}

ProblemSpec make_ridge(const SparseColMatrix& A, const std::vector<double>& y, double lambda,
                       RidgeOrientation orientation) {
    if (!(lambda > 0.0)) throw std::invalid_argument("make_ridge: lambda must be positive");
    ProblemSpec spec;
    spec.smooth.kind = SmoothKind::scaled_quadratic;
    spec.smooth.tau = lambda;
    spec.separable.kind = SeparableKind::l2_quadratic;
    spec.separable.lambda = 0.0;
    spec.mu_g = 1.0;
    spec.mapping = Formulation::A;
    if (orientation == RidgeOrientation::dual) {
        // Columns are samples; the linear term is the per-sample target.
        if (y.size() != A.n_cols()) {
            throw std::invalid_argument("make_ridge(dual): y length must equal column count");
        }
        spec.separable.linear = y;
    } else {
        // Columns are features over sample rows; c = A^T y / lambda.
        if (y.size() != A.n_rows()) {
            throw std::invalid_argument("make_ridge(primal): y length must equal row count");
        }
        spec.separable.linear.resize(A.n_cols());
        for (std::size_t i = 0; i < A.n_cols(); ++i) {
            spec.separable.linear[i] = A.dot_column(i, y) / lambda;
        }
    }
    return spec;
}

std::vector<double> ridge_predictions(const SparseColMatrix& A, const std::vector<double>& x,
                                      double lambda, RidgeOrientation orientation) {
    std::vector<double> Ax;
    A.multiply(x, Ax);
    if (orientation == RidgeOrientation::primal) return Ax;  // rows are samples
    // Dual: w = A x / lambda lives in feature space; predictions are A^T w.
    std::vector<double> preds(A.n_cols(), 0.0);
    for (std::size_t i = 0; i < A.n_cols(); ++i) preds[i] = A.dot_column(i, Ax) / lambda;
    return preds;
}

}  // namespace cola
