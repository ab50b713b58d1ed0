#pragma once

#include <limits>
#include <vector>

#include "cola/matrix.hpp"

namespace cola {

enum class SmoothKind { quadratic_least_squares, scaled_quadratic };

// The smooth component f with its (1/tau)-smoothness constant and conjugate.
//   quadratic_least_squares: f(v) = 1/2 ||v - b||^2,      tau = 1
//   scaled_quadratic:        f(v) = 1/(2 tau) ||v||^2
// tau is stored explicitly: the sigma'/(2 tau) subproblem coefficient must be
// bit-stable across modules.
struct SmoothPart {
    SmoothKind kind = SmoothKind::quadratic_least_squares;
    std::vector<double> offset;  // b for least squares, empty otherwise
    double tau = 1.0;

    double eval(const std::vector<double>& v) const;
    void grad(const std::vector<double>& v, std::vector<double>& out) const;
    double conj(const std::vector<double>& w) const;
};

enum class SeparableKind { l1_bounded, l2_quadratic };

// One g_i term of the separable component.
//   l1_bounded:   g_i(u) = lambda |u| for |u| <= L, +inf outside
//                 g_i*(s) = L max(0, |s| - lambda)
//   l2_quadratic: g_i(u) = 1/2 u^2 - linear_i u   (strong convexity mu_g = 1)
//                 g_i*(s) = 1/2 (s + linear_i)^2
struct SeparablePart {
    SeparableKind kind = SeparableKind::l1_bounded;
    double lambda = 0.0;
    double L = std::numeric_limits<double>::infinity();
    std::vector<double> linear;  // per-coordinate linear term, l2 kind only

    double eval(std::size_t i, double u) const;
    double conj(std::size_t i, double s) const;
    // prox_{step * g_i}(z) = argmin_u g_i(u) + (1/(2 step)) (u - z)^2
    double prox(std::size_t i, double z, double step) const;
};

enum class Formulation { A, B };
enum class RidgeOrientation { primal, dual };

struct ProblemSpec {
    SmoothPart smooth;
    SeparablePart separable;
    double mu_g = 0.0;
    Formulation mapping = Formulation::A;

    double g_total(const std::vector<double>& x) const;
    // F_A(x) = f(Ax) + sum_i g_i(x_i)
    double objective(const SparseColMatrix& A, const std::vector<double>& x) const;
    double objective_at_v(const std::vector<double>& v, const std::vector<double>& x) const;
};

// Lasso mapped to (A): f = 1/2 ||. - b||^2, g_i = lambda |.| with L-bounded
// support. Pass L <= 0 to use the default radius ||b||^2 / (lambda min_i
// ||A_i||^2), capped at 1e6; any L exceeding ||x*||_inf leaves the problem
// unchanged.
ProblemSpec make_lasso(const SparseColMatrix& A, const std::vector<double>& b, double lambda,
                       double L = 0.0);

double default_support_radius(const SparseColMatrix& A, const std::vector<double>& b,
                              double lambda);

// Ridge mapped to (A) in either orientation. Both solve
//   min_x 1/(2 lambda) ||A x||^2 + sum_i (1/2 x_i^2 - c_i x_i)
// where for orientation=dual the columns of A are samples and c = y, and for
// orientation=primal the columns are features and c = A^T y / lambda. The two
// orientations yield identical training predictions.
ProblemSpec make_ridge(const SparseColMatrix& A, const std::vector<double>& y, double lambda,
                       RidgeOrientation orientation);

// Predictions on the training samples for a ridge ProblemSpec solution x.
std::vector<double> ridge_predictions(const SparseColMatrix& A, const std::vector<double>& x,
                                      double lambda, RidgeOrientation orientation);

}  // namespace cola
