#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string_view>
#include <vector>

namespace srmd {

enum class Formulation {
  // min ||c||_1  s.t. ||Ac - y||_2 <= sigma
  ResidualConstrained,
  // min lambda ||c||_1 + 1/(2m) ||Ac - y||_2^2
  Penalized,
  // min ||Ac - y||_2  s.t. ||c||_1 <= tau_ball
  L1Ball,
};

Formulation parse_formulation(std::string_view name);
std::string_view to_string(Formulation f);

struct SolveSpec {
  Formulation formulation = Formulation::ResidualConstrained;
  std::optional<double> sigma;
  std::optional<double> lambda;
  std::optional<double> tau_ball;

  /// Iteration cap for the projected-gradient / proximal iterations, summed
  /// over all outer root-finding steps.
  int max_iters = 10000;
  int max_outer = 40;
  /// Relative tolerance on the final objective: the residual bound for
  /// residual-constrained solves, the normalised duality gap for the l1-ball,
  /// the first-order stationarity measure for the penalized form.
  double tol = 1e-4;
  /// Duality-gap tolerance for the inner l1-ball subproblems.
  double inner_tol = 1e-6;
  /// Basis-pursuit stopping level ||r|| <= bp_tol ||y|| when sigma == 0.
  double bp_tol = 1e-6;
  /// Record one row per iteration in SparseCoefficients::trace.
  bool record_trace = false;
};

void validate(const SolveSpec& spec);

struct IterationRecord {
  int iteration = 0;
  double residual_norm = 0.0;
  double l1_norm = 0.0;
  double tau_ball = 0.0;
  double gap = 0.0;
};

struct SparseCoefficients {
  Eigen::VectorXd values;
  double residual_norm = 0.0;
  double l1_norm = 0.0;
  int iterations = 0;
  int outer_iterations = 0;
  /// Total matrix-vector products with the full dictionary.
  int full_products = 0;
  bool converged = false;
  std::vector<IterationRecord> trace;

  Eigen::Index nonzeros(double threshold = 0.0) const;
};

/// Residual-constrained basis pursuit denoising. Returns exactly zero when
/// sigma >= ||y||. Otherwise runs Newton root finding on the Pareto curve
/// phi(tau) = min{||Ac - y|| : ||c||_1 <= tau} with inexact l1-ball solves.
SparseCoefficients solve_bpdn(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                              double sigma, const SolveSpec& spec = {});

/// Accelerated proximal gradient (FISTA with backtracking and adaptive restart)
/// on lambda ||c||_1 + 1/(2m) ||Ac - y||^2.
SparseCoefficients solve_lasso_penalized(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                                         double lambda, const SolveSpec& spec = {});

/// Spectral projected gradient on ||Ac - y|| subject to ||c||_1 <= tau_ball.
SparseCoefficients solve_l1_ball(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                                 double tau_ball, const SolveSpec& spec = {});

/// Dispatches on spec.formulation using the parameter stored in spec.
SparseCoefficients solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                         const SolveSpec& spec);

/// Euclidean projection onto {c : ||c||_1 <= radius}.
Eigen::VectorXd project_l1_ball(const Eigen::VectorXd& v, double radius);

/// sign(v) * max(|v| - threshold, 0), elementwise.
Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double threshold);

/// Largest eigenvalue of A^T A by power iteration.
double estimate_lipschitz(const Eigen::MatrixXd& a, int iterations = 50, double rtol = 1e-6);

}  // namespace srmd
