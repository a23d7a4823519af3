#pragma once

// Small dense concave programs of the form
//
//   maximize  sum_k w_k ln(b_k + A_k theta)
//
// where terms with w_k = 0 are pure inequality constraints b_k + A_k theta > 0
// handled by a logarithmic barrier of weight mu driven to zero. Terms with
// w_k > 0 are their own barrier. Both the maximum-likelihood fit and the Bell
// function optimization reduce to this shape after eliminating equalities.

#include <Eigen/Dense>

namespace bellrand::detail {

struct LogAffineProblem {
  Eigen::MatrixXd A;       // one row per affine term
  Eigen::VectorXd b;
  Eigen::VectorXd weight;  // >= 0
};

struct LogAffineOptions {
  double gap_tol = 1e-14;   // target barrier duality gap
  double mu_initial = 1e-2;
  double mu_shrink = 8.0;
  int max_newton_per_stage = 200;
  int max_stages = 200;
};

struct LogAffineResult {
  Eigen::VectorXd theta;
  double objective = 0.0;      // sum of w_k ln(s_k), barrier excluded
  double gap = 0.0;            // barrier gap bound at the final mu
  double decrement = 0.0;      // final Newton decrement lambda^2 / 2
  int newton_steps = 0;
  bool converged = false;
};

/// Objective (barrier excluded). Returns -inf outside the domain.
double log_affine_objective(const LogAffineProblem& problem, const Eigen::VectorXd& theta);

/// Damped Newton with a barrier continuation. `theta0` must be strictly feasible.
LogAffineResult maximize_log_affine(const LogAffineProblem& problem, const Eigen::VectorXd& theta0,
                                    const LogAffineOptions& options = {});

}  // namespace bellrand::detail
