#pragma once

#include <optional>

#include "bellrand/core.hpp"

namespace bellrand {

struct FitOptions {
  double tol = 1e-10;          // bound on the certified optimality residual
  int max_newton_steps = 2000;
  /// Strictly positive starting point inside the constraint set; uniform 1/16 when empty.
  std::optional<CellArray> initial;
};

struct FitResult {
  JointDistribution distribution;
  double objective = 0.0;   // sum f(ab|xy) ln Q(a,b,x,y)
  double residual = 0.0;    // certified bound on (optimum - objective)
  double stationarity = 0.0;  // infinity norm of the reduced gradient on positive cells
  int newton_steps = 0;
};

/// Maximum-likelihood non-signaling distribution with uniform settings.
///
/// Maximizes sum_{abxy} f(ab|xy) ln Q(a,b,x,y) subject to Q(x,y) = 1/4 and
/// the four independent non-signaling equalities. Cells with f = 0 add
/// nothing to the objective and may leave the interior. Throws
/// ConvergenceError carrying the residual if `tol` is not certified.
FitResult ml_nonsignaling_fit(const CountTable& counts, const FitOptions& options = {});

/// The same fit with arbitrary non-negative per-setting weights f(ab|xy).
FitResult ml_nonsignaling_fit_weights(const CellArray& conditional_weights, const FitOptions& options = {});

/// Likelihood projection of p onto the constraint set: the fit with f = P(ab|xy).
FitResult ml_nonsignaling_projection(const JointDistribution& p, const FitOptions& options = {});

/// The 8x16 equality system (rows: settings marginals, then non-signaling)
/// on row-major flattened cells.
Eigen::Matrix<double, 8, 16> nonsignaling_constraints();
Eigen::Matrix<double, 8, 1> nonsignaling_rhs();

/// Log-likelihood objective used by the fit; -inf if a positive-frequency cell is zero.
double fit_objective(const CellArray& frequencies, const CellArray& joint);

}  // namespace bellrand
