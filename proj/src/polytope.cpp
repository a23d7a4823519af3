#include "bellrand/polytope.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>

#include "bellrand/detail/log_affine.hpp"

namespace bellrand {

namespace {

using Vector16 = Eigen::Matrix<double, 16, 1>;

Vector16 flatten(const CellArray& table) {
  return Eigen::Map<const Vector16>(table.data());
}

CellArray unflatten(const Vector16& v) {
  return Eigen::Map<const CellArray>(v.data());
}

int flat(int row, int col) { return 4 * row + col; }

// Orthonormal basis of the null space of the equality system.
Eigen::Matrix<double, 16, 8> null_basis() {
  Eigen::JacobiSVD<Eigen::Matrix<double, 8, 16>> svd(nonsignaling_constraints(), Eigen::ComputeFullV);
  return svd.matrixV().rightCols<8>();
}

}  // namespace

Eigen::Matrix<double, 8, 16> nonsignaling_constraints() {
  Eigen::Matrix<double, 8, 16> a = Eigen::Matrix<double, 8, 16>::Zero();
  for (int row = 0; row < 4; ++row) {
    for (int col = 0; col < 4; ++col) a(row, flat(row, col)) = 1.0;
  }
  // With uniform settings the conditional equalities become joint ones.
  for (int x = 0; x < 2; ++x) {
    for (int b = 0; b < 2; ++b) {
      a(4 + x, flat(settings_row(x, 0), outcome_col(1, b))) += 1.0;
      a(4 + x, flat(settings_row(x, 1), outcome_col(1, b))) -= 1.0;
    }
  }
  for (int y = 0; y < 2; ++y) {
    for (int a_bit = 0; a_bit < 2; ++a_bit) {
      a(6 + y, flat(settings_row(0, y), outcome_col(a_bit, 1))) += 1.0;
      a(6 + y, flat(settings_row(1, y), outcome_col(a_bit, 1))) -= 1.0;
    }
  }
  return a;
}

Eigen::Matrix<double, 8, 1> nonsignaling_rhs() {
  Eigen::Matrix<double, 8, 1> rhs = Eigen::Matrix<double, 8, 1>::Zero();
  rhs.head<4>().setConstant(0.25);
  return rhs;
}

double fit_objective(const CellArray& frequencies, const CellArray& joint) {
  double total = 0.0;
  for (int row = 0; row < 4; ++row) {
    for (int col = 0; col < 4; ++col) {
      const double f = frequencies(row, col);
      if (f == 0.0) continue;
      if (!(joint(row, col) > 0.0)) return -std::numeric_limits<double>::infinity();
      total += f * std::log(joint(row, col));
    }
  }
  return total;
}

FitResult ml_nonsignaling_fit(const CountTable& counts, const FitOptions& options) {
  return ml_nonsignaling_fit_weights(counts.conditional_frequencies(), options);
}

FitResult ml_nonsignaling_projection(const JointDistribution& p, const FitOptions& options) {
  return ml_nonsignaling_fit_weights(p.conditional().table(), options);
}

FitResult ml_nonsignaling_fit_weights(const CellArray& freq, const FitOptions& options) {
  if (!(options.tol > 0.0)) throw DomainError("fit tolerance must be positive");
  if (!((freq >= 0.0).all() && freq.allFinite())) throw DomainError("fit weights must be finite and non-negative");
  const Eigen::Matrix<double, 16, 8> basis = null_basis();

  Vector16 origin = Vector16::Constant(1.0 / 16.0);
  Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(8);
  if (options.initial) {
    const Vector16 start = flatten(*options.initial);
    const auto residual = (nonsignaling_constraints() * start - nonsignaling_rhs()).cwiseAbs().maxCoeff();
    if (residual > kLinearConstraintTol || !((start.array() > 0.0).all())) {
      throw DomainError("initial point must be strictly positive and satisfy the fit constraints");
    }
    theta0 = basis.transpose() * (start - origin);
  }

  detail::LogAffineProblem problem;
  problem.A = basis;
  problem.b = origin;
  problem.weight = flatten(freq);

  detail::LogAffineOptions solver;
  solver.gap_tol = 0.01 * options.tol;
  solver.max_newton_per_stage = options.max_newton_steps;
  const auto solved = detail::maximize_log_affine(problem, theta0, solver);

  Vector16 q = origin + basis * solved.theta;
  // The affine parametrization holds the equalities to rounding; clear the last ulps.
  for (int row = 0; row < 4; ++row) {
    const double s = q.segment<4>(4 * row).sum();
    q.segment<4>(4 * row) *= 0.25 / s;
  }

  const Eigen::Matrix<double, 8, 1> reduced = basis.transpose() * problem.weight.cwiseQuotient(q);
  double stationarity = 0.0;
  bool all_positive_weights = (problem.weight.array() > 0.0).all();
  if (all_positive_weights) stationarity = reduced.lpNorm<Eigen::Infinity>();

  const double residual = solved.gap + 2.0 * solved.decrement;
  if (!solved.converged || !(residual <= options.tol)) {
    throw ConvergenceError("maximum-likelihood fit did not converge", residual);
  }

  FitResult result{JointDistribution(unflatten(q)), 0.0, residual, stationarity, solved.newton_steps};
  result.objective = fit_objective(freq, result.distribution.table());
  return result;
}

}  // namespace bellrand
