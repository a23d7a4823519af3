#include "bellrand/detail/log_affine.hpp"

#include <cmath>
#include <limits>

namespace bellrand::detail {

namespace {

struct Stage {
  const LogAffineProblem& problem;
  Eigen::VectorXd omega;  // effective weight per term at this mu

  double value(const Eigen::VectorXd& theta) const {
    const Eigen::VectorXd s = problem.b + problem.A * theta;
    double total = 0.0;
    for (Eigen::Index k = 0; k < s.size(); ++k) {
      if (!(s[k] > 0.0)) {
        if (omega[k] == 0.0 && s[k] == 0.0) continue;
        return -std::numeric_limits<double>::infinity();
      }
      if (omega[k] != 0.0) total += omega[k] * std::log(s[k]);
    }
    return total;
  }
};

bool strictly_feasible(const LogAffineProblem& problem, const Eigen::VectorXd& theta) {
  const Eigen::VectorXd s = problem.b + problem.A * theta;
  return (s.array() > 0.0).all();
}

}  // namespace

double log_affine_objective(const LogAffineProblem& problem, const Eigen::VectorXd& theta) {
  Stage stage{problem, problem.weight};
  return stage.value(theta);
}

LogAffineResult maximize_log_affine(const LogAffineProblem& problem, const Eigen::VectorXd& theta0,
                                    const LogAffineOptions& options) {
  LogAffineResult result;
  result.theta = theta0;

  const Eigen::Index terms = problem.A.rows();
  int barrier_terms = 0;
  for (Eigen::Index k = 0; k < terms; ++k) barrier_terms += problem.weight[k] == 0.0 ? 1 : 0;

  if (!strictly_feasible(problem, theta0)) return result;

  double mu = barrier_terms > 0 ? options.mu_initial : 0.0;
  for (int stage_index = 0; stage_index < options.max_stages; ++stage_index) {
    Stage stage{problem, problem.weight};
    for (Eigen::Index k = 0; k < terms; ++k) {
      if (problem.weight[k] == 0.0) stage.omega[k] = mu;
    }

    bool stage_converged = false;
    for (int it = 0; it < options.max_newton_per_stage; ++it) {
      const Eigen::VectorXd s = problem.b + problem.A * result.theta;
      const Eigen::VectorXd ratio = stage.omega.cwiseQuotient(s);
      const Eigen::VectorXd grad = problem.A.transpose() * ratio;
      const Eigen::VectorXd curvature = ratio.cwiseQuotient(s);
      const Eigen::MatrixXd neg_hessian =
          problem.A.transpose() * curvature.asDiagonal() * problem.A;

      Eigen::LDLT<Eigen::MatrixXd> ldlt(neg_hessian);
      Eigen::VectorXd step = ldlt.solve(grad);
      if (ldlt.info() != Eigen::Success || !step.allFinite()) {
        // Singular direction: fall back to a scaled gradient step.
        step = grad / std::max(1.0, neg_hessian.diagonal().maxCoeff());
      }
      const double decrement = 0.5 * grad.dot(step);
      result.decrement = decrement;
      ++result.newton_steps;
      // Stop once the decrement is negligible against the gap target or has
      // reached the rounding floor of the objective.
      const double floor = 1e-20 * (stage.omega.sum() + stage.omega.dot(s.array().log().abs().matrix()));
      if (!(decrement > std::min(1e-3 * options.gap_tol, 1.0) && decrement > floor)) {
        stage_converged = true;
        break;
      }

      // Largest step keeping every slack positive, then Armijo backtracking.
      const Eigen::VectorXd ds = problem.A * step;
      double t = 1.0;
      for (Eigen::Index k = 0; k < terms; ++k) {
        if (ds[k] < 0.0) t = std::min(t, -0.99 * s[k] / ds[k]);
      }
      const double f0 = stage.value(result.theta);
      const double slope = grad.dot(step);
      bool moved = false;
      for (int ls = 0; ls < 80; ++ls) {
        const Eigen::VectorXd trial = result.theta + t * step;
        const double f1 = stage.value(trial);
        if (f1 >= f0 + 1e-4 * t * slope || (f1 >= f0 && ls > 40)) {
          moved = (trial - result.theta).lpNorm<Eigen::Infinity>() > 0.0;
          result.theta = trial;
          break;
        }
        t *= 0.5;
      }
      if (!moved) {
        stage_converged = true;
        break;
      }
    }

    if (!stage_converged) return result;
    result.gap = mu * barrier_terms;
    if (mu == 0.0 || result.gap <= options.gap_tol) {
      result.converged = true;
      break;
    }
    mu /= options.mu_shrink;
  }

  result.objective = log_affine_objective(problem, result.theta);
  return result;
}

}  // namespace bellrand::detail
