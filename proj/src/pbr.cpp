#include "bellrand/pbr.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

#include "bellrand/detail/log_affine.hpp"

namespace bellrand {

namespace {

constexpr int kFree = 12;
using FreeVector = Eigen::Matrix<double, kFree, 1>;

// Free cells are every (row, col) except ab = 00, i.e. col 3.
int free_index(int row, int col) { return 3 * row + col; }
bool is_free(int col) { return col != outcome_col(0, 0); }

struct LrConstraints {
  Eigen::MatrixXd g;  // rows: E(T) contribution of free cells
  Eigen::VectorXd c;  // 1 - contribution of the fixed 00 cells
};

LrConstraints lr_constraints(double alpha) {
  const auto settings = extremal_settings(alpha);
  std::vector<FreeVector> rows;
  std::vector<double> rhs;
  for (int lambda = 0; lambda < 16; ++lambda) {
    const LocalStrategy s = local_strategy(lambda);
    for (const auto& q : settings) {
      FreeVector row = FreeVector::Zero();
      double fixed = 0.0;
      for (int r = 0; r < 4; ++r) {
        const int col = outcome_col(s.a[setting_x(r)], s.b[setting_y(r)]);
        if (is_free(col)) {
          row[free_index(r, col)] += q[r];
        } else {
          fixed += q[r];
        }
      }
      // The all-'0' strategy only touches fixed cells: E(T) = 1 identically.
      if (row.isZero()) continue;
      rows.push_back(row);
      rhs.push_back(1.0 - fixed);
    }
  }
  LrConstraints out;
  out.g.resize(static_cast<Eigen::Index>(rows.size()), kFree);
  out.c.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.g.row(static_cast<Eigen::Index>(k)) = rows[k].transpose();
    out.c[static_cast<Eigen::Index>(k)] = rhs[k];
  }
  return out;
}

CellArray assemble(const FreeVector& t) {
  CellArray values = CellArray::Ones();
  for (int r = 0; r < 4; ++r) {
    for (int col = 0; col < 4; ++col) {
      if (is_free(col)) values(r, col) = t[free_index(r, col)];
    }
  }
  return values;
}

double expected_log(const CellArray& q, const CellArray& values) {
  double total = 0.0;
  for (int r = 0; r < 4; ++r) {
    for (int col = 0; col < 4; ++col) {
      if (q(r, col) > 0.0) total += q(r, col) * std::log(values(r, col));
    }
  }
  return total;
}

struct Polished {
  FreeVector t;
  double kkt = 0.0;
  bool ok = false;
};

// Newton on the face cut out by the active constraints, then a multiplier
// sign check. Reaches full precision where the barrier path stalls.
Polished polish(const FreeVector& start, const FreeVector& w, const LrConstraints& lr) {
  Polished out{start, 0.0, false};
  const Eigen::VectorXd slack = lr.c - lr.g * start;
  std::vector<Eigen::Index> active;
  for (Eigen::Index k = 0; k < slack.size(); ++k) {
    if (slack[k] < 1e-9) active.push_back(k);
  }
  if (active.empty()) return out;

  Eigen::MatrixXd ga(static_cast<Eigen::Index>(active.size()), kFree);
  Eigen::VectorXd ca(static_cast<Eigen::Index>(active.size()));
  for (std::size_t i = 0; i < active.size(); ++i) {
    ga.row(static_cast<Eigen::Index>(i)) = lr.g.row(active[i]);
    ca[static_cast<Eigen::Index>(i)] = lr.c[active[i]];
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(ga, Eigen::ComputeFullU | Eigen::ComputeFullV);
  svd.setThreshold(1e-10);
  const Eigen::Index rank = svd.rank();
  const Eigen::MatrixXd basis = svd.matrixV().rightCols(kFree - rank);

  FreeVector t = start + svd.solve(ca - ga * start);
  if (!((t.array() > 0.0).all())) return out;

  for (int it = 0; it < 60 && basis.cols() > 0; ++it) {
    const FreeVector grad = w.cwiseQuotient(t);
    const FreeVector curv = grad.cwiseQuotient(t);
    const Eigen::VectorXd rg = basis.transpose() * grad;
    const Eigen::MatrixXd rh = basis.transpose() * curv.asDiagonal() * basis;
    const Eigen::VectorXd dz = rh.ldlt().solve(rg);
    FreeVector step = basis * dz;
    double scale = 1.0;
    for (int i = 0; i < kFree; ++i) {
      if (step[i] < 0.0) scale = std::min(scale, -0.9 * t[i] / step[i]);
    }
    t += scale * step;
    if (rg.dot(dz) < 1e-32) break;
  }

  const FreeVector grad = w.cwiseQuotient(t);
  const Eigen::VectorXd lambda =
      ga.transpose().jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(grad);
  const double scale = grad.norm();
  out.kkt = (ga.transpose() * lambda - grad).norm() / scale;
  const bool multipliers_ok = (lambda.array() >= -1e-9 * scale).all();
  const bool feasible = ((lr.c - lr.g * t).array() >= -1e-15).all() && (t.array() > 0.0).all();
  out.ok = multipliers_ok && feasible && out.kkt < 1e-8;
  if (out.ok) out.t = t;
  return out;
}

double round_down(double v, double unit) {
  const double r = std::floor(v / unit) * unit;
  // Values below one unit keep their (already positive) raw value.
  return r > 0.0 ? std::min(r, v) : v;
}

}  // namespace

std::vector<SettingsDistribution> extremal_settings(double alpha) {
  if (!(alpha >= 0.0 && alpha < 0.25)) throw DomainError("alpha must lie in [0, 1/4)");
  if (alpha == 0.0) return {SettingsDistribution::uniform()};
  std::vector<SettingsDistribution> out;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      Eigen::Array4d q = Eigen::Array4d::Constant(0.25 - alpha);
      q[i] = 0.25 + alpha;
      q[j] = 0.25 + alpha;
      out.emplace_back(q);
    }
  }
  return out;
}

double lr_excess(const CellArray& values, double alpha) {
  double best = -std::numeric_limits<double>::infinity();
  const auto settings = extremal_settings(alpha);
  for (const auto& point : deterministic_lr_points()) {
    for (const auto& q : settings) {
      best = std::max(best, expectation(point.table(), values, q.probabilities()));
    }
  }
  return best - 1.0;
}

double nonsignaling_excess(const CellArray& values, double alpha) {
  double best = -std::numeric_limits<double>::infinity();
  const auto settings = extremal_settings(alpha);
  for (const auto& point : nonsignaling_extreme_points()) {
    for (const auto& q : settings) {
      best = std::max(best, expectation(point.table(), values, q.probabilities()));
    }
  }
  return best - 1.0;
}

double compute_m(const CellArray& values, double alpha) {
  if (!((values > 0.0).all())) throw DomainError("Bell function values must be strictly positive");
  const double m = nonsignaling_excess(values, alpha);
  if (!(m > 0.0)) throw DomainError("non-signaling excess m must be positive");
  return m;
}

double asymptotic_rate(const BellFunction& t, const JointDistribution& q) {
  if (!(t.m() > 0.0)) throw DomainError("asymptotic rate needs m > 0");
  double total = 0.0;
  for (int r = 0; r < 4; ++r) {
    for (int col = 0; col < 4; ++col) {
      if (q(r, col) > 0.0) total += q(r, col) * std::log2(t(r, col));
    }
  }
  return total / (2.0 * t.m());
}

PbrResult optimize_bell_function(const JointDistribution& q, double alpha, const PbrOptions& options) {
  if (!q.flags().nonsignaling || !q.flags().uniform_settings) {
    throw DomainError("Bell function optimization needs a non-signaling Q with uniform settings");
  }
  const LrConstraints lr = lr_constraints(alpha);

  FreeVector w;
  for (int r = 0; r < 4; ++r) {
    for (int col = 0; col < 3; ++col) w[free_index(r, col)] = q(r, col);
  }
  const double weight_scale = w.sum();

  detail::LogAffineProblem problem;
  const Eigen::Index k = lr.g.rows();
  problem.A.resize(kFree + k, kFree);
  problem.b.resize(kFree + k);
  problem.weight.resize(kFree + k);
  problem.A.topRows(kFree).setIdentity();
  problem.b.head(kFree).setZero();
  problem.weight.head(kFree) = w;
  problem.A.bottomRows(k) = -lr.g;
  problem.b.tail(k) = lr.c;
  problem.weight.tail(k).setZero();

  detail::LogAffineOptions solver;
  solver.mu_initial = std::max(weight_scale, 1e-300);
  solver.gap_tol = options.tol * std::max(weight_scale, 1e-300);
  const auto solved = detail::maximize_log_affine(problem, FreeVector::Constant(0.5), solver);
  if (!solved.converged) {
    throw ConvergenceError("Bell function optimization did not converge", solved.gap);
  }

  FreeVector t = solved.theta;
  double kkt = 1.0;
  const double raw_barrier_objective = expected_log(q.table(), assemble(t));
  const bool violation = raw_barrier_objective > 1e-12 * std::max(weight_scale, 1e-300);
  if (violation && (w.array() > 0.0).all()) {
    const Polished p = polish(t, w, lr);
    if (p.ok) {
      t = p.t;
      kkt = p.kkt;
    }
  }

  PbrResult out{BellFunction(CellArray::Ones(), 0.0, alpha), assemble(t), 0.0, 0.0, 0.0, kkt, violation};
  out.raw_objective = expected_log(q.table(), out.raw_values);
  out.m_raw = nonsignaling_excess(out.raw_values, alpha);

  const double unit = std::pow(10.0, -options.decimals);
  FreeVector rounded = t.unaryExpr([unit](double v) { return round_down(v, unit); });
  // Rounding down never raises a local expectation; guard the rare case
  // where the raw optimum overshoots by a rounding error on a grid point.
  for (int guard = 0; guard < 100 && lr_excess(assemble(rounded), alpha) > 0.0; ++guard) {
    rounded = rounded.unaryExpr([unit](double v) { return v > unit ? v - unit : v; });
  }

  const CellArray values = assemble(rounded);
  out.function = BellFunction(values, nonsignaling_excess(values, alpha), alpha);
  out.objective = expected_log(q.table(), values);
  return out;
}

}  // namespace bellrand
