#pragma once

#include <vector>

#include "bellrand/core.hpp"

namespace bellrand {

/// Settings distributions at the vertices of the alpha-box: 1/4 + alpha on two
/// setting pairs and 1/4 - alpha on the other two. The single uniform
/// distribution when alpha = 0.
std::vector<SettingsDistribution> extremal_settings(double alpha);

struct PbrOptions {
  double tol = 1e-12;     // relative optimality target for the raw optimum
  int decimals = 10;      // values are rounded down at this decimal digit
};

struct PbrResult {
  BellFunction function;      // rounded values, m recomputed from them
  CellArray raw_values;       // optimizer output before rounding
  double m_raw = 0.0;         // excess of the unrounded values
  double objective = 0.0;     // E(ln T) under Q for the rounded values
  double raw_objective = 0.0;
  double kkt_residual = 0.0;  // relative stationarity of the raw optimum
  bool violation = true;      // false: Q shows no certifiable violation
};

/// Maximizes E(ln T)_Q subject to E(T) <= 1 for every local deterministic
/// strategy under every extremal settings distribution, with T(0,0,x,y) = 1.
PbrResult optimize_bell_function(const JointDistribution& q, double alpha,
                                 const PbrOptions& options = {});

/// Largest E(T) - 1 over local deterministic strategies and extremal settings.
double lr_excess(const CellArray& values, double alpha);

/// Largest E(T) - 1 over all 24 non-signaling vertices and extremal settings,
/// without the positivity requirement.
double nonsignaling_excess(const CellArray& values, double alpha);

/// Certified non-signaling excess m; throws DomainError if m <= 0.
double compute_m(const CellArray& values, double alpha);

/// E(log2 T)_Q / (2 m): the asymptotic bits per trial.
double asymptotic_rate(const BellFunction& t, const JointDistribution& q);

}  // namespace bellrand
