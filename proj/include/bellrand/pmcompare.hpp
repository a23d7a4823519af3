#pragma once

#include "bellrand/core.hpp"

namespace bellrand {

struct PrWeight {
  double p = 0.0;              // max(0, 4 (E(T^c) - 3/4)) over orientations
  int orientation = 0;         // maximizing PR-box orientation
  double chsh_expectation = 0.0;
};

/// Weight of the PR-box component when the local part sits on a CHSH facet.
/// For a general Q this is a facet-based estimate.
PrWeight pr_weight_detail(const JointDistribution& q);
inline double pr_weight(const JointDistribution& q) { return pr_weight_detail(q).p; }

/// Lower bound 8 ln(1/eps) / p^2 on the trials the PM protocol needs;
/// +infinity when p = 0.
double pm_min_trials(double p, double eps);

}  // namespace bellrand
