#include "bellrand/core.hpp"

#include <cmath>
#include <string>

namespace bellrand {

namespace {

std::string cell_name(int row, int col) {
  std::string s;
  s += outcome_symbol(outcome_a(col));
  s += outcome_symbol(outcome_b(col));
  s += '|';
  s += static_cast<char>('0' + setting_x(row));
  s += static_cast<char>('0' + setting_y(row));
  return s;
}

// Alice's '+' marginal and Bob's '+' marginal for a conditional row.
double alice_plus(const CellArray& p, int row) {
  return p(row, outcome_col(1, 1)) + p(row, outcome_col(1, 0));
}
double bob_plus(const CellArray& p, int row) {
  return p(row, outcome_col(1, 1)) + p(row, outcome_col(0, 1));
}

}  // namespace

char outcome_symbol(int bit) { return bit ? '+' : '0'; }

int parse_outcome_symbol(char c) {
  if (c == '+' || c == '1') return 1;
  if (c == '0') return 0;
  throw InputError(std::string("invalid outcome symbol '") + c + "'");
}

void validate_trial(const TrialRecord& trial, std::uint64_t index) {
  if (!trial.valid()) {
    throw InputError("trial " + std::to_string(index) + " holds an invalid setting or outcome symbol");
  }
}

// --- CountTable -------------------------------------------------------------

CountTable::CountTable(const CountArray& counts) : counts_(counts) {
  if ((counts_ < 0).any()) throw InputError("count table holds a negative count");
  for (int row = 0; row < 4; ++row) {
    if (settings_total(row) == 0) {
      throw InputError("count table has no trials at setting pair " +
                       std::to_string(setting_x(row)) + std::to_string(setting_y(row)));
    }
  }
}

CountTable CountTable::tally(std::span<const TrialRecord> trials) {
  CountArray counts = CountArray::Zero();
  std::uint64_t index = 0;
  for (const auto& trial : trials) {
    validate_trial(trial, index++);
    ++counts(trial.row(), trial.col());
  }
  return CountTable(counts);
}

CellArray CountTable::conditional_frequencies() const {
  CellArray f = counts_.cast<double>();
  for (int row = 0; row < 4; ++row) f.row(row) /= static_cast<double>(settings_total(row));
  return f;
}

// --- SettingsDistribution ---------------------------------------------------

SettingsDistribution::SettingsDistribution(const Eigen::Array4d& probabilities) : q_(probabilities) {
  if ((q_ < 0).any() || std::abs(q_.sum() - 1.0) > kNormalizationTol) {
    throw DomainError("settings distribution must be non-negative and sum to 1");
  }
}

SettingsDistribution SettingsDistribution::uniform() {
  return SettingsDistribution(Eigen::Array4d::Constant(0.25));
}

bool SettingsDistribution::admissible(double alpha) const {
  return ((q_ - 0.25).abs() <= alpha + kLinearConstraintTol).all();
}

// --- ConditionalDistribution ------------------------------------------------

ConditionalDistribution::ConditionalDistribution(const CellArray& conditional) : p_(conditional) {
  if ((p_ < 0).any()) throw DomainError("conditional distribution holds a negative entry");
  for (int row = 0; row < 4; ++row) {
    if (std::abs(p_.row(row).sum() - 1.0) > kNormalizationTol) {
      throw DomainError("conditional distribution row " + std::to_string(row) + " does not sum to 1");
    }
  }
}

bool ConditionalDistribution::is_nonsignaling(double tol) const {
  for (int x = 0; x < 2; ++x) {
    if (std::abs(alice_plus(p_, settings_row(x, 0)) - alice_plus(p_, settings_row(x, 1))) > tol) {
      return false;
    }
  }
  for (int y = 0; y < 2; ++y) {
    if (std::abs(bob_plus(p_, settings_row(0, y)) - bob_plus(p_, settings_row(1, y))) > tol) {
      return false;
    }
  }
  return true;
}

// --- JointDistribution ------------------------------------------------------

JointDistribution::JointDistribution(const CellArray& joint, Flags flags) : p_(joint), flags_(flags) {
  for (int row = 0; row < 4; ++row) {
    for (int col = 0; col < 4; ++col) {
      if (!(p_(row, col) >= 0.0) || p_(row, col) > 1.0) {
        throw DomainError("probability of " + cell_name(row, col) + " outside [0, 1]");
      }
    }
  }
  if (std::abs(p_.sum() - 1.0) > kNormalizationTol) {
    throw DomainError("joint distribution is not normalized");
  }
  const Eigen::Array4d marginals = settings_marginals();
  if (flags_.uniform_settings && ((marginals - 0.25).abs() > kLinearConstraintTol).any()) {
    throw DomainError("settings marginals are not uniform");
  }
  if (flags_.nonsignaling) {
    if ((marginals <= 0.0).any()) {
      throw DomainError("non-signaling check needs every setting pair to have positive probability");
    }
    CellArray cond = p_;
    for (int row = 0; row < 4; ++row) cond.row(row) /= marginals[row];
    for (int x = 0; x < 2; ++x) {
      if (std::abs(alice_plus(cond, settings_row(x, 0)) - alice_plus(cond, settings_row(x, 1))) >
          kLinearConstraintTol) {
        throw DomainError("non-signaling equality violated for Alice at x=" + std::to_string(x));
      }
    }
    for (int y = 0; y < 2; ++y) {
      if (std::abs(bob_plus(cond, settings_row(0, y)) - bob_plus(cond, settings_row(1, y))) >
          kLinearConstraintTol) {
        throw DomainError("non-signaling equality violated for Bob at y=" + std::to_string(y));
      }
    }
  }
}

JointDistribution JointDistribution::from_conditional(const ConditionalDistribution& conditional,
                                                      const SettingsDistribution& settings) {
  CellArray joint = conditional.table();
  for (int row = 0; row < 4; ++row) joint.row(row) *= settings[row];
  Flags flags;
  flags.uniform_settings = ((settings.probabilities() - 0.25).abs() <= kLinearConstraintTol).all();
  flags.nonsignaling = conditional.is_nonsignaling() && (settings.probabilities() > 0).all();
  return JointDistribution(joint, flags);
}

ConditionalDistribution JointDistribution::conditional() const {
  CellArray cond = p_;
  const Eigen::Array4d marginals = settings_marginals();
  for (int row = 0; row < 4; ++row) {
    if (marginals[row] <= 0.0) throw DomainError("conditional undefined for a zero-probability setting");
    cond.row(row) /= marginals[row];
  }
  return ConditionalDistribution(cond);
}

// --- BellFunction -----------------------------------------------------------

BellFunction::BellFunction(const CellArray& values, double m, double alpha)
    : t_(values), m_(m), alpha_(alpha) {
  if (!((t_ > 0.0).all())) throw DomainError("Bell function values must be strictly positive");
  if (!(alpha >= 0.0 && alpha < 0.25)) throw DomainError("settings-bias alpha must lie in [0, 1/4)");
}

// --- extreme points ---------------------------------------------------------

LocalStrategy local_strategy(int lambda) {
  LocalStrategy s;
  s.a[0] = static_cast<std::uint8_t>((lambda >> 3) & 1);
  s.a[1] = static_cast<std::uint8_t>((lambda >> 2) & 1);
  s.b[0] = static_cast<std::uint8_t>((lambda >> 1) & 1);
  s.b[1] = static_cast<std::uint8_t>(lambda & 1);
  return s;
}

std::vector<ConditionalDistribution> deterministic_lr_points() {
  std::vector<ConditionalDistribution> points;
  points.reserve(16);
  for (int lambda = 0; lambda < 16; ++lambda) {
    const LocalStrategy s = local_strategy(lambda);
    CellArray p = CellArray::Zero();
    for (int x = 0; x < 2; ++x) {
      for (int y = 0; y < 2; ++y) p(settings_row(x, y), outcome_col(s.a[x], s.b[y])) = 1.0;
    }
    points.emplace_back(p);
  }
  return points;
}

PrOrientation pr_orientation(int index) {
  return {static_cast<std::uint8_t>((index >> 2) & 1), static_cast<std::uint8_t>((index >> 1) & 1),
          static_cast<std::uint8_t>(index & 1)};
}

CellArray chsh_indicator(const PrOrientation& o) {
  CellArray t = CellArray::Zero();
  for (int row = 0; row < 4; ++row) {
    const int parity = ((setting_x(row) ^ o.u) & (setting_y(row) ^ o.v)) ^ o.w;
    for (int col = 0; col < 4; ++col) {
      if ((outcome_a(col) ^ outcome_b(col)) == parity) t(row, col) = 1.0;
    }
  }
  return t;
}

std::vector<ConditionalDistribution> pr_boxes() {
  std::vector<ConditionalDistribution> boxes;
  boxes.reserve(8);
  for (int i = 0; i < 8; ++i) boxes.emplace_back(0.5 * chsh_indicator(pr_orientation(i)));
  return boxes;
}

std::vector<ConditionalDistribution> nonsignaling_extreme_points() {
  auto points = deterministic_lr_points();
  for (auto& box : pr_boxes()) points.push_back(std::move(box));
  return points;
}

}  // namespace bellrand
