#pragma once

// Domain types for the two-station, two-setting, two-outcome Bell scenario.
//
// Every 16-cell quantity is a 4x4 row-major table: rows are the setting pair
// xy in the order 00, 01, 10, 11 and columns the outcome pair ab in the order
// ++, +0, 0+, 00. The outcome '+' is encoded as bit 1 and '0' as bit 0.

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bellrand/errors.hpp"

namespace bellrand {

template <typename Scalar>
using CellTable = Eigen::Array<Scalar, 4, 4, Eigen::RowMajor>;

using CellArray = CellTable<double>;
using CountArray = CellTable<std::int64_t>;

inline constexpr double kNormalizationTol = 1e-12;
inline constexpr double kLinearConstraintTol = 1e-9;

/// Row index of the setting pair (x, y).
constexpr int settings_row(int x, int y) noexcept { return 2 * x + y; }

/// Column index of the outcome pair (a, b) with '+' = 1.
constexpr int outcome_col(int a, int b) noexcept { return 2 * (1 - a) + (1 - b); }

constexpr int setting_x(int row) noexcept { return row >> 1; }
constexpr int setting_y(int row) noexcept { return row & 1; }
constexpr int outcome_a(int col) noexcept { return 1 - (col >> 1); }
constexpr int outcome_b(int col) noexcept { return 1 - (col & 1); }

/// One Bell-test trial.
struct TrialRecord {
  std::uint8_t x = 0;
  std::uint8_t y = 0;
  std::uint8_t a = 0;  // 1 = '+', 0 = '0'
  std::uint8_t b = 0;

  constexpr bool valid() const noexcept { return x <= 1 && y <= 1 && a <= 1 && b <= 1; }
  constexpr int row() const noexcept { return settings_row(x, y); }
  constexpr int col() const noexcept { return outcome_col(a, b); }

  friend constexpr bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

char outcome_symbol(int bit);
int parse_outcome_symbol(char c);  // throws InputError

/// Throws InputError naming `index` if the record holds an invalid symbol.
void validate_trial(const TrialRecord& trial, std::uint64_t index);

/// Observed counts N(ab, xy).
class CountTable {
 public:
  /// Validates non-negativity and that every setting pair has a trial.
  explicit CountTable(const CountArray& counts);

  static CountTable tally(std::span<const TrialRecord> trials);

  const CountArray& counts() const noexcept { return counts_; }
  std::int64_t operator()(int row, int col) const { return counts_(row, col); }
  std::int64_t settings_total(int row) const { return counts_.row(row).sum(); }
  std::int64_t total() const { return counts_.sum(); }

  /// Empirical conditional frequencies f(ab|xy).
  CellArray conditional_frequencies() const;

 private:
  CountArray counts_;
};

/// Settings distribution q(x, y), row order as in the cell tables.
class SettingsDistribution {
 public:
  explicit SettingsDistribution(const Eigen::Array4d& probabilities);
  static SettingsDistribution uniform();

  const Eigen::Array4d& probabilities() const noexcept { return q_; }
  double operator[](int row) const { return q_[row]; }

  /// True when every entry lies in [1/4 - alpha, 1/4 + alpha].
  bool admissible(double alpha) const;

 private:
  Eigen::Array4d q_;
};

/// P(ab|xy); each row sums to one.
class ConditionalDistribution {
 public:
  explicit ConditionalDistribution(const CellArray& conditional);

  const CellArray& table() const noexcept { return p_; }
  double operator()(int row, int col) const { return p_(row, col); }

  /// Marginal-independence equalities of the conditional table.
  bool is_nonsignaling(double tol = kLinearConstraintTol) const;

  friend bool operator==(const ConditionalDistribution& l, const ConditionalDistribution& r) {
    return (l.p_ == r.p_).all();
  }

 private:
  CellArray p_;
};

/// Joint distribution P(a, b, x, y) with optional invariant flags.
class JointDistribution {
 public:
  struct Flags {
    bool uniform_settings = true;
    bool nonsignaling = true;
  };

  /// Validates normalization and whichever invariants `flags` requests.
  JointDistribution(const CellArray& joint, Flags flags);
  explicit JointDistribution(const CellArray& joint) : JointDistribution(joint, Flags{}) {}

  static JointDistribution from_conditional(const ConditionalDistribution& conditional,
                                            const SettingsDistribution& settings);
  static JointDistribution from_conditional(const ConditionalDistribution& conditional) {
    return from_conditional(conditional, SettingsDistribution::uniform());
  }

  const CellArray& table() const noexcept { return p_; }
  double operator()(int row, int col) const { return p_(row, col); }
  const Flags& flags() const noexcept { return flags_; }

  Eigen::Array4d settings_marginals() const { return p_.rowwise().sum(); }
  ConditionalDistribution conditional() const;

 private:
  CellArray p_;
  Flags flags_;
};

/// Positive per-trial score T(a, b, x, y) with its certified excess m.
class BellFunction {
 public:
  /// Requires every value > 0 and alpha in [0, 1/4).
  BellFunction(const CellArray& values, double m, double alpha);

  const CellArray& values() const noexcept { return t_; }
  double operator()(int row, int col) const { return t_(row, col); }
  double m() const noexcept { return m_; }
  double alpha() const noexcept { return alpha_; }

  double operator()(const TrialRecord& trial) const { return t_(trial.row(), trial.col()); }

 private:
  CellArray t_;
  double m_;
  double alpha_;
};

/// E(f) under a joint table.
template <typename Derived, typename OtherDerived>
auto expectation(const Eigen::ArrayBase<Derived>& joint, const Eigen::ArrayBase<OtherDerived>& f) {
  return (joint * f).sum();
}

/// E(f) when the conditional table is paired with a settings distribution.
template <typename Derived, typename OtherDerived>
auto expectation(const Eigen::ArrayBase<Derived>& conditional,
                 const Eigen::ArrayBase<OtherDerived>& f, const Eigen::Array4d& settings) {
  return ((conditional * f).rowwise().sum() * settings.cast<typename Derived::Scalar>()).sum();
}

/// Local strategy lambda = (a0, a1, b0, b1).
struct LocalStrategy {
  std::array<std::uint8_t, 2> a{};
  std::array<std::uint8_t, 2> b{};
};

/// The 16 settings-conditional deterministic local distributions, indexed by
/// lambda = 8*a0 + 4*a1 + 2*b0 + b1 with bits in the '+' = 1 encoding.
std::vector<ConditionalDistribution> deterministic_lr_points();
LocalStrategy local_strategy(int lambda);

/// Orientation of a PR box: outcomes satisfy a XOR b = ((x XOR u) AND (y XOR v)) XOR w.
struct PrOrientation {
  std::uint8_t u = 0;
  std::uint8_t v = 0;
  std::uint8_t w = 0;
};

/// The canonical PR box (orientation 0) followed by its 7 relabelings.
std::vector<ConditionalDistribution> pr_boxes();
PrOrientation pr_orientation(int index);

/// CHSH indicator aligned with a PR-box orientation; orientation 0 is the
/// textbook function with E = 1 on the canonical box.
CellArray chsh_indicator(const PrOrientation& orientation = {});

/// LR points followed by PR boxes: the 24 vertices of the non-signaling polytope.
std::vector<ConditionalDistribution> nonsignaling_extreme_points();

}  // namespace bellrand
