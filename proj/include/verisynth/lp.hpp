#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace verisynth {

struct LpError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Relation { leq, eq, geq };
enum class Sense { minimize, maximize };

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct LpConstraint {
  std::vector<std::pair<int, double>> coeffs;  // (variable index, coefficient)
  Relation rel = Relation::leq;
  double rhs = 0.0;
};

// A linear program over named, box-bounded variables. Bounds may be
// infinite; a variable with lower == upper is treated as a constant.
struct LinearProgram {
  Sense sense = Sense::minimize;
  std::vector<std::string> names;
  std::vector<double> lower, upper;
  std::vector<std::pair<int, double>> objective;
  std::vector<LpConstraint> constraints;

  int add_variable(std::string name, double lo = 0.0, double hi = kInf);
  void add_constraint(std::vector<std::pair<int, double>> coeffs, Relation rel,
                      double rhs);
  int num_variables() const { return static_cast<int>(lower.size()); }

  // Fixed-format text dump (objective row, constraint rows, bounds section)
  // for external cross-checking.
  std::string dump() const;
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status = LpStatus::optimal;
  double objective = 0.0;
  std::vector<double> assignment;  // one value per declared variable
  int pivots = 0;
  double value(int var) const { return assignment.at(var); }
};

// Two-phase dense-tableau simplex with Bland's pivoting rule. Deterministic
// for identical input; throws LpError on malformed input or when the pivot
// budget is exhausted (numerical instability).
LpResult solve_lp(const LinearProgram& lp);

}  // namespace verisynth
