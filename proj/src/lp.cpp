#include "verisynth/lp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "verisynth/kernels.hpp"

namespace verisynth {

namespace {

constexpr double kEps = 1e-9;  // pivot / feasibility / optimality tolerance

struct Tableau {
  // Row-major dense tableau: m constraint rows of width w, plus a separate
  // objective row. Column w-1 is the right-hand side.
  int m = 0, w = 0;
  std::vector<double> a;     // m * w
  std::vector<double> obj;   // w (reduced costs, obj[w-1] = -objective value)
  std::vector<int> basis;    // basic variable per row

  double* row(int i) { return a.data() + static_cast<std::size_t>(i) * w; }
  const double* row(int i) const {
    return a.data() + static_cast<std::size_t>(i) * w;
  }

  void pivot(int pr, int pc) {
    double* prow = row(pr);
    const double piv = prow[pc];
    kernels::scale(prow, 1.0 / piv, w);
    prow[pc] = 1.0;  // cut rounding residue on the pivot column
    for (int i = 0; i < m; ++i) {
      if (i == pr) continue;
      double* r = row(i);
      const double f = r[pc];
      if (f != 0.0) {
        kernels::axpy(-f, prow, r, w);
        r[pc] = 0.0;
      }
    }
    const double f = obj[pc];
    if (f != 0.0) {
      kernels::axpy(-f, prow, obj.data(), w);
      obj[pc] = 0.0;
    }
    basis[pr] = pc;
  }
};

// Bland's rule: entering = lowest-index column with reduced cost < -eps;
// leaving = minimum-ratio row, ties broken by the lowest basic-variable
// index. Guarantees termination under degeneracy.
enum class StepResult { optimal, unbounded, pivoted };

StepResult simplex_step(Tableau& t, int ncols) {
  int enter = -1;
  for (int j = 0; j < ncols; ++j) {
    if (t.obj[j] < -kEps) {
      enter = j;
      break;
    }
  }
  if (enter < 0) return StepResult::optimal;

  int leave = -1;
  double best_ratio = 0.0;
  for (int i = 0; i < t.m; ++i) {
    const double aij = t.row(i)[enter];
    if (aij > kEps) {
      const double ratio = t.row(i)[t.w - 1] / aij;
      if (leave < 0 || ratio < best_ratio - kEps ||
          (ratio < best_ratio + kEps && t.basis[i] < t.basis[leave])) {
        leave = i;
        best_ratio = ratio;
      }
    }
  }
  if (leave < 0) return StepResult::unbounded;
  t.pivot(leave, enter);
  return StepResult::pivoted;
}

void run_simplex(Tableau& t, int ncols, int max_pivots, int& pivots) {
  for (;;) {
    const StepResult r = simplex_step(t, ncols);
    if (r == StepResult::optimal) return;
    if (r == StepResult::unbounded) throw LpStatus::unbounded;  // caught below
    if (++pivots > max_pivots) {
      throw LpError("simplex: pivot budget exhausted (numerical instability)");
    }
    if (!std::isfinite(t.obj[t.w - 1])) {
      throw LpError("simplex: non-finite tableau entry (numerical instability)");
    }
  }
}

}  // namespace

int LinearProgram::add_variable(std::string name, double lo, double hi) {
  if (std::isnan(lo) || std::isnan(hi) || lo > hi) {
    throw LpError("variable '" + name + "': invalid bounds");
  }
  names.push_back(std::move(name));
  lower.push_back(lo);
  upper.push_back(hi);
  return static_cast<int>(lower.size()) - 1;
}

void LinearProgram::add_constraint(std::vector<std::pair<int, double>> coeffs,
                                   Relation rel, double rhs) {
  for (const auto& [v, c] : coeffs) {
    if (v < 0 || v >= num_variables()) {
      throw LpError("constraint references undeclared variable " +
                    std::to_string(v));
    }
    if (!std::isfinite(c)) throw LpError("non-finite constraint coefficient");
  }
  if (!std::isfinite(rhs)) throw LpError("non-finite constraint rhs");
  constraints.push_back({std::move(coeffs), rel, rhs});
}

std::string LinearProgram::dump() const {
  std::ostringstream out;
  out.precision(17);
  auto term = [&](std::ostream& os, int v, double c, bool first) {
    if (!first) os << (c < 0 ? " - " : " + ");
    else if (c < 0) os << "-";
    os << std::abs(c) << " " << (names[v].empty() ? "x" + std::to_string(v)
                                                  : names[v]);
  };
  out << (sense == Sense::minimize ? "min:" : "max:");
  bool first = true;
  for (const auto& [v, c] : objective) {
    out << " ";
    term(out, v, c, first);
    first = false;
  }
  out << "\n";
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    const auto& con = constraints[i];
    out << "c" << i << ":";
    first = true;
    for (const auto& [v, c] : con.coeffs) {
      out << " ";
      term(out, v, c, first);
      first = false;
    }
    out << (con.rel == Relation::leq ? " <= "
            : con.rel == Relation::eq ? " = "
                                      : " >= ")
        << con.rhs << "\n";
  }
  out << "bounds:\n";
  for (int v = 0; v < num_variables(); ++v) {
    out << "  " << lower[v] << " <= "
        << (names[v].empty() ? "x" + std::to_string(v) : names[v]) << " <= "
        << upper[v] << "\n";
  }
  return out.str();
}

LpResult solve_lp(const LinearProgram& lp) {
  for (const auto& [v, c] : lp.objective) {
    if (v < 0 || v >= lp.num_variables() || !std::isfinite(c)) {
      throw LpError("malformed objective");
    }
  }

  const int n = lp.num_variables();

  // Substitution to nonnegative solver variables:
  //   finite lower:        x = lo + u          (u >= 0)
  //   -inf lower, finite upper: x = hi - u     (u >= 0)
  //   free:                x = u+ - u-
  // A variable with lo == hi is replaced by the constant lo.
  struct Sub {
    int u = -1, uneg = -1;  // solver columns (uneg >= 0 only for free vars)
    double shift = 0.0;     // additive constant
    double dir = 1.0;       // +1 or -1 on u
    bool fixed = false;
  };
  std::vector<Sub> subs(n);
  int ncols = 0;
  for (int v = 0; v < n; ++v) {
    Sub& s = subs[v];
    if (lp.lower[v] == lp.upper[v]) {
      s.fixed = true;
      s.shift = lp.lower[v];
    } else if (lp.lower[v] > -kInf) {
      s.u = ncols++;
      s.shift = lp.lower[v];
    } else if (lp.upper[v] < kInf) {
      s.u = ncols++;
      s.shift = lp.upper[v];
      s.dir = -1.0;
    } else {
      s.u = ncols++;
      s.uneg = ncols++;
    }
  }

  // Rows: the declared constraints plus one row per residual upper bound.
  struct Row {
    std::vector<double> coeff;  // dense over solver columns
    Relation rel;
    double rhs;
  };
  std::vector<Row> rows;
  auto add_row = [&](const std::vector<std::pair<int, double>>& coeffs,
                     Relation rel, double rhs) {
    Row r{std::vector<double>(ncols, 0.0), rel, rhs};
    for (const auto& [v, c] : coeffs) {
      const Sub& s = subs[v];
      r.rhs -= c * s.shift;
      if (s.fixed) continue;
      r.coeff[s.u] += c * s.dir;
      if (s.uneg >= 0) r.coeff[s.uneg] -= c;
    }
    rows.push_back(std::move(r));
  };
  for (const auto& con : lp.constraints) add_row(con.coeffs, con.rel, con.rhs);
  for (int v = 0; v < n; ++v) {
    if (!subs[v].fixed && lp.lower[v] > -kInf && lp.upper[v] < kInf) {
      add_row({{v, 1.0}}, Relation::leq, lp.upper[v]);
    }
  }

  const int m = static_cast<int>(rows.size());

  // Objective over solver columns (minimization form).
  std::vector<double> cost(ncols, 0.0);
  double obj_shift = 0.0;
  const double sgn = lp.sense == Sense::minimize ? 1.0 : -1.0;
  for (const auto& [v, c] : lp.objective) {
    const Sub& s = subs[v];
    obj_shift += c * s.shift;
    if (s.fixed) continue;
    cost[s.u] += sgn * c * s.dir;
    if (s.uneg >= 0) cost[s.uneg] -= sgn * c;
  }

  // Standard form: normalize rhs >= 0, then slack (<=), surplus (>=) and
  // artificial columns. Total width: ncols + slacks + artificials + rhs.
  int nslack = 0, nart = 0;
  for (auto& r : rows) {
    if (r.rhs < 0) {
      for (double& c : r.coeff) c = -c;
      r.rhs = -r.rhs;
      r.rel = r.rel == Relation::leq ? Relation::geq
              : r.rel == Relation::geq ? Relation::leq
                                       : Relation::eq;
    }
    if (r.rel != Relation::eq) ++nslack;
    if (r.rel != Relation::leq) ++nart;
  }

  const int w = ncols + nslack + nart + 1;
  Tableau t;
  t.m = m;
  t.w = w;
  t.a.assign(static_cast<std::size_t>(m) * w, 0.0);
  t.basis.assign(m, -1);

  const int art0 = ncols + nslack;
  int slack_at = ncols, art_at = art0;
  for (int i = 0; i < m; ++i) {
    double* r = t.row(i);
    std::copy(rows[i].coeff.begin(), rows[i].coeff.end(), r);
    r[w - 1] = rows[i].rhs;
    if (rows[i].rel == Relation::leq) {
      r[slack_at] = 1.0;
      t.basis[i] = slack_at++;
    } else {
      if (rows[i].rel == Relation::geq) r[slack_at++] = -1.0;  // surplus
      r[art_at] = 1.0;
      t.basis[i] = art_at++;
    }
  }

  LpResult res;
  const int max_pivots = 2000 + 40 * (m + w);

  try {
    // Phase I: minimize the artificial sum.
    if (nart > 0) {
      t.obj.assign(w, 0.0);
      for (int j = art0; j < art0 + nart; ++j) t.obj[j] = 1.0;
      for (int i = 0; i < m; ++i) {
        if (t.basis[i] >= art0) kernels::axpy(-1.0, t.row(i), t.obj.data(), w);
      }
      run_simplex(t, art0, max_pivots, res.pivots);
      if (-t.obj[w - 1] > 1e-7) {
        res.status = LpStatus::infeasible;
        return res;
      }
      // Drive leftover artificials out of the basis (degenerate rows).
      for (int i = 0; i < m; ++i) {
        if (t.basis[i] < art0) continue;
        int pc = -1;
        for (int j = 0; j < art0; ++j) {
          if (std::abs(t.row(i)[j]) > kEps) {
            pc = j;
            break;
          }
        }
        if (pc >= 0) {
          t.pivot(i, pc);
          ++res.pivots;
        }
        // else: redundant row; the artificial stays basic at zero.
      }
    }

    // Phase II.
    t.obj.assign(w, 0.0);
    std::copy(cost.begin(), cost.end(), t.obj.begin());
    for (int i = 0; i < m; ++i) {
      const int b = t.basis[i];
      if (b < ncols && t.obj[b] != 0.0) {
        kernels::axpy(-t.obj[b], t.row(i), t.obj.data(), w);
        t.obj[b] = 0.0;
      }
    }
    // Keep artificials pinned at zero during Phase II.
    run_simplex(t, art0, max_pivots, res.pivots);
  } catch (LpStatus s) {
    res.status = s;
    return res;
  }

  std::vector<double> u(ncols, 0.0);
  for (int i = 0; i < m; ++i) {
    if (t.basis[i] < ncols) u[t.basis[i]] = t.row(i)[w - 1];
  }
  res.assignment.assign(n, 0.0);
  double obj_val = obj_shift;
  for (int v = 0; v < n; ++v) {
    const Sub& s = subs[v];
    double x = s.shift;
    if (!s.fixed) {
      x += s.dir * u[s.u];
      if (s.uneg >= 0) x -= u[s.uneg];
    }
    res.assignment[v] = x;
  }
  for (const auto& [v, c] : lp.objective) {
    if (!subs[v].fixed) obj_val += c * (res.assignment[v] - subs[v].shift);
  }
  res.objective = obj_val;
  res.status = LpStatus::optimal;
  return res;
}

}  // namespace verisynth
