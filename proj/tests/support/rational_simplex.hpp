#pragma once

// Exact-rational reference solvers used purely as test oracles.  They share
// no code with the library: the simplex below is a textbook big-M tableau
// over arbitrary-precision rationals with Bland's rule, and the confidence
// bound is evaluated directly from binomial coefficients.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracle {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

enum class Rel { leq, eq, geq };

struct Row {
  std::vector<Rational> a;  // dense coefficients, one per variable
  Rel rel = Rel::leq;
  Rational b = 0;
};

struct RationalLp {
  bool maximize = false;
  std::vector<Rational> c;  // dense objective, one per variable (x >= 0)
  std::vector<Row> rows;
};

struct RationalSolution {
  enum class Status { optimal, infeasible, unbounded } status;
  Rational objective = 0;
  std::vector<Rational> x;
};

// Two-phase primal simplex with Bland's anti-cycling rule over exact
// rationals.  Variables are nonnegative; push bounds in as rows.
inline RationalSolution solve_rational_lp(const RationalLp& lp) {
  const int n = static_cast<int>(lp.c.size());
  // Normalize to: minimize c.x, rows A x = b with b >= 0, after adding one
  // slack/surplus variable per inequality.
  std::vector<std::vector<Rational>> A;
  std::vector<Rational> b;
  std::vector<Rational> cost(n);
  for (int j = 0; j < n; ++j)
    cost[j] = lp.maximize ? -lp.c[j] : lp.c[j];
  int slacks = 0;
  for (const Row& r : lp.rows)
    if (r.rel != Rel::eq) ++slacks;
  const int total = n + slacks;
  int next_slack = n;
  for (const Row& r : lp.rows) {
    std::vector<Rational> row(total, 0);
    for (int j = 0; j < n; ++j) row[j] = r.a[j];
    Rational rhs = r.b;
    if (r.rel == Rel::leq)
      row[next_slack++] = 1;
    else if (r.rel == Rel::geq)
      row[next_slack++] = -1;
    if (rhs < 0) {
      for (Rational& v : row) v = -v;
      rhs = -rhs;
    }
    A.push_back(std::move(row));
    b.push_back(std::move(rhs));
  }
  cost.resize(total, 0);

  const int m = static_cast<int>(A.size());
  // Phase-one artificials, one per row.
  std::vector<std::vector<Rational>> T(m, std::vector<Rational>(total + m + 1, 0));
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < total; ++j) T[i][j] = A[i][j];
    T[i][total + i] = 1;
    T[i][total + m] = b[i];
    basis[i] = total + i;
  }

  auto pivot = [&](int pr, int pc) {
    const Rational piv = T[pr][pc];
    for (auto& v : T[pr]) v /= piv;
    for (int i = 0; i < m; ++i) {
      if (i == pr) continue;
      const Rational f = T[i][pc];
      if (f == 0) continue;
      for (int j = 0; j <= total + m; ++j) T[i][j] -= f * T[pr][j];
    }
    basis[pr] = pc;
  };

  // Runs Bland's rule against the reduced costs of `z` over the allowed
  // columns; returns false when the problem is unbounded in that phase.
  auto optimize = [&](const std::vector<Rational>& z, int allowed) -> bool {
    for (;;) {
      std::vector<Rational> red(allowed);
      // Reduced cost: z_j - z_B B^{-1} A_j, computed from the tableau.
      for (int j = 0; j < allowed; ++j) {
        Rational r = j < static_cast<int>(z.size()) ? z[j] : Rational(0);
        for (int i = 0; i < m; ++i) {
          const int bj = basis[i];
          const Rational zb =
              bj < static_cast<int>(z.size()) ? z[bj] : Rational(0);
          if (zb != 0) r -= zb * T[i][j];
        }
        red[j] = r;
      }
      int enter = -1;
      for (int j = 0; j < allowed; ++j)
        if (red[j] < 0) {
          enter = j;
          break;
        }
      if (enter < 0) return true;
      int leave = -1;
      Rational best = 0;
      for (int i = 0; i < m; ++i) {
        if (T[i][enter] <= 0) continue;
        const Rational ratio = T[i][total + m] / T[i][enter];
        if (leave < 0 || ratio < best ||
            (ratio == best && basis[i] < basis[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
  };

  // Phase one: minimize the sum of artificials.
  std::vector<Rational> phase1(total + m, 0);
  for (int i = 0; i < m; ++i) phase1[total + i] = 1;
  optimize(phase1, total + m);
  Rational art = 0;
  for (int i = 0; i < m; ++i)
    if (basis[i] >= total) art += T[i][total + m];
  if (art != 0) return {RationalSolution::Status::infeasible, 0, {}};
  // Drive leftover degenerate artificials out of the basis when possible.
  for (int i = 0; i < m; ++i) {
    if (basis[i] < total) continue;
    for (int j = 0; j < total; ++j)
      if (T[i][j] != 0) {
        pivot(i, j);
        break;
      }
  }

  // Phase two on the real objective.
  if (!optimize(cost, total))
    return {RationalSolution::Status::unbounded, 0, {}};

  RationalSolution sol;
  sol.status = RationalSolution::Status::optimal;
  sol.x.assign(n, 0);
  for (int i = 0; i < m; ++i)
    if (basis[i] < n) sol.x[basis[i]] = T[i][total + m];
  Rational obj = 0;
  for (int j = 0; j < n; ++j) obj += lp.c[j] * sol.x[j];
  sol.objective = obj;
  return sol;
}

// Exact worst/best expectation of `values` over distributions constrained to
// the per-entry boxes and the probability simplex:
//   opt sum_i values_i x_i  s.t.  sum x = 1, lo_i <= x_i <= hi_i.
inline std::optional<Rational> box_simplex_expectation(
    const std::vector<Rational>& lo, const std::vector<Rational>& hi,
    const std::vector<Rational>& values, bool maximize) {
  const int n = static_cast<int>(values.size());
  RationalLp lp;
  lp.maximize = maximize;
  lp.c = values;
  Row sum;
  sum.a.assign(n, 1);
  sum.rel = Rel::eq;
  sum.b = 1;
  lp.rows.push_back(sum);
  for (int i = 0; i < n; ++i) {
    Row up;
    up.a.assign(n, 0);
    up.a[i] = 1;
    up.rel = Rel::leq;
    up.b = hi[i];
    lp.rows.push_back(up);
    Row dn;
    dn.a.assign(n, 0);
    dn.a[i] = 1;
    dn.rel = Rel::geq;
    dn.b = lo[i];
    lp.rows.push_back(dn);
  }
  const RationalSolution sol = solve_rational_lp(lp);
  if (sol.status != RationalSolution::Status::optimal) return std::nullopt;
  return sol.objective;
}

inline BigInt binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  BigInt r = 1;
  for (int i = 0; i < k; ++i) {
    r *= n - i;
    r /= i + 1;
  }
  return r;
}

/// Exact counterpart of the scenario confidence bound:
//   alpha(K, L, nu) = min(1, (L+1) * sum_{i=0}^{L+1} C(K,i) nu^i (1-nu)^{K-i})
// with the nu = 0 limit min(1, L+1).  The double input converts exactly
// (doubles are dyadic rationals).
inline Rational exact_confidence_bound(int K, int L, double nu_double) {
  if (K < 2 || L < 0 || L >= K) throw std::invalid_argument("bad K/L");
  const Rational nu(nu_double);
  if (nu == 0) return std::min(Rational(1), Rational(L + 1));
  Rational sum = 0;
  for (int i = 0; i <= L + 1; ++i) {
    Rational term(binomial(K, i));
    for (int j = 0; j < i; ++j) term *= nu;
    const Rational one_minus = 1 - nu;
    for (int j = 0; j < K - i; ++j) term *= one_minus;
    sum += term;
  }
  const Rational alpha = Rational(L + 1) * sum;
  return std::min(Rational(1), alpha);
}

}  // namespace oracle
