#include "rewardrig/exact_lp.hpp"

#include <stdexcept>

namespace rewardrig::lp {
namespace {

std::size_t column_count(const Matrix& a) { return a.empty() ? 0 : a.front().size(); }

void check_shape(const Matrix& a, const std::vector<Rational>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("row count of A and length of b differ");
  for (const auto& row : a) {
    if (row.size() != column_count(a)) throw std::invalid_argument("ragged constraint matrix");
  }
}

}  // namespace

FeasibilityResult find_feasible_point(const Matrix& a, const std::vector<Rational>& b) {
  check_shape(a, b);
  const std::size_t rows = a.size();
  const std::size_t n = column_count(a);
  const std::size_t cols = n + rows;

  // Tableau [S A | I] with S flipping rows so the right-hand side is >= 0.
  std::vector<int> sign(rows, 1);
  Matrix t(rows, std::vector<Rational>(cols));
  std::vector<Rational> rhs(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    if (b[i] < 0) sign[i] = -1;
    for (std::size_t j = 0; j < n; ++j) t[i][j] = sign[i] * a[i][j];
    t[i][n + i] = 1;
    rhs[i] = sign[i] * b[i];
  }
  std::vector<std::size_t> basis(rows);
  for (std::size_t i = 0; i < rows; ++i) basis[i] = n + i;

  // Reduced costs of the phase-one objective (sum of artificials).
  std::vector<Rational> reduced(cols);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < rows; ++i) reduced[j] -= t[i][j];
  }

  while (true) {
    std::size_t enter = cols;
    for (std::size_t j = 0; j < cols; ++j) {
      if (reduced[j] < 0) {
        enter = j;
        break;
      }
    }
    if (enter == cols) break;

    std::size_t leave = rows;
    Rational best_ratio;
    for (std::size_t i = 0; i < rows; ++i) {
      if (t[i][enter] <= 0) continue;
      Rational ratio = rhs[i] / t[i][enter];
      if (leave == rows || ratio < best_ratio || (ratio == best_ratio && basis[i] < basis[leave])) {
        leave = i;
        best_ratio = ratio;
      }
    }
    // Phase one is bounded below by zero, so some row always qualifies.
    if (leave == rows) throw std::logic_error("phase-one simplex reported unbounded");

    const Rational pivot = t[leave][enter];
    for (auto& v : t[leave]) v /= pivot;
    rhs[leave] /= pivot;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == leave || t[i][enter] == 0) continue;
      const Rational factor = t[i][enter];
      for (std::size_t j = 0; j < cols; ++j) {
        if (t[leave][j] != 0) t[i][j] -= factor * t[leave][j];
      }
      rhs[i] -= factor * rhs[leave];
    }
    if (reduced[enter] != 0) {
      const Rational factor = reduced[enter];
      for (std::size_t j = 0; j < cols; ++j) {
        if (t[leave][j] != 0) reduced[j] -= factor * t[leave][j];
      }
    }
    basis[leave] = enter;
  }

  Rational infeasibility = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    if (basis[i] >= n) infeasibility += rhs[i];
  }

  FeasibilityResult result;
  if (infeasibility == 0) {
    result.feasible = true;
    result.solution.assign(n, 0);
    for (std::size_t i = 0; i < rows; ++i) {
      if (basis[i] < n) result.solution[basis[i]] = rhs[i];
    }
    for (std::size_t i = 0; i < rows; ++i) {
      Rational lhs = 0;
      for (std::size_t j = 0; j < n; ++j) lhs += a[i][j] * result.solution[j];
      if (lhs != b[i]) throw std::logic_error("simplex produced a point violating A x = b");
    }
    return result;
  }

  // Duals of the optimal phase-one basis: y_i = 1 - reduced cost of artificial i.
  result.farkas.resize(rows);
  for (std::size_t i = 0; i < rows; ++i) result.farkas[i] = sign[i] * (1 - reduced[n + i]);
  Rational yb = 0;
  for (std::size_t i = 0; i < rows; ++i) yb += result.farkas[i] * b[i];
  if (yb <= 0) throw std::logic_error("Farkas certificate has non-positive y^T b");
  for (std::size_t j = 0; j < n; ++j) {
    Rational ya = 0;
    for (std::size_t i = 0; i < rows; ++i) ya += result.farkas[i] * a[i][j];
    if (ya > 0) throw std::logic_error("Farkas certificate has a positive y^T A entry");
  }
  return result;
}

std::optional<std::vector<Rational>> solve_linear_system(const Matrix& a, const std::vector<Rational>& b) {
  check_shape(a, b);
  const std::size_t rows = a.size();
  const std::size_t n = column_count(a);
  Matrix m = a;
  std::vector<Rational> rhs = b;
  std::vector<std::size_t> pivot_col;
  std::size_t r = 0;
  for (std::size_t c = 0; c < n && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && m[p][c] == 0) ++p;
    if (p == rows) continue;
    std::swap(m[p], m[r]);
    std::swap(rhs[p], rhs[r]);
    const Rational pivot = m[r][c];
    for (auto& v : m[r]) v /= pivot;
    rhs[r] /= pivot;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || m[i][c] == 0) continue;
      const Rational factor = m[i][c];
      for (std::size_t j = c; j < n; ++j) m[i][j] -= factor * m[r][j];
      rhs[i] -= factor * rhs[r];
    }
    pivot_col.push_back(c);
    ++r;
  }
  for (std::size_t i = r; i < rows; ++i) {
    if (rhs[i] != 0) return std::nullopt;
  }
  std::vector<Rational> x(n);
  for (std::size_t i = 0; i < pivot_col.size(); ++i) x[pivot_col[i]] = rhs[i];
  return x;
}

}  // namespace rewardrig::lp
