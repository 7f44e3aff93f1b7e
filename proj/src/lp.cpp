#include "corrlasso/lp.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace corrlasso {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kEps = 1e-9;

// Tableau layout: columns [structural | slack | artificial | rhs], one row
// per constraint plus the objective row at the bottom. basis[i] holds the
// column currently basic in row i.
struct Tableau {
  MatrixXd t;
  std::vector<int> basis;
  int rows;
  int cols;  // without rhs
};

int pick_entering(const Tableau& tab, int limit) {
  // Bland: smallest index with negative reduced cost
  for (int j = 0; j < limit; ++j)
    if (tab.t(tab.rows, j) < -kEps) return j;
  return -1;
}

int pick_leaving(const Tableau& tab, int enter) {
  int row = -1;
  double best = 0.0;
  for (int i = 0; i < tab.rows; ++i) {
    const double a = tab.t(i, enter);
    if (a <= kEps) continue;
    const double ratio = tab.t(i, tab.cols) / a;
    if (row < 0 || ratio < best - 1e-15 ||
        (std::abs(ratio - best) <= 1e-15 && tab.basis[i] < tab.basis[row])) {
      row = i;
      best = ratio;
    }
  }
  return row;
}

void pivot(Tableau& tab, int row, int col) {
  tab.t.row(row) /= tab.t(row, col);
  for (int i = 0; i <= tab.rows; ++i) {
    if (i == row) continue;
    const double f = tab.t(i, col);
    if (f != 0.0) tab.t.row(i) -= f * tab.t.row(row);
  }
  tab.basis[row] = col;
}

void run_simplex(Tableau& tab, int enter_limit) {
  const long cap = 200000;
  for (long it = 0; it < cap; ++it) {
    const int enter = pick_entering(tab, enter_limit);
    if (enter < 0) return;
    const int leave = pick_leaving(tab, enter);
    if (leave < 0) throw std::runtime_error("linear program is unbounded");
    pivot(tab, leave, enter);
  }
  throw std::runtime_error("simplex iteration cap reached");
}

}  // namespace

LpResult solve_lp(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                  const Eigen::VectorXd& c) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  if (b.size() != m || c.size() != n)
    throw std::invalid_argument("lp dimension mismatch");

  // a x + s = b with rows flipped so every rhs is nonnegative; rows that had
  // b < 0 get an artificial variable since their slack enters at -1
  std::vector<int> art_rows;
  for (int i = 0; i < m; ++i)
    if (b[i] < 0.0) art_rows.push_back(i);
  const int n_art = static_cast<int>(art_rows.size());

  Tableau tab;
  tab.rows = m;
  tab.cols = n + m + n_art;
  tab.t.setZero(m + 1, tab.cols + 1);
  tab.basis.assign(m, -1);

  int art = 0;
  for (int i = 0; i < m; ++i) {
    const double sign = b[i] < 0.0 ? -1.0 : 1.0;
    tab.t.block(i, 0, 1, n) = sign * a.row(i);
    tab.t(i, n + i) = sign;
    tab.t(i, tab.cols) = sign * b[i];
    if (sign < 0.0) {
      tab.t(i, n + m + art) = 1.0;
      tab.basis[i] = n + m + art;
      ++art;
    } else {
      tab.basis[i] = n + i;
    }
  }

  if (n_art > 0) {
    // phase 1: minimize the artificial sum
    for (int i = 0; i < m; ++i)
      if (tab.basis[i] >= n + m) tab.t.row(m) -= tab.t.row(i);
    run_simplex(tab, n + m);  // artificials may leave, never re-enter
    if (tab.t(m, tab.cols) < -1e-7)
      throw std::runtime_error("linear program is infeasible");
    // force any degenerate artificial out of the basis
    for (int i = 0; i < m; ++i) {
      if (tab.basis[i] < n + m) continue;
      int repl = -1;
      for (int j = 0; j < n + m && repl < 0; ++j)
        if (std::abs(tab.t(i, j)) > kEps) repl = j;
      if (repl >= 0) pivot(tab, i, repl);
    }
    tab.t.row(m).setZero();
  }

  for (int j = 0; j < n; ++j) tab.t(m, j) = c[j];
  for (int i = 0; i < m; ++i) {
    const int bj = tab.basis[i];
    if (bj < n && c[bj] != 0.0) tab.t.row(m) -= c[bj] * tab.t.row(i);
  }
  run_simplex(tab, n + m);

  LpResult out;
  out.x = VectorXd::Zero(n);
  for (int i = 0; i < m; ++i)
    if (tab.basis[i] < n) out.x[tab.basis[i]] = tab.t(i, tab.cols);
  out.objective = c.dot(out.x);
  out.optimal = true;
  return out;
}

}  // namespace corrlasso
