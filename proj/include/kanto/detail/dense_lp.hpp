#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "kanto/detail/network_simplex.hpp"

namespace kanto::detail {

struct LpResult {
  double objective = 0.0;
  std::vector<double> x;     // structural variables
  std::vector<double> dual;  // one multiplier per row, >= 0
  std::size_t pivots = 0;
};

/// maximize c^T x subject to A x <= b, x >= 0, with b >= 0 so that the slack
/// basis is feasible. Dense tableau primal simplex: Dantzig pricing, falling
/// back to Bland's rule after a run of degenerate pivots. The final basis is
/// re-solved with an LU factorization to clean accumulated round-off.
class DenseLp {
 public:
  DenseLp(std::size_t rows, std::size_t cols) : m_(rows), n_(cols), A_(rows * cols, 0.0), b_(rows, 0.0), c_(cols, 0.0) {}

  double& a(std::size_t i, std::size_t j) { return A_[i * n_ + j]; }
  double& b(std::size_t i) { return b_[i]; }
  double& c(std::size_t j) { return c_[j]; }
  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }

  LpResult solve(std::size_t max_pivots = 0) const {
    const std::size_t W = n_ + m_ + 1;  // structural, slack, rhs
    for (double v : b_) {
      if (v < 0.0) throw SolverError("dense lp: negative right-hand side");
    }
    std::vector<double> T((m_ + 1) * W, 0.0);
    auto t = [&](std::size_t i, std::size_t j) -> double& { return T[i * W + j]; };
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) t(i, j) = A_[i * n_ + j];
      t(i, n_ + i) = 1.0;
      t(i, W - 1) = b_[i];
    }
    // objective row holds reduced costs d_j = c_j - z_j; optimal when all <= 0
    for (std::size_t j = 0; j < n_; ++j) t(m_, j) = c_[j];
    std::vector<std::size_t> basis(m_);
    for (std::size_t i = 0; i < m_; ++i) basis[i] = n_ + i;

    double cmax = 1.0;
    for (double v : c_) cmax = std::max(cmax, std::abs(v));
    const double opt_tol = 1e-11 * cmax;
    const double piv_tol = 1e-11;
    if (max_pivots == 0) max_pivots = 50 * (m_ + n_) + 10000;

    std::size_t pivots = 0, degenerate_run = 0;
    bool bland = false;
    while (true) {
      std::size_t enter = W;
      if (bland) {
        for (std::size_t j = 0; j + 1 < W; ++j) {
          if (t(m_, j) > opt_tol) {
            enter = j;
            break;
          }
        }
      } else {
        double best = opt_tol;
        for (std::size_t j = 0; j + 1 < W; ++j) {
          if (t(m_, j) > best) {
            best = t(m_, j);
            enter = j;
          }
        }
      }
      if (enter == W) break;
      std::size_t leave = m_;
      double ratio = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m_; ++i) {
        const double aij = t(i, enter);
        if (aij <= piv_tol) continue;
        const double r = std::max(t(i, W - 1), 0.0) / aij;
        if (r < ratio - 1e-14 || (r <= ratio + 1e-14 && leave < m_ && basis[i] < basis[leave])) {
          ratio = std::min(ratio, r);
          leave = i;
        }
      }
      if (leave == m_) throw SolverError("dense lp: unbounded");
      degenerate_run = ratio <= 1e-14 ? degenerate_run + 1 : 0;
      if (degenerate_run > 50) bland = true;
      if (degenerate_run == 0) bland = false;

      const double p = t(leave, enter);
      for (std::size_t j = 0; j < W; ++j) t(leave, j) /= p;
      for (std::size_t i = 0; i <= m_; ++i) {
        if (i == leave) continue;
        const double f = t(i, enter);
        if (f == 0.0) continue;
        double* ri = &T[i * W];
        const double* rl = &T[leave * W];
        for (std::size_t j = 0; j < W; ++j) ri[j] -= f * rl[j];
      }
      basis[leave] = enter;
      if (++pivots > max_pivots) throw SolverError("dense lp: pivot limit reached");
    }

    LpResult res;
    res.pivots = pivots;
    res.x.assign(n_, 0.0);
    res.dual.assign(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i)
      if (basis[i] < n_) res.x[basis[i]] = std::max(t(i, W - 1), 0.0);
    for (std::size_t i = 0; i < m_; ++i) res.dual[i] = std::max(-t(m_, n_ + i), 0.0);
    if (m_ <= 1500) refine(basis, res);
    res.objective = 0.0;
    for (std::size_t j = 0; j < n_; ++j) res.objective += c_[j] * res.x[j];
    return res;
  }

 private:
  std::size_t m_, n_;
  std::vector<double> A_, b_, c_;

  double column_entry(std::size_t i, std::size_t j) const {
    if (j < n_) return A_[i * n_ + j];
    return (j - n_ == i) ? 1.0 : 0.0;
  }

  void refine(const std::vector<std::size_t>& basis, LpResult& res) const {
    const auto m = static_cast<Eigen::Index>(m_);
    Eigen::MatrixXd B(m, m);
    Eigen::VectorXd cb(m), rhs(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      rhs(i) = b_[static_cast<std::size_t>(i)];
      const std::size_t j = basis[static_cast<std::size_t>(i)];
      cb(i) = j < n_ ? c_[j] : 0.0;
      for (Eigen::Index r = 0; r < m; ++r) B(r, i) = column_entry(static_cast<std::size_t>(r), j);
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    const Eigen::VectorXd xb = lu.solve(rhs);
    const Eigen::VectorXd y = lu.transpose().solve(cb);
    if (!xb.allFinite() || !y.allFinite()) return;
    // accept only if the refined point stays (numerically) feasible
    for (Eigen::Index i = 0; i < m; ++i) {
      if (xb(i) < -1e-9 || y(i) < -1e-9) return;
    }
    std::fill(res.x.begin(), res.x.end(), 0.0);
    for (Eigen::Index i = 0; i < m; ++i) {
      const std::size_t j = basis[static_cast<std::size_t>(i)];
      if (j < n_) res.x[j] = std::max(xb(i), 0.0);
      res.dual[static_cast<std::size_t>(i)] = std::max(y(i), 0.0);
    }
  }
};

}  // namespace kanto::detail
