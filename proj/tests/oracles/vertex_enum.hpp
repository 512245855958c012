#pragma once

// Brute-force LP oracle: min c^T x s.t. A x = b, x >= 0, by enumerating every
// column subset of size rank(A) and keeping the best feasible basic solution.
// Exponential; meant for a handful of variables only.

#include <Eigen/Dense>
#include <limits>
#include <optional>
#include <vector>

namespace oracle {

inline std::optional<double> lp_min_by_vertices(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c) {
  // keep a maximal set of independent rows
  Eigen::FullPivLU<Eigen::MatrixXd> lu_rows(A.transpose());
  const Eigen::Index r = lu_rows.rank();
  Eigen::MatrixXd Ar(r, A.cols());
  Eigen::VectorXd br(r);
  {
    const auto P = lu_rows.permutationQ();
    for (Eigen::Index i = 0; i < r; ++i) {
      const Eigen::Index row = P.indices()(i);
      Ar.row(i) = A.row(row);
      br(i) = b(row);
    }
  }
  const Eigen::Index n = A.cols();
  std::vector<Eigen::Index> pick(static_cast<std::size_t>(r));
  for (Eigen::Index i = 0; i < r; ++i) pick[static_cast<std::size_t>(i)] = i;
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    Eigen::MatrixXd B(r, r);
    for (Eigen::Index i = 0; i < r; ++i) B.col(i) = Ar.col(pick[static_cast<std::size_t>(i)]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
    if (lu.rank() == r) {
      const Eigen::VectorXd xb = lu.solve(br);
      if ((B * xb - br).norm() < 1e-9 && xb.minCoeff() >= -1e-12) {
        double v = 0.0;
        for (Eigen::Index i = 0; i < r; ++i) v += c(pick[static_cast<std::size_t>(i)]) * xb(i);
        if (v < best) best = v;
      }
    }
    // next combination
    Eigen::Index i = r - 1;
    while (i >= 0 && pick[static_cast<std::size_t>(i)] == n - r + i) --i;
    if (i < 0) break;
    ++pick[static_cast<std::size_t>(i)];
    for (Eigen::Index j = i + 1; j < r; ++j) pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
  }
  if (!(best < std::numeric_limits<double>::infinity())) return std::nullopt;
  return best;
}

/// Transportation problem between two probability vectors with cost matrix C.
inline std::optional<double> transport_by_vertices(const std::vector<double>& mu, const std::vector<double>& nu,
                                                   const std::vector<std::vector<double>>& C) {
  const auto N = static_cast<Eigen::Index>(mu.size()), M = static_cast<Eigen::Index>(nu.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N + M, N * M);
  Eigen::VectorXd b(N + M), c(N * M);
  for (Eigen::Index x = 0; x < N; ++x)
    for (Eigen::Index y = 0; y < M; ++y) {
      A(x, x * M + y) = 1.0;
      A(N + y, x * M + y) = 1.0;
      c(x * M + y) = C[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)];
    }
  for (Eigen::Index x = 0; x < N; ++x) b(x) = mu[static_cast<std::size_t>(x)];
  for (Eigen::Index y = 0; y < M; ++y) b(N + y) = nu[static_cast<std::size_t>(y)];
  return lp_min_by_vertices(A, b, c);
}

}  // namespace oracle
