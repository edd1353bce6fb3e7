#include <algorithm>
#include <cmath>
#include <limits>

#include "quadm/error.hpp"
#include "quadm/quadrature.hpp"

namespace quadm {

namespace {

Eigen::VectorXd solve_passive(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                              const std::vector<int>& passive) {
  Eigen::MatrixXd Ap(A.rows(), static_cast<Eigen::Index>(passive.size()));
  for (std::size_t k = 0; k < passive.size(); ++k) Ap.col(static_cast<Eigen::Index>(k)) = A.col(passive[k]);
  return Ap.colPivHouseholderQr().solve(b);
}

}  // namespace

NnlsResult nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, int max_iterations) {
  const Eigen::Index m = A.rows(), n = A.cols();
  if (b.size() != m) throw InvalidArgument("nnls: dimension mismatch");
  if (max_iterations <= 0) max_iterations = static_cast<int>(3 * n) + 10;
  NnlsResult res;
  res.x = Eigen::VectorXd::Zero(n);
  std::vector<char> in_p(static_cast<std::size_t>(n), 0);
  std::vector<int> passive;
  const double eps = std::numeric_limits<double>::epsilon();
  const double tol = 10.0 * eps * A.cwiseAbs().maxCoeff() * static_cast<double>(std::max(m, n));

  Eigen::VectorXd w = A.transpose() * (b - A * res.x);
  int it = 0;
  while (it < max_iterations) {
    Eigen::Index t = -1;
    double best = tol;
    for (Eigen::Index j = 0; j < n; ++j)
      if (!in_p[j] && w[j] > best) {
        best = w[j];
        t = j;
      }
    if (t < 0) {
      res.converged = true;
      break;
    }
    in_p[t] = 1;
    passive.push_back(static_cast<int>(t));
    std::sort(passive.begin(), passive.end());

    while (true) {
      ++it;
      const Eigen::VectorXd z = solve_passive(A, b, passive);
      bool feasible = true;
      for (Eigen::Index k = 0; k < z.size(); ++k)
        if (z[k] <= 0.0) feasible = false;
      if (feasible) {
        for (std::size_t k = 0; k < passive.size(); ++k) res.x[passive[k]] = z[static_cast<Eigen::Index>(k)];
        break;
      }
      double alpha = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < passive.size(); ++k) {
        const double zk = z[static_cast<Eigen::Index>(k)];
        if (zk <= 0.0) {
          const double xk = res.x[passive[k]];
          alpha = std::min(alpha, xk / (xk - zk));
        }
      }
      for (std::size_t k = 0; k < passive.size(); ++k) {
        const int j = passive[k];
        res.x[j] += alpha * (z[static_cast<Eigen::Index>(k)] - res.x[j]);
      }
      std::vector<int> keep;
      for (int j : passive) {
        if (res.x[j] <= tol) {
          res.x[j] = 0.0;
          in_p[j] = 0;
        } else {
          keep.push_back(j);
        }
      }
      passive.swap(keep);
      if (passive.empty() || it >= max_iterations) break;
    }
    w = A.transpose() * (b - A * res.x);
  }
  res.iterations = it;
  res.residual = (A * res.x - b).norm();
  return res;
}

}  // namespace quadm
