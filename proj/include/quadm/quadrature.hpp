#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "quadm/manifold.hpp"
#include "quadm/pointsets.hpp"

namespace quadm {

/// Lawson-Hanson active-set solution of min |Ax - b| subject to x >= 0.
struct NnlsResult {
  Eigen::VectorXd x;
  double residual = 0.0;  // |Ax - b|_2
  int iterations = 0;
  bool converged = false;
};
NnlsResult nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, int max_iterations = 0);

/// Moment-matching system Phi w = E with Phi the basis values at the candidates.
struct MomentSystem {
  SpectrumSlice slice;
  Eigen::VectorXd target;  // 1 in the constant slot, 0 elsewhere
  std::vector<Point> candidates;
  Eigen::MatrixXd design;  // basisSize x candidateCount

  MomentSystem(SpectrumSlice s, std::vector<Point> cands);
};

struct PruneResult {
  std::vector<Point> nodes;
  std::vector<double> weights;
  bool degenerate = false;
  int steps = 0;
};

/// Caratheodory support reduction: walks along null-space directions of the
/// active columns of [moments; 1] until at most rows + 1 atoms remain. Among
/// the weights a walk would zero, the one with the smallest index is removed.
PruneResult caratheodory_prune(const std::vector<Point>& nodes, const std::vector<double>& weights,
                               const Eigen::MatrixXd& moments, double tol = 1e-10);

struct RuleOptions {
  double tol = 1e-10;
  std::size_t candidate_budget = 0;  // 0: four times the basis size
  std::uint64_t seed = 0;
  int max_retries = 3;               // budget doublings after an infeasible solve
};

/// Candidate nodes: a mesh that carries an exact positive rule (torus lattice
/// with more than max|k| points per axis; sphere Gauss-Legendre x equispaced
/// product grid) followed by low-discrepancy and uniform random fill.
std::vector<Point> candidate_mesh(const SpectrumSlice& s, std::size_t budget, std::uint64_t seed);

/// Positive-weight rule exact for every eigenfunction with lambda^2 < r^2,
/// support at most basisSize + 1. Throws InfeasibleError when the residual
/// stays above tol after the retries.
PointSet build_exact_rule(const Manifold& m, double r, const RuleOptions& opt = {});
/// Same with the band given as r^2.
PointSet build_exact_rule_sq(const Manifold& m, double r2, const RuleOptions& opt = {});

/// max over lambda^2 < r^2 of |sum_j w_j phi(z_j) - delta_{lambda,0}|.
double exactness_residual(const PointSet& ps, double r);
double exactness_residual_sq(const PointSet& ps, double r2);

/// Product Gauss rule on S^2 exact through degree L.
PointSet sphere_product_rule(int max_degree);

}  // namespace quadm
