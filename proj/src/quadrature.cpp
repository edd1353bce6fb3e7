#include "quadm/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include "quadm/error.hpp"
#include "quadm/special.hpp"

namespace quadm {

MomentSystem::MomentSystem(SpectrumSlice s, std::vector<Point> cands)
    : slice(std::move(s)), candidates(std::move(cands)) {
  const auto rows = static_cast<Eigen::Index>(slice.basis_size);
  if (candidates.size() < slice.basis_size)
    throw InvalidArgument("moment system needs at least basisSize candidates");
  target = Eigen::VectorXd::Zero(rows);
  target[0] = 1.0;
  design = basis_matrix(slice.manifold, slice, candidates);
}

PruneResult caratheodory_prune(const std::vector<Point>& nodes, const std::vector<double>& weights,
                               const Eigen::MatrixXd& moments, double tol) {
  if (nodes.size() != weights.size() || static_cast<std::size_t>(moments.cols()) != nodes.size())
    throw InvalidArgument("caratheodory_prune: dimension mismatch");
  for (double w : weights)
    if (w < 0.0) throw InvalidArgument("caratheodory_prune: weights must be nonnegative");
  (void)tol;
  const Eigen::Index rows = moments.rows() + 1;
  const std::size_t limit = static_cast<std::size_t>(moments.rows()) + 1;

  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < weights.size(); ++i)
    if (weights[i] > 0.0) active.push_back(i);
  std::vector<double> w = weights;
  PruneResult res;

  while (active.size() > limit) {
    // Null direction among the first rows + 1 active columns.
    const auto q = static_cast<Eigen::Index>(limit + 1);
    Eigen::MatrixXd sub(rows, q);
    for (Eigen::Index c = 0; c < q; ++c) {
      sub.block(0, c, rows - 1, 1) = moments.col(static_cast<Eigen::Index>(active[c]));
      sub(rows - 1, c) = 1.0;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub, Eigen::ComputeFullV);
    Eigen::VectorXd v = svd.matrixV().col(q - 1);
    const auto& sv = svd.singularValues();
    const double smin = sv.size() >= q ? sv[q - 1] : 0.0;
    if (smin > 1e-9 * std::max(1.0, sv[0])) {
      res.degenerate = true;
      break;
    }
    if (v.maxCoeff() <= 0.0) v = -v;
    double step = std::numeric_limits<double>::infinity();
    Eigen::Index hit = -1;
    for (Eigen::Index c = 0; c < q; ++c) {
      if (v[c] <= 0.0) continue;
      const double t = w[active[c]] / v[c];
      if (t < step) {  // strict: ties keep the smaller index
        step = t;
        hit = c;
      }
    }
    if (hit < 0) {
      res.degenerate = true;
      break;
    }
    for (Eigen::Index c = 0; c < q; ++c) {
      double& wc = w[active[c]];
      wc -= step * v[c];
      if (wc < 0.0) wc = 0.0;
    }
    w[active[hit]] = 0.0;
    std::vector<std::size_t> next;
    for (std::size_t i : active)
      if (w[i] > 0.0) next.push_back(i);
    active.swap(next);
    ++res.steps;
  }
  for (std::size_t i : active) {
    res.nodes.push_back(nodes[i]);
    res.weights.push_back(w[i]);
  }
  return res;
}

PointSet sphere_product_rule(int max_degree) {
  if (max_degree < 0) throw InvalidArgument("product rule degree must be >= 0");
  const int nz = max_degree / 2 + 1;
  const int nphi = max_degree + 1;
  const GaussRule& gl = gauss_legendre(nz);
  std::vector<Point> nodes;
  std::vector<double> weights;
  for (int i = 0; i < nz; ++i) {
    const double z = gl.nodes[i];
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    for (int j = 0; j < nphi; ++j) {
      const double phi = kTwoPi * j / nphi;
      nodes.push_back(Point{{rho * std::cos(phi), rho * std::sin(phi), z}});
      weights.push_back(0.5 * gl.weights[i] / nphi);
    }
  }
  const double total = pairwise_sum(weights);
  for (double& x : weights) x /= total;
  PointSet ps = make_pointset(Manifold::sphere(), std::move(nodes), std::move(weights));
  ps.provenance = {{"family", "product_gauss"}, {"degree", max_degree}};
  return ps;
}

std::vector<Point> candidate_mesh(const SpectrumSlice& s, std::size_t budget, std::uint64_t seed) {
  const Manifold& m = s.manifold;
  std::vector<Point> out;
  if (m.is_torus()) {
    const std::size_t kmax = static_cast<std::size_t>(s.max_index());
    std::size_t per_axis = static_cast<std::size_t>(
        std::floor(std::pow(static_cast<double>(budget) / 2.0, 1.0 / m.dim) + 1e-9));
    per_axis = std::max(per_axis, kmax + 1);
    out = lattice(m, per_axis).nodes;
  } else {
    out = sphere_product_rule(s.max_index()).nodes;
    if (out.size() < budget) {
      const auto fib = fibonacci((budget - out.size()) / 2 + 1).nodes;
      out.insert(out.end(), fib.begin(), fib.end());
    }
  }
  if (out.size() < budget) {
    const auto fill = uniform_sample(m, budget - out.size(), seed, 0x63616e64);
    out.insert(out.end(), fill.begin(), fill.end());
  }
  return out;
}

double exactness_residual_sq(const PointSet& ps, double r2) {
  const SpectrumSlice s = spectrum_below_sq(ps.manifold, r2);
  const Eigen::MatrixXd phi = basis_matrix(ps.manifold, s, ps.nodes);
  const Eigen::Map<const Eigen::VectorXd> w(ps.weights.data(), static_cast<Eigen::Index>(ps.weights.size()));
  Eigen::VectorXd mom = phi * w;
  mom[0] -= 1.0;
  return mom.cwiseAbs().maxCoeff();
}

double exactness_residual(const PointSet& ps, double r) {
  if (!(r > 0.0)) throw InvalidArgument("band r must be positive");
  return exactness_residual_sq(ps, r * r);
}

PointSet build_exact_rule_sq(const Manifold& m, double r2, const RuleOptions& opt) {
  if (!(r2 > 0.0)) throw InvalidArgument("band r^2 must be positive");
  if (!(opt.tol > 0.0)) throw InvalidArgument("tol must be positive");
  const SpectrumSlice slice = spectrum_below_sq(m, r2);
  const std::size_t basis = slice.basis_size;
  std::size_t budget = opt.candidate_budget == 0 ? 4 * basis : opt.candidate_budget;
  if (budget < 4 * basis)
    throw InvalidArgument("candidate budget must be at least 4 x basisSize = " + std::to_string(4 * basis));
  double residual = INFINITY;
  for (int attempt = 0; attempt <= opt.max_retries; ++attempt) {
    if (static_cast<double>(basis) * static_cast<double>(budget) > 6e7)
      throw ResourceError("exact rule: design matrix exceeds the memory budget", residual);
    MomentSystem sys(slice, candidate_mesh(slice, budget, opt.seed));
    const NnlsResult sol = nnls(sys.design, sys.target);
    std::vector<Point> nodes;
    std::vector<double> weights;
    std::vector<Eigen::Index> cols;
    for (Eigen::Index j = 0; j < sol.x.size(); ++j)
      if (sol.x[j] > 0.0) {
        nodes.push_back(sys.candidates[static_cast<std::size_t>(j)]);
        weights.push_back(sol.x[j]);
        cols.push_back(j);
      }
    Eigen::MatrixXd mom(sys.design.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) mom.col(static_cast<Eigen::Index>(k)) = sys.design.col(cols[k]);
    PruneResult pr = caratheodory_prune(nodes, weights, mom, opt.tol);
    const double total = pairwise_sum(pr.weights);
    for (double& x : pr.weights) x /= total;
    PointSet ps;
    ps.manifold = m;
    ps.nodes = std::move(pr.nodes);
    ps.weights = std::move(pr.weights);
    residual = exactness_residual_sq(ps, r2);
    if (residual <= opt.tol && ps.size() <= basis + 1) {
      ps.validate();
      ps.provenance = {{"family", "exact_rule"},
                       {"r", std::sqrt(r2)},
                       {"r2", r2},
                       {"tol", opt.tol},
                       {"residual", residual},
                       {"seed", opt.seed},
                       {"candidate_budget", budget},
                       {"retries", attempt},
                       {"prune_degenerate", pr.degenerate}};
      return ps;
    }
    budget *= 2;
  }
  throw InfeasibleError("exact rule: moment residual " + std::to_string(residual) +
                            " above tol after retries; increase the candidate budget",
                        residual);
}

PointSet build_exact_rule(const Manifold& m, double r, const RuleOptions& opt) {
  if (!(r > 0.0)) throw InvalidArgument("band r must be positive");
  return build_exact_rule_sq(m, r * r, opt);
}

}  // namespace quadm
