#include "quadm/pointsets.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "quadm/error.hpp"
#include "quadm/kernels.hpp"
#include "quadm/parallel.hpp"
#include "quadm/special.hpp"

namespace quadm {

void PointSet::validate() const {
  if (nodes.empty()) throw InvalidArgument("point set is empty");
  if (nodes.size() != weights.size())
    throw InvalidArgument("point set has " + std::to_string(nodes.size()) + " nodes but " +
                          std::to_string(weights.size()) + " weights");
  for (double w : weights)
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("weights must be nonnegative");
  const double total = pairwise_sum(weights);
  if (std::abs(total - 1.0) > 1e-12)
    throw InvalidArgument("weights must sum to 1 (got " + std::to_string(total) + ")");
  for (const auto& p : nodes) validate_point(manifold, p);
}

PointSet make_pointset(const Manifold& m, std::vector<Point> nodes, std::vector<double> weights) {
  PointSet ps;
  ps.manifold = m;
  ps.nodes = std::move(nodes);
  ps.weights = std::move(weights);
  ps.validate();
  return ps;
}

Family parse_family(const std::string& name) {
  if (name == "lattice") return Family::Lattice;
  if (name == "random") return Family::Random;
  if (name == "jittered") return Family::Jittered;
  if (name == "fibonacci") return Family::Fibonacci;
  if (name == "lps_orbit" || name == "lps") return Family::LpsOrbit;
  throw InvalidArgument("unknown family '" + name + "'");
}

std::string family_name(Family f) {
  switch (f) {
    case Family::Lattice: return "lattice";
    case Family::Random: return "random";
    case Family::Jittered: return "jittered";
    case Family::Fibonacci: return "fibonacci";
    case Family::LpsOrbit: return "lps_orbit";
  }
  return "unknown";
}

namespace {

std::vector<double> equal_weights(std::size_t n) { return std::vector<double>(n, 1.0 / n); }

}  // namespace

PointSet lattice(const Manifold& m, std::size_t n) {
  if (!m.is_torus()) throw InvalidArgument("lattice family needs a torus");
  if (n < 1) throw InvalidArgument("lattice needs n >= 1");
  std::size_t total = 1;
  for (int a = 0; a < m.dim; ++a) total *= n;
  std::vector<Point> nodes(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    for (int a = 0; a < m.dim; ++a) {
      nodes[idx][a] = static_cast<double>(rem % n) / static_cast<double>(n);
      rem /= n;
    }
  }
  PointSet ps = make_pointset(m, std::move(nodes), equal_weights(total));
  ps.provenance = {{"family", "lattice"}, {"n", n}};
  return ps;
}

PointSet random_points(const Manifold& m, std::size_t count, std::uint64_t seed) {
  if (count < 1) throw InvalidArgument("random family needs N >= 1");
  PointSet ps = make_pointset(m, uniform_sample(m, count, seed, 0x72616e64), equal_weights(count));
  ps.provenance = {{"family", "random"}, {"N", count}, {"seed", seed}};
  return ps;
}

PointSet jittered(const Manifold& m, std::size_t count, std::uint64_t seed) {
  const Partition part = equal_measure_partition(m, count);
  Rng rng(seed, 0x6a697474);
  std::vector<Point> nodes;
  std::vector<double> weights;
  for (std::size_t c = 0; c < part.size(); ++c) {
    nodes.push_back(part.sample_in(c, rng));
    weights.push_back(part.cells[c].measure);
  }
  // Cell measures are 1/N up to rounding; renormalize in a fixed order.
  const double total = pairwise_sum(weights);
  for (double& w : weights) w /= total;
  PointSet ps = make_pointset(m, std::move(nodes), std::move(weights));
  ps.provenance = {{"family", "jittered"}, {"N", count}, {"seed", seed}};
  return ps;
}

PointSet fibonacci(std::size_t count) {
  if (count < 1) throw InvalidArgument("fibonacci family needs N >= 1");
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  std::vector<Point> nodes(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / static_cast<double>(count);
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * static_cast<double>(i);
    nodes[i] = Point{{rho * std::cos(phi), rho * std::sin(phi), z}};
  }
  PointSet ps = make_pointset(Manifold::sphere(), std::move(nodes), equal_weights(count));
  ps.provenance = {{"family", "fibonacci"}, {"N", count}};
  return ps;
}

std::array<std::array<long long, 3>, 3> lps_generator(int g) {
  if (g < 0 || g > 5) throw InvalidArgument("LPS generator index must be 0..5");
  const int axis = g / 2;
  const long long s = (g % 2 == 0) ? 4 : -4;
  std::array<std::array<long long, 3>, 3> r{};
  const int i = (axis + 1) % 3, j = (axis + 2) % 3;
  r[axis][axis] = 5;
  r[i][i] = -3;
  r[j][j] = -3;
  r[i][j] = -s;
  r[j][i] = s;
  return r;
}

Point lps_default_base() {
  const double n = std::sqrt(6.0);
  return Point{{1.0 / n, std::sqrt(2.0) / n, std::sqrt(3.0) / n}};
}

PointSet lps_orbit(const Point& base, int n) {
  if (n < 0 || n > 8) throw InvalidArgument("lps_orbit word length must be in 0..8");
  const Manifold s2 = Manifold::sphere();
  validate_point(s2, base);
  for (int a = 0; a < 3; ++a)
    if (std::abs(std::abs(base[a]) - 1.0) < 1e-12)
      throw InvalidArgument("lps_orbit base point is fixed by a generator (orbit not free)");

  using Mat = std::array<std::array<long long, 3>, 3>;
  struct Word {
    Mat m;  // 5^len times the rotation
    int last;
  };
  Mat id{};
  for (int a = 0; a < 3; ++a) id[a][a] = 1;
  std::vector<Point> nodes;
  auto apply = [&](const Mat& m, int len) {
    const double scale = std::pow(5.0, -len);
    Point p;
    for (int a = 0; a < 3; ++a) {
      double acc = 0.0;
      for (int b = 0; b < 3; ++b) acc += static_cast<double>(m[a][b]) * base[b];
      p[a] = acc * scale;
    }
    nodes.push_back(p);
  };
  apply(id, 0);
  std::vector<Word> level{{id, -1}};
  for (int len = 1; len <= n; ++len) {
    std::vector<Word> next;
    next.reserve(level.size() * 5 + 6);
    for (const auto& w : level) {
      for (int g = 0; g < 6; ++g) {
        if (w.last >= 0 && (g ^ 1) == w.last) continue;
        const Mat gm = lps_generator(g);
        Mat prod{};
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) {
            long long acc = 0;
            for (int c = 0; c < 3; ++c) acc += w.m[a][c] * gm[c][b];
            prod[a][b] = acc;
          }
        next.push_back({prod, g});
      }
    }
    for (const auto& w : next) apply(w.m, len);
    level = std::move(next);
  }
  // A repeated point means the base has a nontrivial stabilizer.
  std::vector<std::size_t> order(nodes.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return nodes[a].x < nodes[b].x; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    const auto& p = nodes[order[i - 1]];
    const auto& q = nodes[order[i]];
    if (std::abs(p[0] - q[0]) < 1e-12 && std::abs(p[1] - q[1]) < 1e-12 && std::abs(p[2] - q[2]) < 1e-12)
      throw InvalidArgument("lps_orbit base point has a repeated orbit point (orbit not free)");
  }
  const std::size_t count = nodes.size();
  PointSet ps;
  ps.manifold = s2;
  ps.nodes = std::move(nodes);
  ps.weights = equal_weights(count);
  ps.validate();
  ps.provenance = {{"family", "lps_orbit"},
                   {"n", n},
                   {"N", count},
                   {"base", {base[0], base[1], base[2]}}};
  return ps;
}

PointSet generate(const Manifold& m, Family family, const GenerateParams& params) {
  switch (family) {
    case Family::Lattice:
      return lattice(m, params.n);
    case Family::Random:
      return random_points(m, params.n, params.seed);
    case Family::Jittered:
      return jittered(m, params.n, params.seed);
    case Family::Fibonacci:
      if (!m.is_sphere()) throw InvalidArgument("fibonacci family needs the sphere");
      return fibonacci(params.n);
    case Family::LpsOrbit: {
      if (!m.is_sphere()) throw InvalidArgument("lps_orbit family needs the sphere");
      const bool unset = params.base[0] == 0.0 && params.base[1] == 0.0 && params.base[2] == 0.0;
      return lps_orbit(unset ? lps_default_base() : params.base, static_cast<int>(params.n));
    }
  }
  throw InternalError("unknown family");
}

// ---------------------------------------------------------------------------
// Energy

namespace {

void check_energy_order(const PointSet& ps, double alpha) {
  if (!(2.0 * alpha > ps.manifold.dim))
    throw InvalidArgument("discrete energy needs 2 alpha > d");
}

double energy_with(const PointSet& ps, const BesselKernel& k) {
  const std::size_t n = ps.size();
  const double diag = k.diagonal();
  std::vector<double> rows(n);
  parallel_for(n, [&](std::size_t i) {
    std::vector<double> terms;
    terms.reserve(n - i);
    terms.push_back(ps.weights[i] * ps.weights[i] * diag);
    for (std::size_t j = i + 1; j < n; ++j)
      terms.push_back(2.0 * ps.weights[i] * ps.weights[j] * k(ps.nodes[i], ps.nodes[j]));
    rows[i] = pairwise_sum(terms);
  });
  const double e = pairwise_sum(rows);
  if (!std::isfinite(e)) throw InternalError("non-finite discrete energy");
  return e;
}

std::vector<std::array<double, 3>> gradient_with(const PointSet& ps, const BesselKernel& k) {
  const std::size_t n = ps.size();
  std::vector<std::array<double, 3>> g(n);
  parallel_for(n, [&](std::size_t i) {
    std::array<std::vector<double>, 3> terms;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const auto gij = k.grad_x(ps.nodes[i], ps.nodes[j]);
      for (int a = 0; a < 3; ++a) terms[a].push_back(ps.weights[j] * gij[a]);
    }
    for (int a = 0; a < 3; ++a) g[i][a] = 2.0 * ps.weights[i] * pairwise_sum(terms[a]);
  });
  return g;
}

Point moved(const Manifold& m, const Point& p, const std::array<double, 3>& step) {
  if (m.is_torus()) {
    std::array<double, 3> c{};
    for (int a = 0; a < m.dim; ++a) c[a] = p[a] + step[a];
    return make_point(m, std::span<const double>(c.data(), m.dim));
  }
  std::array<double, 3> c{};
  double n2 = 0.0;
  for (int a = 0; a < 3; ++a) {
    c[a] = p[a] + step[a];
    n2 += c[a] * c[a];
  }
  const double inv = 1.0 / std::sqrt(n2);
  return Point{{c[0] * inv, c[1] * inv, c[2] * inv}};
}

}  // namespace

double discrete_energy(const PointSet& ps, double alpha) {
  check_energy_order(ps, alpha);
  BesselKernel k(ps.manifold, 2.0 * alpha);
  return energy_with(ps, k);
}

std::vector<std::array<double, 3>> energy_gradient(const PointSet& ps, double alpha) {
  check_energy_order(ps, alpha);
  BesselKernel k(ps.manifold, 2.0 * alpha);
  return gradient_with(ps, k);
}

MinimizeResult minimize_energy(const PointSet& ps, double alpha, int steps, const StepPolicy& policy) {
  check_energy_order(ps, alpha);
  ps.validate();
  if (steps < 0) throw InvalidArgument("steps must be nonnegative");
  BesselKernel k(ps.manifold, 2.0 * alpha);
  const std::size_t n = ps.size();
  // Natural length scale: the typical spacing N^{-1/d}.
  const double spacing = std::pow(static_cast<double>(n), -1.0 / ps.manifold.dim);
  MinimizeResult res;
  PointSet cur = ps;
  double e = energy_with(cur, k);
  res.energies.push_back(e);
  double eta = policy.initial_step;
  auto grad = gradient_with(cur, k);
  auto norm_of = [&](const std::vector<std::array<double, 3>>& g) {
    std::vector<double> sq;
    for (const auto& v : g) sq.push_back(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    return std::sqrt(pairwise_sum(sq));
  };
  res.gradient_norm = norm_of(grad);
  for (int it = 0; it < steps; ++it) {
    if (res.gradient_norm < policy.gradient_tol) break;
    // Direction -g_i / w_i, scaled so the largest move is eta * spacing.
    std::vector<std::array<double, 3>> dir(n);
    double dmax = 0.0;
    std::vector<double> slope_terms;
    for (std::size_t i = 0; i < n; ++i) {
      const double w = ps.weights[i] > 0.0 ? ps.weights[i] : 1.0;
      double len = 0.0;
      for (int a = 0; a < 3; ++a) {
        dir[i][a] = -grad[i][a] / w;
        len += dir[i][a] * dir[i][a];
      }
      dmax = std::max(dmax, std::sqrt(len));
    }
    if (dmax == 0.0) break;
    for (std::size_t i = 0; i < n; ++i) {
      for (int a = 0; a < 3; ++a) dir[i][a] *= spacing / dmax;
      slope_terms.push_back(grad[i][0] * dir[i][0] + grad[i][1] * dir[i][1] + grad[i][2] * dir[i][2]);
    }
    const double slope = pairwise_sum(slope_terms);
    bool accepted = false;
    for (int b = 0; b < policy.max_backtracks; ++b) {
      PointSet trial = cur;
      for (std::size_t i = 0; i < n; ++i) {
        std::array<double, 3> step{eta * dir[i][0], eta * dir[i][1], eta * dir[i][2]};
        trial.nodes[i] = moved(ps.manifold, cur.nodes[i], step);
      }
      const double et = energy_with(trial, k);
      if (et <= e + policy.armijo * eta * slope && et <= e) {
        cur = std::move(trial);
        e = et;
        accepted = true;
        break;
      }
      eta *= policy.shrink;
    }
    if (!accepted) break;
    ++res.accepted;
    res.energies.push_back(e);
    eta = std::min(1.0, eta * policy.grow);
    grad = gradient_with(cur, k);
    res.gradient_norm = norm_of(grad);
  }
  // Accepted steps never increase the energy, so the last iterate is the best.
  res.best = std::move(cur);
  res.best.provenance = ps.provenance;
  res.best.provenance["minimized"] = {{"alpha", alpha}, {"steps", res.accepted}, {"energy", e}};
  return res;
}

}  // namespace quadm
