#include <doctest.h>

#include <cmath>

#include "quadm/analysis.hpp"
#include "quadm/error.hpp"
#include "quadm/quadrature.hpp"
#include "quadm/special.hpp"

using namespace quadm;

namespace {
PointSet octahedron() {
  std::vector<Point> v;
  for (int a = 0; a < 3; ++a)
    for (double s : {1.0, -1.0}) {
      Point p;
      p[a] = s;
      v.push_back(p);
    }
  return make_pointset(Manifold::sphere(), v, std::vector<double>(6, 1.0 / 6.0));
}
}  // namespace

TEST_CASE("NNLS recovers a nonnegative solution") {
  Eigen::MatrixXd a(3, 4);
  a << 1, 2, 0, 1, 0, 1, 3, 1, 2, 0, 1, 1;
  Eigen::VectorXd x(4);
  x << 0.5, 0.0, 1.0, 0.25;
  const auto r = nnls(a, a * x);
  CHECK(r.converged);
  CHECK(r.residual < 1e-12);
  CHECK(r.x.minCoeff() >= 0.0);
  // infeasible target: best fit clamps at zero
  Eigen::MatrixXd b = Eigen::MatrixXd::Identity(2, 2);
  const auto q = nnls(b, Eigen::Vector2d(-1.0, 2.0));
  CHECK(q.x(0) == 0.0);
  CHECK(q.x(1) == doctest::Approx(2.0));
}

TEST_CASE("exactness residual oracles") {
  for (std::size_t n : {3u, 8u, 17u}) {
    const auto ps = lattice(Manifold::torus(1), n);
    CHECK(exactness_residual(ps, 2 * kPi * n - 1e-9) < 1e-13);
    CHECK(exactness_residual(ps, 2 * kPi * n + 1e-9) > 0.5);
  }
  CHECK(exactness_residual_sq(octahedron(), 13.0) < 1e-13);
  CHECK(exactness_residual_sq(octahedron(), 21.0) > 1e-3);
  CHECK(exactness_residual(lattice(Manifold::torus(2), 4), 1.0) == 0.0);
  CHECK(exactness_residual(random_points(Manifold::sphere(), 9, 1), 1.0) < 1e-15);
}

TEST_CASE("exact rules on the circle") {
  for (int k : {3, 6}) {
    const double r = 2 * kPi * k + 0.1;
    const auto ps = build_exact_rule(Manifold::torus(1), r);
    const auto s = spectrum_below(Manifold::torus(1), r);
    CHECK(ps.size() <= s.basis_size + 1);
    CHECK(exactness_residual(ps, r) <= 1e-10);
    double sum = 0.0;
    for (double w : ps.weights) sum += w;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("exact rule on the sphere with r^2 = 13") {
  const auto ps = build_exact_rule_sq(Manifold::sphere(), 13.0);
  CHECK(spectrum_below_sq(Manifold::sphere(), 13.0).basis_size == 16);
  CHECK(ps.size() <= 17);
  CHECK(exactness_residual_sq(ps, 13.0) <= 1e-10);
  for (double w : ps.weights) CHECK(w >= 0.0);
}

TEST_CASE("exact rules on the two-torus") {
  const double r = 2 * kPi * 2.5;
  const auto ps = build_exact_rule(Manifold::torus(2), r);
  CHECK(ps.size() <= spectrum_below(Manifold::torus(2), r).basis_size + 1);
  CHECK(exactness_residual(ps, r) <= 1e-10);
}

TEST_CASE("product rule on the sphere") {
  for (int l : {2, 5, 9}) {
    const auto ps = sphere_product_rule(l);
    CHECK(exactness_residual_sq(ps, l * (l + 1.0) + 0.5) < 1e-12);
  }
}

TEST_CASE("Caratheodory pruning") {
  const auto m = Manifold::torus(1);
  const auto s = spectrum_below(m, 20.0);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto ps = random_points(m, 30, seed);
    Rng rng(seed, 5);
    std::vector<double> w(ps.size());
    double tot = 0.0;
    for (auto& x : w) tot += (x = rng.uniform() + 0.1);
    for (auto& x : w) x /= tot;
    const Eigen::MatrixXd phi = basis_matrix(m, s, ps.nodes);
    const Eigen::VectorXd before = phi * Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    const auto pr = caratheodory_prune(ps.nodes, w, phi);
    CHECK(pr.nodes.size() <= s.basis_size + 1);
    CHECK(pr.steps >= 1);
    CHECK(ps.size() - pr.nodes.size() >= static_cast<std::size_t>(pr.steps));
    const Eigen::MatrixXd phi2 = basis_matrix(m, s, pr.nodes);
    const Eigen::VectorXd after =
        phi2 * Eigen::Map<const Eigen::VectorXd>(pr.weights.data(), static_cast<Eigen::Index>(pr.weights.size()));
    CHECK((after - before).cwiseAbs().maxCoeff() < 1e-12);
    for (double x : pr.weights) CHECK(x > 0.0);
  }
  // already small: unchanged
  const auto small = random_points(m, 4, 9);
  const Eigen::MatrixXd phi = basis_matrix(m, s, small.nodes);
  const auto same = caratheodory_prune(small.nodes, small.weights, phi);
  REQUIRE(same.nodes.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(same.nodes[i] == small.nodes[i]);
    CHECK(same.weights[i] == small.weights[i]);
  }
}

TEST_CASE("rule construction is deterministic") {
  const auto a = build_exact_rule_sq(Manifold::sphere(), 21.0);
  const auto b = build_exact_rule_sq(Manifold::sphere(), 21.0);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.nodes[i] == b.nodes[i]);
    CHECK(a.weights[i] == b.weights[i]);
  }
}
