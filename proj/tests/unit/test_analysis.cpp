#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "quadm/analysis.hpp"
#include "quadm/error.hpp"
#include "quadm/kernels.hpp"
#include "quadm/quadrature.hpp"
#include "quadm/special.hpp"

using namespace quadm;

namespace {

// sum over k in Z of 1 / (1 + a^2 k^2) = (pi / a) coth(pi / a)
double coth_sum(double a) { return kPi / a / std::tanh(kPi / a); }

// 2 sum_{m >= 1} (1 + 64 pi^2 m^2)^{-1}, direct with an integral tail
double lattice4_direct() {
  const long mmax = 2000000;
  double s = 0.0;
  for (long m = mmax; m >= 1; --m) s += 1.0 / (1.0 + 64.0 * kPi * kPi * static_cast<double>(m) * m);
  const double c = 8.0 * kPi;
  const double tail = (kPi / 2 - std::atan(c * (mmax + 0.5))) / c;
  return 2.0 * (s + tail);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

PointSet single(double z) { return make_pointset(Manifold::torus(1), {Point{{z, 0, 0}}}, {1.0}); }

}  // namespace

TEST_CASE("moment vector aliasing on the circle lattice") {
  const auto m = Manifold::torus(1);
  const std::size_t n = 5;
  const auto s = spectrum_below(m, 2 * kPi * 12.5);
  const auto mv = moment_vector(lattice(m, n), s);
  CHECK(mv(0) == doctest::Approx(1.0));
  // shells are k = 1..12, each cos then sin
  for (int k = 1; k <= 12; ++k) {
    const double c = mv(2 * k - 1), sn = mv(2 * k);
    if (k % n == 0) CHECK(c == doctest::Approx(std::sqrt(2.0)));
    else CHECK(std::abs(c) < 1e-13);
    CHECK(std::abs(sn) < 1e-13);
  }
  const auto one = moment_vector(single(0.3), s);
  for (int k = 1; k <= 12; ++k) {
    CHECK(one(2 * k - 1) == doctest::Approx(std::sqrt(2.0) * std::cos(2 * kPi * k * 0.3)).epsilon(1e-12));
    CHECK(one(2 * k) == doctest::Approx(std::sqrt(2.0) * std::sin(2 * kPi * k * 0.3)).epsilon(1e-12));
  }
}

TEST_CASE("closed form WCE for the four point lattice") {
  const double direct = lattice4_direct();
  const double closed = coth_sum(8 * kPi) - 1.0;
  CHECK(std::abs(direct - closed) < 1e-14);
  CHECK(closed == doctest::Approx(5.2e-3).epsilon(0.01));
  const auto ps = lattice(Manifold::torus(1), 4);
  for (auto method : {WceMethod::Spectral, WceMethod::Kernel, WceMethod::Heat}) {
    const auto r = wce(ps, 1.0, method);
    // the spectral route is tail-limited at alpha = 1 on the circle
    CHECK(std::abs(r.value_sq - closed) < std::max(1e-10, r.tail_bound));
    CHECK(r.lower_sq <= closed + 1e-15);
    CHECK(r.upper_sq >= closed - 1e-15);
  }
}

TEST_CASE("single point WCE is the coth identity") {
  const double ref = 0.5 / std::tanh(0.5) - 1.0;
  CHECK(ref == doctest::Approx(0.08198).epsilon(1e-4));
  for (auto method : {WceMethod::Kernel, WceMethod::Heat})
    CHECK(wce(single(0.7), 1.0, method).value_sq == doctest::Approx(ref).epsilon(1e-12));
  const auto sp = wce(single(0.7), 1.0, WceMethod::Spectral);
  CHECK(std::abs(sp.value_sq - ref) <= sp.tail_bound);
  CHECK(std::abs(wce(single(0.7), 2.0, WceMethod::Spectral).value_sq - wce(single(0.7), 2.0, WceMethod::Kernel).value_sq) < 1e-10);
}

TEST_CASE("three routes agree within tails") {
  std::vector<PointSet> sets;
  for (std::uint64_t s = 0; s < 3; ++s) {
    sets.push_back(random_points(Manifold::torus(1), 7 + 5 * s, s));
    sets.push_back(random_points(Manifold::torus(2), 5 + 3 * s, s));
    sets.push_back(random_points(Manifold::sphere(), 5 + 3 * s, s));
  }
  for (const auto& ps : sets) {
    std::vector<WceReport> reps;
    for (auto method : {WceMethod::Spectral, WceMethod::Kernel, WceMethod::Heat}) reps.push_back(wce(ps, 1.5, method));
    CHECK(routes_agree(reps));
    for (const auto& r : reps) CHECK(r.lower_sq <= r.upper_sq);
  }
}

TEST_CASE("WCE decreases as alpha grows") {
  for (const auto& ps : {random_points(Manifold::torus(1), 9, 1), jittered(Manifold::torus(2), 16, 2),
                          fibonacci(20)}) {
    const double half = 0.5 * ps.manifold.dim;
    const auto s = spectrum_below(ps.manifold, 60.0);
    std::vector<double> orders;
    for (double a = half + 0.1; a < half + 3; a += 0.4) orders.push_back(a);
    const auto sums = spectral_partial_sums(ps, orders, s);
    for (std::size_t k = 1; k < sums.size(); ++k) CHECK(sums[k] <= sums[k - 1]);
    CHECK(wce(ps, half + 1.2, WceMethod::Kernel).value <= wce(ps, half + 0.6, WceMethod::Kernel).value);
  }
}

TEST_CASE("rule quality ordering on the circle") {
  const auto m = Manifold::torus(1);
  const std::size_t n = 16;
  const double lat = wce(lattice(m, n), 1.5, WceMethod::Kernel).value;
  std::vector<double> jit, rnd;
  for (std::uint64_t s = 0; s < 20; ++s) {
    jit.push_back(wce(jittered(m, n, s), 1.5, WceMethod::Kernel).value);
    rnd.push_back(wce(random_points(m, n, s), 1.5, WceMethod::Kernel).value);
  }
  CHECK(lat <= median(jit));
  CHECK(median(jit) <= median(rnd));
}

TEST_CASE("auto route and errors") {
  const auto ps = random_points(Manifold::torus(1), 5, 3);
  const auto a = wce_auto(ps, 1.5);
  CHECK(a.value == doctest::Approx(wce(ps, 1.5, WceMethod::Kernel).value).epsilon(1e-8));
  CHECK_THROWS_AS(wce(ps, 0.5, WceMethod::Kernel), InvalidArgument);
  CHECK_THROWS_WITH(wce(ps, 0.4, WceMethod::Spectral), doctest::Contains("alpha must exceed d/2 = 0.5"));
  CHECK_THROWS_AS(parse_method("fast"), InvalidArgument);
}

TEST_CASE("q = 2 energy converges to the squared WCE") {
  const auto ps = random_points(Manifold::torus(1), 6, 4);
  const double ref = wce(ps, 1.0, WceMethod::Kernel).value_sq;
  const auto q = qnorm_energy(ps, 1.0, 2.0, 4096);
  CHECK(std::abs(q.value * q.value - ref) < 1e-4);
  const double e64 = std::abs(std::pow(qnorm_energy(ps, 1.0, 2.0, 64).value, 2) - ref);
  const double e256 = std::abs(std::pow(qnorm_energy(ps, 1.0, 2.0, 256).value, 2) - ref);
  CHECK(e256 <= 0.5 * e64);
  CHECK(q.coarse_grid < q.grid);
}

TEST_CASE("q norm of a near perfect rule is small") {
  const auto m = Manifold::torus(1);
  const auto rule = lattice(m, 256);
  CHECK(qnorm_energy(rule, 2.0, INFINITY, 2048).value < 1e-3);
  CHECK(qnorm_energy(rule, 2.0, 1.0, 2048).value < 1e-3);
  CHECK_THROWS_AS(qnorm_energy(rule, 0.4, 2.0, 64), InvalidArgument);
  CHECK_THROWS_AS(qnorm_energy(rule, 1.5, 0.5, 64), InvalidArgument);
}

TEST_CASE("cap discrepancy basics") {
  const auto m = Manifold::sphere();
  const Point north{{0, 0, 1}};
  const auto one = make_pointset(m, {north}, {1.0});
  const auto rep = cap_discrepancy(one, 32, {1e-3});
  CHECK(rep.sup_disc[0] == doctest::Approx(1.0 - ball_volume(m, 1e-3)).epsilon(1e-9));
  const auto fib = fibonacci(200);
  const auto tiny = cap_discrepancy(fib, 64, {1e-6});
  CHECK(tiny.sup_disc[0] == doctest::Approx(1.0 / 200).epsilon(1e-6));
  CHECK(ball_volume(m, kPi) == doctest::Approx(1.0));
  CHECK(ball_volume(m, kPi / 2) == doctest::Approx(0.5));
  CHECK(ball_volume(Manifold::torus(2), 0.25) == doctest::Approx(kPi / 16));
  const auto t = cap_discrepancy(lattice(Manifold::torus(1), 10), 16, {1e-6});
  CHECK(t.sup_disc[0] == doctest::Approx(0.1).epsilon(1e-5));
  CHECK_THROWS_AS(cap_discrepancy(fib, 8, {4.0}), InvalidArgument);
}

TEST_CASE("level sets") {
  const auto k = BesselKernel(Manifold::sphere(), 1.5);
  const Point north{{0, 0, 1}};
  for (double rho : {0.05, 0.3, 1.0, 2.5}) {
    const Point q{{std::sin(rho), 0, std::cos(rho)}};
    const double t = k(north, q);
    const double back = invert_profile(1.5, t);
    const Point p{{std::sin(back), 0, std::cos(back)}};
    CHECK(std::abs(k(north, p) - t) <= 1e-8 * std::max(1.0, t));
  }
  const auto rule = build_exact_rule_sq(Manifold::sphere(), 21.0);
  const double top = BesselKernel(Manifold::sphere(), 2.5).diagonal();
  const auto rep = levelset_discrepancy(rule, 2.5, {2.0 * top, 1.0}, 16);
  CHECK(rep.per_level.sup_disc[0] == 0.0);
  CHECK(rep.regime == "alpha>1");
  CHECK(levelset_discrepancy(rule, 0.8, {1.0}, 8).regime == "alpha<1");
  CHECK_THROWS_AS(levelset_discrepancy(lattice(Manifold::torus(1), 4), 0.8, {1.0}), InvalidArgument);
}

TEST_CASE("adversarial construction") {
  const auto ps = lattice(Manifold::torus(1), 16);
  const auto a = adversarial_bound(ps, 1.5);
  CHECK(a.error == 1.0);
  CHECK(a.ratio == doctest::Approx(1.0 / a.sobolev_norm));
  CHECK(a.balls == 16);
  CHECK(a.aliasing_delta < 1e-6);
  const auto b = adversarial_bound(ps, 1.5);
  CHECK(a.sobolev_norm == b.sobolev_norm);
  CHECK_THROWS_AS(adversarial_bound(fibonacci(10), 1.5), InvalidArgument);
}

TEST_CASE("transfer and perturbation") {
  const double r = 2 * kPi * 4 + 0.5;
  const auto rule = build_exact_rule(Manifold::torus(1), r);
  const auto same = alpha_transfer_check(rule, 1.5, 1.5);
  CHECK(same.constant == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(same.monotone);
  const auto t = alpha_transfer_check(rule, 1.5, 0.8);
  CHECK(t.partial_beta >= t.partial_alpha);
  CHECK(t.wce_beta >= t.wce_alpha);
  CHECK_THROWS_AS(alpha_transfer_check(rule, 1.5, 2.0), InvalidArgument);

  const auto moved = perturb_node(rule, rule.size() - 1, 0.0);
  CHECK(wce(moved, 2.5, WceMethod::Kernel).value == wce(rule, 2.5, WceMethod::Kernel).value);
  const auto p = perturbation_experiment(rule, 1.5, 2.5, r);
  CHECK(p.delta > 0.0);
  CHECK(p.delta <= 0.25);
  CHECK(p.wce_beta > p.base_beta);
  const auto sp = perturb_node(fibonacci(10), 3, 0.2);
  CHECK(geodesic_distance(Manifold::sphere(), sp.nodes[3], fibonacci(10).nodes[3]) == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("scaling fit") {
  std::vector<double> x{2, 4, 8, 16}, y;
  for (double n : x) y.push_back(7.0 * std::pow(n, -2.0));
  const auto f = scaling_fit(x, y);
  CHECK(std::abs(f.slope + 2.0) < 1e-12);
  CHECK(f.slope_se < 1e-10);
  CHECK(std::exp(f.intercept) == doctest::Approx(7.0).epsilon(1e-12));
  CHECK_THROWS_AS(scaling_fit({1, 2}, {1, 2}), InvalidArgument);
  CHECK_THROWS_AS(scaling_fit({1, 2, 3}, {1, 0, 2}), InvalidArgument);
}

TEST_CASE("random points decay like N^{-1/2}") {
  // E[WCE^2] = N^{-1} sum_{k != 0} (1 + 4 pi^2 k^2)^{-1} = (coth-sum - 1) / N
  const auto m = Manifold::torus(1);
  const double c = 0.5 / std::tanh(0.5) - 1.0;
  std::vector<double> xs, ys;
  for (std::size_t n : {16u, 64u, 256u}) {
    double s = 0.0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) s += wce(random_points(m, n, seed), 1.0, WceMethod::Kernel).value_sq;
    s /= 40;
    CHECK(s == doctest::Approx(c / n).epsilon(0.25));
    xs.push_back(static_cast<double>(n));
    ys.push_back(std::sqrt(s));
  }
  CHECK(scaling_fit(xs, ys).slope == doctest::Approx(-0.5).epsilon(0.2));
}

TEST_CASE("jitter expectation against Monte Carlo") {
  const auto m = Manifold::torus(1);
  const double exact = jitter_expectation(m, 4, 0.8);
  double s = 0.0, s2 = 0.0;
  const int reps = 400;
  for (int k = 0; k < reps; ++k) {
    const double v = wce(jittered(m, 4, static_cast<std::uint64_t>(k)), 0.8, WceMethod::Kernel).value_sq;
    s += v;
    s2 += v * v;
  }
  const double mean = s / reps, se = std::sqrt((s2 / reps - mean * mean) / reps);
  CHECK(std::abs(mean - exact) < 4 * se);
  CHECK_THROWS_AS(jitter_expectation(Manifold::torus(2), 6, 1.3), InvalidArgument);
}
