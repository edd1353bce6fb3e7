#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "quadm/error.hpp"
#include "quadm/kernels.hpp"
#include "quadm/special.hpp"

using namespace quadm;

namespace {
Point pt(double a, double b = 0.0, double c = 0.0) { return Point{{a, b, c}}; }

Point on_meridian(double theta) { return pt(std::sin(theta), 0.0, std::cos(theta)); }

// sum over k in Z of (1 + 4 pi^2 k^2)^{-a} cos(2 pi k h), tail by integral
double torus1_series(double a, double h) {
  double s = 1.0;
  const long kmax = 200000;
  for (long k = kmax; k >= 1; --k) s += 2.0 * std::pow(1.0 + 4.0 * kPi * kPi * k * k, -a) * std::cos(2 * kPi * k * h);
  return s;
}
}  // namespace

TEST_CASE("torus Bessel kernel matches the coth identity") {
  const auto m = Manifold::torus(1);
  const double ref = 0.5 / std::tanh(0.5);
  CHECK(bessel_eval(m, 2.0, pt(0.3), pt(0.3)) == doctest::Approx(ref).epsilon(1e-12));
  CHECK(ref == doctest::Approx(1.08198).epsilon(1e-5));
  // off-diagonal: sum_k cos(2 pi k h)/(1+4 pi^2 k^2) = cosh(h - 1/2) / (2 sinh(1/2))
  for (double h : {0.05, 0.2, 0.5}) {
    const double closed = std::cosh(h - 0.5) / (2.0 * std::sinh(0.5));
    CHECK(bessel_eval(m, 2.0, pt(0.0), pt(h)) == doctest::Approx(closed).epsilon(1e-12));
  }
}

TEST_CASE("torus Bessel kernel against a direct series") {
  const auto m = Manifold::torus(1);
  for (double alpha : {3.0, 3.5, 5.0})
    for (double h : {0.0, 0.1, 0.37})
      CHECK(bessel_eval(m, alpha, pt(0.1), pt(0.1 + h)) == doctest::Approx(torus1_series(0.5 * alpha, h)).epsilon(1e-10));
}

TEST_CASE("sphere Bessel kernel against a direct zonal series") {
  const auto m = Manifold::sphere();
  const double alpha = 4.0;
  for (double theta : {0.0, 0.4, 2.0, kPi}) {
    const double t = std::cos(theta);
    double s = 0.0;
    const int nmax = 20000;
    double p0 = 1.0, p1 = t;
    s += 1.0 + 3.0 * t * std::pow(3.0, -0.5 * alpha);
    for (int n = 1; n < nmax; ++n) {
      const double p2 = ((2 * n + 1) * t * p1 - n * p0) / (n + 1);
      p0 = p1;
      p1 = p2;
      s += (2 * n + 3) * p1 * std::pow(1.0 + (n + 1.0) * (n + 2.0), -0.5 * alpha);
    }
    const double tail = theta == 0.0 ? 2.0 / (alpha - 2.0) * std::pow(static_cast<double>(nmax), 2.0 - alpha) : 0.0;
    CHECK(bessel_eval(m, alpha, on_meridian(0.0), on_meridian(theta)) == doctest::Approx(s + tail).epsilon(1e-9));
  }
}

TEST_CASE("Bessel kernel symmetry and bounds") {
  for (const auto& m : {Manifold::torus(1), Manifold::torus(2), Manifold::sphere()}) {
    const double alpha = m.dim + 0.7;
    const auto xs = uniform_sample(m, 200, 9);
    double lo = INFINITY, hi = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      const double a = bessel_eval(m, alpha, xs[i], xs[i + 1]);
      CHECK(a == bessel_eval(m, alpha, xs[i + 1], xs[i]));
      lo = std::min(lo, a);
      hi = std::max(hi, a);
    }
    CHECK(lo > 0.0);
    CHECK(hi <= bessel_eval(m, alpha, xs[0], xs[0]));
  }
}

TEST_CASE("Bessel kernel rejects orders with a divergent diagonal where needed") {
  CHECK_THROWS_AS(BesselKernel(Manifold::torus(1), 0.0), InvalidArgument);
  CHECK_THROWS_AS(bessel_eval(Manifold::torus(1), 0.5, pt(0.0), pt(0.0)), InvalidArgument);
}

TEST_CASE("heat kernel examples") {
  const auto m = Manifold::torus(1);
  for (double x : {0.0, 0.3})
    for (double y : {0.1, 0.8}) CHECK(std::abs(heat_eval(m, 10.0, pt(x), pt(y)) - 1.0) < 1e-12);
  const double t = 1e-4;
  CHECK(heat_eval(m, t, pt(0.2), pt(0.2)) == doctest::Approx(1.0 / std::sqrt(4 * kPi * t)).epsilon(1e-12));
  for (const auto& mm : {Manifold::torus(1), Manifold::torus(2), Manifold::sphere()}) {
    // below t ~ 1e-2 far pairs underflow double precision
    const auto xs = uniform_sample(mm, 1001, 4);
    Rng rng(4, 9);
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      const double tt = std::exp(std::log(1e-2) + rng.uniform() * std::log(1e3));
      CHECK(heat_eval(mm, tt, xs[i], xs[i + 1]) > 0.0);
    }
  }
}

TEST_CASE("sphere heat kernel against its zonal series") {
  const auto m = Manifold::sphere();
  for (double t : {0.05, 0.5, 2.0})
    for (double theta : {0.0, 1.0, 3.0}) {
      const double c = std::cos(theta);
      double s = 0.0;
      for (int n = 400; n >= 0; --n) s += std::exp(-t * n * (n + 1.0)) * zonal_eval(n, c);
      CHECK(heat_eval(m, t, on_meridian(0.0), on_meridian(theta)) == doctest::Approx(s).epsilon(1e-11));
    }
}

TEST_CASE("Littlewood-Paley pieces") {
  const auto m = Manifold::torus(1);
  CHECK(lp_piece_eval(m, 1.5, 1.0, pt(0.0), pt(0.3)) == 0.0);
  // |P(r,x,x)| r^{alpha-d} stays within a bounded band
  const double alpha = 1.5;
  std::vector<double> c;
  for (double r : {8.0, 16.0, 32.0, 64.0}) c.push_back(std::abs(lp_piece_eval(m, alpha, r, pt(0.0), pt(0.0))) * std::pow(r, alpha - 1));
  for (double v : c) {
    CHECK(v > 0.0);
    CHECK(v < 10.0 * *std::min_element(c.begin(), c.end()));
  }
  // sup_h |P(r,0,h)| (1 + r h)^4 r^{alpha-d} does not grow with r
  std::vector<double> sup;
  for (double r : {16.0, 32.0, 64.0}) {
    double worst = 0.0;
    for (int i = 0; i < 400; ++i) {
      const double h = 0.5 * i / 400.0;
      worst = std::max(worst, std::abs(lp_piece_eval(m, alpha, r, pt(0.0), pt(h))) * std::pow(1 + r * h, 4));
    }
    sup.push_back(worst * std::pow(r, alpha - 1));
  }
  CHECK(*std::max_element(sup.begin(), sup.end()) < 10.0 * *std::min_element(sup.begin(), sup.end()));
}

TEST_CASE("Bessel gap") {
  const auto m = Manifold::torus(1);
  CHECK(bessel_gap(m, 2.5, pt(0.3), pt(0.3)) == 0.0);
  double lo = INFINITY, hi = 0.0;
  for (double h = 1e-3; h <= 0.4; h *= 1.3) {
    const double g = bessel_gap(m, 2.5, pt(0.0), pt(h)) / std::pow(h, 1.5);
    lo = std::min(lo, g);
    hi = std::max(hi, g);
  }
  CHECK(lo > 0.0);
  CHECK(hi / lo < 10.0);

  const auto s = Manifold::sphere();
  double prev = 0.0;
  for (int i = 1; i <= 20; ++i) {
    const double g = bessel_gap(s, 3.2, on_meridian(0.0), on_meridian(kPi * i / 20.0));
    CHECK(g >= prev - 1e-13);
    prev = g;
  }
}
