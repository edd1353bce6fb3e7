#include <algorithm>
#include <cmath>
#include <limits>

#include "quadm/analysis.hpp"
#include "quadm/error.hpp"
#include "quadm/kernels.hpp"
#include "quadm/parallel.hpp"
#include "quadm/special.hpp"

namespace quadm {

namespace {

std::vector<Point> torus_centers(int d, std::size_t count) {
  const auto per = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(count), 1.0 / d))));
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= per;
  std::vector<Point> out(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    for (int a = 0; a < d; ++a) {
      // off the dyadic grid so centers rarely sit on nodes of lattice rules
      out[idx][a] = std::fmod((static_cast<double>(rem % per) + 0.3819660112501051) / per, 1.0);
      rem /= per;
    }
  }
  return out;
}

// Fibonacci spiral turned by a fixed rotation about (1,2,3)/sqrt(14).
std::vector<Point> sphere_centers(std::size_t count) {
  auto pts = fibonacci(count).nodes;
  const double ax[3] = {1.0 / std::sqrt(14.0), 2.0 / std::sqrt(14.0), 3.0 / std::sqrt(14.0)};
  const double c = std::cos(1.0), s = std::sin(1.0);
  for (auto& p : pts) {
    const double dot = ax[0] * p[0] + ax[1] * p[1] + ax[2] * p[2];
    const double cr[3] = {ax[1] * p[2] - ax[2] * p[1], ax[2] * p[0] - ax[0] * p[2],
                          ax[0] * p[1] - ax[1] * p[0]};
    Point q;
    for (int a = 0; a < 3; ++a) q[a] = p[a] * c + cr[a] * s + ax[a] * dot * (1.0 - c);
    const double n = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2]);
    for (int a = 0; a < 3; ++a) q[a] /= n;
    p = q;
  }
  return pts;
}

std::vector<Point> grid_centers(const Manifold& m, std::size_t count) {
  return m.is_torus() ? torus_centers(m.dim, count) : sphere_centers(count);
}

void check_radii(const Manifold& m, const std::vector<double>& radii) {
  for (double s : radii) {
    if (m.is_torus() && !(s > 0.0 && s <= 0.5))
      throw InvalidArgument("torus radii must lie in (0, 1/2]");
    if (m.is_sphere() && !(s > 0.0 && s < kPi)) throw InvalidArgument("sphere radii must lie in (0, pi)");
  }
}

struct Sorted {
  std::vector<double> dist;
  std::vector<double> cum;  // cum[i] = weight of the first i nodes
};

Sorted sorted_from(const PointSet& ps, const Point& y) {
  const std::size_t n = ps.size();
  std::vector<std::pair<double, double>> dw(n);
  for (std::size_t j = 0; j < n; ++j) dw[j] = {geodesic_distance(ps.manifold, y, ps.nodes[j]), ps.weights[j]};
  std::sort(dw.begin(), dw.end());
  Sorted s;
  s.dist.resize(n);
  s.cum.assign(n + 1, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    s.dist[j] = dw[j].first;
    s.cum[j + 1] = s.cum[j] + dw[j].second;
  }
  return s;
}

double disc_at(const Sorted& s, const Manifold& m, double radius) {
  const double vol = ball_volume(m, radius);
  const auto closed = std::upper_bound(s.dist.begin(), s.dist.end(), radius) - s.dist.begin();
  const auto open = std::lower_bound(s.dist.begin(), s.dist.end(), radius) - s.dist.begin();
  const double a = std::abs(std::min(1.0, s.cum[closed]) - vol);
  const double b = std::abs(std::min(1.0, s.cum[open]) - vol);
  return std::min(1.0, std::max(a, b));
}

}  // namespace

double ball_volume(const Manifold& m, double s) {
  if (m.is_sphere()) {
    if (s >= kPi) return 1.0;
    const double h = std::sin(0.5 * s);
    return h * h;  // (1 - cos s) / 2
  }
  return unit_ball_volume(m.dim) * std::pow(s, m.dim);
}

DiscrepancyReport cap_discrepancy(const PointSet& ps, std::size_t centers, const std::vector<double>& radii) {
  ps.validate();
  check_radii(ps.manifold, radii);
  if (centers < 1) throw InvalidArgument("need at least one center");
  auto pts = grid_centers(ps.manifold, centers);
  pts.insert(pts.end(), ps.nodes.begin(), ps.nodes.end());
  std::vector<std::vector<double>> per(pts.size());
  parallel_for(pts.size(), [&](std::size_t c) {
    const auto s = sorted_from(ps, pts[c]);
    per[c].resize(radii.size());
    for (std::size_t k = 0; k < radii.size(); ++k) per[c][k] = disc_at(s, ps.manifold, radii[k]);
  });
  DiscrepancyReport rep;
  rep.family = "caps_or_balls";
  rep.centers = pts.size();
  rep.radii = radii;
  rep.sup_disc.assign(radii.size(), 0.0);
  for (const auto& row : per)
    for (std::size_t k = 0; k < radii.size(); ++k) rep.sup_disc[k] = std::max(rep.sup_disc[k], row[k]);
  return rep;
}

double l7_constant(const DiscrepancyReport& rep, int d, double r) {
  if (!(r > 0.0)) throw InvalidArgument("band r must be positive");
  double c = 0.0;
  for (std::size_t k = 0; k < rep.radii.size(); ++k) {
    const double shape = std::max(std::pow(r, -d), std::pow(r, -1.0) * std::pow(rep.radii[k], d - 1.0));
    c = std::max(c, rep.sup_disc[k] / shape);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Level sets of the Bessel kernel on S^2

namespace {

struct Profile {
  BesselKernel k;
  double at_zero;  // inf when the order is <= 2
  double eps = 1e-3;
  double head = 0.0;  // int_0^eps (sin/2) B
  explicit Profile(double alpha);
  double operator()(double rho) const {
    if (rho <= 0.0) return at_zero;
    const double h = std::sin(0.5 * rho);
    return k.sphere_profile(std::cos(rho), 2.0 * h * h);
  }
};

double vb_graded(const Profile& b, double c);

Profile::Profile(double alpha)
    : k(Manifold::sphere(), alpha),
      at_zero(alpha > 2.0 ? k.diagonal() : std::numeric_limits<double>::infinity()) {
  head = vb_graded(*this, eps);
}

double invert_with(const Profile& b, double t) {
  if (t >= b.at_zero) return -1.0;
  if (t < b(kPi)) return 4.0;
  double lo = 0.0, hi = kPi;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double v = b(mid);
    if (v > t)
      lo = mid;
    else
      hi = mid;
    if (std::abs(v - t) <= 1e-12 * std::max(1.0, std::abs(t))) return mid;
  }
  return 0.5 * (lo + hi);
}

double vb_panel(const Profile& b, double lo, double hi, int order) {
  const auto& gl = gauss_legendre(order);
  double s = 0.0;
  for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
    const double x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gl.nodes[q];
    s += gl.weights[q] * 0.5 * std::sin(x) * b(x);
  }
  return 0.5 * (hi - lo) * s;
}

// int_0^c (sin(rho)/2) B(rho) d rho on panels halving toward 0.
double vb_graded(const Profile& b, double c) {
  double s = 0.0, hi = c;
  for (int p = 0; p < 48; ++p) {
    s += vb_panel(b, 0.5 * hi, hi, 16);
    hi *= 0.5;
  }
  return s;
}

// int_a^c (sin(rho)/2) B(rho) d rho.
double vb_integral(const Profile& b, double a, double c) {
  if (a > 0.0) return vb_panel(b, a, c, c - a < 0.05 ? 6 : 16);
  if (c <= b.eps) return vb_graded(b, c);
  double s = b.head, lo = b.eps;
  while (lo < c) {
    const double hi = std::min(c, 2.0 * lo);
    s += vb_panel(b, lo, hi, 16);
    lo = hi;
  }
  return s;
}

// int over rho in [a, b] of (c - v(rho)) (-B'(rho)) d rho, v = (1 - cos rho)/2.
double signed_piece(const Profile& b, double a, double e, double c) {
  const double va = a > 0.0 ? ball_volume(Manifold::sphere(), a) : 0.0;
  const double ve = ball_volume(Manifold::sphere(), e);
  const double ba = a > 0.0 ? b(a) : 0.0;  // v(a) B(a) -> 0 as rho -> 0
  const double be = b(e);
  double cb = c * (ba - be);
  if (a == 0.0) cb = c > 0.0 ? c * (b.at_zero - be) : 0.0;
  return cb - (va * ba - ve * be + vb_integral(b, a, e));
}

}  // namespace

double invert_profile(double alpha, double t) {
  if (!(alpha > 0.0)) throw InvalidArgument("alpha must be positive");
  return invert_with(Profile(alpha), t);
}

LevelSetReport levelset_discrepancy(const PointSet& ps, double alpha, const std::vector<double>& levels,
                                    std::size_t centers, double q) {
  ps.validate();
  if (!ps.manifold.is_sphere())
    throw InvalidArgument(
        "level-set discrepancy needs S^2 (torus level sets are not geodesic balls); use cap_discrepancy");
  if (!(alpha > 0.0)) throw InvalidArgument("alpha must be positive");
  if (q == 0.0) q = 1.0;
  if (!(q >= 1.0) || std::isinf(q)) throw InvalidArgument("q must lie in [1, inf)");
  if (centers < 1) throw InvalidArgument("need at least one center");
  const Profile b(alpha);
  LevelSetReport rep;
  rep.levels = levels;
  rep.q = q;
  std::vector<double> radii;
  std::vector<std::size_t> where;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double rho = invert_with(b, levels[i]);
    rep.cap_radius.push_back(rho);
    if (rho > 0.0 && rho < kPi) {
      where.push_back(i);
      radii.push_back(rho);
    }
  }
  const auto caps = cap_discrepancy(ps, centers, radii);
  rep.per_level.family = "bessel_level_sets";
  rep.per_level.centers = caps.centers;
  rep.per_level.radii = rep.cap_radius;
  rep.per_level.sup_disc.assign(levels.size(), 0.0);  // empty set or whole sphere: 0
  for (std::size_t k = 0; k < where.size(); ++k) rep.per_level.sup_disc[where[k]] = caps.sup_disc[k];

  // Layer cake: int_0^inf |nu(L_t) - vol(L_t)| dt with L_t the open cap of radius rho(t).
  const auto pts = sphere_centers(centers);
  std::vector<double> per(pts.size());
  parallel_for(pts.size(), [&](std::size_t c) {
    const auto s = sorted_from(ps, pts[c]);
    std::vector<double> edges{0.0};
    for (double x : s.dist)
      if (x > edges.back() && x < kPi) edges.push_back(x);
    edges.push_back(kPi);
    // nu(open cap of radius rho) is constant for rho in (edges[i], edges[i+1])
    std::vector<double> pieces;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
      const double a = edges[i], e = edges[i + 1];
      if (!(e > a)) continue;
      const double cm =
          std::min(1.0, s.cum[std::upper_bound(s.dist.begin(), s.dist.end(), a) - s.dist.begin()]);
      const double star = std::acos(std::clamp(1.0 - 2.0 * cm, -1.0, 1.0));
      if (star > a && star < e) {
        pieces.push_back(std::abs(signed_piece(b, a, star, cm)));
        pieces.push_back(std::abs(signed_piece(b, star, e, cm)));
      } else {
        pieces.push_back(std::abs(signed_piece(b, a, e, cm)));
      }
    }
    per[c] = std::pow(pairwise_sum(pieces), q);
  });
  rep.integrated = std::pow(pairwise_sum(per) / static_cast<double>(per.size()), 1.0 / q);
  if (alpha < 1.0) {
    rep.regime = "alpha<1";
    rep.expected_rate = -alpha;
  } else if (alpha == 1.0) {
    rep.regime = "alpha=1";
    rep.expected_rate = -1.0;
  } else {
    rep.regime = "alpha>1";
    rep.expected_rate = -1.0;
  }
  return rep;
}

}  // namespace quadm
