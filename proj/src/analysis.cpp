#include "quadm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>

#include "quadm/error.hpp"
#include "quadm/kernels.hpp"
#include "quadm/parallel.hpp"
#include "quadm/special.hpp"

namespace quadm {

namespace {

constexpr std::size_t kChunks = 16;

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

void check_wce_order(const Manifold& m, double alpha) {
  if (!(alpha > 0.5 * m.dim)) throw InvalidArgument("alpha must exceed d/2 = " + num(0.5 * m.dim));
}

struct ChunkRange {
  std::size_t begin, end;
};

std::vector<ChunkRange> chunks_of(std::size_t n) {
  const std::size_t c = std::max<std::size_t>(1, std::min(kChunks, n));
  std::vector<ChunkRange> out;
  for (std::size_t i = 0; i < c; ++i) out.push_back({i * n / c, (i + 1) * n / c});
  return out;
}

// Squared moment per shell, torus. Each half-lattice rep k carries
// (sqrt2 Re F)^2 + (sqrt2 Im F)^2 = 2 |F(k)|^2.
std::vector<double> torus_shells(const PointSet& ps, const SpectrumSlice& s) {
  const int d = ps.manifold.dim;
  const int kmax = std::max(1, s.max_index());
  std::vector<std::array<int, 3>> reps;
  std::vector<std::size_t> owner;
  for (std::size_t sh = 1; sh < s.shells.size(); ++sh)
    for (const auto& k : s.shells[sh].reps) {
      reps.push_back(k);
      owner.push_back(sh);
    }
  const auto parts = chunks_of(ps.size());
  std::vector<std::vector<std::complex<double>>> acc(parts.size());
  parallel_for(parts.size(), [&](std::size_t c) {
    auto& f = acc[c];
    f.assign(reps.size(), {0.0, 0.0});
    std::vector<std::complex<double>> table(static_cast<std::size_t>(d) * (kmax + 1));
    for (std::size_t j = parts[c].begin; j < parts[c].end; ++j) {
      for (int a = 0; a < d; ++a) {
        const double z = ps.nodes[j][a];
        for (int m = 0; m <= kmax; ++m)
          table[a * (kmax + 1) + m] = std::polar(1.0, kTwoPi * m * z);
      }
      const double w = ps.weights[j];
      for (std::size_t i = 0; i < reps.size(); ++i) {
        std::complex<double> e{w, 0.0};
        for (int a = 0; a < d; ++a) {
          const int k = reps[i][a];
          const auto t = table[a * (kmax + 1) + std::abs(k)];
          e *= k >= 0 ? t : std::conj(t);
        }
        f[i] += e;
      }
    }
  });
  std::vector<double> out(s.shells.size(), 0.0);
  out[0] = 1.0;
  std::vector<std::vector<double>> per(s.shells.size());
  for (std::size_t i = 0; i < reps.size(); ++i) {
    std::complex<double> f{0.0, 0.0};
    for (const auto& a : acc) f += a[i];
    per[owner[i]].push_back(2.0 * std::norm(f));
  }
  for (std::size_t sh = 1; sh < s.shells.size(); ++sh) out[sh] = pairwise_sum(per[sh]);
  return out;
}

std::vector<double> sphere_shells(const PointSet& ps, const SpectrumSlice& s) {
  const int lmax = s.max_index();
  const std::size_t len = static_cast<std::size_t>(lmax + 1) * (lmax + 1);
  const auto parts = chunks_of(ps.size());
  std::vector<std::vector<double>> acc(parts.size());
  parallel_for(parts.size(), [&](std::size_t c) {
    auto& f = acc[c];
    f.assign(len, 0.0);
    std::vector<double> y(len);
    for (std::size_t j = parts[c].begin; j < parts[c].end; ++j) {
      real_harmonics(lmax, ps.nodes[j], y);
      const double w = ps.weights[j];
      for (std::size_t i = 0; i < len; ++i) f[i] += w * y[i];
    }
  });
  std::vector<double> out(s.shells.size(), 0.0);
  for (std::size_t sh = 0; sh < s.shells.size(); ++sh) {
    const long n = s.shells[sh].key;
    std::vector<double> sq;
    for (long i = n * n; i < (n + 1) * (n + 1); ++i) {
      double f = 0.0;
      for (const auto& a : acc) f += a[static_cast<std::size_t>(i)];
      sq.push_back(f * f);
    }
    out[sh] = pairwise_sum(sq);
  }
  return out;
}

// sum_{|k| >= K} (1 + 4 pi^2 |k|^2)^{-alpha} over Z^d.
double torus_tail(int d, double alpha, double k) {
  const double f = std::pow(1.0 + 4.0 * kPi * kPi * k * k, -alpha);
  const double grow = std::pow(1.0 + std::sqrt(static_cast<double>(d)) / (2.0 * k), d);
  return unit_ball_volume(d) * grow *
         (std::pow(k, d) * f +
          d * std::pow(4.0 * kPi * kPi, -alpha) * std::pow(k, d - 2.0 * alpha) / (2.0 * alpha - d));
}

// sum_{n >= n0} (2n+1)(1 + n(n+1))^{-alpha}, n0 >= 2.
double sphere_tail(double alpha, double n0) {
  const double a = n0 - 1.0;
  return std::pow(1.0 + a * (a + 1.0), 1.0 - alpha) / (alpha - 1.0);
}

struct SpectralPlan {
  SpectrumSlice slice;
  double tail;
};

SpectralPlan plan_spectral(const Manifold& m, double alpha, const WceOptions& opt) {
  if (m.is_torus()) {
    const int d = m.dim;
    const double kcap = std::max(
        1.0, std::floor(std::pow(static_cast<double>(opt.basis_budget) / unit_ball_volume(d), 1.0 / d) -
                        std::sqrt(static_cast<double>(d)) / 2.0));
    double k = 1.0;
    while (k < kcap && torus_tail(d, alpha, k) > opt.tol) k = std::min(kcap, 2.0 * k);
    if (torus_tail(d, alpha, k) <= opt.tol) {
      double lo = std::max(1.0, std::floor(k / 2.0)), hi = k;
      while (hi - lo > 1.0) {
        const double mid = std::floor(0.5 * (lo + hi));
        (torus_tail(d, alpha, mid) <= opt.tol ? hi : lo) = mid;
      }
      k = torus_tail(d, alpha, lo) <= opt.tol ? lo : hi;
    }
    return {spectrum_below(m, kTwoPi * k, 4 * opt.basis_budget + 64), torus_tail(d, alpha, k)};
  }
  const double lcap = std::max(2.0, std::floor(std::sqrt(static_cast<double>(opt.basis_budget))));
  double l = 2.0;
  while (l < lcap && sphere_tail(alpha, l) > opt.tol) l = std::min(lcap, 2.0 * l);
  if (sphere_tail(alpha, l) <= opt.tol) {
    double lo = std::max(2.0, std::floor(l / 2.0)), hi = l;
    while (hi - lo > 1.0) {
      const double mid = std::floor(0.5 * (lo + hi));
      (sphere_tail(alpha, mid) <= opt.tol ? hi : lo) = mid;
    }
    l = sphere_tail(alpha, lo) <= opt.tol ? lo : hi;
  }
  return {spectrum_below_sq(m, l * (l + 1.0), 4 * opt.basis_budget + 64), sphere_tail(alpha, l)};
}

double weighted_sum(const SpectrumSlice& s, const std::vector<double>& shells, double alpha) {
  std::vector<double> terms;
  for (std::size_t sh = 1; sh < s.shells.size(); ++sh) {
    const double l = s.shells[sh].lambda;
    terms.push_back(std::pow(1.0 + l * l, -alpha) * shells[sh]);
  }
  return pairwise_sum(terms);
}

WceReport spectral_route(const PointSet& ps, double alpha, const WceOptions& opt) {
  const auto plan = plan_spectral(ps.manifold, alpha, opt);
  const auto shells = shell_moments(ps, plan.slice);
  WceReport r;
  r.method = WceMethod::Spectral;
  r.value_sq = weighted_sum(plan.slice, shells, alpha);
  r.tail_bound = plan.tail;
  r.lower_sq = r.value_sq;
  r.upper_sq = r.value_sq + plan.tail;
  r.cutoff = plan.slice.cutoff;
  r.terms = plan.slice.basis_size;
  return r;
}

WceReport kernel_route(const PointSet& ps, double alpha, const WceOptions& opt) {
  if (!(2.0 * alpha > ps.manifold.dim)) throw InvalidArgument("kernel route needs 2 alpha > d");
  BesselKernel k(ps.manifold, 2.0 * alpha, std::min(1e-12, opt.tol));
  const std::size_t n = ps.size();
  const double diag = k.diagonal();
  std::vector<double> rows(n), tails(n), mags(n);
  parallel_for(n, [&](std::size_t i) {
    std::vector<double> terms, tail;
    terms.reserve(n - i);
    terms.push_back(ps.weights[i] * ps.weights[i] * diag);
    double mag = std::abs(terms.back());
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto v = k.eval(ps.nodes[i], ps.nodes[j]);
      const double ww = 2.0 * ps.weights[i] * ps.weights[j];
      terms.push_back(ww * v.value);
      tail.push_back(ww * v.tail);
      mag += std::abs(terms.back());
    }
    rows[i] = pairwise_sum(terms);
    tails[i] = pairwise_sum(tail);
    mags[i] = mag;
  });
  WceReport r;
  r.method = WceMethod::Kernel;
  r.value_sq = pairwise_sum(rows) - 1.0;
  const double rounding = 8.0 * std::numeric_limits<double>::epsilon() *
                          (pairwise_sum(mags) + 1.0) * std::log2(static_cast<double>(n) + 2.0);
  r.tail_bound = pairwise_sum(tails) + rounding;
  r.lower_sq = r.value_sq - r.tail_bound;
  r.upper_sq = r.value_sq + r.tail_bound;
  r.terms = n * (n + 1) / 2;
  if (!std::isfinite(r.value_sq)) throw InternalError("non-finite kernel energy");
  return r;
}

// Coincident nodes merged, weights added.
PointSet merged(const PointSet& ps) {
  PointSet out = ps;
  out.nodes.clear();
  out.weights.clear();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    bool found = false;
    for (std::size_t j = 0; j < out.nodes.size(); ++j)
      if (out.nodes[j] == ps.nodes[i]) {
        out.weights[j] += ps.weights[i];
        found = true;
        break;
      }
    if (!found) {
      out.nodes.push_back(ps.nodes[i]);
      out.weights.push_back(ps.weights[i]);
    }
  }
  return out;
}

WceReport heat_route(const PointSet& input, double alpha, const WceOptions& opt) {
  const PointSet ps = merged(input);
  const Manifold& m = ps.manifold;
  const int d = m.dim;
  const std::size_t n = ps.size();
  HeatKernel heat(m, 1e-14, true);

  std::vector<double> w2(n);
  for (std::size_t i = 0; i < n; ++i) w2[i] = ps.weights[i] * ps.weights[i];
  const double diag_mass = pairwise_sum(w2);
  double rho_min = m.is_torus() ? 0.5 * std::sqrt(static_cast<double>(d)) : kPi;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      rho_min = std::min(rho_min, geodesic_distance(m, ps.nodes[i], ps.nodes[j]));
  const double t_lo = std::min(1e-6, rho_min * rho_min / 400.0);
  const double t_hi = 40.0;
  const double lg = log_gamma_fn(alpha);

  // E(t) at a time node, with the kernel tails.
  auto energy = [&](double t, double& tail, double& diag_part) {
    std::vector<double> rows(n), tails(n);
    const auto w0 = heat.eval(t, ps.nodes[0], ps.nodes[0]);
    parallel_for(n, [&](std::size_t i) {
      std::vector<double> terms, tl;
      for (std::size_t j = i + 1; j < n; ++j) {
        const auto v = heat.eval(t, ps.nodes[i], ps.nodes[j]);
        terms.push_back(2.0 * ps.weights[i] * ps.weights[j] * v.value);
        tl.push_back(2.0 * ps.weights[i] * ps.weights[j] * v.tail);
      }
      rows[i] = pairwise_sum(terms);
      tails[i] = pairwise_sum(tl);
    });
    diag_part = diag_mass * w0.value;
    tail = pairwise_sum(tails) + diag_mass * w0.tail;
    return diag_part + pairwise_sum(rows) - 1.0;
  };

  const auto& gl = gauss_legendre(16);
  const double u0 = std::log(t_lo), u1 = std::log(t_hi);
  const int panels = static_cast<int>(std::ceil((u1 - u0) / 0.75));
  const double hw = 0.5 * (u1 - u0) / panels;
  std::vector<double> terms, tail_terms;
  double prev = std::numeric_limits<double>::infinity();
  double e_last = 0.0;
  std::size_t nodes = 0;
  for (int p = 0; p < panels; ++p) {
    const double mid = u0 + (2 * p + 1) * hw;
    for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
      const double u = mid + hw * gl.nodes[q];
      const double t = std::exp(u);
      double tail = 0.0, diag_part = 0.0;
      const double e = energy(t, tail, diag_part);
      const double slack = 1e-11 * (1.0 + diag_part) + tail;
      if (e < -slack) throw InternalError("heat energy E(t) negative at t = " + std::to_string(t));
      if (e > prev + slack) throw InternalError("heat energy E(t) increasing at t = " + std::to_string(t));
      prev = e;
      e_last = e;
      // t^{alpha-1} e^{-t} dt = t^alpha e^{-t} du
      const double jac = std::exp(alpha * u - t - lg) * hw * gl.weights[q];
      terms.push_back(jac * e);
      tail_terms.push_back(jac * tail);
      ++nodes;
    }
  }
  // [0, t_lo]: diagonal by its leading small-time terms, the rest bounded.
  double low = 0.0, low_tail = 0.0;
  const double ga = std::exp(lg);
  if (m.is_torus()) {
    low = diag_mass * std::pow(4.0 * kPi, -0.5 * d) * lower_gamma(alpha - 0.5 * d, t_lo) / ga;
  } else {
    low = diag_mass * (lower_gamma(alpha - 1.0, t_lo) + lower_gamma(alpha, t_lo) / 3.0) / ga;
    low_tail += diag_mass * std::pow(t_lo, alpha + 1.0) / (15.0 * (alpha + 1.0)) * 1.01 / ga;
  }
  low -= lower_gamma(alpha, t_lo) / ga;
  // Off-diagonal pairs at distance >= rho_min; Gaussian factor e^{-rho^2/(4t)} <= e^{-100}.
  low_tail += (1.0 - diag_mass) * 1e3 * std::pow(t_lo, alpha - 0.5 * d - 0.5) *
              std::exp(-rho_min * rho_min / (4.0 * t_lo)) / ga;
  // [t_hi, inf): E nonincreasing.
  const double high_tail = std::max(0.0, e_last) * gamma_q(alpha, t_hi);

  WceReport r;
  r.method = WceMethod::Heat;
  r.value_sq = pairwise_sum(terms) + low;
  r.tail_bound = pairwise_sum(tail_terms) + low_tail + high_tail +
                 1e-14 * (1.0 + std::abs(r.value_sq));
  r.lower_sq = r.value_sq - r.tail_bound;
  r.upper_sq = r.value_sq + r.tail_bound;
  r.cutoff = t_lo;
  r.terms = nodes;
  (void)opt;
  return r;
}

}  // namespace

Eigen::VectorXd moment_vector(const PointSet& ps, const SpectrumSlice& s) {
  if (!(ps.manifold == s.manifold)) throw InvalidArgument("moment_vector: manifold mismatch");
  const Eigen::MatrixXd phi = basis_matrix(ps.manifold, s, ps.nodes);
  const Eigen::Map<const Eigen::VectorXd> w(ps.weights.data(), static_cast<Eigen::Index>(ps.size()));
  return phi * w;
}

std::vector<double> shell_moments(const PointSet& ps, const SpectrumSlice& s) {
  if (!(ps.manifold == s.manifold)) throw InvalidArgument("shell_moments: manifold mismatch");
  return ps.manifold.is_torus() ? torus_shells(ps, s) : sphere_shells(ps, s);
}

std::string method_name(WceMethod m) {
  switch (m) {
    case WceMethod::Spectral: return "spectral";
    case WceMethod::Kernel: return "kernel";
    case WceMethod::Heat: return "heat";
  }
  return "?";
}

WceMethod parse_method(const std::string& name) {
  if (name == "spectral") return WceMethod::Spectral;
  if (name == "kernel") return WceMethod::Kernel;
  if (name == "heat") return WceMethod::Heat;
  throw InvalidArgument("unknown WCE method '" + name + "' (spectral, kernel, heat)");
}

WceReport wce(const PointSet& ps, double alpha, WceMethod method, const WceOptions& opt) {
  ps.validate();
  check_wce_order(ps.manifold, alpha);
  if (!(opt.tol > 0.0)) throw InvalidArgument("tol must be positive");
  WceReport r;
  switch (method) {
    case WceMethod::Spectral: r = spectral_route(ps, alpha, opt); break;
    case WceMethod::Kernel: r = kernel_route(ps, alpha, opt); break;
    case WceMethod::Heat: r = heat_route(ps, alpha, opt); break;
  }
  r.alpha = alpha;
  r.n = ps.size();
  r.value = std::sqrt(std::max(0.0, r.value_sq));
  return r;
}

WceReport wce_auto(const PointSet& ps, double alpha) {
  WceOptions opt;
  opt.tol = 1e-16;
  auto s = wce(ps, alpha, WceMethod::Spectral, opt);
  if (s.tail_bound <= 1e-9 * s.value_sq) return s;
  return wce(ps, alpha, WceMethod::Kernel);
}

bool routes_agree(const std::vector<WceReport>& reports, double slack) {
  double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
  for (const auto& r : reports) {
    lo = std::max(lo, std::sqrt(std::max(0.0, r.lower_sq)) - slack);
    hi = std::min(hi, std::sqrt(std::max(0.0, r.upper_sq)) + slack);
  }
  return lo <= hi;
}

std::vector<double> spectral_partial_sums(const PointSet& ps, const std::vector<double>& orders,
                                          const SpectrumSlice& s) {
  const auto shells = shell_moments(ps, s);
  std::vector<double> out;
  for (double a : orders) out.push_back(weighted_sum(s, shells, a));
  return out;
}

// ---------------------------------------------------------------------------

QnormReport qnorm_energy(const PointSet& ps, double alpha, double q, std::size_t grid) {
  ps.validate();
  const Manifold& m = ps.manifold;
  const int d = m.dim;
  if (!(q >= 1.0)) throw InvalidArgument("q must lie in [1, inf]");
  const double need = std::isinf(q) ? d : d * (1.0 - 1.0 / q);
  if (!(alpha > need)) throw InvalidArgument("alpha must exceed d(1 - 1/q) = " + num(need));
  const std::size_t floor = m.is_torus() ? 8 : 64;
  if (grid < floor) throw InvalidArgument("grid must be at least " + std::to_string(floor));
  BesselKernel k(m, alpha);
  const bool shift = alpha <= d;

  auto grid_points = [&](std::size_t g) {
    std::vector<Point> pts;
    if (m.is_torus()) {
      std::size_t total = 1;
      for (int a = 0; a < d; ++a) total *= g;
      pts.resize(total);
      for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rem = idx;
        for (int a = 0; a < d; ++a) {
          pts[idx][a] = (static_cast<double>(rem % g) + (shift ? 0.5 : 0.0)) / static_cast<double>(g);
          rem /= g;
        }
      }
    } else {
      pts = fibonacci(g).nodes;
    }
    return pts;
  };
  auto norm_on = [&](std::size_t g) {
    const auto pts = grid_points(g);
    std::vector<double> vals(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) {
      std::vector<double> terms;
      for (std::size_t j = 0; j < ps.size(); ++j) terms.push_back(ps.weights[j] * k(ps.nodes[j], pts[i]));
      vals[i] = std::abs(pairwise_sum(terms) - 1.0);
    });
    if (std::isinf(q)) return *std::max_element(vals.begin(), vals.end());
    for (auto& v : vals) v = std::pow(v, q);
    return std::pow(pairwise_sum(vals) / static_cast<double>(vals.size()), 1.0 / q);
  };
  QnormReport r;
  r.alpha = alpha;
  r.q = q;
  r.grid = grid;
  r.value = norm_on(grid);
  r.coarse_grid = m.is_torus() ? std::max<std::size_t>(1, grid / 2) : std::max<std::size_t>(1, grid / 4);
  r.coarse_value = norm_on(r.coarse_grid);
  r.refinement_delta = std::abs(r.value - r.coarse_value);
  return r;
}

// ---------------------------------------------------------------------------

TransferReport alpha_transfer_check(const PointSet& ps, double alpha, double beta) {
  ps.validate();
  const int d = ps.manifold.dim;
  if (!(beta > 0.5 * d && beta <= alpha))
    throw InvalidArgument("beta must lie in (d/2, alpha]");
  TransferReport r;
  r.alpha = alpha;
  r.beta = beta;
  r.wce_alpha = wce_auto(ps, alpha).value;
  r.wce_beta = beta == alpha ? r.wce_alpha : wce_auto(ps, beta).value;
  WceOptions opt;
  opt.basis_budget = 100'000;
  const auto plan = plan_spectral(ps.manifold, beta, opt);
  const auto sums = spectral_partial_sums(ps, {alpha, beta}, plan.slice);
  r.partial_alpha = sums[0];
  r.partial_beta = sums[1];
  r.monotone = r.partial_beta >= r.partial_alpha;
  if (!r.monotone) throw InternalError("spectral partial sums not monotone in alpha");
  r.r_equiv = std::pow(r.wce_alpha, -1.0 / alpha);
  r.constant = r.wce_beta * std::pow(r.r_equiv, beta);
  return r;
}

PointSet perturb_node(const PointSet& ps, std::size_t index, double delta) {
  if (index >= ps.size()) throw InvalidArgument("perturb_node: index out of range");
  PointSet out = ps;
  Point& p = out.nodes[index];
  if (ps.manifold.is_torus()) {
    double x = p[0] + delta;
    x -= std::floor(x);
    if (x >= 1.0) x = 0.0;
    p[0] = x;
  } else {
    // Tangent direction: e_z projected, or e_x near the poles.
    std::array<double, 3> e{0.0, 0.0, 1.0};
    if (std::abs(p[2]) > 0.9) e = {1.0, 0.0, 0.0};
    const double dot = e[0] * p[0] + e[1] * p[1] + e[2] * p[2];
    std::array<double, 3> v;
    double len = 0.0;
    for (int a = 0; a < 3; ++a) {
      v[a] = e[a] - dot * p[a];
      len += v[a] * v[a];
    }
    len = std::sqrt(len);
    Point q;
    for (int a = 0; a < 3; ++a) q[a] = std::cos(delta) * p[a] + std::sin(delta) * v[a] / len;
    const double nq = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2]);
    for (int a = 0; a < 3; ++a) q[a] /= nq;
    p = q;
  }
  out.provenance["perturbed"] = {{"index", index}, {"delta", delta}};
  return out;
}

PerturbReport perturbation_experiment(const PointSet& ps, double alpha, double beta, double r) {
  ps.validate();
  const int d = ps.manifold.dim;
  if (!(alpha > 0.5 * d && beta > alpha)) throw InvalidArgument("need beta > alpha > d/2");
  if (!(r > 0.0)) throw InvalidArgument("band r must be positive");
  PerturbReport rep;
  rep.alpha = alpha;
  rep.beta = beta;
  rep.r = r;
  const double cap = ps.manifold.is_torus() ? 0.25 : 0.5 * kPi;
  const double w = ps.weights.back();
  const double want = w > 0.0 ? std::pow(r, -alpha) / w : cap;
  rep.delta = std::min(cap, want);
  rep.clamped = want > cap;
  const PointSet moved = perturb_node(ps, ps.size() - 1, rep.delta);
  rep.wce_alpha = wce_auto(moved, alpha).value;
  rep.wce_beta = wce_auto(moved, beta).value;
  rep.base_alpha = wce_auto(ps, alpha).value;
  rep.base_beta = wce_auto(ps, beta).value;
  return rep;
}

ScalingResult scaling_fit(const std::vector<double>& abscissa, const std::vector<double>& values) {
  if (abscissa.size() != values.size()) throw InvalidArgument("scaling_fit: size mismatch");
  if (abscissa.size() < 3) throw InvalidArgument("scaling_fit needs at least 3 points");
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!(values[i] > 0.0) || !(abscissa[i] > 0.0))
      throw InvalidArgument("scaling_fit needs positive abscissae and values");
  const std::size_t n = values.size();
  double mx = 0.0, my = 0.0;
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    lx[i] = std::log(abscissa[i]);
    ly[i] = std::log(values[i]);
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("scaling_fit needs distinct abscissae");
  ScalingResult r;
  r.abscissa = abscissa;
  r.values = values;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = ly[i] - r.intercept - r.slope * lx[i];
    ssr += e * e;
  }
  r.slope_se = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
  if (!std::isfinite(r.slope)) throw InternalError("non-finite slope");
  return r;
}

double jitter_expectation(const Manifold& m, std::size_t n, double alpha) {
  if (!m.is_torus()) throw InvalidArgument("jitter_expectation uses the torus cube partition");
  const int d = m.dim;
  if (d > 2) throw InvalidArgument("jitter_expectation supports d <= 2");
  const auto per = static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(n), 1.0 / d)));
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= per;
  if (total != n || n == 0) throw InvalidArgument("N must be a perfect d-th power");
  if (!(2.0 * alpha > d)) throw InvalidArgument("alpha must exceed d/2");
  BesselKernel k(m, 2.0 * alpha);
  const double w = 1.0 / static_cast<double>(per);
  // int_{[-w,w]^d} prod (w - |u_a|) gap(u) du = 2^d int_{[0,w]^d} ..., panels graded toward 0.
  const auto& gl = gauss_legendre(16);
  std::vector<double> xs, ws;
  for (int p = 0; p < 40; ++p) {
    const double hi = w * std::ldexp(1.0, -p), lo = 0.5 * hi;
    for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
      const double x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gl.nodes[q];
      xs.push_back(x);
      ws.push_back(0.5 * (hi - lo) * gl.weights[q] * (w - x));
    }
  }
  const Point origin{};
  std::vector<double> terms;
  if (d == 1) {
    for (std::size_t i = 0; i < xs.size(); ++i)
      terms.push_back(ws[i] * k.gap(origin, Point{{xs[i], 0.0, 0.0}}).value);
  } else {
    std::vector<double> rows(xs.size());
    parallel_for(xs.size(), [&](std::size_t i) {
      std::vector<double> t;
      for (std::size_t j = 0; j < xs.size(); ++j)
        t.push_back(ws[i] * ws[j] * k.gap(origin, Point{{xs[i], xs[j], 0.0}}).value);
      rows[i] = pairwise_sum(t);
    });
    terms = rows;
  }
  return static_cast<double>(n) * std::ldexp(1.0, d) * pairwise_sum(terms);
}

}  // namespace quadm
