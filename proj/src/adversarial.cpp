#include <algorithm>
#include <cmath>
#include <complex>

#include <unsupported/Eigen/FFT>

#include "quadm/analysis.hpp"
#include "quadm/error.hpp"
#include "quadm/special.hpp"

namespace quadm {

namespace {

constexpr std::size_t kMaxGrid = std::size_t{1} << 24;

double bump_integral() {
  static const double value = [] {
    const auto& gl = gauss_legendre(16);
    double s = 0.0;
    const int panels = 256;
    for (int p = 0; p < panels; ++p) {
      const double lo = -1.0 + 2.0 * p / panels, hi = lo + 2.0 / panels;
      for (std::size_t q = 0; q < gl.nodes.size(); ++q)
        s += 0.5 * (hi - lo) * gl.weights[q] * bump(0.5 * (lo + hi) + 0.5 * (hi - lo) * gl.nodes[q]);
    }
    return s;
  }();
  return value;
}

void fft_axis(std::vector<std::complex<double>>& f, std::size_t m, int d, int axis) {
  Eigen::FFT<double> fft;
  std::size_t stride = 1;
  for (int a = 0; a < axis; ++a) stride *= m;
  const std::size_t total = f.size();
  std::vector<std::complex<double>> in(m), out(m);
  for (std::size_t base = 0; base < total; ++base) {
    if ((base / stride) % m != 0) continue;
    for (std::size_t l = 0; l < m; ++l) in[l] = f[base + l * stride];
    fft.fwd(out, in);
    for (std::size_t l = 0; l < m; ++l) f[base + l * stride] = out[l];
  }
  (void)d;
}

// ||f||_{W^{alpha,2}} from f sampled on an m^d grid.
double sobolev_norm(const std::vector<Point>& centers, double h, int d, std::size_t m, double alpha,
                    double scale) {
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= m;
  std::vector<std::complex<double>> f(total, {0.0, 0.0});
  const double md = static_cast<double>(m);
  for (const auto& c : centers) {
    std::array<std::vector<std::pair<std::size_t, double>>, 3> axis;
    for (int a = 0; a < d; ++a) {
      const long lo = static_cast<long>(std::ceil((c[a] - h) * md));
      const long hi = static_cast<long>(std::floor((c[a] + h) * md));
      for (long l = lo; l <= hi; ++l) {
        const double v = bump((static_cast<double>(l) / md - c[a]) / h) / (h * bump_integral());
        if (v == 0.0) continue;
        const long w = ((l % static_cast<long>(m)) + static_cast<long>(m)) % static_cast<long>(m);
        axis[a].push_back({static_cast<std::size_t>(w), v});
      }
    }
    if (d == 1) {
      for (const auto& [i, v] : axis[0]) f[i] += scale * v;
    } else if (d == 2) {
      for (const auto& [i, v] : axis[0])
        for (const auto& [j, u] : axis[1]) f[i + m * j] += scale * v * u;
    } else {
      for (const auto& [i, v] : axis[0])
        for (const auto& [j, u] : axis[1])
          for (const auto& [k, t] : axis[2]) f[i + m * (j + m * k)] += scale * v * u * t;
    }
  }
  for (int a = 0; a < d; ++a) fft_axis(f, m, d, a);
  std::vector<double> terms(total);
  const double norm = 1.0 / static_cast<double>(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    double k2 = 0.0;
    for (int a = 0; a < d; ++a) {
      const auto l = static_cast<long>(rem % m);
      const long k = l < static_cast<long>(m / 2) ? l : l - static_cast<long>(m);
      k2 += static_cast<double>(k) * static_cast<double>(k);
      rem /= m;
    }
    terms[idx] = std::pow(1.0 + 4.0 * kPi * kPi * k2, alpha) * std::norm(f[idx] * norm);
  }
  return std::sqrt(pairwise_sum(terms));
}

}  // namespace

AdversarialReport adversarial_bound(const PointSet& ps, double alpha, double eps, std::uint64_t seed) {
  ps.validate();
  const Manifold& m = ps.manifold;
  if (!m.is_torus()) throw InvalidArgument("adversarial_bound needs a torus");
  const int d = m.dim;
  if (!(alpha > 0.5 * d)) throw InvalidArgument("alpha must exceed d/2");
  if (!(eps > 0.0 && eps <= 0.25)) throw InvalidArgument("eps must lie in (0, 1/4]");
  const std::size_t n = ps.size();
  const double nd = static_cast<double>(n);
  const double radius = eps * std::pow(nd, -1.0 / d);
  const double h = radius / std::sqrt(static_cast<double>(d));
  const auto per = static_cast<std::size_t>(std::ceil(std::pow(2.0 * nd, 1.0 / d) - 1e-9));
  if (2.0 * h > 1.0 / static_cast<double>(per) + 1e-15) throw InternalError("candidate balls overlap");
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= per;

  AdversarialReport rep;
  rep.radius = radius;
  std::vector<Point> kept;
  Rng rng(seed, 0x61647672);
  std::array<double, 3> shift{0.5, 0.5, 0.5};
  for (int attempt = 0; attempt < 8; ++attempt) {
    ++rep.shifts_tried;
    if (attempt > 0)
      for (int a = 0; a < d; ++a) shift[a] = rng.uniform();
    kept.clear();
    for (std::size_t idx = 0; idx < total && kept.size() < n; ++idx) {
      Point c;
      std::size_t rem = idx;
      for (int a = 0; a < d; ++a) {
        c[a] = std::fmod((static_cast<double>(rem % per) + shift[a]) / static_cast<double>(per), 1.0);
        rem /= per;
      }
      bool empty = true;
      for (const auto& z : ps.nodes)
        if (geodesic_distance(m, c, z) < radius) {
          empty = false;
          break;
        }
      if (empty) kept.push_back(c);
    }
    if (kept.size() == n) break;
  }
  if (kept.size() < n)
    throw InfeasibleError("only " + std::to_string(kept.size()) + " of " + std::to_string(n) +
                              " node-free balls found after " + std::to_string(rep.shifts_tried) +
                              " lattice shifts",
                          static_cast<double>(kept.size()));
  rep.balls = kept.size();

  // f vanishes at every node and has integral 1.
  rep.error = 1.0;
  const double scale = 1.0 / nd;
  std::size_t grid = 1;
  while (static_cast<double>(grid) * h < 32.0) grid *= 2;
  double prev = sobolev_norm(kept, h, d, grid, alpha, scale);
  for (;;) {
    std::size_t next = grid * 2, cells = 1;
    for (int a = 0; a < d; ++a) cells *= next;
    if (cells > kMaxGrid)
      throw ResourceError("adversarial norm grid exceeds 2^24 points", rep.aliasing_delta);
    const double cur = sobolev_norm(kept, h, d, next, alpha, scale);
    rep.aliasing_delta = std::abs(cur - prev) / cur;
    grid = next;
    prev = cur;
    if (rep.aliasing_delta < 1e-6) break;
  }
  rep.grid = grid;
  rep.sobolev_norm = prev;
  rep.ratio = rep.error / rep.sobolev_norm;
  return rep;
}

}  // namespace quadm
