#include "quadm/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "quadm/error.hpp"
#include "quadm/parallel.hpp"
#include "quadm/special.hpp"

namespace quadm {

Manifold Manifold::torus(int d) {
  if (d < 1 || d > 3) throw InvalidArgument("torus dimension must be 1, 2 or 3");
  return Manifold{Kind::Torus, d};
}

Manifold Manifold::sphere() { return Manifold{Kind::Sphere, 2}; }

std::string Manifold::name() const {
  return (is_torus() ? "torus:" : "sphere:") + std::to_string(dim);
}

Manifold Manifold::parse(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  int d = 0;
  if (colon != std::string::npos) {
    try {
      d = std::stoi(spec.substr(colon + 1));
    } catch (const std::exception&) {
      throw InvalidArgument("manifold: bad dimension in '" + spec + "'");
    }
  }
  if (kind == "torus") return torus(colon == std::string::npos ? 1 : d);
  if (kind == "sphere") {
    if (colon != std::string::npos && d != 2)
      throw InvalidArgument("manifold: only the sphere S^2 is supported");
    return sphere();
  }
  throw InvalidArgument("manifold: expected torus:<d> or sphere:2, got '" + spec + "'");
}

Point make_point(const Manifold& m, std::span<const double> coords) {
  if (static_cast<int>(coords.size()) != m.coords())
    throw InvalidArgument("point has " + std::to_string(coords.size()) +
                          " coordinates, manifold " + m.name() + " needs " +
                          std::to_string(m.coords()));
  Point p;
  if (m.is_torus()) {
    for (int i = 0; i < m.dim; ++i) {
      if (!std::isfinite(coords[i])) throw InvalidArgument("non-finite torus coordinate");
      double v = coords[i] - std::floor(coords[i]);
      if (v >= 1.0) v = 0.0;
      p[i] = v;
    }
    return p;
  }
  const double n2 = coords[0] * coords[0] + coords[1] * coords[1] + coords[2] * coords[2];
  const double n = std::sqrt(n2);
  if (!std::isfinite(n) || std::abs(n - 1.0) > 1e-9)
    throw InvalidArgument("sphere point is not a unit vector (|x| = " + std::to_string(n) + ")");
  for (int i = 0; i < 3; ++i) p[i] = coords[i] / n;
  return p;
}

void validate_point(const Manifold& m, const Point& p) {
  if (m.is_torus()) {
    for (int i = 0; i < m.dim; ++i)
      if (!(p[i] >= 0.0 && p[i] < 1.0))
        throw InvalidArgument("torus coordinate outside [0,1)");
    return;
  }
  const double n = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
  if (!(std::abs(n - 1.0) <= 1e-12))
    throw InvalidArgument("sphere point is not a unit vector within 1e-12");
}

std::array<double, 3> torus_delta(int d, const Point& x, const Point& y) {
  std::array<double, 3> out{0.0, 0.0, 0.0};
  for (int i = 0; i < d; ++i) {
    double v = x[i] - y[i];
    v -= std::nearbyint(v);
    out[static_cast<std::size_t>(i)] = v;
  }
  return out;
}

double geodesic_distance(const Manifold& m, const Point& x, const Point& y) {
  validate_point(m, x);
  validate_point(m, y);
  if (m.is_torus()) {
    const auto dl = torus_delta(m.dim, x, y);
    double s = 0.0;
    for (int i = 0; i < m.dim; ++i) s += dl[i] * dl[i];
    return std::sqrt(s);
  }
  // atan2 form of arccos(<x,y>): same angle, accurate near 0 and pi.
  const double c = x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
  const double cx = x[1] * y[2] - x[2] * y[1];
  const double cy = x[2] * y[0] - x[0] * y[2];
  const double cz = x[0] * y[1] - x[1] * y[0];
  return std::atan2(std::sqrt(cx * cx + cy * cy + cz * cz), c);
}

Rng::Rng(std::uint64_t seed, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32),
                    0x9e3779b9u};
  engine_.seed(seq);
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

Point random_point(const Manifold& m, Rng& rng) {
  Point p;
  if (m.is_torus()) {
    for (int i = 0; i < m.dim; ++i) p[i] = rng.uniform();
    return p;
  }
  // Archimedes: z uniform on [-1,1], longitude uniform.
  const double z = 2.0 * rng.uniform() - 1.0;
  const double phi = kTwoPi * rng.uniform();
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  p[0] = s * std::cos(phi);
  p[1] = s * std::sin(phi);
  p[2] = z;
  return p;
}

std::vector<Point> uniform_sample(const Manifold& m, std::size_t n, std::uint64_t seed,
                                  std::uint64_t tag) {
  if (n < 1) throw InvalidArgument("uniform_sample: n must be at least 1");
  Rng rng(seed, tag);
  std::vector<Point> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_point(m, rng));
  return out;
}

// ---------------------------------------------------------------------------

namespace {

double sphere_colatitude(const Point& p) {
  return std::atan2(std::sqrt(p[0] * p[0] + p[1] * p[1]), p[2]);
}

double sphere_longitude(const Point& p) {
  double phi = std::atan2(p[1], p[0]);
  if (phi < 0.0) phi += kTwoPi;
  if (phi >= kTwoPi) phi = 0.0;
  return phi;
}

Point sphere_from_angles(double theta, double phi) {
  Point p;
  p[0] = std::sin(theta) * std::cos(phi);
  p[1] = std::sin(theta) * std::sin(phi);
  p[2] = std::cos(theta);
  return p;
}

double max_sin_on(double a, double b) {
  if (a <= kPi / 2 && b >= kPi / 2) return 1.0;
  return std::max(std::sin(a), std::sin(b));
}

Partition torus_partition(const Manifold& m, std::size_t count) {
  const int d = m.dim;
  const auto n = static_cast<std::size_t>(std::llround(std::pow(double(count), 1.0 / d)));
  std::size_t pw = 1;
  for (int i = 0; i < d; ++i) pw *= n;
  if (n < 1 || pw != count)
    throw InvalidArgument("N must be a perfect d-th power for the torus cube partition (N = " +
                          std::to_string(count) + ", d = " + std::to_string(d) + ")");
  Partition part;
  part.manifold = m;
  part.per_axis = static_cast<int>(n);
  const double side = 1.0 / static_cast<double>(n);
  const double diam = std::min(std::sqrt(double(d)) * side, std::sqrt(double(d)) / 2.0);
  part.cells.reserve(count);
  for (std::size_t idx = 0; idx < count; ++idx) {
    Cell c;
    std::size_t rem = idx;
    for (int a = 0; a < d; ++a) {
      const std::size_t j = rem % n;
      rem /= n;
      c.lo[a] = static_cast<double>(j) * side;
      c.hi[a] = static_cast<double>(j + 1) * side;
      c.representative[a] = (static_cast<double>(j) + 0.5) * side;
    }
    c.measure = std::pow(side, d);
    c.diameter = diam;
    part.cells.push_back(c);
  }
  part.diameter_constant = diam * std::pow(double(count), 1.0 / d);
  return part;
}

Partition sphere_partition(const Manifold& m, std::size_t count) {
  Partition part;
  part.manifold = m;
  const double N = static_cast<double>(count);
  // Polar caps of measure 1/N, then collars holding whole numbers of regions.
  std::vector<int> counts;
  if (count == 1) {
    counts = {1};
  } else if (count == 2) {
    counts = {1, 1};
  } else {
    const double theta_c = std::acos(1.0 - 2.0 / N);
    const double area = 4.0 * kPi / N;
    const double ideal_angle = std::sqrt(area);
    const int n_collars =
        std::max(1, static_cast<int>(std::lround((kPi - 2.0 * theta_c) / ideal_angle)));
    const double fit_angle = (kPi - 2.0 * theta_c) / n_collars;
    auto cap_area = [](double th) { return kTwoPi * (1.0 - std::cos(th)); };
    counts.push_back(1);
    double carry = 0.0;
    int total = 0;
    for (int i = 1; i <= n_collars; ++i) {
      const double ideal =
          (cap_area(theta_c + i * fit_angle) - cap_area(theta_c + (i - 1) * fit_angle)) / area;
      int mi = static_cast<int>(std::lround(ideal + carry));
      carry += ideal - mi;
      if (i == n_collars) mi = static_cast<int>(count) - 2 - total;
      total += mi;
      if (mi > 0) counts.push_back(mi);
    }
    counts.push_back(1);
  }
  // Boundaries from cumulative counts: every region has measure exactly 1/N.
  part.collar_theta.push_back(0.0);
  int cumulative = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    part.collar_first.push_back(cumulative);
    cumulative += counts[i];
    const double z = 1.0 - 2.0 * cumulative / N;
    part.collar_theta.push_back(i + 1 == counts.size() ? kPi : std::acos(std::clamp(z, -1.0, 1.0)));
  }
  part.collar_count = counts;
  double max_diam = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double t0 = part.collar_theta[i], t1 = part.collar_theta[i + 1];
    const double width = kTwoPi / counts[i];
    const double z0 = i == 0 ? 1.0 : 1.0 - 2.0 * part.collar_first[i] / N;
    const double z1 = i + 1 == counts.size() ? -1.0 : 1.0 - 2.0 * (part.collar_first[i] + counts[i]) / N;
    for (int j = 0; j < counts[i]; ++j) {
      Cell c;
      c.lo = {t0, j * width, 0.0};
      c.hi = {t1, (j + 1) * width, 0.0};
      c.measure = (z0 - z1) / 2.0 / counts[i];
      if (counts[i] == 1 && (t0 == 0.0 || t1 == kPi)) {
        const double radius = t0 == 0.0 ? t1 : kPi - t0;
        c.diameter = std::min(2.0 * radius, kPi);
        c.representative = sphere_from_angles(t0 == 0.0 ? 0.0 : kPi, 0.0);
        if (t0 == 0.0 && t1 == kPi) c.diameter = kPi;
      } else {
        c.diameter = std::min(kPi, (t1 - t0) + max_sin_on(t0, t1) * std::min(width, kPi));
        c.representative = sphere_from_angles(0.5 * (t0 + t1), (j + 0.5) * width);
      }
      max_diam = std::max(max_diam, c.diameter);
      part.cells.push_back(c);
    }
  }
  part.diameter_constant = max_diam * std::sqrt(N);
  return part;
}

}  // namespace

Partition equal_measure_partition(const Manifold& m, std::size_t n) {
  if (n < 1) throw InvalidArgument("partition: N must be at least 1");
  return m.is_torus() ? torus_partition(m, n) : sphere_partition(m, n);
}

std::size_t Partition::locate(const Point& p) const {
  if (manifold.is_torus()) {
    std::size_t idx = 0, stride = 1;
    for (int a = 0; a < manifold.dim; ++a) {
      auto j = static_cast<std::size_t>(std::floor(p[a] * per_axis));
      j = std::min<std::size_t>(j, static_cast<std::size_t>(per_axis - 1));
      idx += j * stride;
      stride *= static_cast<std::size_t>(per_axis);
    }
    return idx;
  }
  const double theta = sphere_colatitude(p);
  auto it = std::upper_bound(collar_theta.begin() + 1, collar_theta.end() - 1, theta);
  const auto collar = static_cast<std::size_t>(it - (collar_theta.begin() + 1));
  const int cnt = collar_count[collar];
  auto j = static_cast<int>(std::floor(sphere_longitude(p) / (kTwoPi / cnt)));
  j = std::clamp(j, 0, cnt - 1);
  return static_cast<std::size_t>(collar_first[collar] + j);
}

Point Partition::sample_in(std::size_t cell, Rng& rng) const {
  const Cell& c = cells.at(cell);
  Point p;
  if (manifold.is_torus()) {
    for (int a = 0; a < manifold.dim; ++a) {
      double v = c.lo[a] + (c.hi[a] - c.lo[a]) * rng.uniform();
      if (v >= c.hi[a]) v = c.lo[a];
      p[a] = v >= 1.0 ? 0.0 : v;
    }
    return p;
  }
  const double z0 = std::cos(c.lo[0]), z1 = std::cos(c.hi[0]);
  const double z = z1 + (z0 - z1) * rng.uniform();
  const double phi = c.lo[1] + (c.hi[1] - c.lo[1]) * rng.uniform();
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  p[0] = s * std::cos(phi);
  p[1] = s * std::sin(phi);
  p[2] = z;
  return p;
}

// ---------------------------------------------------------------------------

std::vector<double> SpectrumSlice::lambdas() const {
  std::vector<double> out;
  out.reserve(basis_size);
  for (const auto& s : shells)
    for (int i = 0; i < s.multiplicity; ++i) out.push_back(s.lambda);
  return out;
}

std::vector<double> SpectrumSlice::basis_lambdas() const { return lambdas(); }

std::vector<std::size_t> SpectrumSlice::basis_shell() const {
  std::vector<std::size_t> out;
  out.reserve(basis_size);
  for (std::size_t i = 0; i < shells.size(); ++i)
    for (int j = 0; j < shells[i].multiplicity; ++j) out.push_back(i);
  return out;
}

int SpectrumSlice::max_index() const {
  int best = 0;
  for (const auto& s : shells) {
    if (manifold.is_sphere()) {
      best = std::max(best, static_cast<int>(s.key));
    } else {
      for (const auto& k : s.reps)
        for (int a = 0; a < 3; ++a) best = std::max(best, std::abs(k[a]));
    }
  }
  return best;
}

SpectrumSlice spectrum_below_sq(const Manifold& m, double r2, std::size_t budget) {
  if (!(r2 > 0.0) || !std::isfinite(r2)) throw InvalidArgument("spectrum_below: r must be > 0");
  SpectrumSlice s;
  s.manifold = m;
  s.cutoff_sq = r2;
  s.cutoff = std::sqrt(r2);
  if (m.is_sphere()) {
    // lambda^2 = n(n+1) < r^2.
    std::size_t total = 0;
    for (long n = 0; static_cast<double>(n) * (n + 1) < r2; ++n) {
      total += static_cast<std::size_t>(2 * n + 1);
      if (total > budget)
        throw ResourceError("spectrum_below: slice exceeds basis budget", double(total));
      Shell sh;
      sh.key = n;
      sh.lambda = std::sqrt(static_cast<double>(n) * (n + 1));
      sh.multiplicity = static_cast<int>(2 * n + 1);
      s.shells.push_back(std::move(sh));
    }
    s.basis_size = total;
    return s;
  }
  const int d = m.dim;
  const double kr = std::sqrt(r2) / kTwoPi;
  const int kmax = static_cast<int>(std::floor(kr));
  const double est = std::pow(2.0 * kr + 1.0, d);
  if (est > 8.0 * static_cast<double>(budget) + 64.0)
    throw ResourceError("spectrum_below: slice exceeds basis budget", est);
  std::map<long, Shell> shells;
  std::size_t total = 0;
  std::array<int, 3> k{0, 0, 0};
  const int span = 2 * kmax + 1;
  long box = 1;
  for (int a = 0; a < d; ++a) box *= span;
  for (long idx = 0; idx < box; ++idx) {
    long rem = idx;
    long k2 = 0;
    for (int a = 0; a < d; ++a) {
      k[a] = static_cast<int>(rem % span) - kmax;
      rem /= span;
      k2 += static_cast<long>(k[a]) * k[a];
    }
    const double lam2 = 4.0 * kPi * kPi * static_cast<double>(k2);
    if (!(lam2 < r2)) continue;
    Shell& sh = shells[k2];
    sh.key = k2;
    sh.lambda = kTwoPi * std::sqrt(static_cast<double>(k2));
    sh.multiplicity += 1;
    ++total;
    int first = 0;
    for (int a = 0; a < d; ++a)
      if (k[a] != 0) {
        first = k[a];
        break;
      }
    if (first > 0) sh.reps.push_back(k);
  }
  if (total > budget) throw ResourceError("spectrum_below: slice exceeds basis budget", double(total));
  for (auto& [key, sh] : shells) {
    if (key == 0) sh.reps = {std::array<int, 3>{0, 0, 0}};
    std::sort(sh.reps.begin(), sh.reps.end());
    s.shells.push_back(std::move(sh));
  }
  s.basis_size = total;
  return s;
}

SpectrumSlice spectrum_below(const Manifold& m, double r, std::size_t budget) {
  if (!(r > 0.0)) throw InvalidArgument("spectrum_below: r must be > 0");
  return spectrum_below_sq(m, r * r, budget);
}

double zonal_eval(int n, double t) {
  if (n < 0) throw InvalidArgument("zonal_eval: degree must be >= 0");
  if (!(std::abs(t) <= 1.0 + 1e-12)) throw InvalidArgument("zonal_eval: t outside [-1, 1]");
  t = std::clamp(t, -1.0, 1.0);
  return (2.0 * n + 1.0) * legendre(n, t);
}

void real_harmonics(int L, const Point& x, std::span<double> out) {
  const double ct = std::clamp(x[2], -1.0, 1.0);
  const double st = std::sqrt(x[0] * x[0] + x[1] * x[1]);
  const double phi = std::atan2(x[1], x[0]);
  // q[n][m] = sqrt((n-m)!/(n+m)!) P_n^m(cos theta), computed column by column.
  std::vector<double> cosm(L + 1), sinm(L + 1);
  for (int m = 0; m <= L; ++m) {
    cosm[m] = std::cos(m * phi);
    sinm[m] = std::sin(m * phi);
  }
  auto slot = [](int n, int m, int part) { return n * n + (m == 0 ? 0 : 2 * m - 1 + part); };
  double qmm = 1.0;
  for (int m = 0; m <= L; ++m) {
    if (m > 0) qmm *= st * std::sqrt((2.0 * m - 1.0) / (2.0 * m));
    double q_prev = 0.0, q_cur = qmm;
    for (int n = m; n <= L; ++n) {
      if (n > m) {
        double q_next;
        if (n == m + 1) {
          q_next = std::sqrt(2.0 * m + 1.0) * ct * q_cur;
        } else {
          q_next = ((2.0 * n - 1.0) * ct * q_cur -
                    std::sqrt(double(n + m - 1) * double(n - m - 1)) * q_prev) /
                   std::sqrt(double(n - m) * double(n + m));
        }
        q_prev = q_cur;
        q_cur = q_next;
      }
      const double norm = std::sqrt(2.0 * n + 1.0);
      if (m == 0) {
        out[slot(n, 0, 0)] = norm * q_cur;
      } else {
        out[slot(n, m, 0)] = std::sqrt(2.0) * norm * q_cur * cosm[m];
        out[slot(n, m, 1)] = std::sqrt(2.0) * norm * q_cur * sinm[m];
      }
    }
  }
}

namespace {

void torus_basis_into(const SpectrumSlice& s, const Point& x, double* out) {
  std::size_t i = 0;
  for (const auto& sh : s.shells) {
    if (sh.key == 0) {
      out[i++] = 1.0;
      continue;
    }
    for (const auto& k : sh.reps) {
      const double arg = kTwoPi * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2]);
      out[i++] = std::sqrt(2.0) * std::cos(arg);
      out[i++] = std::sqrt(2.0) * std::sin(arg);
    }
  }
}

}  // namespace

std::vector<double> eval_basis(const Manifold& m, const SpectrumSlice& s, const Point& x) {
  std::vector<double> out(s.basis_size);
  if (m.is_torus()) {
    torus_basis_into(s, x, out.data());
  } else if (!s.shells.empty()) {
    real_harmonics(static_cast<int>(s.shells.back().key), x, out);
  }
  return out;
}

Eigen::MatrixXd basis_matrix(const Manifold& m, const SpectrumSlice& s,
                             std::span<const Point> points) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(s.basis_size),
                      static_cast<Eigen::Index>(points.size()));
  const int L = s.shells.empty() ? 0 : static_cast<int>(s.shells.back().key);
  parallel_for(points.size(), [&](std::size_t j) {
    double* col = out.col(static_cast<Eigen::Index>(j)).data();
    if (m.is_torus()) {
      torus_basis_into(s, points[j], col);
    } else {
      real_harmonics(L, points[j], std::span<double>(col, s.basis_size));
    }
  });
  return out;
}

}  // namespace quadm
