#include "quadm/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <tuple>

#include "kernel_detail.hpp"
#include "quadm/error.hpp"
#include "quadm/special.hpp"

namespace quadm {

// ---------------------------------------------------------------------------
// KernelJob

KernelJob KernelJob::bessel(double alpha, double tol) {
  KernelJob j;
  j.kind = KernelKind::Bessel;
  j.alpha = alpha;
  j.tolerance = tol;
  return j;
}

KernelJob KernelJob::heat(double t, double tol) {
  KernelJob j;
  j.kind = KernelKind::Heat;
  j.time = t;
  j.tolerance = tol;
  return j;
}

KernelJob KernelJob::lp_piece(double alpha, double r) {
  KernelJob j;
  j.kind = KernelKind::LpPiece;
  j.alpha = alpha;
  j.scale = r;
  return j;
}

void KernelJob::validate() const {
  if (!(tolerance > 0.0)) throw InvalidArgument("kernel tolerance must be positive");
  if (max_terms == 0) throw InvalidArgument("kernel term budget must be positive");
  switch (kind) {
    case KernelKind::Bessel:
      if (!(alpha > 0.0)) throw InvalidArgument("Bessel order must be positive");
      break;
    case KernelKind::Heat:
      if (!(time > 0.0)) throw InvalidArgument("heat time must be positive");
      break;
    case KernelKind::LpPiece:
      if (!(alpha > 0.0)) throw InvalidArgument("LP piece order must be positive");
      if (!(scale > 0.0)) throw InvalidArgument("LP piece scale must be positive");
      break;
  }
}

KernelValue evaluate(const Manifold& m, const KernelJob& job, const Point& x, const Point& y) {
  job.validate();
  switch (job.kind) {
    case KernelKind::Bessel: {
      BesselKernel k(m, job.alpha, job.tolerance);
      return k.eval(x, y);
    }
    case KernelKind::Heat: {
      HeatKernel h(m, job.tolerance);
      return h.eval(job.time, x, y);
    }
    case KernelKind::LpPiece:
      return {lp_piece_eval(m, job.alpha, job.scale, x, y), 0.0};
  }
  throw InternalError("unknown kernel kind");
}

SpherePair sphere_pair(const Point& x, const Point& y) {
  double dot = 0.0, chord2 = 0.0;
  for (int i = 0; i < 3; ++i) {
    dot += x[i] * y[i];
    const double d = x[i] - y[i];
    chord2 += d * d;
  }
  const double omt = std::clamp(0.5 * chord2, 0.0, 2.0);
  return {std::clamp(dot, -1.0, 1.0), omt};
}

namespace {

// Per-axis absolute displacement; every torus kernel here is even in each
// coordinate separately, which makes evaluation symmetric in (x, y) bit for bit.
std::array<double, 3> abs_delta(int d, const Point& x, const Point& y, std::array<double, 3>* sign) {
  auto delta = torus_delta(d, x, y);
  for (int a = 0; a < 3; ++a) {
    if (sign) (*sign)[a] = delta[a] < 0.0 ? -1.0 : 1.0;
    delta[a] = std::abs(delta[a]);
  }
  return delta;
}

}  // namespace

// ---------------------------------------------------------------------------
// BesselKernel

struct BesselKernel::Impl {
  std::optional<detail::TorusBessel> torus;
  std::optional<detail::SphereBessel> sphere;
};

BesselKernel::BesselKernel(const Manifold& m, double order, double tol)
    : manifold_(m), order_(order), impl_(std::make_unique<Impl>()) {
  if (!(order > 0.0)) throw InvalidArgument("Bessel order must be positive");
  if (!(tol > 0.0)) throw InvalidArgument("kernel tolerance must be positive");
  if (m.is_torus())
    impl_->torus.emplace(m.dim, order, tol);
  else
    impl_->sphere.emplace(order, tol);
}

BesselKernel::~BesselKernel() = default;
BesselKernel::BesselKernel(BesselKernel&&) noexcept = default;
BesselKernel& BesselKernel::operator=(BesselKernel&&) noexcept = default;

KernelValue BesselKernel::eval(const Point& x, const Point& y) const {
  if (impl_->torus) return impl_->torus->value(abs_delta(manifold_.dim, x, y, nullptr));
  const auto p = sphere_pair(x, y);
  return impl_->sphere->value(p.t, p.omt);
}

double BesselKernel::diagonal() const {
  return impl_->torus ? impl_->torus->diagonal() : impl_->sphere->diagonal();
}

KernelValue BesselKernel::gap(const Point& x, const Point& y) const {
  if (impl_->torus) return impl_->torus->gap(abs_delta(manifold_.dim, x, y, nullptr));
  const auto p = sphere_pair(x, y);
  return impl_->sphere->gap(p.t, p.omt);
}

std::array<double, 3> BesselKernel::grad_x(const Point& x, const Point& y) const {
  if (impl_->torus) {
    std::array<double, 3> sign{};
    auto g = impl_->torus->gradient(abs_delta(manifold_.dim, x, y, &sign));
    for (int a = 0; a < 3; ++a) g[a] *= sign[a];
    return g;
  }
  const auto p = sphere_pair(x, y);
  std::array<double, 3> g{0.0, 0.0, 0.0};
  if (p.omt == 0.0) return g;
  const double db = impl_->sphere->derivative(p.t, p.omt);
  for (int i = 0; i < 3; ++i) g[i] = db * (y[i] - p.t * x[i]);
  return g;
}

double BesselKernel::sphere_profile(double t, double omt) const {
  if (!impl_->sphere) throw InvalidArgument("sphere_profile needs a sphere kernel");
  return impl_->sphere->value(t, omt).value;
}

// ---------------------------------------------------------------------------
// HeatKernel

HeatKernel::HeatKernel(const Manifold& m, double tol, bool small_time)
    : manifold_(m), tol_(tol), small_time_(small_time) {
  if (!(tol > 0.0)) throw InvalidArgument("kernel tolerance must be positive");
}

namespace {

// One-dimensional periodized heat kernel at displacement 0 <= delta <= 1/2.
KernelValue heat_1d(double t, double delta, double tol) {
  const double target = std::log(1.0 / tol) + 10.0;
  if (t <= 1.0 / (4.0 * kPi)) {
    const double pref = 1.0 / std::sqrt(4.0 * kPi * t);
    int M = 0;
    while ((M + 0.5) * (M + 0.5) / (4.0 * t) < target) ++M;
    double sum = 0.0;
    for (int n = -M; n <= M; ++n) {
      const double v = delta + n;
      sum += std::exp(-v * v / (4.0 * t));
    }
    const double lead = std::exp(-(M + 0.5) * (M + 0.5) / (4.0 * t));
    const double tail = 2.0 * lead / -std::expm1(-(2.0 * M + 2.0) / (4.0 * t));
    return {pref * sum, pref * tail};
  }
  const double a = 4.0 * kPi * kPi * t;
  int K = 0;
  while (a * (K + 1.0) * (K + 1.0) < target) ++K;
  double sum = 1.0;
  for (int k = 1; k <= K; ++k) sum += 2.0 * std::exp(-a * k * k) * std::cos(kTwoPi * k * delta);
  const double lead = std::exp(-a * (K + 1.0) * (K + 1.0));
  return {sum, 2.0 * lead / -std::expm1(-a * (2.0 * K + 3.0))};
}

}  // namespace

KernelValue HeatKernel::eval(double t, const Point& x, const Point& y) const {
  if (!(t > 0.0)) throw InvalidArgument("heat time must be positive");
  if (manifold_.is_torus()) {
    // The torus heat kernel is a product of one-dimensional kernels.
    const auto delta = abs_delta(manifold_.dim, x, y, nullptr);
    const double axis_tol = tol_ / (4.0 * manifold_.dim);
    double value = 1.0, upper = 1.0;
    for (int a = 0; a < manifold_.dim; ++a) {
      const auto k = heat_1d(t, delta[a], axis_tol);
      value *= k.value;
      upper *= k.value + k.tail;
    }
    return {value, upper - value};
  }
  const auto p = sphere_pair(x, y);
  return sphere_eval(t, p.t, p.omt);
}

KernelValue HeatKernel::sphere_eval(double t, double cos_theta, double omt) const {
  if (!(t > 0.0)) throw InvalidArgument("heat time must be positive");
  if (small_time_ && t <= 0.05) {
    const double theta = 2.0 * std::asin(std::min(1.0, std::sqrt(0.5 * omt)));
    return detail::sphere_heat_small(t, theta);
  }
  if (t < kSphereFloor)
    throw ResourceError("sphere heat kernel below the floor time t_min = 1e-3", INFINITY);
  // sum_{n >= n0} (2n+1) e^{-n(n+1)t} <= e^{-(n0-1) n0 t} / t once the summand decreases.
  int n0 = 1;
  double bound = INFINITY;
  for (; n0 <= kSphereDegreeCap + 1; ++n0) {
    const double a = n0 - 1.0;
    if ((2.0 * a + 1.0) * (2.0 * a + 1.0) * t <= 2.0) continue;
    bound = std::exp(-a * n0 * t) / t;
    if (bound < tol_) break;
  }
  if (bound >= tol_)
    throw ResourceError("sphere heat kernel: degree cap reached before tolerance", bound);
  double p0 = 1.0, p1 = cos_theta;
  double sum = 1.0;
  for (int n = 1; n < n0; ++n) {
    double p;
    if (n == 1) {
      p = cos_theta;
    } else {
      p = ((2.0 * n - 1.0) * cos_theta * p1 - (n - 1.0) * p0) / n;
      p0 = p1;
      p1 = p;
    }
    sum += (2.0 * n + 1.0) * std::exp(-n * (n + 1.0) * t) * p;
  }
  return {sum, bound};
}

// ---------------------------------------------------------------------------
// Free functions

namespace {

const BesselKernel& cached_bessel(const Manifold& m, double alpha, double tol) {
  thread_local std::vector<std::tuple<Manifold, double, double, std::unique_ptr<BesselKernel>>> cache;
  for (auto& [cm, ca, ct, k] : cache)
    if (cm == m && ca == alpha && ct == tol) return *k;
  if (cache.size() >= 8) cache.erase(cache.begin());
  cache.emplace_back(m, alpha, tol, std::make_unique<BesselKernel>(m, alpha, tol));
  return *std::get<3>(cache.back());
}

}  // namespace

double bessel_eval(const Manifold& m, double alpha, const Point& x, const Point& y, double tol) {
  if (!(alpha > m.dim))
    throw InvalidArgument("bessel_eval needs alpha > d; use lp_piece_eval or the spectral forms");
  validate_point(m, x);
  validate_point(m, y);
  const auto v = cached_bessel(m, alpha, tol).eval(x, y);
  if (v.tail > tol) throw ResourceError("Bessel kernel tail bound above tolerance", v.tail);
  return v.value;
}

double heat_eval(const Manifold& m, double t, const Point& x, const Point& y, double tol) {
  validate_point(m, x);
  validate_point(m, y);
  HeatKernel h(m, tol, true);
  const auto v = h.eval(t, x, y);
  if (v.tail > tol) throw ResourceError("heat kernel tail bound above tolerance", v.tail);
  return v.value;
}

double lp_piece_eval(const Manifold& m, double alpha, double r, const Point& x, const Point& y) {
  if (!(r > 0.0)) throw InvalidArgument("LP piece scale must be positive");
  validate_point(m, x);
  validate_point(m, y);
  const auto slice = spectrum_below(m, 2.0 * r);
  double sum = 0.0;
  if (m.is_torus()) {
    const auto delta = abs_delta(m.dim, x, y, nullptr);
    for (const auto& sh : slice.shells) {
      const double chi = lp_cutoff(sh.lambda / r);
      if (chi == 0.0) continue;
      double c = 0.0;
      for (const auto& k : sh.reps) {
        double phase = 0.0;
        for (int a = 0; a < m.dim; ++a) phase += k[a] * delta[a];
        c += 2.0 * std::cos(kTwoPi * phase);
      }
      sum += chi * std::pow(1.0 + sh.lambda * sh.lambda, -0.5 * alpha) * c;
    }
    return sum;
  }
  const auto p = sphere_pair(x, y);
  for (const auto& sh : slice.shells) {
    const double chi = lp_cutoff(sh.lambda / r);
    if (chi == 0.0) continue;
    sum += chi * std::pow(1.0 + sh.lambda * sh.lambda, -0.5 * alpha) *
           zonal_eval(static_cast<int>(sh.key), p.t);
  }
  return sum;
}

double bessel_gap(const Manifold& m, double alpha, const Point& x, const Point& y, double tol) {
  if (!(alpha > m.dim && alpha < m.dim + 2.0))
    throw InvalidArgument("bessel_gap needs d < alpha < d + 2");
  validate_point(m, x);
  validate_point(m, y);
  const auto v = cached_bessel(m, alpha, tol).gap(x, y);
  if (v.tail > tol) throw ResourceError("kernel gap tail bound above tolerance", v.tail);
  return v.value;
}

}  // namespace quadm
