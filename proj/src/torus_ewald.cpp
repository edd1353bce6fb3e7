#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "kernel_detail.hpp"
#include "quadm/error.hpp"
#include "quadm/special.hpp"

namespace quadm::detail {

namespace {

constexpr int kPanelCount = 90;

double split_time(int d) {
  switch (d) {
    case 1: return 5e-4;
    case 2: return 5e-3;
    default: return 1.2e-2;
  }
}

// Bound on int_0^{tb} t^{c-1} e^{-rho^2/4t} dt with x = rho^2 / (4 tb).
double gaussian_remainder(double c, double tb, double x) {
  const double p = std::max(0.0, -c - 1.0);
  if (x <= p) return std::numeric_limits<double>::infinity();
  return std::pow(tb, c) * std::exp(-x) / (x - p);
}

thread_local std::vector<std::complex<double>> tls_tables;

}  // namespace

TorusBessel::TorusBessel(int d, double s, double tol) : d_(d), s_(s) {
  c_ = 0.5 * (s - d);
  t0_ = split_time(d);
  cut_exp_ = std::max(30.0, std::log(1.0 / tol) + 8.0);
  pref_ = std::pow(4.0 * kPi, -0.5 * d) / gamma_fn(0.5 * s);

  // Far field: half lattice with 4 pi^2 |k|^2 t0 < E.
  const double kr2 = cut_exp_ / (4.0 * kPi * kPi * t0_);
  kmax_ = static_cast<int>(std::floor(std::sqrt(kr2)));
  coef0_ = gamma_q(0.5 * s, t0_);
  const int span = 2 * kmax_ + 1;
  long box = 1;
  for (int a = 0; a < d; ++a) box *= span;
  std::vector<std::pair<long, std::array<int, 3>>> found;
  for (long idx = 0; idx < box; ++idx) {
    std::array<int, 3> k{0, 0, 0};
    long rem = idx, k2 = 0;
    for (int a = 0; a < d; ++a) {
      k[a] = static_cast<int>(rem % span) - kmax_;
      rem /= span;
      k2 += static_cast<long>(k[a]) * k[a];
    }
    if (k2 == 0 || static_cast<double>(k2) >= kr2) continue;
    int first = 0;
    for (int a = 0; a < d; ++a)
      if (k[a] != 0) {
        first = k[a];
        break;
      }
    if (first > 0) found.emplace_back(k2, k);
  }
  std::sort(found.begin(), found.end());
  for (const auto& [k2, k] : found) {
    const double mu = 1.0 + 4.0 * kPi * kPi * static_cast<double>(k2);
    ks_.push_back(k);
    coef_.push_back(2.0 * std::pow(mu, -0.5 * s) * gamma_q(0.5 * s, t0_ * mu));
  }
  spectral_tail_ = lattice_tail_bound(d, std::sqrt(kr2), [&](double r) {
    const double mu = 1.0 + 4.0 * kPi * kPi * r * r;
    return std::pow(mu, -0.5 * s) * gamma_q(0.5 * s, t0_ * mu);
  });

  // Near field: Gaussian images with |delta + n|^2 < 4 t0 E.
  image_r2_ = 4.0 * t0_ * cut_exp_;
  nmax_ = static_cast<int>(std::ceil(std::sqrt(image_r2_) + 0.5));
  image_tail_ = lattice_tail_bound(d, std::sqrt(image_r2_), [&](double rho) {
    return pref_ * gaussian_remainder(c_, t0_, rho * rho / (4.0 * t0_));
  });

  // Gauss-Legendre panels of width 2 in u = log t, anchored at log t0.
  const GaussRule& gl = gauss_legendre(kNodes);
  const double top = std::log(t0_);
  panel_count_ = kPanelCount;
  for (int p = 0; p < panel_count_; ++p) {
    const double mid = top - 2.0 * p - 1.0;
    for (int i = 0; i < kNodes; ++i) {
      const double u = mid + gl.nodes[i];
      const double t = std::exp(u);
      const double base = pref_ * gl.weights[i] * std::exp(c_ * u - t);
      panels_.t.push_back(t);
      panels_.inv4t.push_back(0.25 / t);
      panels_.base.push_back(base);
      panels_.dbase.push_back(-base * 0.5 / t);
    }
  }
  if (c_ > 0.0) r0_ = pref_ * lower_gamma(c_, t0_);
}

double TorusBessel::near(double rho2, double& cut) const {
  if (rho2 == 0.0) {
    if (c_ <= 0.0) throw InvalidArgument("Bessel kernel of order <= d is singular at coincident points");
    return r0_;
  }
  double sum = 0.0;
  int p = 0;
  for (; p < panel_count_; ++p) {
    const double t_top = t0_ * std::exp(-2.0 * p);
    if (rho2 * 0.25 / t_top > cut_exp_) break;
    if (c_ > 0.0 && pref_ * std::pow(t_top, c_) / c_ < 1e-30) break;
    const std::size_t off = static_cast<std::size_t>(p) * kNodes;
    for (int i = 0; i < kNodes; ++i)
      sum += panels_.base[off + i] * std::exp(-rho2 * panels_.inv4t[off + i]);
  }
  const double tb = t0_ * std::exp(-2.0 * p);
  const double x = rho2 * 0.25 / tb;
  double rem = gaussian_remainder(c_, tb, x);
  if (c_ > 0.0) rem = std::min(rem, std::pow(tb, c_) / c_);
  if (!std::isfinite(rem))
    throw ResourceError("torus Bessel kernel: points too close for the near-field panels", rem);
  cut += pref_ * rem;
  return sum;
}

double TorusBessel::near_dgrad(double rho2) const {
  double sum = 0.0;
  for (int p = 0; p < panel_count_; ++p) {
    const double t_top = t0_ * std::exp(-2.0 * p);
    if (rho2 * 0.25 / t_top > cut_exp_) break;
    const std::size_t off = static_cast<std::size_t>(p) * kNodes;
    for (int i = 0; i < kNodes; ++i)
      sum += panels_.dbase[off + i] * std::exp(-rho2 * panels_.inv4t[off + i]);
  }
  return sum;
}

double TorusBessel::near_gap(double rho2, double& cut) const {
  // pref int_0^{t0} t^{c-1} e^{-t} (1 - exp(-rho^2/4t)) dt, every term >= 0.
  if (rho2 == 0.0) return 0.0;
  double sum = 0.0;
  int p = 0;
  for (; p < panel_count_; ++p) {
    const std::size_t off = static_cast<std::size_t>(p) * kNodes;
    for (int i = 0; i < kNodes; ++i)
      sum += panels_.base[off + i] * -std::expm1(-rho2 * panels_.inv4t[off + i]);
    const double t_bot = t0_ * std::exp(-2.0 * (p + 1));
    if (rho2 * 0.25 / t_bot >= cut_exp_) {
      ++p;
      break;
    }
  }
  const double tb = t0_ * std::exp(-2.0 * p);
  const double low = pref_ * lower_gamma(c_, tb);
  if (rho2 * 0.25 / tb >= cut_exp_) {
    sum += low;
    cut += low * std::exp(-cut_exp_);
  } else {
    cut += low;
  }
  return sum;
}

double TorusBessel::spectral(const std::array<double, 3>& delta, int mode,
                             std::array<double, 3>* grad) const {
  // Half-angle tables e^{i pi m delta_a}, m = 0..kmax, resynchronized every 8 steps.
  const std::size_t stride = static_cast<std::size_t>(kmax_) + 1;
  tls_tables.resize(stride * 3);
  for (int a = 0; a < d_; ++a) {
    std::complex<double>* tab = tls_tables.data() + a * stride;
    const std::complex<double> step = std::polar(1.0, kPi * delta[a]);
    tab[0] = 1.0;
    for (int m = 1; m <= kmax_; ++m)
      tab[m] = (m % 8 == 0) ? std::polar(1.0, kPi * m * delta[a]) : tab[m - 1] * step;
  }
  double sum = mode == 0 ? coef0_ : 0.0;
  std::array<double, 3> g{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < ks_.size(); ++i) {
    const auto& k = ks_[i];
    std::complex<double> z = 1.0;
    for (int a = 0; a < d_; ++a) {
      const std::complex<double> e = tls_tables[a * stride + std::abs(k[a])];
      z *= k[a] >= 0 ? e : std::conj(e);
    }
    const double sn = z.imag();
    if (mode == 0) {
      sum += coef_[i] * (1.0 - 2.0 * sn * sn);
    } else if (mode == 1) {
      sum += coef_[i] * 2.0 * sn * sn;
    } else {
      const double s2 = 2.0 * z.real() * sn;
      for (int a = 0; a < d_; ++a) g[a] -= coef_[i] * kTwoPi * k[a] * s2;
    }
  }
  if (grad) *grad = g;
  return sum;
}

KernelValue TorusBessel::value(const std::array<double, 3>& delta) const {
  double cut = 0.0;
  double real = 0.0;
  const int span = 2 * nmax_ + 1;
  long box = 1;
  for (int a = 0; a < d_; ++a) box *= span;
  for (long idx = 0; idx < box; ++idx) {
    long rem = idx;
    double rho2 = 0.0;
    for (int a = 0; a < d_; ++a) {
      const int n = static_cast<int>(rem % span) - nmax_;
      rem /= span;
      const double v = delta[a] + n;
      rho2 += v * v;
    }
    if (rho2 >= image_r2_) continue;
    real += near(rho2, cut);
  }
  const double spec = spectral(delta, 0, nullptr);
  return {spec + real, spectral_tail_ + image_tail_ + cut};
}

double TorusBessel::diagonal() const {
  if (c_ <= 0.0) throw InvalidArgument("B^s(x,x) is infinite for order s <= d");
  return value({0.0, 0.0, 0.0}).value;
}

KernelValue TorusBessel::gap(const std::array<double, 3>& delta) const {
  if (c_ <= 0.0) throw InvalidArgument("kernel gap needs order s > d");
  double cut = 0.0;
  double real = 0.0;
  const int span = 2 * nmax_ + 1;
  long box = 1;
  for (int a = 0; a < d_; ++a) box *= span;
  for (long idx = 0; idx < box; ++idx) {
    long rem = idx;
    double rho2 = 0.0, base2 = 0.0;
    bool origin = true;
    for (int a = 0; a < d_; ++a) {
      const int n = static_cast<int>(rem % span) - nmax_;
      rem /= span;
      const double v = delta[a] + n;
      rho2 += v * v;
      base2 += static_cast<double>(n) * n;
      if (n != 0) origin = false;
    }
    if (origin) {
      real += near_gap(rho2, cut);
      continue;
    }
    if (rho2 < image_r2_) real -= near(rho2, cut);
    if (base2 < image_r2_) real += near(base2, cut);
  }
  const double spec = spectral(delta, 1, nullptr);
  return {spec + real, 2.0 * (spectral_tail_ + image_tail_) + cut};
}

std::array<double, 3> TorusBessel::gradient(const std::array<double, 3>& delta) const {
  std::array<double, 3> g{0.0, 0.0, 0.0};
  spectral(delta, 2, &g);
  const int span = 2 * nmax_ + 1;
  long box = 1;
  for (int a = 0; a < d_; ++a) box *= span;
  for (long idx = 0; idx < box; ++idx) {
    long rem = idx;
    double rho2 = 0.0;
    std::array<double, 3> v{0.0, 0.0, 0.0};
    for (int a = 0; a < d_; ++a) {
      const int n = static_cast<int>(rem % span) - nmax_;
      rem /= span;
      v[a] = delta[a] + n;
      rho2 += v[a] * v[a];
    }
    if (rho2 >= image_r2_ || rho2 == 0.0) continue;
    const double f = near_dgrad(rho2);
    for (int a = 0; a < d_; ++a) g[a] += v[a] * f;
  }
  return g;
}

}  // namespace quadm::detail
