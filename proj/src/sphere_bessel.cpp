#include <algorithm>
#include <cmath>

#include "kernel_detail.hpp"
#include "quadm/error.hpp"
#include "quadm/special.hpp"

namespace quadm::detail {

namespace {

double inv_gamma(double x) { return x == 0.0 ? 0.0 : 1.0 / gamma_fn(x); }

}  // namespace

SphereBessel::SphereBessel(double s, double tol) : s_(s) {
  if (!(s > 0.0)) throw InvalidArgument("sphere Bessel kernel needs order > 0");
  for (int n = 0; n < head_; ++n)
    head_coef_.push_back((2.0 * n + 1.0) * std::pow(1.0 + n * (n + 1.0), -0.5 * s));

  // (2n+1) mu_n^{-s/2} = 2 (n+1/2)^{1-s} (1 + (3/4)(n+1/2)^{-2})^{-s/2}, expanded
  // binomially for n >= head.
  const double h = head_;
  double b = 1.0;
  auto bound = [&](int j, double bj) {
    return 2.0 * std::abs(bj) * std::pow(0.75, j) * std::pow(h + 0.5, -2.0 * (j - 1)) *
           std::pow(h, -s) / s;
  };
  for (int j = 0;; ++j) {
    if (j > 0) b *= (-0.5 * s - (j - 1)) / j;
    if (j > 0 && bound(j, b) < tol * 1e-4) {
      double tail = 0.0, bb = b;
      for (int k = j; k < j + 40; ++k) {
        if (k > j) bb *= (-0.5 * s - (k - 1)) / k;
        tail += bound(k, bb);
      }
      tail_ = tail;
      break;
    }
    sigma_.push_back(s - 1.0 + 2.0 * j);
    series_coef_.push_back(2.0 * b * std::pow(0.75, j));
    std::vector<double> hp;
    for (int n = 0; n < head_; ++n) hp.push_back(std::pow(n + 0.5, -sigma_.back()));
    head_pow_.push_back(std::move(hp));
  }
  subtract0_ = sigma_[0] < 0.5;

  // Trapezoid grid in u = log x. The integrands are analytic in the strip
  // |Im u| < pi/2, so h = 1/4 gives errors near exp(-pi^2/h).
  double eff = subtract0_ ? sigma_[0] + 1.0 : sigma_[0];
  if (s > 2.0) eff = std::min(eff, s - 2.0);
  u0_ = -std::min(2000.0, std::max(130.0, 50.0 / eff));
  // Upper end: x^{sigma-1} e^{-x/2} / Gamma(sigma) negligible for every sigma_j.
  const double smax = sigma_.back();
  double xmax = 40.0;
  while ((smax - 1.0) * std::log(xmax) - 0.5 * xmax - log_gamma_fn(smax) > std::log(1e-24)) xmax += 2.0;
  const double u1 = std::log(xmax);
  const int count = static_cast<int>(std::ceil((u1 - u0_) / h_)) + 1;
  wt_.assign(sigma_.size(), std::vector<double>(count));
  for (int i = 0; i < count; ++i) {
    const double u = u0_ + i * h_;
    const double x = std::exp(u);
    const double sh = std::sinh(0.5 * x);
    s4_.push_back(4.0 * sh * sh);
    ex_.push_back(std::exp(-x));
    for (std::size_t j = 0; j < sigma_.size(); ++j)
      wt_[j][i] = h_ * std::exp(sigma_[j] * u) * inv_gamma(sigma_[j]);
  }
}

void SphereBessel::mellin(double t, double omt, int mode, std::vector<double>& out) const {
  const std::size_t J = sigma_.size();
  out.assign(J, 0.0);
  if (mode == 0 && omt == 0.0) {
    if (!(sigma_[0] > 1.0))
      throw InvalidArgument("B^s(x,x) is infinite on S^2 for order s <= 2");
    for (std::size_t j = 0; j < J; ++j) out[j] = half_zeta(sigma_[j]);
    return;
  }
  if (omt <= 0.0) throw InvalidArgument("sphere kernel derivative needs distinct points");
  (void)t;
  const double w0 = 1.0 / std::sqrt(2.0 * omt);
  double eff, scale;
  if (mode == 2) {
    eff = s_ - 2.0;
    scale = 1.0;
  } else {
    eff = subtract0_ ? sigma_[0] + 1.0 : sigma_[0];
    scale = mode == 1 ? w0 * w0 * w0 : w0;
  }
  // Below u_start the integrand is a power e^{eff u} times at most `scale`.
  double u_start = mode == 2 ? std::log(std::sqrt(2.0 * omt)) + std::log(1e-19) / eff
                             : (std::log(1e-21) - std::log(scale)) / eff;
  u_start = std::max(u_start, u0_);
  const auto first = static_cast<std::size_t>(std::floor((u_start - u0_) / h_));
  const double w03 = w0 * w0 * w0;
  for (std::size_t i = first; i < s4_.size(); ++i) {
    const double a = s4_[i];
    const double b = a + 2.0 * omt;
    const double w = 1.0 / std::sqrt(b);
    double f, f0;
    if (mode == 0) {
      f = w;
      f0 = subtract0_ ? w - w0 * ex_[i] : w;
    } else if (mode == 1) {
      f = w * w * w;
      f0 = subtract0_ ? f - w03 * ex_[i] : f;
    } else {
      const double ra = std::sqrt(a), rb = std::sqrt(b);
      f = 2.0 * omt / (ra * rb * (ra + rb));
      f0 = f;
    }
    out[0] += wt_[0][i] * f0;
    for (std::size_t j = 1; j < J; ++j) out[j] += wt_[j][i] * f;
  }
  if (subtract0_ && mode != 2) out[0] += mode == 0 ? w0 : w03;
}

KernelValue SphereBessel::value(double t, double omt) const {
  std::vector<double> H;
  mellin(t, omt, 0, H);
  double p0 = 1.0, p1 = t;
  double head = 0.0;
  std::vector<double> sub(sigma_.size(), 0.0);
  for (int n = 0; n < head_; ++n) {
    const double p = n == 0 ? 1.0 : (n == 1 ? t : ((2.0 * n - 1.0) * t * p1 - (n - 1.0) * p0) / n);
    if (n >= 2) {
      p0 = p1;
      p1 = p;
    }
    head += head_coef_[n] * p;
    for (std::size_t j = 0; j < sigma_.size(); ++j) sub[j] += head_pow_[j][n] * p;
  }
  double tail = 0.0;
  for (std::size_t j = 0; j < sigma_.size(); ++j) tail += series_coef_[j] * (H[j] - sub[j]);
  return {head + tail, tail_ + 1e-18};
}

double SphereBessel::diagonal() const { return value(1.0, 0.0).value; }

KernelValue SphereBessel::gap(double t, double omt) const {
  if (!(s_ > 2.0)) throw InvalidArgument("kernel gap needs order s > 2 on S^2");
  if (omt == 0.0) return {0.0, 0.0};
  std::vector<double> G;
  mellin(t, omt, 2, G);
  // q_n = 1 - P_n(t) by the recurrence written for q.
  double q0 = 0.0, q1 = omt;
  double head = 0.0;
  std::vector<double> sub(sigma_.size(), 0.0);
  for (int n = 0; n < head_; ++n) {
    double q;
    if (n == 0) {
      q = 0.0;
    } else if (n == 1) {
      q = omt;
    } else {
      q = ((2.0 * n - 1.0) * (omt + t * q1) - (n - 1.0) * q0) / n;
      q0 = q1;
      q1 = q;
    }
    head += head_coef_[n] * q;
    for (std::size_t j = 0; j < sigma_.size(); ++j) sub[j] += head_pow_[j][n] * q;
  }
  double tail = 0.0;
  for (std::size_t j = 0; j < sigma_.size(); ++j) tail += series_coef_[j] * (G[j] - sub[j]);
  return {head + tail, 2.0 * tail_ + 1e-18};
}

double SphereBessel::derivative(double t, double omt) const {
  std::vector<double> D;
  mellin(t, omt, 1, D);
  double p0 = 1.0, p1 = t, dp0 = 0.0, dp1 = 1.0;
  double head = 0.0;
  std::vector<double> sub(sigma_.size(), 0.0);
  for (int n = 1; n < head_; ++n) {
    double dp;
    if (n == 1) {
      dp = 1.0;
    } else {
      // P'_n = P'_{n-2} + (2n-1) P_{n-1}
      dp = dp0 + (2.0 * n - 1.0) * p1;
      const double p = ((2.0 * n - 1.0) * t * p1 - (n - 1.0) * p0) / n;
      p0 = p1;
      p1 = p;
      dp0 = dp1;
      dp1 = dp;
    }
    head += head_coef_[n] * dp;
    for (std::size_t j = 0; j < sigma_.size(); ++j) sub[j] += head_pow_[j][n] * dp;
  }
  double tail = 0.0;
  for (std::size_t j = 0; j < sigma_.size(); ++j) tail += series_coef_[j] * (D[j] - sub[j]);
  return head + tail;
}

// ---------------------------------------------------------------------------

KernelValue sphere_heat_small(double t, double theta) {
  if (!(t > 0.0 && t <= 0.05)) throw InvalidArgument("small-time sphere heat kernel needs 0 < t <= 0.05");
  constexpr double E = 40.0;
  const double pref = 4.0 * kPi * std::sqrt(2.0) * std::exp(0.25 * t) * std::pow(4.0 * kPi * t, -1.5);
  const double phi_hi = std::min(kPi, std::sqrt(theta * theta + 4.0 * t * E));
  const GaussRule& gl = gauss_legendre(16);
  double integral = 0.0;
  auto gauss = [&](double phi) { return phi * std::exp(-phi * phi / (4.0 * t)); };
  auto panel = [&](double lo, double hi, auto&& f) {
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    double acc = 0.0;
    for (int i = 0; i < 16; ++i) acc += gl.weights[i] * f(mid + half * gl.nodes[i]);
    return acc * half;
  };
  if (theta <= 0.5 * kPi) {
    // phi = theta + v^2 removes the inverse square root at phi = theta.
    const double V = std::sqrt(std::max(0.0, phi_hi - theta));
    auto f = [&](double v) {
      const double v2 = v * v;
      const double S = v2 > 1e-8 ? std::sin(0.5 * v2) / v2 : 0.5 - v2 * v2 / 48.0;
      const double denom = std::sqrt(2.0 * std::sin(theta + 0.5 * v2) * S);
      return denom > 0.0 ? 2.0 * gauss(theta + v2) / denom : 0.0;
    };
    // Graded panels toward v = 0 resolve the sqrt(theta + v^2/2) behaviour.
    double hi = V;
    const double floor_v = std::max(V * std::ldexp(1.0, -40), 0.25 * std::sqrt(theta));
    while (hi > floor_v && hi > 1e-300) {
      const double lo = 0.5 * hi;
      integral += panel(lo, hi, f);
      hi = lo;
    }
    for (int k = 0; k < 4; ++k) integral += panel(hi * k / 4.0, hi * (k + 1) / 4.0, f);
  } else {
    // phi = pi - a cos(psi) removes both square-root endpoints as theta -> pi.
    const double a = kPi - theta;
    if (a <= 0.0) {
      integral = std::sqrt(2.0) * gauss(kPi) * 0.5 * kPi;
    } else {
      const double psi_hi = std::acos(std::clamp((kPi - phi_hi) / a, -1.0, 1.0));
      auto f = [&](double psi) {
        const double sh = std::sin(0.5 * psi);
        const double one_minus = 2.0 * sh * sh;
        const double phi = kPi - a * std::cos(psi);
        const double denom =
            std::sqrt(2.0 * std::sin(0.5 * a * (2.0 - one_minus)) * std::sin(0.5 * a * one_minus));
        if (psi == 0.0 || denom == 0.0) {
          return gauss(theta) * a / std::sqrt(0.5 * a * std::sin(a));
        }
        return gauss(phi) * a * std::sin(psi) / denom;
      };
      for (int k = 0; k < 4; ++k) integral += panel(psi_hi * k / 4.0, psi_hi * (k + 1) / 4.0, f);
    }
  }
  const double D = 3.0 * (1.0 + kPi * kPi / (2.0 * t)) * std::exp(-kPi * kPi / (4.0 * t));
  const double geom = kPi * kPi / std::sqrt(2.0);
  const double cut = std::exp(-E) * std::exp(-theta * theta / (4.0 * t)) * geom;
  return {pref * integral, pref * (D * geom + cut)};
}

}  // namespace quadm::detail
