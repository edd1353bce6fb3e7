#include "quadm/special.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/zeta.hpp>

#include <cmath>
#include <map>
#include <mutex>

namespace quadm {

double gamma_fn(double a) { return boost::math::tgamma(a); }

double log_gamma_fn(double a) { return boost::math::lgamma(a); }

double gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  return boost::math::gamma_p(a, x);
}

double gamma_q(double a, double x) {
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(a, x);
}

double lower_gamma(double a, double x) {
  if (x <= 0.0) return 0.0;
  return boost::math::tgamma_lower(a, x);
}

double zeta_fn(double s) { return boost::math::zeta(s); }

double half_zeta(double s) { return std::expm1(s * std::log(2.0)) * boost::math::zeta(s); }

double unit_ball_volume(int d) {
  return std::pow(kPi, 0.5 * d) / boost::math::tgamma(0.5 * d + 1.0);
}

double lattice_tail_bound(int d, double r0, const std::function<double(double)>& f) {
  const double c = 0.5 * std::sqrt(static_cast<double>(d));
  const double vd = unit_ball_volume(d);
  double total = 0.0;
  for (int j = 0; j < 100000; ++j) {
    const double r = r0 + j;
    const double fr = f(r);
    const double outer = std::pow(r + 1.0 + c, d);
    const double inner = std::pow(std::max(0.0, r - c), d);
    const double term = vd * (outer - inner) * fr;
    total += term;
    if (fr == 0.0 || (j > 4 && term < 1e-40)) break;
  }
  return total;
}

namespace {

GaussRule make_gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * k - 1.0) * x * p2 - (k - 1.0) * p3) / k;
      }
      dp = n * (x * p1 - p2) / (x * x - 1.0);
      const double prev = x;
      x = prev - p1 / dp;
      if (std::abs(x - prev) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_gauss_legendre(n)).first;
  return it->second;
}

double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 16) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

double legendre(int n, double t) {
  if (n == 0) return 1.0;
  double p0 = 1.0, p1 = t;
  for (int k = 2; k <= n; ++k) {
    double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

void legendre_table(double t, std::span<double> out) {
  if (out.empty()) return;
  out[0] = 1.0;
  if (out.size() == 1) return;
  out[1] = t;
  for (std::size_t k = 2; k < out.size(); ++k)
    out[k] = ((2.0 * k - 1.0) * t * out[k - 1] - (k - 1.0) * out[k - 2]) / k;
}

double bump(double u) {
  const double v = 1.0 - u * u;
  if (v <= 0.0) return 0.0;
  return std::exp(1.0 - 1.0 / v);
}

double lp_cutoff(double u) {
  const double a = std::abs(u);
  if (a <= 0.5 || a >= 2.0) return 0.0;
  return bump((a - 1.25) / 0.75);
}

}  // namespace quadm
