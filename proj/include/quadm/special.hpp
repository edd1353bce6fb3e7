#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace quadm {

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Gamma function and regularized incomplete gamma functions.
double gamma_fn(double a);
double log_gamma_fn(double a);
/// P(a, x) = gamma(a, x) / Gamma(a).
double gamma_p(double a, double x);
/// Q(a, x) = Gamma(a, x) / Gamma(a).
double gamma_q(double a, double x);
/// Unregularized lower incomplete gamma, integral_0^x t^{a-1} e^{-t} dt.
double lower_gamma(double a, double x);

/// Riemann zeta function for s > 1.
double zeta_fn(double s);

/// Sum over n >= 0 of (n + 1/2)^{-s} = (2^s - 1) zeta(s), s > 1.
double half_zeta(double s);

/// Volume of the unit ball in R^d.
double unit_ball_volume(int d);

/// Bound on the sum of f(|n - shift|) over lattice points n in Z^d with
/// |n - shift| >= r0, for f nonincreasing on [r0, inf). Counts points per
/// unit annulus by the volume of the unit cubes around them.
double lattice_tail_bound(int d, double r0, const std::function<double(double)>& f);

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussRule& gauss_legendre(int n);

/// Pairwise (cascade) summation with a fixed recursion order, so that the
/// result depends only on the input order.
double pairwise_sum(std::span<const double> xs);

/// Legendre polynomial P_n(t) by the three-term recurrence.
double legendre(int n, double t);

/// Fills out[n] = P_n(t) for n = 0..out.size()-1.
void legendre_table(double t, std::span<double> out);

/// Smooth bump exp(1 - 1/(1 - u^2)) on (-1, 1), zero outside; equals 1 at 0.
double bump(double u);

/// Cutoff profile supported in 1/2 < |u| < 2, equal to 1 at |u| = 5/4.
double lp_cutoff(double u);

}  // namespace quadm
