#pragma once

#include <array>
#include <complex>
#include <vector>

#include "quadm/kernels.hpp"

namespace quadm::detail {

/// Ewald-split Bessel kernel on T^d.
class TorusBessel {
 public:
  TorusBessel(int d, double s, double tol);

  KernelValue value(const std::array<double, 3>& delta) const;
  KernelValue gap(const std::array<double, 3>& delta) const;
  std::array<double, 3> gradient(const std::array<double, 3>& delta) const;
  double diagonal() const;

 private:
  struct Panels {
    std::vector<double> t, inv4t, base, dbase;
  };
  // Near-field integral int_0^{t0} t^{c-1} e^{-t} e^{-rho^2/4t} dt (times pref),
  // its rho-derivative factor and the cut remainder bound.
  double near(double rho2, double& cut) const;
  double near_dgrad(double rho2) const;
  double near_gap(double rho2, double& cut) const;
  double spectral(const std::array<double, 3>& delta, int mode,
                  std::array<double, 3>* grad) const;

  int d_;
  double s_, c_, t0_, cut_exp_, pref_;
  double spectral_tail_ = 0.0, image_tail_ = 0.0;
  double r0_ = 0.0;  // near-field value at rho = 0 (c > 0)
  int kmax_ = 0, nmax_ = 0;
  double image_r2_ = 0.0;
  std::vector<std::array<int, 3>> ks_;
  std::vector<double> coef_;  // pair coefficient 2 a_k^F, half lattice
  double coef0_ = 0.0;
  Panels panels_;
  int panel_count_ = 0;
  static constexpr int kNodes = 16;
};

/// Bessel kernel on S^2 as a function of t = cos(theta).
class SphereBessel {
 public:
  SphereBessel(double s, double tol);

  KernelValue value(double t, double omt) const;
  KernelValue gap(double t, double omt) const;
  double derivative(double t, double omt) const;
  double diagonal() const;

 private:
  // H_sigma(t) = sum_n (n+1/2)^{-sigma} P_n(t) for the expansion powers.
  void mellin(double t, double omt, int mode, std::vector<double>& out) const;

  double s_;
  int head_ = 40;
  std::vector<double> head_coef_;              // (2n+1) mu_n^{-s/2}, n < head
  std::vector<double> sigma_, series_coef_;    // sigma_j, 2 binom(-s/2, j) (3/4)^j
  std::vector<std::vector<double>> head_pow_;  // (n+1/2)^{-sigma_j}
  bool subtract0_ = false;
  double tail_ = 0.0;
  // trapezoid grid in u = log x
  double h_ = 0.125, u0_ = -130.0;
  std::vector<double> s4_, ex_;
  std::vector<std::vector<double>> wt_;  // h x^{sigma_j} / Gamma(sigma_j)
};

/// Closed-form small-time heat kernel on S^2 (normalized measure) for
/// t <= 0.05, with the bound on the dropped image terms.
KernelValue sphere_heat_small(double t, double theta);

}  // namespace quadm::detail
