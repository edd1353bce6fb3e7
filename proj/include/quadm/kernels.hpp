#pragma once

#include <array>
#include <cstddef>
#include <memory>

#include "quadm/manifold.hpp"

namespace quadm {

/// A kernel value together with a bound on the truncation error of the
/// series or integral that produced it.
struct KernelValue {
  double value = 0.0;
  double tail = 0.0;
};

enum class KernelKind { Bessel, Heat, LpPiece };

struct KernelJob {
  KernelKind kind = KernelKind::Bessel;
  double alpha = 0.0;  // Bessel / LP order
  double time = 0.0;   // heat time t
  double scale = 0.0;  // LP scale r
  double tolerance = 1e-12;
  std::size_t max_terms = 4'000'000;

  static KernelJob bessel(double alpha, double tol = 1e-12);
  static KernelJob heat(double t, double tol = 1e-12);
  static KernelJob lp_piece(double alpha, double r);

  /// Throws InvalidArgument on a malformed job.
  void validate() const;
};

KernelValue evaluate(const Manifold& m, const KernelJob& job, const Point& x, const Point& y);

/// Reusable evaluator for the Bessel kernel B^s(x, y) = sum (1+lambda^2)^{-s/2} phi(x) phi(y).
///
/// Torus: Ewald splitting of the subordination integral at a fixed time t0,
/// with a Gaussian image sum for t < t0 and a spectral sum weighted by
/// incomplete gamma functions for t > t0. Sphere: the low degrees are summed
/// directly and the rest is expanded in powers of (n + 1/2), each power
/// series being a Mellin integral of the Legendre generating function.
///
/// Any order s > 0 is accepted; values at coincident points need s > d.
class BesselKernel {
 public:
  BesselKernel(const Manifold& m, double order, double tol = 1e-12);
  ~BesselKernel();
  BesselKernel(BesselKernel&&) noexcept;
  BesselKernel& operator=(BesselKernel&&) noexcept;

  const Manifold& manifold() const { return manifold_; }
  double order() const { return order_; }

  double operator()(const Point& x, const Point& y) const { return eval(x, y).value; }
  KernelValue eval(const Point& x, const Point& y) const;
  /// B^s(x, x); requires s > d.
  double diagonal() const;
  /// B^s(x, x) - B^s(x, y) as a sum of nonnegative-dominated terms; requires s > d.
  KernelValue gap(const Point& x, const Point& y) const;
  /// Gradient in x of B^s(x, y). Torus: components along the axes. Sphere:
  /// ambient vector tangent at x.
  std::array<double, 3> grad_x(const Point& x, const Point& y) const;

  /// Sphere only: B^s as a function of the cosine t of the geodesic distance,
  /// with omt = 1 - t supplied separately for accuracy near t = 1.
  double sphere_profile(double t, double omt) const;

  struct Impl;

 private:
  Manifold manifold_;
  double order_;
  std::unique_ptr<Impl> impl_;
};

/// Heat kernel W(t, x, y) = sum exp(-lambda^2 t) phi(x) phi(y).
///
/// Torus: Gaussian periodization for t <= 1/(4 pi), spectral sum above.
/// Sphere: zonal series with a degree cap; below the floor time the public
/// entry point refuses, while `small_time` mode switches to the closed-form
/// integral representation of the S^2 heat kernel for t < 0.05.
class HeatKernel {
 public:
  static constexpr double kSphereFloor = 1e-3;
  static constexpr int kSphereDegreeCap = 600;

  explicit HeatKernel(const Manifold& m, double tol = 1e-12, bool small_time = false);

  KernelValue eval(double t, const Point& x, const Point& y) const;
  /// Sphere: same as eval with t = cos of the distance, omt = 1 - t.
  KernelValue sphere_eval(double t, double cos_theta, double omt) const;

 private:
  Manifold manifold_;
  double tol_;
  bool small_time_;
};

double bessel_eval(const Manifold& m, double alpha, const Point& x, const Point& y,
                   double tol = 1e-12);
double heat_eval(const Manifold& m, double t, const Point& x, const Point& y,
                 double tol = 1e-12);
/// Littlewood-Paley piece: the Bessel series windowed by lp_cutoff(lambda / r).
double lp_piece_eval(const Manifold& m, double alpha, double r, const Point& x, const Point& y);
/// B^alpha(x, x) - B^alpha(x, y) for d < alpha < d + 2.
double bessel_gap(const Manifold& m, double alpha, const Point& x, const Point& y,
                  double tol = 1e-12);

/// Sphere pair geometry: cosine of the angle and 1 - cosine computed from the
/// chord, accurate for nearby points.
struct SpherePair {
  double t;
  double omt;
};
SpherePair sphere_pair(const Point& x, const Point& y);

}  // namespace quadm
