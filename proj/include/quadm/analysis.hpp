#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "quadm/manifold.hpp"
#include "quadm/pointsets.hpp"

namespace quadm {

/// F nu(phi) = sum_j w_j phi(z_j) for every basis function of the slice.
Eigen::VectorXd moment_vector(const PointSet& ps, const SpectrumSlice& s);

/// Squared moment mass per shell: |F nu|^2 summed over the shell's basis.
std::vector<double> shell_moments(const PointSet& ps, const SpectrumSlice& s);

// ---------------------------------------------------------------------------
// Worst-case error

enum class WceMethod { Spectral, Kernel, Heat };
std::string method_name(WceMethod m);
WceMethod parse_method(const std::string& name);

struct WceReport {
  double alpha = 0.0;
  WceMethod method = WceMethod::Spectral;
  double value = 0.0;     // sqrt(max(0, value_sq))
  double value_sq = 0.0;  // accumulated estimate of WCE^2
  double lower_sq = 0.0;  // certified enclosure of WCE^2
  double upper_sq = 0.0;
  double cutoff = 0.0;      // spectral: Lambda; heat: lowest time node
  double tail_bound = 0.0;  // certified bound on the neglected part of WCE^2
  std::size_t n = 0;
  std::size_t terms = 0;  // basis functions / kernel pairs / time nodes used
};

struct WceOptions {
  double tol = 1e-10;                  // target tail bound on WCE^2
  std::size_t basis_budget = 400'000;  // spectral route
};

WceReport wce(const PointSet& ps, double alpha, WceMethod method, const WceOptions& opt = {});

/// Spectral route when its certified tail is below 1e-3 of the partial sum,
/// kernel route otherwise.
WceReport wce_auto(const PointSet& ps, double alpha);

/// True when the enclosures, widened by slack, share a point.
bool routes_agree(const std::vector<WceReport>& reports, double slack = 1e-6);

/// Spectral partial sums sum_{0 < lambda < Lambda} (1+lambda^2)^{-a} |F nu|^2 for
/// several orders on the same moments (matched truncation).
std::vector<double> spectral_partial_sums(const PointSet& ps, const std::vector<double>& orders,
                                          const SpectrumSlice& s);

// ---------------------------------------------------------------------------
// q-norm energy

struct QnormReport {
  double alpha = 0.0, q = 0.0;
  double value = 0.0;
  std::size_t grid = 0;
  double coarse_value = 0.0;  // same functional on the grid of half the resolution
  std::size_t coarse_grid = 0;
  double refinement_delta = 0.0;
};

/// Discrete L^q norm of G(y) = sum_j w_j B^alpha(z_j, y) - 1 on an equal-weight
/// grid: torus uniform lattice with `grid` points per axis (shifted to cell
/// midpoints when alpha <= d), sphere Fibonacci nodes with `grid` points.
/// q = infinity gives the max norm.
QnormReport qnorm_energy(const PointSet& ps, double alpha, double q, std::size_t grid);

// ---------------------------------------------------------------------------
// Discrepancy

struct DiscrepancyReport {
  std::string family;  // "caps_or_balls" or "bessel_level_sets"
  std::size_t centers = 0;
  std::vector<double> radii;
  std::vector<double> sup_disc;
  bool lower_estimate = true;  // sup over a finite grid
};

/// sup over centers (quasi-uniform grid plus the nodes) of |nu(B(y,s)) - vol(B(y,s))|,
/// open and closed balls both considered.
DiscrepancyReport cap_discrepancy(const PointSet& ps, std::size_t centers, const std::vector<double>& radii);

/// Normalized measure of a geodesic ball of radius s.
double ball_volume(const Manifold& m, double s);

/// Smallest C with disc(s) <= C max(r^{-d}, r^{-1} s^{d-1}) over the report.
double l7_constant(const DiscrepancyReport& rep, int d, double r);

struct LevelSetReport {
  DiscrepancyReport per_level;        // sup discrepancy of the level sets {B^alpha > t}
  std::vector<double> levels;         // t grid
  std::vector<double> cap_radius;     // inverted profile, -1 when empty, 4 when everything
  double integrated = 0.0;            // L^q average over centers of int_0^inf |D(y,t)| dt
  double q = 0.0;
  std::string regime;                 // "alpha<1", "alpha=1", "alpha>1"
  double expected_rate = 0.0;         // exponent of r in the T14 bound shape
};

/// Level sets of B^alpha(., y) on S^2 are caps; their radii come from bisection on
/// the radial profile, then the cap discrepancy is reused.
LevelSetReport levelset_discrepancy(const PointSet& ps, double alpha, const std::vector<double>& levels,
                                    std::size_t centers = 64, double q = 0.0);

/// Radius rho with B^alpha(rho) = t on S^2 (profile decreasing); -1 when t is above
/// the profile, 4 (more than pi) when t is below it everywhere.
double invert_profile(double alpha, double t);

// ---------------------------------------------------------------------------
// Adversarial lower bound

struct AdversarialReport {
  double error = 0.0;
  double sobolev_norm = 0.0;
  double ratio = 0.0;
  std::size_t balls = 0;
  double radius = 0.0;
  std::size_t grid = 0;
  double aliasing_delta = 0.0;  // relative change of the norm under grid doubling
  int shifts_tried = 0;
};

/// Torus only: bumps inside node-free balls of radius eps N^{-1/d}, scaled to
/// integral 1/N each, so the rule sees 0 while the integral is 1.
AdversarialReport adversarial_bound(const PointSet& ps, double alpha, double eps = 0.25,
                                    std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Transfer, perturbation, scaling

struct TransferReport {
  double alpha = 0.0, beta = 0.0;
  double wce_alpha = 0.0, wce_beta = 0.0;
  double partial_alpha = 0.0, partial_beta = 0.0;  // spectral sums at matched truncation
  bool monotone = false;                           // partial_beta >= partial_alpha
  double r_equiv = 0.0;                            // WCE(alpha)^{-1/alpha}
  double constant = 0.0;                           // WCE(beta) r^beta
};

TransferReport alpha_transfer_check(const PointSet& ps, double alpha, double beta);

struct PerturbReport {
  double alpha = 0.0, beta = 0.0, r = 0.0;
  double delta = 0.0;
  bool clamped = false;
  double wce_alpha = 0.0, wce_beta = 0.0;        // perturbed
  double base_alpha = 0.0, base_beta = 0.0;      // unperturbed control
};

PerturbReport perturbation_experiment(const PointSet& ps, double alpha, double beta, double r);

/// Moves node `index` by geodesic distance delta (torus along the first axis,
/// sphere along a fixed tangent direction).
PointSet perturb_node(const PointSet& ps, std::size_t index, double delta);

struct ScalingResult {
  std::vector<double> abscissa, values;
  double slope = 0.0, slope_se = 0.0, intercept = 0.0;
  std::vector<std::uint64_t> seeds;
};

ScalingResult scaling_fit(const std::vector<double>& abscissa, const std::vector<double>& values);

/// Jitter average of sum w_i w_j B^{2 alpha}(z_i, z_j) - 1 for the torus cube
/// partition: sum over cells of int int_{U x U} (B(x,x) - B(x,y)) dx dy.
double jitter_expectation(const Manifold& m, std::size_t n, double alpha);

}  // namespace quadm
