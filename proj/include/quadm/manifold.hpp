#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace quadm {

enum class Kind { Torus, Sphere };

/// The flat torus T^d (d = 1, 2, 3) or the unit sphere S^2, each carrying
/// its Riemannian measure normalized to total mass 1.
struct Manifold {
  Kind kind = Kind::Torus;
  int dim = 1;

  static Manifold torus(int d);
  static Manifold sphere();

  bool is_torus() const { return kind == Kind::Torus; }
  bool is_sphere() const { return kind == Kind::Sphere; }
  /// Number of stored coordinates per point: d on the torus, 3 on S^2.
  int coords() const { return is_torus() ? dim : 3; }
  std::string name() const;  // "torus:2", "sphere:2"
  static Manifold parse(const std::string& spec);

  friend bool operator==(const Manifold&, const Manifold&) = default;
};

/// A point on a manifold. Torus coordinates live in [0,1)^d, sphere points
/// are unit vectors in R^3. Unused trailing coordinates are zero.
struct Point {
  std::array<double, 3> x{0.0, 0.0, 0.0};

  double operator[](int i) const { return x[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return x[static_cast<std::size_t>(i)]; }
  friend bool operator==(const Point&, const Point&) = default;
};

/// Builds a point from raw coordinates: torus coordinates are reduced mod 1,
/// sphere vectors within 1e-9 of unit length are renormalized and anything
/// else is rejected.
Point make_point(const Manifold& m, std::span<const double> coords);

/// Throws InvalidArgument unless p satisfies the manifold's point invariants.
void validate_point(const Manifold& m, const Point& p);

double geodesic_distance(const Manifold& m, const Point& x, const Point& y);

/// Minimum-image displacement x - y on the torus, each component in [-1/2, 1/2].
std::array<double, 3> torus_delta(int d, const Point& x, const Point& y);

/// Counter-based stream derivation: every (seed, tag) pair yields an
/// independent generator, so no RNG state is ever shared between calls.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t tag);
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

Point random_point(const Manifold& m, Rng& rng);

std::vector<Point> uniform_sample(const Manifold& m, std::size_t n, std::uint64_t seed,
                                  std::uint64_t tag = 0);

// ---------------------------------------------------------------------------
// Equal-measure partitions

struct Cell {
  Point representative;
  double measure = 0.0;
  double diameter = 0.0;
  /// Torus: per-axis [lo, hi). Sphere: lo = {theta0, phi0}, hi = {theta1, phi1}
  /// in colatitude / longitude.
  std::array<double, 3> lo{0.0, 0.0, 0.0};
  std::array<double, 3> hi{0.0, 0.0, 0.0};
};

struct Partition {
  Manifold manifold;
  std::vector<Cell> cells;
  /// Reported c in max diameter <= c N^{-1/d}.
  double diameter_constant = 0.0;
  /// Torus: cells per axis. Sphere: collar boundaries and region counts.
  int per_axis = 0;
  std::vector<double> collar_theta;   // boundaries, size collars+1
  std::vector<int> collar_count;      // regions per collar
  std::vector<int> collar_first;      // index of the first cell in each collar

  std::size_t size() const { return cells.size(); }
  /// Index of the cell containing p.
  std::size_t locate(const Point& p) const;
  /// Uniform draw from the normalized measure restricted to a cell.
  Point sample_in(std::size_t cell, Rng& rng) const;
  bool contains(std::size_t cell, const Point& p) const { return locate(p) == cell; }
};

/// Torus: N must be n^d (cube partition). Sphere: recursive zonal equal-area
/// construction for any N >= 1.
Partition equal_measure_partition(const Manifold& m, std::size_t n);

// ---------------------------------------------------------------------------
// Spectral data

struct Shell {
  double lambda = 0.0;      // eigenvalue root
  long key = 0;             // |k|^2 on the torus, degree n on the sphere
  int multiplicity = 0;
  /// Torus half-lattice representatives (first nonzero coordinate positive),
  /// sorted lexicographically. Each contributes a cos and a sin basis function.
  std::vector<std::array<int, 3>> reps;
};

struct SpectrumSlice {
  Manifold manifold;
  double cutoff = 0.0;        // r
  double cutoff_sq = 0.0;     // r^2; eigenvalues satisfy lambda^2 < r^2
  std::vector<Shell> shells;  // nondecreasing lambda, shells[0] is lambda = 0
  std::size_t basis_size = 0;

  /// All eigenvalue roots repeated by multiplicity.
  std::vector<double> lambdas() const;
  /// Eigenvalue root of each basis function, in basis order.
  std::vector<double> basis_lambdas() const;
  /// Shell index of each basis function, in basis order.
  std::vector<std::size_t> basis_shell() const;
  /// Largest torus |k|_inf or sphere degree present.
  int max_index() const;
};

inline constexpr std::size_t kDefaultBasisBudget = 2'000'000;

SpectrumSlice spectrum_below(const Manifold& m, double r,
                             std::size_t budget = kDefaultBasisBudget);
/// Same as spectrum_below with r^2 given directly (avoids rounding when r^2
/// is an integer, e.g. sphere bands).
SpectrumSlice spectrum_below_sq(const Manifold& m, double r2,
                                std::size_t budget = kDefaultBasisBudget);

/// Real orthonormal eigenbasis at x: torus 1, sqrt2 cos(2 pi k.x), sqrt2 sin(2 pi k.x);
/// sphere real spherical harmonics normalized for the unit-mass measure.
std::vector<double> eval_basis(const Manifold& m, const SpectrumSlice& s, const Point& x);

/// Basis values for many points, column j = eval_basis(points[j]).
Eigen::MatrixXd basis_matrix(const Manifold& m, const SpectrumSlice& s,
                             std::span<const Point> points);

/// Z_n(t) = (2n+1) P_n(t), the degree-n zonal function on S^2.
double zonal_eval(int n, double t);

/// Real spherical harmonics of degrees 0..max_degree at a unit vector, degree
/// blocks in order m = 0, (1 cos, 1 sin), ..., written to out[0..(L+1)^2).
void real_harmonics(int max_degree, const Point& x, std::span<double> out);

}  // namespace quadm
