#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "quadm/manifold.hpp"

namespace quadm {

/// Atomic probability measure nu = sum_j w_j delta_{z_j}.
struct PointSet {
  Manifold manifold;
  std::vector<Point> nodes;
  std::vector<double> weights;
  nlohmann::ordered_json provenance = nlohmann::ordered_json::object();

  std::size_t size() const { return nodes.size(); }
  /// Throws InvalidArgument unless weights are nonnegative, sum to 1 within
  /// 1e-12 and every node is a valid point.
  void validate() const;
};

PointSet make_pointset(const Manifold& m, std::vector<Point> nodes, std::vector<double> weights);

enum class Family { Lattice, Random, Jittered, Fibonacci, LpsOrbit };

Family parse_family(const std::string& name);
std::string family_name(Family f);

struct GenerateParams {
  std::size_t n = 0;     // lattice: points per axis; lps_orbit: word length; others: N
  std::uint64_t seed = 0;
  Point base{{0.0, 0.0, 0.0}};  // lps_orbit base point; zero means the default
};

PointSet generate(const Manifold& m, Family family, const GenerateParams& params);

PointSet lattice(const Manifold& m, std::size_t n);
PointSet random_points(const Manifold& m, std::size_t count, std::uint64_t seed);
PointSet jittered(const Manifold& m, std::size_t count, std::uint64_t seed);
PointSet fibonacci(std::size_t count);
/// Orbit of `base` under all reduced words of length <= n in the rotations by
/// arccos(-3/5) about the coordinate axes and their inverses. Breadth-first
/// by length, then lexicographic in generator index (x, x^-1, y, y^-1, z, z^-1).
PointSet lps_orbit(const Point& base, int n);
Point lps_default_base();

/// Integer matrix 5 * generator g for g in 0..5.
std::array<std::array<long long, 3>, 3> lps_generator(int g);

// ---------------------------------------------------------------------------
// Discrete kernel energy

/// E = sum_i sum_j w_i w_j B^{2 alpha}(z_i, z_j).
double discrete_energy(const PointSet& ps, double alpha);
/// Gradient of E with respect to each node (torus coordinates / tangent vectors).
std::vector<std::array<double, 3>> energy_gradient(const PointSet& ps, double alpha);

struct StepPolicy {
  double initial_step = 0.1;
  double shrink = 0.5;
  double grow = 2.0;
  double armijo = 1e-4;
  int max_backtracks = 40;
  double gradient_tol = 1e-12;
};

struct MinimizeResult {
  PointSet best;
  std::vector<double> energies;  // energy after each accepted step, starting with the input
  double gradient_norm = 0.0;
  int accepted = 0;
};

/// Projected gradient descent with backtracking on the nodes, weights fixed.
MinimizeResult minimize_energy(const PointSet& ps, double alpha, int steps,
                               const StepPolicy& policy = {});

}  // namespace quadm
