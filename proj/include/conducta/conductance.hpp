#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "conducta/graph.hpp"

namespace conducta {

/// Mass comparisons (pi_S <= budget) accept this much rounding slack, so a
/// set of exactly half the stationary mass stays feasible for budget 1/2.
inline constexpr double kMassTolerance = 1e-12;

inline bool within_budget(double pi_mass, double budget) { return pi_mass <= budget + kMassTolerance; }

/// A larger ball replaces the current best only when its conductance is lower
/// by more than this, so rounding cannot break ties toward larger radii.
inline constexpr double kTieTolerance = 1e-12;

/// Cut statistics of S: flow = Q(S, complement), conductance = flow / pi_S.
struct CutStats {
  double flow = 0.0;
  double pi_mass = 0.0;
  double conductance = 0.0;
};

/// Q(s1, s2) = sum over i in s1, j in s2 of pi_i p_ij. The sets must be disjoint.
double ergodic_flow(const RandomWalk& walk, std::span<const VertexId> s1, std::span<const VertexId> s2);

/// Phi(S) for a nonempty proper subset S.
CutStats set_conductance(const RandomWalk& walk, std::span<const VertexId> s);

struct ChainConductance {
  double value = 0.0;
  std::vector<VertexId> argmin;  // ascending
};

/// Enumeration refuses graphs above this size.
inline constexpr std::size_t kMaxEnumerationVertices = 22;

/// min Phi(S) over nonempty proper S with pi_S <= budget, by exhaustive
/// Gray-code enumeration. budget = 1/2 gives the usual chain conductance.
ChainConductance chain_conductance_exact(const RandomWalk& walk, double budget = 0.5);

struct BallShell {
  double radius = 0.0;
  std::size_t size = 0;  // |B(center, radius)|
  CutStats stats;
  bool feasible = false;  // radius <= R, pi_S <= budget, B a proper subset
};

/// Every closed ball around `center`, one shell per distinct finite distance.
struct BallProfile {
  VertexId center = 0;
  std::vector<BallShell> shells;
};

struct BallMinimum {
  double value = 0.0;
  double radius = 0.0;
  std::size_t size = 0;
};

/// Uniform induced conductance of a vertex. `best` is empty when no ball
/// satisfies the radius and mass constraints.
struct InducedConductance {
  BallProfile profile;
  std::optional<BallMinimum> best;

  bool feasible() const noexcept { return best.has_value(); }
};

/// min over radii z <= max_radius of Phi(B(center, z)) subject to
/// pi_B <= budget, by one sweep over vertices in distance order. Vertices at
/// equal distance enter together; the whole vertex set is never a candidate.
/// Ties between radii (within kTieTolerance) go to the smaller radius.
/// `dists` are the shortest-path distances from `center` (+inf for
/// unreachable vertices).
InducedConductance induced_conductance(const RandomWalk& walk, const Eigen::VectorXd& dists, VertexId center,
                                       double max_radius, double budget);

/// Same contract as induced_conductance, but every ball is rebuilt and its
/// cut evaluated from scratch. Quadratic; meant for cross-checking.
InducedConductance induced_conductance_oracle(const RandomWalk& walk, const Eigen::VectorXd& dists,
                                              VertexId center, double max_radius, double budget);

/// Median distance from the center to the other reachable vertices; the
/// default radius bound when none is configured.
double median_radius(const Eigen::VectorXd& dists, VertexId center);

/// Members of B(center, radius), ascending.
std::vector<VertexId> ball_members(const Eigen::VectorXd& dists, double radius);

/// CSV header "center,radius,pi_mass,flow,conductance,feasible".
void write_ball_profile_header(std::ostream& out);
void write_ball_profile_rows(std::ostream& out, const BallProfile& profile);

}  // namespace conducta
