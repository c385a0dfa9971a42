#pragma once

// Euclidean deployment model: base-station placement, bipolar ray indexing,
// ray directions, closed-form ray intercepts, and conditional angles.
//
// Conventions used throughout the library (all verified end-to-end by the
// noise-free construction tests):
//   * the user equipment (UE) sits at the origin;
//   * an array with orientation T maps a local angle e to the global
//     direction e - T, so ray_direction(n, T) = [cos(ang(n) - T),
//     sin(ang(n) - T)] and, conversely, local = global + orientation;
//   * angles are always wrapped to (-pi, pi] by wrap_angle.

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rapid/common.hpp"

namespace rapid {

// BS positions/orientations plus the UE orientation. The UE position is
// fixed at the origin (user-centric frame).
struct NetworkDeployment {
  std::vector<Eigen::Vector2d> bs_positions;
  std::vector<double> bs_orientations;  // radians, in [-pi, pi]
  double ue_orientation = 0.0;          // radians, in [-pi, pi]

  int num_bs() const { return static_cast<int>(bs_positions.size()); }

  // Displacement D_p - D_q (antisymmetric in its arguments).
  Eigen::Vector2d displacement(int p, int q) const {
    return bs_positions.at(static_cast<std::size_t>(p)) -
           bs_positions.at(static_cast<std::size_t>(q));
  }

  // Radial distance of BS b from the UE.
  double radial_distance(int b) const {
    return bs_positions.at(static_cast<std::size_t>(b)).norm();
  }

  // Throws ConfigError when invariants are violated.
  void validate() const;

  nlohmann::json to_json() const;
  static NetworkDeployment from_json(const nlohmann::json& j);
};

// Number of bipolar ray indexes for an N-element array: {-(N-1), ..., N-1}.
inline int bipolar_count(int n_array) { return 2 * n_array - 1; }

std::vector<int> bipolar_indices(int n_array);

// Candidate beam angle: sign * acos(1 - 2n/N), n in [0, N). The N candidate
// angles make the beam steering vectors mutually orthogonal.
double candidate_angle(int n, int n_array, int sign);

// Signed candidate angle for a bipolar index (sgn(0) treated as +1).
double bar_angle(int nt, int n_array);

// Unit direction of ray nt launched from an array with orientation theta.
Eigen::Vector2d ray_direction(int nt, double theta, int n_array);

// Closed-form intersection of ray nt_b from BS b and ray nt_p from BS p.
// delta_bp = D_b - D_p. Returns (r_b, r_p) iff both are strictly positive
// and the 2x2 system is nonsingular (|det| >= eps_det); otherwise nullopt.
std::optional<std::pair<double, double>> solve_intercept(
    int nt_b, int nt_p, const Eigen::Vector2d& delta_bp, double theta_b,
    double theta_p, int n_array, double eps_det = 1e-10);

struct InterceptEntry {
  int nt_p;                  // peer ray index
  double r_b;                // radial distance along the owning ray
  double r_p;                // radial distance along the peer ray
  Eigen::Vector2d position;  // intercept point, global frame
};

// Dense table: for each ordered BS pair (b, p) and each ray nt_b of b, the
// peer rays of p that intercept it, with radial distances and positions.
// Immutable once built; safe to share across concurrent trials.
class RayInterceptTable {
 public:
  RayInterceptTable() = default;
  RayInterceptTable(int num_bs, int n_array);

  int num_bs() const { return num_bs_; }
  int array_size() const { return n_array_; }

  const std::vector<InterceptEntry>& entries(int b, int p, int nt_b) const;
  std::vector<InterceptEntry>& mutable_entries(int b, int p, int nt_b);

  bool has_any(int b, int p, int nt_b) const {
    return !entries(b, p, nt_b).empty();
  }

  // Unipolar rows of BS owner's estimate that have at least one intercept
  // toward `peer` (the dependency mask used when sharing dominant entries).
  std::vector<bool> row_mask(int owner, int peer) const;

  // Copy of the table keeping only intercepts whose position lies in the
  // axis-aligned box [lo, hi] (componentwise).
  RayInterceptTable restricted_to_box(const Eigen::Vector2d& lo,
                                      const Eigen::Vector2d& hi) const;

  // Total number of stored entries over all (b, p, nt_b).
  std::size_t total_entries() const;

 private:
  std::size_t slot(int b, int p, int nt_b) const;
  int num_bs_ = 0;
  int n_array_ = 0;
  std::vector<std::vector<InterceptEntry>> data_;
};

// Build the full table for every ordered pair (b, p) and every bipolar ray.
// Intercepts farther than 10 x (deployment bounding-box diagonal, UE
// included) along either ray are discarded: they carry negligible
// probability mass under the r^-beta path loss and bloat the table.
RayInterceptTable build_intercept_table(const NetworkDeployment& deployment,
                                        int n_array);

// Intersection of the per-BS boxes [D_b - w, D_b + w] (the region where the
// UE can possibly be when every BS knows the UE lies within w of it).
std::pair<Eigen::Vector2d, Eigen::Vector2d> feasible_box(
    const NetworkDeployment& deployment, double half_width);

// Local angle, at a UE hypothetically sitting on the (nt_b, nt_p) intercept
// with its beam nt_u pointed at BS b, of the path toward BS p.
// Core form: all geometry passed explicitly; delta_pb = D_p - D_b.
double conditional_aod(int nt_b, int nt_p, int nt_u, double r_b,
                       const Eigen::Vector2d& delta_pb, double theta_b,
                       int n_bs, int n_ue);

// Table-backed form; throws std::domain_error when (nt_b, nt_p) has no
// stored intercept for the pair (b, p).
double conditional_aod(int nt_b, int nt_p, int nt_u,
                       const RayInterceptTable& table,
                       const NetworkDeployment& deployment, int b, int p,
                       int n_ue);

}  // namespace rapid
