#pragma once

// Per-BS estimation of vec(V) from the stacked measurement system, with a
// pluggable solver interface, plus dominant-entry extraction for sharing.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "rapid/common.hpp"
#include "rapid/measurement.hpp"

namespace rapid {

enum class SolverKind {
  kOrthogonalMatchingPursuit,
  kIterativeShrinkage,
  kOracleLeastSquares,
};

SolverKind solver_kind_from_string(const std::string& name);
std::string to_string(SolverKind kind);

struct RecoveryConfig {
  SolverKind solver = SolverKind::kOrthogonalMatchingPursuit;
  int sparsity_k = 1;     // default: the expected path count
  double gamma = -1.0;    // l1 weight; < 0 selects N0 * sqrt(2 ln(N_UE*N_BS))
  int max_iters = 200;
  double tol = 1e-6;

  void validate() const;
};

struct VirtualChannelEstimate {
  Eigen::MatrixXcd v_hat;  // N_BS x N_UE
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = true;
  std::string solver_name;
  // Objective trace (filled by the shrinkage solver; used by tests).
  std::vector<double> objective_history;
};

// Approximate minimizer of ||y - A_g A v||^2 + gamma ||v||_1. Deterministic
// given its inputs; greedy solver support size is at most sparsity_k. The
// estimate never fits worse than zero: ||y - A_g A vec(V_hat)|| <= ||y||.
VirtualChannelEstimate recover(const MeasurementRecord& record,
                               const RecoveryConfig& cfg);

// One shared entry of an estimate: unipolar row (BS beam), column (UE beam).
struct SharedEntry {
  int row = 0;
  int col = 0;
  cplx value;
};

// Top-n_d magnitude entries of v_hat restricted to rows allowed by the
// dependency mask (rows with any intercept toward the receiving peer).
// Magnitude ties break toward the lexicographically smaller (row, col).
// Fewer masked nonzeros than n_d returns all of them.
std::vector<SharedEntry> dominant_entries(const Eigen::MatrixXcd& v_hat,
                                          int n_d,
                                          const std::vector<bool>& row_mask);

}  // namespace rapid
