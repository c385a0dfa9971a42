#pragma once

// Pilot transmission/reception: synchronized pseudo-random candidate-beam
// schedules, per-slot observations, and assembly of the stacked compressed-
// sensing system y = A_g * A * vec(V) + n.

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "rapid/common.hpp"

namespace rapid {

// Beam selections per slot for the UE and every BS. Fully reproducible from
// (seed, t_slots, r_ue, r_bs, n_ue, n_bs, num_bs); within a slot a
// terminal's selected indexes are distinct (sampling without replacement).
struct BeamSchedule {
  int t_slots = 0;
  int n_ue = 0, n_bs = 0;
  int r_ue = 0, r_bs = 0;
  int num_bs = 0;
  bool exhaustive = false;
  std::uint64_t seed = 0;
  // ue_beams[m]: r_ue indexes; bs_beams[m][b]: r_bs indexes.
  std::vector<std::vector<int>> ue_beams;
  std::vector<std::vector<std::vector<int>>> bs_beams;
};

// Uniform random schedule (random directional beamforming). Every index is
// equally likely each slot; deterministic under a fixed seed.
BeamSchedule draw_schedule(std::uint64_t seed, int t_slots, int n_ue, int n_bs,
                           int r_ue, int r_bs, int num_bs);

// Deterministic exhaustive-search sweep: one UE beam plus an aligned block
// of r_bs BS beams per slot, covering every (n_u, n_b) pair exactly once in
// T_ES = n_ue * n_bs / r_bs slots. The same block schedule is used by every
// BS.
BeamSchedule es_schedule(int n_ue, int n_bs, int r_bs, int num_bs);

// Number of slots the exhaustive sweep needs.
int es_slot_count(int n_ue, int n_bs, int r_bs);

// One received pilot slot at one BS: y_m = sqrt(P/R_UE) W_m^H H F_m s + n,
// with all-ones pilots s and i.i.d. CN(0, N0) noise per element. F_m/W_m are
// the scheduled columns of the candidate codebooks.
Eigen::VectorXcd observe_slot(const Eigen::MatrixXcd& H,
                              const std::vector<int>& ue_idx,
                              const std::vector<int>& bs_idx,
                              const Eigen::MatrixXcd& codebook_ue,
                              const Eigen::MatrixXcd& codebook_bs, double p_tx,
                              double n0, Rng& rng);

// One row of the sensing matrix A, stored sparse: (column, coefficient)
// pairs. Columns index vec(V) (column-major: u * N_BS + n_b).
struct SparseRow {
  std::vector<std::pair<int, cplx>> entries;
};

struct MeasurementRecord {
  Eigen::VectorXcd y;           // stacked observations, length T * R_BS
  std::vector<SparseRow> rows;  // sensing matrix A, one row per element of y
  double a_g = 0.0;             // sqrt(P * N_UE * N_BS / R_UE)
  double n0 = 0.0;              // noise power per element
  int n_ue = 0, n_bs = 0;
};

// Stack the observations of BS b and build its sensing matrix. Candidate
// beams drawn from orthonormal codebooks collapse each Kronecker block row
// (s^T F_m^T F_c^*) x (W_m^H W_c) to exact index selections, so rows are
// assembled analytically with unit coefficients.
MeasurementRecord assemble_cs(const BeamSchedule& schedule, int b,
                              const std::vector<Eigen::VectorXcd>& slot_obs,
                              double p_tx, double n0);

// A_g * A * v via the sparse rows.
Eigen::VectorXcd apply_sensing(const MeasurementRecord& record,
                               const Eigen::VectorXcd& v);

// A_g * A^H * x via the sparse rows.
Eigen::VectorXcd apply_sensing_adjoint(const MeasurementRecord& record,
                                       const Eigen::VectorXcd& x);

// Dense materialization of A_g * A (tests and small problems only).
Eigen::MatrixXcd dense_sensing_matrix(const MeasurementRecord& record);

}  // namespace rapid
