#pragma once

// Experiment orchestration: configuration ingestion, Monte Carlo trials with
// paired measurement reuse across schemes, achievable-rate and coverage
// metrics, deterministic multi-threaded execution, and CSV/JSON emission.

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rapid/channel.hpp"
#include "rapid/common.hpp"
#include "rapid/geometry.hpp"
#include "rapid/measurement.hpp"
#include "rapid/rapid_fusion.hpp"
#include "rapid/sparse_recovery.hpp"

namespace rapid {

// dBm -> linear power, 10^(dBm/10) (normalized units; the scale is pinned by
// the network's minimum-SNR anchor at the grid corner).
double dbm_to_linear(double p_dbm);

// One training/selection scheme: an exhaustive-sweep or random-directional
// pilot schedule, optionally followed by cooperative fusion.
struct SchemeSpec {
  bool exhaustive = false;  // ES when true, RDB when false
  bool rapid = false;       // apply cooperative fusion before selection
  std::string name;         // "ES", "RDB", "ES+RAPID", "RDB+RAPID"
};

SchemeSpec parse_scheme(const std::string& name);

struct ExperimentConfig {
  int num_bs = 3;
  int n_ue = 16;
  int n_bs = 32;
  int r_ue = 4;
  int r_bs = 8;
  int t_e = 48;                  // RDB slot budget
  double grid_half_width = 50.0; // meters
  double beta = 4.0;
  double n0 = 1e-5;
  std::vector<double> p_dbm = {0.0, 10.0};
  int trials = 100;
  std::uint64_t seed = 1;
  std::vector<std::string> schemes = {"ES", "RDB", "ES+RAPID", "RDB+RAPID"};
  int share_n_d = 4;
  std::vector<double> r_th = {0.5, 1.0, 2.0, 4.0};
  int expected_paths = 1;

  // Sparse recovery settings (RecoveryConfig keys).
  std::string solver = "orthogonal-matching-pursuit";
  int sparsity_k = 16;
  double gamma = -1.0;  // < 0: automatic default
  int max_iters = 200;
  double tol = 1e-6;

  // Fusion/selection settings.
  double posterior_floor = 1e-6;  // probability floor inside the log prior
  double selection_floor = 0.0;   // select_beams exclusion threshold

  int workers = 0;  // 0: one per hardware thread

  void validate() const;
  RecoveryConfig recovery() const;
  std::vector<SchemeSpec> scheme_specs() const;

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_json_file(const std::string& path);
};

// log2 det(I + (P/N0) W^H H F F^H H^H W) against the TRUE channel; selection
// errors show up as rate loss. W: N_BS x d, F: N_UE x d.
double achievable_rate(const Eigen::MatrixXcd& h_true,
                       const Eigen::MatrixXcd& w_d,
                       const Eigen::MatrixXcd& f_d, double p_lin, double n0);

// Single-stream convenience: beams (n_b, n_u) select one column from each
// candidate codebook.
double achievable_rate(const Eigen::MatrixXcd& h_true,
                       const std::pair<int, int>& beams,
                       const Eigen::MatrixXcd& codebook_bs,
                       const Eigen::MatrixXcd& codebook_ue, double p_lin,
                       double n0);

// Number of links whose rate strictly exceeds the threshold.
int coverage_counts(const std::vector<double>& rates, double r_th);

// Posterior selection map: combines the measurement evidence |v_hat|^2
// (weighted by the scheme's per-cell evidence weight) with the fused prior
// map (floored before the log). Returns a normalized probability map.
BeamProbabilityMap posterior_selection_map(const BeamProbabilityMap& prior,
                                           const Eigen::MatrixXcd& v_hat,
                                           double weight, double floor);

// Metrics of one scheme in one trial.
struct SchemeTrialMetrics {
  std::vector<double> rates;  // per BS
  double min_rate = 0.0;
  double mean_rate = 0.0;
  double max_rate = 0.0;
  std::vector<int> n_lo;  // per configured threshold
  std::vector<std::pair<int, int>> selections;  // per BS
};

// All schemes of one (power, trial) unit, indexed like scheme_specs().
struct UnitMetrics {
  std::vector<SchemeTrialMetrics> schemes;
};

struct AggregateRow {
  std::string scheme;
  double p_dbm = 0.0;
  std::string metric;
  double value = 0.0;
  double ci95 = 0.0;
};

struct ExperimentResults {
  ExperimentConfig cfg;
  // units[power_index * trials + trial]
  std::vector<UnitMetrics> units;
  std::vector<AggregateRow> rows;
};

// Runs every (power, trial) unit over a worker pool; per-unit RNG streams are
// derived from (seed, unit index), so results do not depend on worker count.
ExperimentResults run_experiment(const ExperimentConfig& cfg);

// Deterministic CSV: header scheme,P_dBm,metric,value,ci95 then one row per
// aggregate, %.10g formatting.
std::string to_csv(const ExperimentResults& results);

// JSON mirror of the aggregates (full per-trial arrays when verbose).
nlohmann::json to_json(const ExperimentResults& results, bool verbose);

// Fast self-check of library invariants (codebooks, schedules, consistency
// of the measurement model, posterior ranges, table symmetry). Throws on
// violation; used by the CLI `validate` subcommand.
void validate_invariants(const ExperimentConfig& cfg);

}  // namespace rapid
