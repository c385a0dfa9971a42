#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "rapid/channel.hpp"
#include "rapid/common.hpp"
#include "rapid/geometry.hpp"
#include "rapid/measurement.hpp"
#include "rapid/sparse_recovery.hpp"
#include "test_helpers.hpp"

using namespace rapid;

namespace {

// Noise-free exhaustive-sweep record for one BS of a scene.
MeasurementRecord es_record(const ChannelMatrix& ch, int n_ue, int n_bs,
                            int r_bs, double p_tx, double n0, Rng& rng) {
  const auto sched = es_schedule(n_ue, n_bs, r_bs, 1);
  const auto cb_bs = codebook(n_bs);
  const auto cb_ue = codebook(n_ue);
  std::vector<Eigen::VectorXcd> obs;
  for (int m = 0; m < sched.t_slots; ++m)
    obs.push_back(observe_slot(ch.H, sched.ue_beams[static_cast<std::size_t>(m)],
                               sched.bs_beams[static_cast<std::size_t>(m)][0],
                               cb_ue, cb_bs, p_tx, n0, rng));
  return assemble_cs(sched, 0, obs, p_tx, n0);
}

int argmax_cell(const Eigen::MatrixXcd& v, int* row, int* col) {
  Eigen::Index r = 0, c = 0;
  v.cwiseAbs().maxCoeff(&r, &c);
  *row = static_cast<int>(r);
  *col = static_cast<int>(c);
  return *row;
}

}  // namespace

TEST_CASE("solver names parse with their aliases") {
  CHECK(solver_kind_from_string("omp") == SolverKind::kOrthogonalMatchingPursuit);
  CHECK(solver_kind_from_string("orthogonal-matching-pursuit") ==
        SolverKind::kOrthogonalMatchingPursuit);
  CHECK(solver_kind_from_string("ista") == SolverKind::kIterativeShrinkage);
  CHECK(solver_kind_from_string("iterative-shrinkage") ==
        SolverKind::kIterativeShrinkage);
  CHECK(solver_kind_from_string("oracle") == SolverKind::kOracleLeastSquares);
  CHECK(solver_kind_from_string("oracle-least-squares") ==
        SolverKind::kOracleLeastSquares);
  CHECK_THROWS_AS((void)solver_kind_from_string("basis-pursuit"), ConfigError);
  CHECK(to_string(SolverKind::kIterativeShrinkage) == "iterative-shrinkage");
}

TEST_CASE("recovery configuration is validated") {
  RecoveryConfig bad;
  bad.sparsity_k = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = RecoveryConfig{};
  bad.tol = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = RecoveryConfig{};
  bad.max_iters = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  RecoveryConfig ok;
  CHECK_NOTHROW(ok.validate());
}

TEST_CASE("noise-free single-path recovery is exact on grid scenes") {
  Rng rng(101);
  const int n_bs = 16, n_ue = 8;
  for (int trial = 0; trial < 20; ++trial) {
    const auto scene = rapid::test::grid_scene(rng, 1, n_bs, n_ue);
    const auto ch = generate_channel(scene.deployment, 0, 4.0, n_bs, n_ue, rng);
    auto record = es_record(ch, n_ue, n_bs, 4, 1.0, 0.0, rng);
    for (SolverKind kind : {SolverKind::kOrthogonalMatchingPursuit,
                            SolverKind::kOracleLeastSquares}) {
      RecoveryConfig cfg;
      cfg.solver = kind;
      cfg.sparsity_k = 1;
      const auto est = recover(record, cfg);
      int row = 0, col = 0;
      argmax_cell(est.v_hat, &row, &col);
      CHECK(row == std::abs(scene.idx_bs[0]));
      CHECK(col == std::abs(scene.idx_ue[0]));
      CHECK(std::abs(est.v_hat(row, col) - ch.alpha) <
            1e-6 * std::abs(ch.alpha));
      // Everything off-support is exactly zero for the greedy solvers.
      Eigen::MatrixXcd rest = est.v_hat;
      rest(row, col) = 0.0;
      CHECK(rest.cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("greedy and oracle solvers pick the same support without noise") {
  Rng rng(111);
  const int n_bs = 16, n_ue = 8;
  int matched = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto dep = rapid::test::random_deployment(rng, 1);
    const auto ch = generate_channel(dep, 0, 4.0, n_bs, n_ue, rng);
    auto record = es_record(ch, n_ue, n_bs, 4, 1.0, 0.0, rng);
    RecoveryConfig omp_cfg, oracle_cfg;
    omp_cfg.solver = SolverKind::kOrthogonalMatchingPursuit;
    omp_cfg.sparsity_k = 1;
    oracle_cfg.solver = SolverKind::kOracleLeastSquares;
    oracle_cfg.sparsity_k = 1;
    const auto a = recover(record, omp_cfg);
    const auto b = recover(record, oracle_cfg);
    int ra = 0, ca = 0, rb = 0, cb = 0;
    argmax_cell(a.v_hat, &ra, &ca);
    argmax_cell(b.v_hat, &rb, &cb);
    CHECK(ra == rb);
    CHECK(ca == cb);
    if (ra == rb && ca == cb) ++matched;
  }
  CHECK(matched == 100);
}

TEST_CASE("all solvers return zero for a zero observation") {
  Rng rng(121);
  const int n_bs = 8, n_ue = 4;
  const auto sched = draw_schedule(3, 12, n_ue, n_bs, 2, 3, 1);
  std::vector<Eigen::VectorXcd> obs(
      static_cast<std::size_t>(sched.t_slots),
      Eigen::VectorXcd::Zero(3));
  const auto record = assemble_cs(sched, 0, obs, 1.0, 1e-5);
  for (SolverKind kind : {SolverKind::kOrthogonalMatchingPursuit,
                          SolverKind::kIterativeShrinkage,
                          SolverKind::kOracleLeastSquares}) {
    RecoveryConfig cfg;
    cfg.solver = kind;
    cfg.sparsity_k = 2;
    const auto est = recover(record, cfg);
    CHECK(est.v_hat.cwiseAbs().maxCoeff() == 0.0);
    CHECK(est.residual_norm == 0.0);
  }
}

TEST_CASE("shrinkage solver matches the closed-form lasso on sweep designs") {
  // Exhaustive sweeps hit each vec(V) column in exactly one measurement with
  // unit coefficient, so the lasso separates per column:
  //   v*_c = exp(i arg y_m) max(0, |y_m| - gamma / (2 A_g)) / A_g.
  Rng rng(131);
  const int n_bs = 8, n_ue = 4;
  const auto dep = rapid::test::random_deployment(rng, 1);
  const auto ch = generate_channel(dep, 0, 4.0, n_bs, n_ue, rng);
  auto record = es_record(ch, n_ue, n_bs, 4, 1.0, 1e-5, rng);
  RecoveryConfig cfg;
  cfg.solver = SolverKind::kIterativeShrinkage;
  cfg.gamma = 2e-4;
  cfg.max_iters = 4000;
  cfg.tol = 1e-12;
  const auto est = recover(record, cfg);
  CHECK(est.converged);
  // Map measurements back to columns to evaluate the closed form.
  Eigen::MatrixXcd expect = Eigen::MatrixXcd::Zero(n_bs, n_ue);
  for (std::size_t i = 0; i < record.rows.size(); ++i) {
    REQUIRE(record.rows[i].entries.size() == 1);
    const int c = record.rows[i].entries[0].first;
    const cplx y = record.y(static_cast<Eigen::Index>(i));
    const double mag =
        std::max(0.0, std::abs(y) - cfg.gamma / (2.0 * record.a_g));
    if (mag > 0.0 && std::abs(y) > 0.0)
      expect(c % n_bs, c / n_bs) = y / std::abs(y) * mag / record.a_g;
  }
  CHECK((est.v_hat - expect).norm() < 1e-6 * (expect.norm() + 1e-12));
}

TEST_CASE("shrinkage objective history is monotone non-increasing") {
  Rng rng(141);
  const int n_bs = 8, n_ue = 4;
  const auto dep = rapid::test::random_deployment(rng, 1);
  const auto ch = generate_channel(dep, 0, 4.0, n_bs, n_ue, rng);
  const auto sched = draw_schedule(9, 10, n_ue, n_bs, 2, 3, 1);
  const auto cb_bs = codebook(n_bs);
  const auto cb_ue = codebook(n_ue);
  std::vector<Eigen::VectorXcd> obs;
  for (int m = 0; m < sched.t_slots; ++m)
    obs.push_back(observe_slot(ch.H, sched.ue_beams[static_cast<std::size_t>(m)],
                               sched.bs_beams[static_cast<std::size_t>(m)][0],
                               cb_ue, cb_bs, 1.0, 1e-5, rng));
  const auto record = assemble_cs(sched, 0, obs, 1.0, 1e-5);
  RecoveryConfig cfg;
  cfg.solver = SolverKind::kIterativeShrinkage;
  cfg.max_iters = 300;
  cfg.tol = 1e-10;
  const auto est = recover(record, cfg);
  REQUIRE(est.objective_history.size() >= 2);
  for (std::size_t i = 1; i < est.objective_history.size(); ++i)
    CHECK(est.objective_history[i] <=
          est.objective_history[i - 1] + 1e-12 * est.objective_history[0]);
  // A one-iteration budget cannot converge on this instance.
  cfg.max_iters = 1;
  const auto truncated = recover(record, cfg);
  CHECK_FALSE(truncated.converged);
  CHECK(truncated.iterations == 1);
}

TEST_CASE("two-path recovery finds both grid cells") {
  Rng rng(151);
  const int n_bs = 16, n_ue = 8;
  const auto cb_bs = codebook(n_bs);
  const auto cb_ue = codebook(n_ue);
  for (int trial = 0; trial < 10; ++trial) {
    // Two distinct on-grid cells with comparable weights.
    const int r1 = static_cast<int>(rng.uniform_int(n_bs));
    const int c1 = static_cast<int>(rng.uniform_int(n_ue));
    int r2 = r1, c2 = c1;
    while (r2 == r1 && c2 == c1) {
      r2 = static_cast<int>(rng.uniform_int(n_bs));
      c2 = static_cast<int>(rng.uniform_int(n_ue));
    }
    Eigen::MatrixXcd v_true = Eigen::MatrixXcd::Zero(n_bs, n_ue);
    v_true(r1, c1) = rng.cnormal(1.0);
    v_true(r2, c2) = rng.cnormal(1.0);
    const Eigen::MatrixXcd h = reconstruct_from_virtual(v_true, cb_bs, cb_ue);
    const auto sched = es_schedule(n_ue, n_bs, 4, 1);
    std::vector<Eigen::VectorXcd> obs;
    Rng quiet(1);
    for (int m = 0; m < sched.t_slots; ++m)
      obs.push_back(observe_slot(h, sched.ue_beams[static_cast<std::size_t>(m)],
                                 sched.bs_beams[static_cast<std::size_t>(m)][0],
                                 cb_ue, cb_bs, 1.0, 0.0, quiet));
    const auto record = assemble_cs(sched, 0, obs, 1.0, 0.0);
    for (SolverKind kind : {SolverKind::kOrthogonalMatchingPursuit,
                            SolverKind::kOracleLeastSquares}) {
      RecoveryConfig cfg;
      cfg.solver = kind;
      cfg.sparsity_k = 2;
      const auto est = recover(record, cfg);
      CHECK((est.v_hat - v_true).norm() < 1e-6 * v_true.norm());
    }
  }
}

TEST_CASE("reported residual is consistent and never worse than zero") {
  Rng rng(161);
  const int n_bs = 8, n_ue = 4;
  const auto dep = rapid::test::random_deployment(rng, 1);
  const auto ch = generate_channel(dep, 0, 4.0, n_bs, n_ue, rng);
  const auto sched = draw_schedule(21, 10, n_ue, n_bs, 2, 3, 1);
  const auto cb_bs = codebook(n_bs);
  const auto cb_ue = codebook(n_ue);
  std::vector<Eigen::VectorXcd> obs;
  for (int m = 0; m < sched.t_slots; ++m)
    obs.push_back(observe_slot(ch.H, sched.ue_beams[static_cast<std::size_t>(m)],
                               sched.bs_beams[static_cast<std::size_t>(m)][0],
                               cb_ue, cb_bs, 1.0, 1e-5, rng));
  const auto record = assemble_cs(sched, 0, obs, 1.0, 1e-5);
  for (SolverKind kind : {SolverKind::kOrthogonalMatchingPursuit,
                          SolverKind::kIterativeShrinkage,
                          SolverKind::kOracleLeastSquares}) {
    RecoveryConfig cfg;
    cfg.solver = kind;
    cfg.sparsity_k = 2;
    cfg.max_iters = 500;
    const auto est = recover(record, cfg);
    const Eigen::VectorXcd flat =
        Eigen::Map<const Eigen::VectorXcd>(est.v_hat.data(), est.v_hat.size());
    const double recomputed = (record.y - apply_sensing(record, flat)).norm();
    CHECK(est.residual_norm == doctest::Approx(recomputed).epsilon(1e-9));
    CHECK(est.residual_norm <= record.y.norm() * (1.0 + 1e-12));
  }
}

TEST_CASE("dominant entries respect the mask, ordering, and truncation") {
  const int n_bs = 4, n_ue = 3;
  Eigen::MatrixXcd v(n_bs, n_ue);
  v.setZero();
  v(0, 0) = cplx(3.0, 0.0);
  v(1, 0) = cplx(0.0, 2.0);
  v(2, 1) = cplx(-2.0, 0.0);   // ties |v(1,0)|
  v(3, 2) = cplx(0.5, 0.5);
  std::vector<bool> all(n_bs, true);

  auto top = dominant_entries(v, 10, all);
  REQUIRE(top.size() == 4);  // only nonzeros are shared
  CHECK(top[0].row == 0);
  CHECK(top[0].col == 0);
  CHECK(top[0].value == v(0, 0));
  // Magnitude tie between (1,0) and (2,1): lexicographic (row, col) first.
  CHECK(top[1].row == 1);
  CHECK(top[1].col == 0);
  CHECK(top[2].row == 2);
  CHECK(top[2].col == 1);
  CHECK(top[3].row == 3);

  auto top2 = dominant_entries(v, 2, all);
  REQUIRE(top2.size() == 2);
  CHECK(top2[0].row == 0);
  CHECK(top2[1].row == 1);

  std::vector<bool> mask(n_bs, false);
  mask[2] = true;
  mask[3] = true;
  auto masked = dominant_entries(v, 10, mask);
  REQUIRE(masked.size() == 2);
  CHECK(masked[0].row == 2);
  CHECK(masked[1].row == 3);

  CHECK_THROWS_AS((void)dominant_entries(v, 0, all), ConfigError);
  CHECK_THROWS_AS((void)dominant_entries(v, 2, std::vector<bool>(2, true)),
                  ConfigError);
}

TEST_CASE("dependency masks of a collinear pair are proper and symmetric") {
  NetworkDeployment dep;
  dep.bs_positions = {{-10.0, 0.0}, {10.0, 0.0}};
  dep.bs_orientations = {0.0, 0.0};
  dep.ue_orientation = 0.0;
  const int n_bs = 32;
  const auto table = build_intercept_table(dep, n_bs);
  const auto m01 = table.row_mask(0, 1);
  const auto m10 = table.row_mask(1, 0);
  REQUIRE(m01.size() == static_cast<std::size_t>(n_bs));
  REQUIRE(m10.size() == static_cast<std::size_t>(n_bs));
  // Point reflection through the midpoint swaps the stations and maps a ray
  // of unipolar row r onto one of row n_bs - r, so the two masks are parity
  // duals of each other.
  for (int r = 1; r < n_bs; ++r)
    CHECK(m10[static_cast<std::size_t>(r)] ==
          m01[static_cast<std::size_t>(n_bs - r)]);
  // The along-axis ray never re-crosses the axis away from the stations.
  CHECK_FALSE(m01[0]);
  CHECK_FALSE(m10[0]);
  int popcount = 0;
  for (bool bit : m01) popcount += bit ? 1 : 0;
  CHECK(popcount > 0);
  CHECK(popcount < n_bs);  // strictly proper mask
  // Signed mirror rays intercept symmetrically.
  for (int nt = 1; nt < n_bs; ++nt)
    CHECK(table.has_any(1, 0, nt) == table.has_any(1, 0, -nt));
}
