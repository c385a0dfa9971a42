#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "rapid/channel.hpp"
#include "rapid/common.hpp"
#include "rapid/measurement.hpp"
#include "test_helpers.hpp"

using namespace rapid;

namespace {
Eigen::VectorXcd vec_of(const Eigen::MatrixXcd& m) {
  return Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size());
}
}  // namespace

TEST_CASE("random schedules are reproducible and within-slot distinct") {
  const auto a = draw_schedule(42, 50, 16, 32, 4, 8, 3);
  const auto b = draw_schedule(42, 50, 16, 32, 4, 8, 3);
  REQUIRE(a.ue_beams.size() == 50);
  REQUIRE(a.bs_beams.size() == 50);
  for (int m = 0; m < 50; ++m) {
    CHECK(a.ue_beams[static_cast<std::size_t>(m)] ==
          b.ue_beams[static_cast<std::size_t>(m)]);
    const std::set<int> distinct_ue(a.ue_beams[static_cast<std::size_t>(m)].begin(),
                                    a.ue_beams[static_cast<std::size_t>(m)].end());
    CHECK(distinct_ue.size() == 4);
    for (int s = 0; s < 3; ++s) {
      const auto& beams = a.bs_beams[static_cast<std::size_t>(m)][static_cast<std::size_t>(s)];
      CHECK(beams == b.bs_beams[static_cast<std::size_t>(m)][static_cast<std::size_t>(s)]);
      CHECK(std::set<int>(beams.begin(), beams.end()).size() == 8);
    }
  }
  // Different seeds diverge.
  const auto c = draw_schedule(43, 50, 16, 32, 4, 8, 3);
  CHECK(a.ue_beams != c.ue_beams);
}

TEST_CASE("oversized per-slot selections are rejected") {
  CHECK_THROWS_AS((void)draw_schedule(1, 4, 8, 8, 9, 2, 1), ConfigError);
  CHECK_THROWS_AS((void)draw_schedule(1, 4, 8, 8, 2, 9, 1), ConfigError);
}

TEST_CASE("selecting all beams per slot yields a permutation") {
  const auto s = draw_schedule(7, 20, 8, 8, 8, 8, 1);
  std::vector<int> all(8);
  for (int i = 0; i < 8; ++i) all[static_cast<std::size_t>(i)] = i;
  for (int m = 0; m < 20; ++m) {
    auto ue = s.ue_beams[static_cast<std::size_t>(m)];
    std::sort(ue.begin(), ue.end());
    CHECK(ue == all);
  }
}

TEST_CASE("every beam index is selected uniformly often") {
  const int t_slots = 100000, n = 16, r = 4;
  const auto s = draw_schedule(12345, t_slots, n, n, r, r, 1);
  std::vector<int> ue_counts(n, 0), bs_counts(n, 0);
  for (int m = 0; m < t_slots; ++m) {
    for (int u : s.ue_beams[static_cast<std::size_t>(m)])
      ++ue_counts[static_cast<std::size_t>(u)];
    for (int w : s.bs_beams[static_cast<std::size_t>(m)][0])
      ++bs_counts[static_cast<std::size_t>(w)];
  }
  const double p = static_cast<double>(r) / n;
  const double expect = t_slots * p;
  const double sigma = std::sqrt(t_slots * p * (1.0 - p));
  double chi2_ue = 0.0, chi2_bs = 0.0;
  for (int i = 0; i < n; ++i) {
    CHECK(std::abs(ue_counts[static_cast<std::size_t>(i)] - expect) <= 3.0 * sigma);
    CHECK(std::abs(bs_counts[static_cast<std::size_t>(i)] - expect) <= 3.0 * sigma);
    chi2_ue += (ue_counts[static_cast<std::size_t>(i)] - expect) *
               (ue_counts[static_cast<std::size_t>(i)] - expect) / expect;
    chi2_bs += (bs_counts[static_cast<std::size_t>(i)] - expect) *
               (bs_counts[static_cast<std::size_t>(i)] - expect) / expect;
  }
  // 99.9th percentile of chi-square with 15 degrees of freedom.
  CHECK(chi2_ue < 37.7);
  CHECK(chi2_bs < 37.7);
}

TEST_CASE("exhaustive sweep covers every beam pair exactly once") {
  CHECK(es_slot_count(16, 32, 8) == 64);
  CHECK_THROWS_AS((void)es_slot_count(16, 32, 5), ConfigError);
  const auto s = es_schedule(16, 32, 8, 2);
  CHECK(s.exhaustive);
  CHECK(s.t_slots == 64);
  CHECK(s.r_ue == 1);
  Eigen::MatrixXi hits = Eigen::MatrixXi::Zero(32, 16);
  for (int m = 0; m < s.t_slots; ++m) {
    REQUIRE(s.ue_beams[static_cast<std::size_t>(m)].size() == 1);
    const int u = s.ue_beams[static_cast<std::size_t>(m)][0];
    // Every station sweeps the same blocks.
    CHECK(s.bs_beams[static_cast<std::size_t>(m)][0] ==
          s.bs_beams[static_cast<std::size_t>(m)][1]);
    for (int w : s.bs_beams[static_cast<std::size_t>(m)][0]) ++hits(w, u);
  }
  CHECK(hits.minCoeff() == 1);
  CHECK(hits.maxCoeff() == 1);
}

TEST_CASE("zero transmit power leaves pure noise") {
  const int n_bs = 16, n_ue = 8;
  const auto cb_bs = codebook(n_bs);
  const auto cb_ue = codebook(n_ue);
  Rng rng(5);
  const auto dep = rapid::test::random_deployment(rng, 1);
  const auto ch = generate_channel(dep, 0, 4.0, n_bs, n_ue, rng);
  // Without noise either, the output is exactly zero.
  Rng quiet(6);
  const auto silent =
      observe_slot(ch.H, {0, 1}, {0, 1, 2, 3}, cb_ue, cb_bs, 0.0, 0.0, quiet);
  CHECK(silent.cwiseAbs().maxCoeff() == 0.0);
  // With noise, the sample variance matches the configured power.
  const double n0 = 1e-5;
  double acc = 0.0;
  int count = 0;
  for (int i = 0; i < 2500; ++i) {
    const auto y =
        observe_slot(ch.H, {0, 1}, {0, 1, 2, 3}, cb_ue, cb_bs, 0.0, n0, rng);
    acc += y.squaredNorm();
    count += static_cast<int>(y.size());
  }
  CHECK(acc / count == doctest::Approx(n0).epsilon(0.05));
}

TEST_CASE("noise-free aligned beams measure the scaled virtual entry") {
  Rng rng(15);
  const int n_bs = 16, n_ue = 8;
  const auto cb_bs = codebook(n_bs);
  const auto cb_ue = codebook(n_ue);
  const auto scene = rapid::test::grid_scene(rng, 1, n_bs, n_ue);
  const auto ch = generate_channel(scene.deployment, 0, 4.0, n_bs, n_ue, rng);
  const auto v = project_virtual(ch.H, cb_bs, cb_ue);
  const int row = std::abs(scene.idx_bs[0]);
  const int col = std::abs(scene.idx_ue[0]);
  const double p_tx = 2.0;
  const int off_row = (row + 5) % n_bs;
  Rng quiet(16);
  const auto y = observe_slot(ch.H, {col}, {row, off_row}, cb_ue, cb_bs, p_tx,
                              0.0, quiet);
  const double a_g = std::sqrt(p_tx * n_bs * n_ue / 1.0);
  CHECK(std::abs(y(0)) ==
        doctest::Approx(a_g * std::abs(v(row, col))).epsilon(1e-9));
  // The misaligned chain sees nothing on an exact-grid scene.
  CHECK(std::abs(y(1)) < 1e-12 * a_g * std::abs(v(row, col)));
}

TEST_CASE("observation noise variance matches the configured power") {
  const int n_bs = 16, n_ue = 8;
  const auto cb_bs = codebook(n_bs);
  const auto cb_ue = codebook(n_ue);
  const Eigen::MatrixXcd h0 = Eigen::MatrixXcd::Zero(n_bs, n_ue);
  const double n0 = 1e-5;
  Rng rng(27);
  double acc = 0.0;
  int count = 0;
  for (int i = 0; i < 1250; ++i) {
    const auto y =
        observe_slot(h0, {0, 3}, {1, 4, 7, 9, 11, 12, 13, 15}, cb_ue, cb_bs,
                     1.0, n0, rng);
    acc += y.squaredNorm();
    count += static_cast<int>(y.size());
  }
  CHECK(count == 10000);
  CHECK(acc / count == doctest::Approx(n0).epsilon(0.05));
}

TEST_CASE("sensing rows are unit-coefficient selectors matching the schedule") {
  Rng rng(35);
  const int n_bs = 16, n_ue = 8, t = 6, r_ue = 3, r_bs = 4;
  const auto sched = draw_schedule(99, t, n_ue, n_bs, r_ue, r_bs, 2);
  std::vector<Eigen::VectorXcd> obs;
  const Eigen::MatrixXcd h0 = Eigen::MatrixXcd::Zero(n_bs, n_ue);
  const auto cb_bs = codebook(n_bs);
  const auto cb_ue = codebook(n_ue);
  for (int m = 0; m < t; ++m)
    obs.push_back(observe_slot(h0, sched.ue_beams[static_cast<std::size_t>(m)],
                               sched.bs_beams[static_cast<std::size_t>(m)][1],
                               cb_ue, cb_bs, 1.0, 0.0, rng));
  const auto record = assemble_cs(sched, 1, obs, 1.0, 0.0);
  CHECK(record.y.size() == t * r_bs);
  CHECK(record.a_g ==
        doctest::Approx(std::sqrt(1.0 * n_bs * n_ue / r_ue)).epsilon(1e-12));
  CHECK(record.y.cwiseAbs().maxCoeff() == 0.0);  // zero channel, no noise
  REQUIRE(record.rows.size() == static_cast<std::size_t>(t * r_bs));
  for (int m = 0; m < t; ++m) {
    for (int k = 0; k < r_bs; ++k) {
      const auto& row = record.rows[static_cast<std::size_t>(m * r_bs + k)];
      REQUIRE(row.entries.size() == static_cast<std::size_t>(r_ue));
      const int w = sched.bs_beams[static_cast<std::size_t>(m)][1][static_cast<std::size_t>(k)];
      std::set<int> expect;
      for (int u : sched.ue_beams[static_cast<std::size_t>(m)])
        expect.insert(u * n_bs + w);
      std::set<int> got;
      for (const auto& [colidx, coeff] : row.entries) {
        CHECK(coeff == cplx(1.0, 0.0));
        got.insert(colidx);
      }
      CHECK(got == expect);
    }
  }
}

TEST_CASE("block rows reproduce the per-slot pilot equation on dense inputs") {
  Rng rng(45);
  const int n_bs = 16, n_ue = 8, t = 6, r_ue = 3, r_bs = 4;
  const auto cb_bs = codebook(n_bs);
  const auto cb_ue = codebook(n_ue);
  Eigen::MatrixXcd v(n_bs, n_ue);
  for (int i = 0; i < n_bs; ++i)
    for (int j = 0; j < n_ue; ++j) v(i, j) = rng.cnormal(1.0);
  const Eigen::MatrixXcd h = reconstruct_from_virtual(v, cb_bs, cb_ue);
  const auto sched = draw_schedule(7, t, n_ue, n_bs, r_ue, r_bs, 1);
  std::vector<Eigen::VectorXcd> obs;
  Rng quiet(1);
  for (int m = 0; m < t; ++m)
    obs.push_back(observe_slot(h, sched.ue_beams[static_cast<std::size_t>(m)],
                               sched.bs_beams[static_cast<std::size_t>(m)][0],
                               cb_ue, cb_bs, 2.5, 0.0, quiet));
  const auto record = assemble_cs(sched, 0, obs, 2.5, 0.0);
  const Eigen::VectorXcd model = apply_sensing(record, vec_of(v));
  CHECK((record.y - model).norm() < 1e-9 * record.y.norm());
}

TEST_CASE("noise-free single-path measurements are exactly consistent") {
  Rng rng(55);
  const int n_bs = 16, n_ue = 8;
  const auto cb_bs = codebook(n_bs);
  const auto cb_ue = codebook(n_ue);
  for (int trial = 0; trial < 5; ++trial) {
    const auto dep = rapid::test::random_deployment(rng, 1);
    const auto ch = generate_channel(dep, 0, 4.0, n_bs, n_ue, rng);
    const auto sched = draw_schedule(100 + static_cast<std::uint64_t>(trial), 24,
                                     n_ue, n_bs, 2, 4, 1);
    std::vector<Eigen::VectorXcd> obs;
    for (int m = 0; m < sched.t_slots; ++m)
      obs.push_back(observe_slot(ch.H, sched.ue_beams[static_cast<std::size_t>(m)],
                                 sched.bs_beams[static_cast<std::size_t>(m)][0],
                                 cb_ue, cb_bs, 1.0, 0.0, rng));
    const auto record = assemble_cs(sched, 0, obs, 1.0, 0.0);
    const auto v = project_virtual(ch.H, cb_bs, cb_ue);
    const Eigen::VectorXcd model = apply_sensing(record, vec_of(v));
    CHECK((record.y - model).norm() < 1e-9 * record.y.norm());
  }
}

TEST_CASE("dense sensing matrix and adjoint agree with the sparse operators") {
  Rng rng(65);
  const int n_bs = 8, n_ue = 4, t = 5, r_ue = 2, r_bs = 3;
  const auto sched = draw_schedule(11, t, n_ue, n_bs, r_ue, r_bs, 1);
  const Eigen::MatrixXcd h0 = Eigen::MatrixXcd::Zero(n_bs, n_ue);
  const auto cb_bs = codebook(n_bs);
  const auto cb_ue = codebook(n_ue);
  std::vector<Eigen::VectorXcd> obs;
  for (int m = 0; m < t; ++m)
    obs.push_back(observe_slot(h0, sched.ue_beams[static_cast<std::size_t>(m)],
                               sched.bs_beams[static_cast<std::size_t>(m)][0],
                               cb_ue, cb_bs, 1.0, 1e-5, rng));
  const auto record = assemble_cs(sched, 0, obs, 1.0, 1e-5);
  const auto dense = dense_sensing_matrix(record);
  CHECK(dense.rows() == t * r_bs);
  CHECK(dense.cols() == n_bs * n_ue);
  Eigen::VectorXcd v(n_bs * n_ue), x(t * r_bs);
  for (int i = 0; i < v.size(); ++i) v(i) = rng.cnormal(1.0);
  for (int i = 0; i < x.size(); ++i) x(i) = rng.cnormal(1.0);
  CHECK((dense * v - apply_sensing(record, v)).norm() < 1e-12 * v.norm());
  // Adjoint identity <x, A v> = <A^H x, v>.
  const cplx lhs = x.dot(apply_sensing(record, v));
  const cplx rhs = apply_sensing_adjoint(record, x).dot(v);
  CHECK(std::abs(lhs - rhs) < 1e-10 * std::abs(lhs));
}
