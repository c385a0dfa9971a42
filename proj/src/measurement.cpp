#include "rapid/measurement.hpp"

#include <cmath>

namespace rapid {

namespace {

void check_dims(int n, int r, const char* what) {
  if (r < 1 || n < 1 || r > n) {
    throw ConfigError(std::string("schedule: need 1 <= R <= N for ") + what);
  }
}

}  // namespace

BeamSchedule draw_schedule(std::uint64_t seed, int t_slots, int n_ue, int n_bs,
                           int r_ue, int r_bs, int num_bs) {
  check_dims(n_ue, r_ue, "UE");
  check_dims(n_bs, r_bs, "BS");
  if (t_slots < 1 || num_bs < 1) {
    throw ConfigError("schedule: t_slots and num_bs must be >= 1");
  }
  BeamSchedule s;
  s.t_slots = t_slots;
  s.n_ue = n_ue;
  s.n_bs = n_bs;
  s.r_ue = r_ue;
  s.r_bs = r_bs;
  s.num_bs = num_bs;
  s.exhaustive = false;
  s.seed = seed;
  Rng rng(seed, /*stream=*/0);
  s.ue_beams.reserve(static_cast<std::size_t>(t_slots));
  s.bs_beams.reserve(static_cast<std::size_t>(t_slots));
  for (int m = 0; m < t_slots; ++m) {
    s.ue_beams.push_back(rng.sample_without_replacement(n_ue, r_ue));
    std::vector<std::vector<int>> per_bs;
    per_bs.reserve(static_cast<std::size_t>(num_bs));
    for (int b = 0; b < num_bs; ++b) {
      per_bs.push_back(rng.sample_without_replacement(n_bs, r_bs));
    }
    s.bs_beams.push_back(std::move(per_bs));
  }
  return s;
}

int es_slot_count(int n_ue, int n_bs, int r_bs) {
  check_dims(n_bs, r_bs, "BS");
  if (n_bs % r_bs != 0) {
    throw ConfigError("es_schedule: N_BS must be divisible by R_BS");
  }
  return n_ue * (n_bs / r_bs);
}

BeamSchedule es_schedule(int n_ue, int n_bs, int r_bs, int num_bs) {
  const int t = es_slot_count(n_ue, n_bs, r_bs);
  const int blocks = n_bs / r_bs;
  BeamSchedule s;
  s.t_slots = t;
  s.n_ue = n_ue;
  s.n_bs = n_bs;
  s.r_ue = 1;  // the sweep concentrates transmit power in one beam per slot
  s.r_bs = r_bs;
  s.num_bs = num_bs;
  s.exhaustive = true;
  s.seed = 0;
  for (int m = 0; m < t; ++m) {
    s.ue_beams.push_back({m / blocks});
    std::vector<int> block(static_cast<std::size_t>(r_bs));
    for (int k = 0; k < r_bs; ++k) block[static_cast<std::size_t>(k)] = (m % blocks) * r_bs + k;
    s.bs_beams.emplace_back(static_cast<std::size_t>(num_bs), block);
  }
  return s;
}

Eigen::VectorXcd observe_slot(const Eigen::MatrixXcd& H,
                              const std::vector<int>& ue_idx,
                              const std::vector<int>& bs_idx,
                              const Eigen::MatrixXcd& codebook_ue,
                              const Eigen::MatrixXcd& codebook_bs, double p_tx,
                              double n0, Rng& rng) {
  if (H.rows() != codebook_bs.rows() || H.cols() != codebook_ue.rows()) {
    throw ConfigError("observe_slot: channel/codebook dimension mismatch");
  }
  const int r_ue = static_cast<int>(ue_idx.size());
  const int r_bs = static_cast<int>(bs_idx.size());
  // x = sqrt(P/R_UE) * F_m * s with all-ones pilots s.
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(H.cols());
  for (int j = 0; j < r_ue; ++j) {
    x += codebook_ue.col(ue_idx[static_cast<std::size_t>(j)]);
  }
  x *= std::sqrt(p_tx / static_cast<double>(r_ue));
  const Eigen::VectorXcd z = H * x;
  Eigen::VectorXcd y(r_bs);
  for (int k = 0; k < r_bs; ++k) {
    y(k) = codebook_bs.col(bs_idx[static_cast<std::size_t>(k)]).dot(z);
  }
  for (int k = 0; k < r_bs; ++k) {
    y(k) += rng.cnormal(n0);
  }
  return y;
}

MeasurementRecord assemble_cs(const BeamSchedule& schedule, int b,
                              const std::vector<Eigen::VectorXcd>& slot_obs,
                              double p_tx, double n0) {
  if (static_cast<int>(slot_obs.size()) != schedule.t_slots) {
    throw ConfigError("assemble_cs: incomplete slot observations");
  }
  MeasurementRecord rec;
  rec.n_ue = schedule.n_ue;
  rec.n_bs = schedule.n_bs;
  rec.n0 = n0;
  rec.a_g = std::sqrt(p_tx * static_cast<double>(schedule.n_ue) *
                      static_cast<double>(schedule.n_bs) /
                      static_cast<double>(schedule.r_ue));
  const int m_total = schedule.t_slots * schedule.r_bs;
  rec.y.resize(m_total);
  rec.rows.resize(static_cast<std::size_t>(m_total));
  int m = 0;
  for (int t = 0; t < schedule.t_slots; ++t) {
    const auto& ue = schedule.ue_beams[static_cast<std::size_t>(t)];
    const auto& bs =
        schedule.bs_beams[static_cast<std::size_t>(t)][static_cast<std::size_t>(b)];
    const auto& obs = slot_obs[static_cast<std::size_t>(t)];
    if (static_cast<int>(obs.size()) != schedule.r_bs) {
      throw ConfigError("assemble_cs: slot observation has wrong length");
    }
    for (int k = 0; k < schedule.r_bs; ++k, ++m) {
      rec.y(m) = obs(k);
      auto& row = rec.rows[static_cast<std::size_t>(m)].entries;
      row.reserve(ue.size());
      for (int u : ue) {
        // vec(V) is column-major: column u of V starts at u * N_BS.
        row.emplace_back(u * schedule.n_bs + bs[static_cast<std::size_t>(k)],
                         cplx(1.0, 0.0));
      }
    }
  }
  return rec;
}

Eigen::VectorXcd apply_sensing(const MeasurementRecord& record,
                               const Eigen::VectorXcd& v) {
  Eigen::VectorXcd out(record.y.size());
  for (std::size_t m = 0; m < record.rows.size(); ++m) {
    cplx acc = 0.0;
    for (const auto& [col, coeff] : record.rows[m].entries) {
      acc += coeff * v(col);
    }
    out(static_cast<Eigen::Index>(m)) = record.a_g * acc;
  }
  return out;
}

Eigen::VectorXcd apply_sensing_adjoint(const MeasurementRecord& record,
                                       const Eigen::VectorXcd& x) {
  Eigen::VectorXcd out =
      Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(record.n_ue) *
                             static_cast<Eigen::Index>(record.n_bs));
  for (std::size_t m = 0; m < record.rows.size(); ++m) {
    const cplx xm = record.a_g * x(static_cast<Eigen::Index>(m));
    for (const auto& [col, coeff] : record.rows[m].entries) {
      out(col) += std::conj(coeff) * xm;
    }
  }
  return out;
}

Eigen::MatrixXcd dense_sensing_matrix(const MeasurementRecord& record) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(
      record.y.size(), static_cast<Eigen::Index>(record.n_ue) *
                           static_cast<Eigen::Index>(record.n_bs));
  for (std::size_t m = 0; m < record.rows.size(); ++m) {
    for (const auto& [col, coeff] : record.rows[m].entries) {
      a(static_cast<Eigen::Index>(m), col) += record.a_g * coeff;
    }
  }
  return a;
}

}  // namespace rapid
