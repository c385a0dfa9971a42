#include "rapid/sparse_recovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rapid {
namespace {

// Dense M x S matrix of the selected sensing columns (gain folded in).
Eigen::MatrixXcd support_matrix(const MeasurementRecord& record,
                                const std::vector<int>& support) {
  const int m_rows = static_cast<int>(record.rows.size());
  const int s = static_cast<int>(support.size());
  std::vector<int> col_to_idx(
      static_cast<std::size_t>(record.n_ue) * record.n_bs, -1);
  for (int j = 0; j < s; ++j) col_to_idx[support[j]] = j;
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(m_rows, s);
  for (int m = 0; m < m_rows; ++m) {
    for (const auto& [col, coef] : record.rows[m].entries) {
      const int j = col_to_idx[col];
      if (j >= 0) a(m, j) += record.a_g * coef;
    }
  }
  return a;
}

// Index of the largest-magnitude unmasked correlation, scanning candidate
// cells in lexicographic (n_b, n_u) order so exact ties take the smaller
// beam-index pair. Returns -1 when every unmasked magnitude is zero.
int argmax_lex(const Eigen::VectorXcd& corr, const std::vector<char>& masked,
               int n_bs, int n_ue) {
  int best = -1;
  double best_mag2 = 0.0;
  for (int nb = 0; nb < n_bs; ++nb) {
    for (int nu = 0; nu < n_ue; ++nu) {
      const int c = nu * n_bs + nb;
      if (masked[c]) continue;
      const double mag2 = std::norm(corr(c));
      if (mag2 > best_mag2) {
        best_mag2 = mag2;
        best = c;
      }
    }
  }
  return best;
}

VirtualChannelEstimate solve_omp(const MeasurementRecord& record,
                                 const RecoveryConfig& cfg) {
  const int cells = record.n_ue * record.n_bs;
  const int m_rows = static_cast<int>(record.y.size());
  VirtualChannelEstimate est;
  est.v_hat = Eigen::MatrixXcd::Zero(record.n_bs, record.n_ue);
  est.solver_name = to_string(SolverKind::kOrthogonalMatchingPursuit);
  const double y_norm = record.y.norm();
  if (y_norm == 0.0) {
    est.residual_norm = 0.0;
    return est;
  }

  const int budget = std::min({cfg.sparsity_k, cells, m_rows});
  std::vector<int> support;
  std::vector<char> masked(cells, 0);
  Eigen::VectorXcd residual = record.y;
  Eigen::VectorXcd coeffs;
  for (int it = 0; it < budget; ++it) {
    const Eigen::VectorXcd corr = apply_sensing_adjoint(record, residual);
    const int pick = argmax_lex(corr, masked, record.n_bs, record.n_ue);
    if (pick < 0) break;
    support.push_back(pick);
    masked[pick] = 1;
    const Eigen::MatrixXcd a_s = support_matrix(record, support);
    coeffs = a_s.colPivHouseholderQr().solve(record.y);
    residual = record.y - a_s * coeffs;
    est.iterations = static_cast<int>(support.size());
    if (residual.norm() <= cfg.tol * y_norm) break;
  }
  for (std::size_t j = 0; j < support.size(); ++j) {
    const int c = support[j];
    est.v_hat(c % record.n_bs, c / record.n_bs) = coeffs(j);
  }
  est.residual_norm = residual.norm();
  return est;
}

VirtualChannelEstimate solve_ista(const MeasurementRecord& record,
                                  const RecoveryConfig& cfg) {
  const int cells = record.n_ue * record.n_bs;
  VirtualChannelEstimate est;
  est.v_hat = Eigen::MatrixXcd::Zero(record.n_bs, record.n_ue);
  est.solver_name = to_string(SolverKind::kIterativeShrinkage);
  const double y_norm = record.y.norm();
  const double gamma =
      cfg.gamma >= 0.0 ? cfg.gamma
                       : record.n0 * std::sqrt(2.0 * std::log(cells));
  if (y_norm == 0.0) return est;

  // Largest singular value of the sensing operator via power iteration on
  // the normal operator; deterministic start vector.
  Eigen::VectorXcd p = Eigen::VectorXcd::Constant(cells, cplx(1.0, 0.0));
  p /= p.norm();
  double sigma2 = 0.0;
  for (int it = 0; it < 100; ++it) {
    Eigen::VectorXcd q =
        apply_sensing_adjoint(record, apply_sensing(record, p));
    const double nq = q.norm();
    if (nq == 0.0) {
      sigma2 = 0.0;
      break;
    }
    sigma2 = nq;
    p = q / nq;
  }
  if (sigma2 == 0.0) return est;  // operator annihilates everything
  const double step = 1.0 / (2.0 * sigma2 * 1.01);

  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(cells);
  Eigen::VectorXcd residual = -record.y;  // A v - y at v = 0
  double objective = y_norm * y_norm;     // + gamma * 0
  est.objective_history.push_back(objective);
  est.converged = false;
  const double thresh = step * gamma;
  for (int it = 0; it < cfg.max_iters; ++it) {
    const Eigen::VectorXcd grad = apply_sensing_adjoint(record, residual);
    for (int c = 0; c < cells; ++c) {
      const cplx z = v(c) - 2.0 * step * grad(c);
      const double mag = std::abs(z);
      v(c) = mag > thresh ? z * ((mag - thresh) / mag) : cplx(0.0, 0.0);
    }
    residual = apply_sensing(record, v) - record.y;
    const double prev = objective;
    objective = residual.squaredNorm() + gamma * v.cwiseAbs().sum();
    est.objective_history.push_back(objective);
    est.iterations = it + 1;
    if (std::abs(prev - objective) <= cfg.tol * std::max(1.0, prev)) {
      est.converged = true;
      break;
    }
  }
  est.v_hat =
      Eigen::Map<const Eigen::MatrixXcd>(v.data(), record.n_bs, record.n_ue);
  est.residual_norm = residual.norm();
  return est;
}

VirtualChannelEstimate solve_oracle(const MeasurementRecord& record,
                                    const RecoveryConfig& cfg) {
  if (cfg.sparsity_k > 2) {
    throw ConfigError(
        "oracle-least-squares is exhaustive and supports sparsity_k <= 2");
  }
  const int cells = record.n_ue * record.n_bs;
  const int n_bs = record.n_bs;
  VirtualChannelEstimate est;
  est.v_hat = Eigen::MatrixXcd::Zero(record.n_bs, record.n_ue);
  est.solver_name = to_string(SolverKind::kOracleLeastSquares);

  // Gram matrix G = A^H A and projection b = A^H y, accumulated from the
  // sparse rows (gain folded in).
  Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(cells, cells);
  Eigen::VectorXcd proj = Eigen::VectorXcd::Zero(cells);
  const double g2 = record.a_g * record.a_g;
  for (std::size_t m = 0; m < record.rows.size(); ++m) {
    const auto& entries = record.rows[m].entries;
    for (const auto& [ci, vi] : entries) {
      proj(ci) += record.a_g * std::conj(vi) * record.y(m);
      for (const auto& [cj, vj] : entries) {
        gram(ci, cj) += g2 * std::conj(vi) * vj;
      }
    }
  }

  const double y2 = record.y.squaredNorm();
  double best_res2 = y2;  // empty support
  std::vector<int> best_support;
  Eigen::Vector2cd best_x = Eigen::Vector2cd::Zero();

  // Candidate cells in lexicographic (n_b, n_u) order for tie determinism.
  std::vector<int> order;
  order.reserve(cells);
  for (int nb = 0; nb < n_bs; ++nb)
    for (int nu = 0; nu < record.n_ue; ++nu) order.push_back(nu * n_bs + nb);

  for (int c : order) {
    const double gcc = std::real(gram(c, c));
    if (gcc <= 0.0) continue;
    const double res2 = y2 - std::norm(proj(c)) / gcc;
    if (res2 < best_res2 - 1e-15 * y2) {
      best_res2 = res2;
      best_support = {c};
      best_x(0) = proj(c) / gcc;
    }
  }
  if (cfg.sparsity_k >= 2) {
    for (std::size_t i = 0; i < order.size(); ++i) {
      for (std::size_t j = i + 1; j < order.size(); ++j) {
        const int c1 = order[i];
        const int c2 = order[j];
        Eigen::Matrix2cd gs;
        gs << gram(c1, c1), gram(c1, c2), gram(c2, c1), gram(c2, c2);
        Eigen::Vector2cd bs(proj(c1), proj(c2));
        const cplx det = gs(0, 0) * gs(1, 1) - gs(0, 1) * gs(1, 0);
        if (std::abs(det) <= 1e-12 * std::abs(gs(0, 0) * gs(1, 1)) ||
            std::abs(det) == 0.0) {
          continue;  // degenerate pair; singletons already cover it
        }
        Eigen::Vector2cd x;
        x(0) = (gs(1, 1) * bs(0) - gs(0, 1) * bs(1)) / det;
        x(1) = (gs(0, 0) * bs(1) - gs(1, 0) * bs(0)) / det;
        const double res2 =
            y2 - 2.0 * std::real(x.dot(bs)) + std::real(x.dot(gs * x));
        if (res2 < best_res2 - 1e-15 * y2) {
          best_res2 = res2;
          best_support = {c1, c2};
          best_x = x;
        }
      }
    }
  }
  for (std::size_t j = 0; j < best_support.size(); ++j) {
    const int c = best_support[j];
    est.v_hat(c % n_bs, c / n_bs) = best_x(static_cast<int>(j));
  }
  est.iterations = static_cast<int>(best_support.size());
  est.residual_norm = std::sqrt(std::max(0.0, best_res2));
  return est;
}

}  // namespace

SolverKind solver_kind_from_string(const std::string& name) {
  if (name == "omp" || name == "orthogonal-matching-pursuit")
    return SolverKind::kOrthogonalMatchingPursuit;
  if (name == "ista" || name == "iterative-shrinkage")
    return SolverKind::kIterativeShrinkage;
  if (name == "oracle" || name == "oracle-least-squares")
    return SolverKind::kOracleLeastSquares;
  throw ConfigError("unknown solver: " + name);
}

std::string to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::kOrthogonalMatchingPursuit:
      return "orthogonal-matching-pursuit";
    case SolverKind::kIterativeShrinkage:
      return "iterative-shrinkage";
    case SolverKind::kOracleLeastSquares:
      return "oracle-least-squares";
  }
  throw ConfigError("invalid solver kind");
}

void RecoveryConfig::validate() const {
  if (sparsity_k < 1) throw ConfigError("sparsity_k must be >= 1");
  if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (!(tol > 0.0)) throw ConfigError("tol must be > 0");
  // gamma < 0 selects the automatic default; explicit values must be finite.
  if (gamma >= 0.0 && !std::isfinite(gamma))
    throw ConfigError("gamma must be finite");
}

VirtualChannelEstimate recover(const MeasurementRecord& record,
                               const RecoveryConfig& cfg) {
  cfg.validate();
  if (record.n_ue < 1 || record.n_bs < 1)
    throw ConfigError("measurement record has empty codebook dimensions");
  if (record.y.size() != static_cast<Eigen::Index>(record.rows.size()))
    throw ConfigError("measurement record rows do not match y length");
  switch (cfg.solver) {
    case SolverKind::kOrthogonalMatchingPursuit:
      return solve_omp(record, cfg);
    case SolverKind::kIterativeShrinkage:
      return solve_ista(record, cfg);
    case SolverKind::kOracleLeastSquares:
      return solve_oracle(record, cfg);
  }
  throw ConfigError("invalid solver kind");
}

std::vector<SharedEntry> dominant_entries(const Eigen::MatrixXcd& v_hat,
                                          int n_d,
                                          const std::vector<bool>& row_mask) {
  if (n_d < 1) throw ConfigError("n_d must be >= 1");
  if (row_mask.size() != static_cast<std::size_t>(v_hat.rows()))
    throw ConfigError("dependency mask length must match v_hat rows");
  std::vector<SharedEntry> all;
  for (int r = 0; r < v_hat.rows(); ++r) {
    if (!row_mask[r]) continue;
    for (int c = 0; c < v_hat.cols(); ++c) {
      if (v_hat(r, c) != cplx(0.0, 0.0)) all.push_back({r, c, v_hat(r, c)});
    }
  }
  std::sort(all.begin(), all.end(), [](const SharedEntry& a,
                                       const SharedEntry& b) {
    const double ma = std::norm(a.value);
    const double mb = std::norm(b.value);
    if (ma != mb) return ma > mb;
    if (a.row != b.row) return a.row < b.row;
    return a.col < b.col;
  });
  if (static_cast<int>(all.size()) > n_d) all.resize(n_d);
  return all;
}

}  // namespace rapid
