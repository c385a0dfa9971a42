#include "rapid/rapid_fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rapid/channel.hpp"

namespace rapid {
namespace {

// Clamp a probability into the open unit interval: extreme inputs saturate
// at the nearest representable values instead of touching 0 or 1.
double open_unit(double p) {
  if (p <= 0.0) return std::numeric_limits<double>::denorm_min();
  if (p >= 1.0) return std::nextafter(1.0, 0.0);
  return p;
}

// Sign branches of a unipolar index: {n, -n}, deduplicated at n = 0.
inline int sign_branches(int n, int out[2]) {
  out[0] = n;
  if (n == 0) return 1;
  out[1] = -n;
  return 2;
}

}  // namespace

double coefficient_likelihood(const cplx& alpha_hat, double r, double beta,
                              double var) {
  if (!(r > 0.0)) throw std::domain_error("coefficient_likelihood: r <= 0");
  if (!(var >= 0.0))
    throw std::domain_error("coefficient_likelihood: var < 0");
  const double total_var = std::pow(r, -beta) + var;
  if (!(total_var > 0.0))
    throw std::domain_error("coefficient_likelihood: zero variance");
  return std::exp(-std::norm(alpha_hat) / total_var) / (kPi * total_var);
}

double radial_posterior(const cplx& alpha_hat, double r, double beta,
                        double var) {
  if (!(r > 0.0)) throw std::domain_error("radial_posterior: r <= 0");
  if (!(var > 0.0)) throw std::domain_error("radial_posterior: var <= 0");
  // x = ln(r^-beta / var); posterior = sigmoid(-(softplus(x) - snr*sigmoid(x)))
  const double x = -beta * std::log(r) - std::log(var);
  const double snr = std::norm(alpha_hat) / var;
  const double log_odds_against = softplus(x) - snr * logistic(x);
  return open_unit(logistic(-log_odds_against));
}

double radial_posterior_direct(const cplx& alpha_hat, double r, double beta,
                               double var) {
  if (!(r > 0.0)) throw std::domain_error("radial_posterior: r <= 0");
  if (!(var > 0.0)) throw std::domain_error("radial_posterior: var <= 0");
  const double rb = std::pow(r, -beta);
  const double factor = (rb / var + 1.0) *
                        std::exp(-(std::norm(alpha_hat) / var) /
                                 (1.0 + var / rb));
  return 1.0 / (1.0 + factor);
}

double joint_pair_probability(const cplx& alpha_b, const cplx& alpha_p,
                              double r_b, double r_p, double beta,
                              double var) {
  return radial_posterior(alpha_b, r_b, beta, var) *
         radial_posterior(alpha_p, r_p, beta, var);
}

cplx conditional_peer_coefficient(const SharedRays& shared, int nt_p,
                                  double phi_l_p,
                                  const Eigen::MatrixXcd& codebook_ue) {
  const int row = std::abs(nt_p);
  cplx acc(0.0, 0.0);
  Eigen::VectorXcd a_ue;  // built lazily: absent rows cost nothing
  for (const auto& entry : shared.entries) {
    if (entry.row != row) continue;
    if (a_ue.size() == 0)
      a_ue = steering(phi_l_p, static_cast<int>(codebook_ue.rows()));
    // (F_c^H a_UE)_col, conjugate-linear in the codebook column.
    acc += entry.value * codebook_ue.col(entry.col).dot(a_ue);
  }
  return acc;
}

double pair_beam_probability(int n_b, int n_u,
                             const Eigen::MatrixXcd& v_hat_owner,
                             const SharedRays& shared,
                             const RayInterceptTable& table,
                             const NetworkDeployment& deployment, int owner,
                             const Eigen::MatrixXcd& shared_codebook_ue,
                             double beta, double var) {
  const int n_bs = static_cast<int>(v_hat_owner.rows());
  const int n_ue = static_cast<int>(v_hat_owner.cols());
  const int peer = shared.origin_bs;
  const Eigen::Vector2d delta_pb = deployment.displacement(peer, owner);
  const double theta_b =
      deployment.bs_orientations[static_cast<std::size_t>(owner)];

  const cplx alpha_b = v_hat_owner(n_b, n_u);
  int sb[2];
  int su[2];
  const int n_sb = sign_branches(n_b, sb);
  const int n_su = sign_branches(n_u, su);

  double acc = 0.0;
  for (int ib = 0; ib < n_sb; ++ib) {
    const int nt_b = sb[ib];
    const auto& intercepts = table.entries(owner, peer, nt_b);
    if (intercepts.empty()) continue;  // empty union: zero contribution
    const double weight =
        1.0 / (static_cast<double>(n_sb) * static_cast<double>(n_su) *
               static_cast<double>(intercepts.size()));
    for (int iu = 0; iu < n_su; ++iu) {
      const int nt_u = su[iu];
      for (const auto& e : intercepts) {
        const double phi_l_p = conditional_aod(nt_b, e.nt_p, nt_u, e.r_b,
                                               delta_pb, theta_b, n_bs, n_ue);
        const cplx alpha_p = conditional_peer_coefficient(
            shared, e.nt_p, phi_l_p, shared_codebook_ue);
        acc += weight *
               joint_pair_probability(alpha_b, alpha_p, e.r_b, e.r_p, beta,
                                      var);
      }
    }
  }
  return acc;
}

BeamProbabilityMap pair_probability_map(const Eigen::MatrixXcd& v_hat_owner,
                                        const SharedRays& shared,
                                        const RayInterceptTable& table,
                                        const NetworkDeployment& deployment,
                                        int owner,
                                        const Eigen::MatrixXcd& codebook_ue,
                                        double beta, double var) {
  const int n_bs = static_cast<int>(v_hat_owner.rows());
  const int n_ue = static_cast<int>(v_hat_owner.cols());
  BeamProbabilityMap map = BeamProbabilityMap::Zero(n_bs, n_ue);
  for (int nb = 0; nb < n_bs; ++nb) {
    for (int nu = 0; nu < n_ue; ++nu) {
      map(nb, nu) =
          pair_beam_probability(nb, nu, v_hat_owner, shared, table,
                                deployment, owner, codebook_ue, beta, var);
    }
  }
  return map;
}

BeamProbabilityMap fuse_network(const Eigen::MatrixXcd& v_hat_owner,
                                const std::vector<SharedRays>& shares,
                                const RayInterceptTable& table,
                                const NetworkDeployment& deployment, int owner,
                                const Eigen::MatrixXcd& codebook_ue,
                                double beta, double var) {
  if (shares.empty())
    throw ConfigError("fuse_network: cooperation requires at least one peer");
  BeamProbabilityMap acc = BeamProbabilityMap::Zero(v_hat_owner.rows(),
                                                    v_hat_owner.cols());
  for (const auto& shared : shares) {
    if (shared.origin_bs == owner)
      throw ConfigError("fuse_network: a BS cannot be its own peer");
    acc += pair_probability_map(v_hat_owner, shared, table, deployment, owner,
                                codebook_ue, beta, var);
  }
  return acc / static_cast<double>(shares.size());
}

std::vector<std::pair<int, int>> select_beams(const BeamProbabilityMap& map,
                                              const Eigen::MatrixXcd& v_hat,
                                              int count, double floor) {
  if (count < 1) throw ConfigError("select_beams: count must be >= 1");
  if (map.rows() != v_hat.rows() || map.cols() != v_hat.cols())
    throw ConfigError("select_beams: map and v_hat shapes differ");
  struct Cell {
    double prob;
    double mag2;
    int nb;
    int nu;
  };
  std::vector<Cell> cells;
  cells.reserve(static_cast<std::size_t>(map.size()));
  for (int nb = 0; nb < map.rows(); ++nb) {
    for (int nu = 0; nu < map.cols(); ++nu) {
      if (map(nb, nu) < floor) continue;
      cells.push_back({map(nb, nu), std::norm(v_hat(nb, nu)), nb, nu});
    }
  }
  std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
    if (a.prob != b.prob) return a.prob > b.prob;
    if (a.mag2 != b.mag2) return a.mag2 > b.mag2;
    if (a.nb != b.nb) return a.nb < b.nb;
    return a.nu < b.nu;
  });
  if (static_cast<int>(cells.size()) > count) cells.resize(count);
  std::vector<std::pair<int, int>> out;
  out.reserve(cells.size());
  for (const auto& c : cells) out.emplace_back(c.nb, c.nu);
  return out;
}

}  // namespace rapid
