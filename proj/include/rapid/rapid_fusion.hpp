#pragma once

// Cross-BS Bayesian fusion: radial coefficient likelihoods and posteriors,
// intercept-conditioned peer coefficients, per-pair beam probability maps,
// network-wide averaging, and probability-ranked beam selection.

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "rapid/common.hpp"
#include "rapid/geometry.hpp"
#include "rapid/sparse_recovery.hpp"

namespace rapid {

// Bandwidth-constrained share from one BS: at most n_d dominant entries of
// its estimate, restricted to rows visible to the receiving peer.
struct SharedRays {
  int origin_bs = 0;
  int n_d = 0;
  std::vector<SharedEntry> entries;  // (|nt_p| row, n_u col, value)
};

// Real N_BS x N_UE matrix of per-cell probabilities, each in [0, 1].
using BeamProbabilityMap = Eigen::MatrixXd;

// Complex-normal density of an estimated path coefficient at radial
// distance r: exp(-|a|^2/(r^-beta + var)) / (pi (r^-beta + var)).
// Throws std::domain_error for r <= 0 or var < 0.
double coefficient_likelihood(const cplx& alpha_hat, double r, double beta,
                              double var);

// Posterior probability that the path radius is r (against a zero-path null
// model of variance var), computed in log-space. Always strictly inside
// (0, 1): extreme inputs saturate at the nearest representable values.
double radial_posterior(const cplx& alpha_hat, double r, double beta,
                        double var);

// Closed-form counterpart of radial_posterior, evaluated directly (may
// overflow/underflow at extreme inputs; used for cross-checks).
double radial_posterior_direct(const cplx& alpha_hat, double r, double beta,
                               double var);

// Product of the two radial posteriors (the radii are deterministic given
// each other through the intercept, hence fully dependent).
double joint_pair_probability(const cplx& alpha_b, const cplx& alpha_p,
                              double r_b, double r_p, double beta,
                              double var);

// Coefficient the peer would have estimated if the UE sat on the intercept:
// projects the shared sparse row |nt_p| onto the off-grid UE steering vector
// at phi_l_p. An absent row contributes zero evidence.
cplx conditional_peer_coefficient(const SharedRays& shared, int nt_p,
                                  double phi_l_p,
                                  const Eigen::MatrixXcd& codebook_ue);

// Probability of candidate cell (n_b, n_u) at BS `owner` given one peer's
// share: weighted sum over the sign branches of n_b and n_u and over the
// intercepts of each branch ray with the peer's rays. An empty intercept
// set contributes zero for that branch.
double pair_beam_probability(int n_b, int n_u,
                             const Eigen::MatrixXcd& v_hat_owner,
                             const SharedRays& shared,
                             const RayInterceptTable& table,
                             const NetworkDeployment& deployment, int owner,
                             const Eigen::MatrixXcd& codebook_ue, double beta,
                             double var);

// Full map of pair_beam_probability over all (n_b, n_u).
BeamProbabilityMap pair_probability_map(const Eigen::MatrixXcd& v_hat_owner,
                                        const SharedRays& shared,
                                        const RayInterceptTable& table,
                                        const NetworkDeployment& deployment,
                                        int owner,
                                        const Eigen::MatrixXcd& codebook_ue,
                                        double beta, double var);

// Elementwise mean of the per-peer maps. Requires at least one peer
// (cooperation is undefined for a single BS) -> ConfigError otherwise.
BeamProbabilityMap fuse_network(const Eigen::MatrixXcd& v_hat_owner,
                                const std::vector<SharedRays>& shares,
                                const RayInterceptTable& table,
                                const NetworkDeployment& deployment, int owner,
                                const Eigen::MatrixXcd& codebook_ue,
                                double beta, double var);

// Top-`count` cells by probability, excluding cells below `floor`. Ties
// break toward larger |v_hat|, then the smaller (n_b, n_u) pair.
std::vector<std::pair<int, int>> select_beams(const BeamProbabilityMap& map,
                                              const Eigen::MatrixXcd& v_hat,
                                              int count, double floor = 0.0);

}  // namespace rapid
