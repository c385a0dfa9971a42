#pragma once

// Ground-truth MIMO channel generation from the deployment geometry, plus
// steering vectors, candidate codebooks, and virtual-channel projection.

#include <Eigen/Dense>

#include "rapid/common.hpp"
#include "rapid/geometry.hpp"

namespace rapid {

// Uniform-linear-array response at angle eps with half-wavelength spacing:
// entry k is exp(j*pi*k*cos(eps)) / sqrt(N). Unit norm; even in eps.
Eigen::VectorXcd steering(double eps, int n_array);

// N x N candidate codebook; column n is the steering vector at
// candidate_angle(n, N, +1). Columns are mutually orthonormal.
Eigen::MatrixXcd codebook(int n_array);

// Mean power of the path coefficient at radial distance r: r^-beta.
double path_variance(double r, double beta);

struct ChannelMatrix {
  Eigen::MatrixXcd H;  // N_BS x N_UE
  cplx alpha;          // dominant-path coefficient
  double aod_local;    // departure angle at the BS, local frame
  double aoa_local;    // arrival angle at the UE, local frame
  double r;            // radial BS-UE distance, meters
};

// Single dominant line-of-sight path: angles from geometry, alpha drawn
// CN(0, r^-beta). `extra_paths` adds that many independent paths with
// uniform angles and the same coefficient law (stress-test knob; the
// returned alpha/angles always describe the geometric path).
ChannelMatrix generate_channel(const NetworkDeployment& deployment, int b,
                               double beta, int n_bs, int n_ue, Rng& rng,
                               int extra_paths = 0);

// V = W_c^H H F_c / sqrt(N_UE * N_BS).
Eigen::MatrixXcd project_virtual(const Eigen::MatrixXcd& H,
                                 const Eigen::MatrixXcd& codebook_bs,
                                 const Eigen::MatrixXcd& codebook_ue);

// Inverse relation: H = sqrt(N_UE * N_BS) * W_c V F_c^H.
Eigen::MatrixXcd reconstruct_from_virtual(const Eigen::MatrixXcd& V,
                                          const Eigen::MatrixXcd& codebook_bs,
                                          const Eigen::MatrixXcd& codebook_ue);

}  // namespace rapid
