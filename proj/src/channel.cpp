#include "rapid/channel.hpp"

#include <cmath>

namespace rapid {

Eigen::VectorXcd steering(double eps, int n_array) {
  if (n_array < 1) throw ConfigError("steering: N must be >= 1");
  Eigen::VectorXcd v(n_array);
  const double c = std::cos(eps);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_array));
  for (int k = 0; k < n_array; ++k) {
    const double phase = kPi * c * static_cast<double>(k);
    v(k) = scale * cplx(std::cos(phase), std::sin(phase));
  }
  return v;
}

Eigen::MatrixXcd codebook(int n_array) {
  Eigen::MatrixXcd cb(n_array, n_array);
  for (int n = 0; n < n_array; ++n) {
    cb.col(n) = steering(candidate_angle(n, n_array, 1), n_array);
  }
  return cb;
}

double path_variance(double r, double beta) {
  if (!(r > 0.0)) throw std::domain_error("path_variance: r must be > 0");
  return std::pow(r, -beta);
}

ChannelMatrix generate_channel(const NetworkDeployment& deployment, int b,
                               double beta, int n_bs, int n_ue, Rng& rng,
                               int extra_paths) {
  const Eigen::Vector2d d = deployment.bs_positions.at(static_cast<std::size_t>(b));
  const double r = d.norm();
  if (!(r > 0.0)) {
    throw NumericError("generate_channel: BS coincides with the UE");
  }
  const double theta_b =
      deployment.bs_orientations.at(static_cast<std::size_t>(b));
  const double th_g = std::atan2(-d.y(), -d.x());  // departure, global
  const double ph_g = std::atan2(d.y(), d.x());    // arrival, global
  const double th_l = wrap_angle(th_g + theta_b);
  const double ph_l = wrap_angle(ph_g + deployment.ue_orientation);

  const double scale = std::sqrt(static_cast<double>(n_bs) *
                                 static_cast<double>(n_ue));
  const cplx alpha = rng.cnormal(path_variance(r, beta));
  Eigen::MatrixXcd H = alpha * scale * steering(th_l, n_bs) *
                       steering(ph_l, n_ue).adjoint();
  for (int l = 0; l < extra_paths; ++l) {
    const double th = rng.uniform(-kPi, kPi);
    const double ph = rng.uniform(-kPi, kPi);
    const cplx a = rng.cnormal(path_variance(r, beta));
    H += a * scale * steering(th, n_bs) * steering(ph, n_ue).adjoint();
  }
  return ChannelMatrix{std::move(H), alpha, th_l, ph_l, r};
}

Eigen::MatrixXcd project_virtual(const Eigen::MatrixXcd& H,
                                 const Eigen::MatrixXcd& codebook_bs,
                                 const Eigen::MatrixXcd& codebook_ue) {
  if (codebook_bs.rows() != H.rows() || codebook_ue.rows() != H.cols()) {
    throw ConfigError("project_virtual: codebook/channel dimension mismatch");
  }
  const double scale =
      1.0 / std::sqrt(static_cast<double>(H.rows()) *
                      static_cast<double>(H.cols()));
  return scale * codebook_bs.adjoint() * H * codebook_ue;
}

Eigen::MatrixXcd reconstruct_from_virtual(const Eigen::MatrixXcd& V,
                                          const Eigen::MatrixXcd& codebook_bs,
                                          const Eigen::MatrixXcd& codebook_ue) {
  const double scale = std::sqrt(static_cast<double>(V.rows()) *
                                 static_cast<double>(V.cols()));
  return scale * codebook_bs * V * codebook_ue.adjoint();
}

}  // namespace rapid
