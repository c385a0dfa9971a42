#include "rapid/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rapid {

void NetworkDeployment::validate() const {
  if (bs_positions.size() != bs_orientations.size()) {
    throw ConfigError("deployment: positions/orientations size mismatch");
  }
  for (double t : bs_orientations) {
    if (!(t >= -kPi && t <= kPi)) {
      throw ConfigError("deployment: BS orientation outside [-pi, pi]");
    }
  }
  if (!(ue_orientation >= -kPi && ue_orientation <= kPi)) {
    throw ConfigError("deployment: UE orientation outside [-pi, pi]");
  }
}

nlohmann::json NetworkDeployment::to_json() const {
  nlohmann::json bs = nlohmann::json::array();
  for (int b = 0; b < num_bs(); ++b) {
    bs.push_back({{"x", bs_positions[static_cast<std::size_t>(b)].x()},
                  {"y", bs_positions[static_cast<std::size_t>(b)].y()},
                  {"theta", bs_orientations[static_cast<std::size_t>(b)]}});
  }
  return {{"bs", bs}, {"psi_u", ue_orientation}};
}

NetworkDeployment NetworkDeployment::from_json(const nlohmann::json& j) {
  NetworkDeployment d;
  if (!j.contains("bs") || !j.at("bs").is_array()) {
    throw ConfigError("deployment JSON: missing 'bs' array");
  }
  for (const auto& e : j.at("bs")) {
    d.bs_positions.emplace_back(e.at("x").get<double>(),
                                e.at("y").get<double>());
    d.bs_orientations.push_back(e.at("theta").get<double>());
  }
  d.ue_orientation = j.value("psi_u", 0.0);
  d.validate();
  return d;
}

std::vector<int> bipolar_indices(int n_array) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(bipolar_count(n_array)));
  for (int nt = -(n_array - 1); nt <= n_array - 1; ++nt) out.push_back(nt);
  return out;
}

double candidate_angle(int n, int n_array, int sign) {
  if (n < 0 || n >= n_array) {
    throw std::domain_error("candidate_angle: index out of [0, N)");
  }
  if (sign != 1 && sign != -1) {
    throw std::domain_error("candidate_angle: sign must be +1 or -1");
  }
  const double a = std::acos(1.0 - 2.0 * static_cast<double>(n) /
                                       static_cast<double>(n_array));
  return n == 0 ? a : sign * a;
}

double bar_angle(int nt, int n_array) {
  if (std::abs(nt) >= n_array) {
    throw std::domain_error("bar_angle: |index| must be < N");
  }
  return candidate_angle(std::abs(nt), n_array, nt >= 0 ? 1 : -1);
}

Eigen::Vector2d ray_direction(int nt, double theta, int n_array) {
  const double g = bar_angle(nt, n_array) - theta;
  return {std::cos(g), std::sin(g)};
}

std::optional<std::pair<double, double>> solve_intercept(
    int nt_b, int nt_p, const Eigen::Vector2d& delta_bp, double theta_b,
    double theta_p, int n_array, double eps_det) {
  const Eigen::Vector2d rb = ray_direction(nt_b, theta_b, n_array);
  const Eigen::Vector2d rp = ray_direction(nt_p, theta_p, n_array);
  const double det = rp.x() * rb.y() - rb.x() * rp.y();
  if (std::abs(det) < eps_det) return std::nullopt;  // parallel rays
  // D_b + r_b * rb = D_p + r_p * rp, with delta = D_p - D_b = -delta_bp.
  const Eigen::Vector2d delta = -delta_bp;
  const double r_b = (rp.x() * delta.y() - rp.y() * delta.x()) / det;
  const double r_p = (rb.x() * delta.y() - rb.y() * delta.x()) / det;
  if (!(r_b > 0.0 && r_p > 0.0)) return std::nullopt;
  return std::make_pair(r_b, r_p);
}

RayInterceptTable::RayInterceptTable(int num_bs, int n_array)
    : num_bs_(num_bs), n_array_(n_array) {
  data_.resize(static_cast<std::size_t>(num_bs) *
               static_cast<std::size_t>(num_bs) *
               static_cast<std::size_t>(bipolar_count(n_array)));
}

std::size_t RayInterceptTable::slot(int b, int p, int nt_b) const {
  const int ray = nt_b + (n_array_ - 1);
  if (b < 0 || b >= num_bs_ || p < 0 || p >= num_bs_ || ray < 0 ||
      ray >= bipolar_count(n_array_)) {
    throw std::out_of_range("RayInterceptTable: index out of range");
  }
  return (static_cast<std::size_t>(b) * static_cast<std::size_t>(num_bs_) +
          static_cast<std::size_t>(p)) *
             static_cast<std::size_t>(bipolar_count(n_array_)) +
         static_cast<std::size_t>(ray);
}

const std::vector<InterceptEntry>& RayInterceptTable::entries(
    int b, int p, int nt_b) const {
  return data_[slot(b, p, nt_b)];
}

std::vector<InterceptEntry>& RayInterceptTable::mutable_entries(int b, int p,
                                                                int nt_b) {
  return data_[slot(b, p, nt_b)];
}

std::vector<bool> RayInterceptTable::row_mask(int owner, int peer) const {
  std::vector<bool> mask(static_cast<std::size_t>(n_array_), false);
  for (int nt = -(n_array_ - 1); nt <= n_array_ - 1; ++nt) {
    if (!entries(owner, peer, nt).empty()) {
      mask[static_cast<std::size_t>(std::abs(nt))] = true;
    }
  }
  return mask;
}

RayInterceptTable RayInterceptTable::restricted_to_box(
    const Eigen::Vector2d& lo, const Eigen::Vector2d& hi) const {
  RayInterceptTable out(num_bs_, n_array_);
  for (std::size_t s = 0; s < data_.size(); ++s) {
    for (const InterceptEntry& e : data_[s]) {
      if (e.position.x() >= lo.x() && e.position.x() <= hi.x() &&
          e.position.y() >= lo.y() && e.position.y() <= hi.y()) {
        out.data_[s].push_back(e);
      }
    }
  }
  return out;
}

std::size_t RayInterceptTable::total_entries() const {
  std::size_t n = 0;
  for (const auto& v : data_) n += v.size();
  return n;
}

namespace {

double deployment_diagonal(const NetworkDeployment& dep) {
  // Bounding box of all BS positions plus the UE at the origin.
  double min_x = 0.0, max_x = 0.0, min_y = 0.0, max_y = 0.0;
  for (const auto& p : dep.bs_positions) {
    min_x = std::min(min_x, p.x());
    max_x = std::max(max_x, p.x());
    min_y = std::min(min_y, p.y());
    max_y = std::max(max_y, p.y());
  }
  return std::hypot(max_x - min_x, max_y - min_y);
}

}  // namespace

RayInterceptTable build_intercept_table(const NetworkDeployment& deployment,
                                        int n_array) {
  const int num_bs = deployment.num_bs();
  RayInterceptTable table(num_bs, n_array);
  if (num_bs < 2) return table;  // no pairs: valid, empty table
  const double max_range = 10.0 * deployment_diagonal(deployment);
  // Each unordered pair is solved once and mirrored into both ordered
  // slots, which makes the content symmetry exact by construction.
  for (int b = 0; b < num_bs; ++b) {
    for (int p = b + 1; p < num_bs; ++p) {
      const Eigen::Vector2d delta_bp = deployment.displacement(b, p);
      const double th_b =
          deployment.bs_orientations[static_cast<std::size_t>(b)];
      const double th_p =
          deployment.bs_orientations[static_cast<std::size_t>(p)];
      for (int nt_b = -(n_array - 1); nt_b <= n_array - 1; ++nt_b) {
        const Eigen::Vector2d rb = ray_direction(nt_b, th_b, n_array);
        for (int nt_p = -(n_array - 1); nt_p <= n_array - 1; ++nt_p) {
          const auto sol =
              solve_intercept(nt_b, nt_p, delta_bp, th_b, th_p, n_array);
          if (!sol) continue;
          const auto [r_b, r_p] = *sol;
          if (r_b > max_range || r_p > max_range) continue;
          const Eigen::Vector2d pos =
              deployment.bs_positions[static_cast<std::size_t>(b)] + r_b * rb;
          table.mutable_entries(b, p, nt_b).push_back(
              InterceptEntry{nt_p, r_b, r_p, pos});
          table.mutable_entries(p, b, nt_p).push_back(
              InterceptEntry{nt_b, r_p, r_b, pos});
        }
      }
    }
  }
  return table;
}

std::pair<Eigen::Vector2d, Eigen::Vector2d> feasible_box(
    const NetworkDeployment& deployment, double half_width) {
  Eigen::Vector2d lo(-std::numeric_limits<double>::infinity(),
                     -std::numeric_limits<double>::infinity());
  Eigen::Vector2d hi(std::numeric_limits<double>::infinity(),
                     std::numeric_limits<double>::infinity());
  for (const auto& p : deployment.bs_positions) {
    lo.x() = std::max(lo.x(), p.x() - half_width);
    lo.y() = std::max(lo.y(), p.y() - half_width);
    hi.x() = std::min(hi.x(), p.x() + half_width);
    hi.y() = std::min(hi.y(), p.y() + half_width);
  }
  return {lo, hi};
}

double conditional_aod(int nt_b, int nt_p, int nt_u, double r_b,
                       const Eigen::Vector2d& delta_pb, double theta_b,
                       int n_bs, int n_ue) {
  (void)nt_p;  // the peer index enters through r_b, looked up by the caller
  const Eigen::Vector2d rb = ray_direction(nt_b, theta_b, n_bs);
  // r_b * rb - delta_pb = (intercept position) - D_p in the frame of BS b.
  const Eigen::Vector2d v = r_b * rb - delta_pb;
  return wrap_angle(std::atan2(v.y(), v.x()) - bar_angle(nt_b, n_bs) +
                    bar_angle(nt_u, n_ue) + theta_b);
}

double conditional_aod(int nt_b, int nt_p, int nt_u,
                       const RayInterceptTable& table,
                       const NetworkDeployment& deployment, int b, int p,
                       int n_ue) {
  const auto& lst = table.entries(b, p, nt_b);
  const auto it =
      std::find_if(lst.begin(), lst.end(),
                   [nt_p](const InterceptEntry& e) { return e.nt_p == nt_p; });
  if (it == lst.end()) {
    throw std::domain_error("conditional_aod: no stored intercept for pair");
  }
  const Eigen::Vector2d delta_pb = deployment.displacement(p, b);
  return conditional_aod(
      nt_b, nt_p, nt_u, it->r_b, delta_pb,
      deployment.bs_orientations[static_cast<std::size_t>(b)],
      table.array_size(), n_ue);
}

}  // namespace rapid
