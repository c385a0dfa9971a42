#include "rapid/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <thread>

namespace rapid {
namespace {

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double ci95_of(const std::vector<double>& v) {
  const std::size_t n = v.size();
  if (n < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  return 1.96 * sd / std::sqrt(static_cast<double>(n));
}

NetworkDeployment sample_deployment(const ExperimentConfig& cfg, Rng& rng) {
  constexpr double kMinSeparation = 0.5;  // meters; keeps r^-beta finite
  const double w = cfg.grid_half_width;
  NetworkDeployment dep;
  dep.bs_positions.resize(static_cast<std::size_t>(cfg.num_bs));
  for (;;) {
    for (auto& p : dep.bs_positions)
      p = Eigen::Vector2d(rng.uniform(-w, w), rng.uniform(-w, w));
    bool ok = true;
    for (int b = 0; b < cfg.num_bs && ok; ++b) {
      const auto& pb = dep.bs_positions[static_cast<std::size_t>(b)];
      if (pb.norm() < kMinSeparation) ok = false;
      for (int p = b + 1; p < cfg.num_bs && ok; ++p) {
        if ((pb - dep.bs_positions[static_cast<std::size_t>(p)]).norm() <
            kMinSeparation)
          ok = false;
      }
    }
    if (ok) break;
  }
  dep.bs_orientations.resize(static_cast<std::size_t>(cfg.num_bs));
  for (auto& th : dep.bs_orientations) th = rng.uniform(-kPi, kPi);
  dep.ue_orientation = rng.uniform(-kPi, kPi);
  return dep;
}

// Per-base-scheme derived state within one unit: the estimates every scheme
// variant of that base reuses (paired design), plus the evidence weight and
// coefficient variance implied by the measurement gain.
struct BaseData {
  bool computed = false;
  std::vector<VirtualChannelEstimate> est;  // per BS
  double w_sel = 0.0;
  double var_map = 0.0;
};

UnitMetrics compute_unit(const ExperimentConfig& cfg,
                         const std::vector<SchemeSpec>& specs,
                         const Eigen::MatrixXcd& cb_bs,
                         const Eigen::MatrixXcd& cb_ue, int power_index,
                         int trial) {
  const std::uint64_t unit =
      static_cast<std::uint64_t>(power_index) *
          static_cast<std::uint64_t>(cfg.trials) +
      static_cast<std::uint64_t>(trial);
  const double p_lin = dbm_to_linear(cfg.p_dbm[static_cast<std::size_t>(
      power_index)]);

  Rng rng_dep(derive_seed(cfg.seed, unit, 0));
  const NetworkDeployment dep = sample_deployment(cfg, rng_dep);
  std::vector<ChannelMatrix> channels;
  channels.reserve(static_cast<std::size_t>(cfg.num_bs));
  for (int b = 0; b < cfg.num_bs; ++b) {
    channels.push_back(generate_channel(dep, b, cfg.beta, cfg.n_bs, cfg.n_ue,
                                        rng_dep, cfg.expected_paths - 1));
  }

  const bool any_rapid =
      std::any_of(specs.begin(), specs.end(),
                  [](const SchemeSpec& s) { return s.rapid; });
  RayInterceptTable boxed;
  if (any_rapid) {
    const RayInterceptTable table = build_intercept_table(dep, cfg.n_bs);
    const auto [lo, hi] = feasible_box(dep, cfg.grid_half_width + 1e-9);
    boxed = table.restricted_to_box(lo, hi);
  }

  const RecoveryConfig rcfg = cfg.recovery();
  BaseData bases[2];  // [0]: ES, [1]: RDB
  auto ensure_base = [&](bool exhaustive) -> BaseData& {
    BaseData& bd = bases[exhaustive ? 0 : 1];
    if (bd.computed) return bd;
    const BeamSchedule sched =
        exhaustive
            ? es_schedule(cfg.n_ue, cfg.n_bs, cfg.r_bs, cfg.num_bs)
            : draw_schedule(derive_seed(cfg.seed, unit, 1), cfg.t_e, cfg.n_ue,
                            cfg.n_bs, cfg.r_ue, cfg.r_bs, cfg.num_bs);
    Rng rng_noise(derive_seed(cfg.seed, unit, 2 + (exhaustive ? 0u : 1u)));
    bd.est.reserve(static_cast<std::size_t>(cfg.num_bs));
    for (int b = 0; b < cfg.num_bs; ++b) {
      std::vector<Eigen::VectorXcd> slot_obs(
          static_cast<std::size_t>(sched.t_slots));
      for (int m = 0; m < sched.t_slots; ++m) {
        slot_obs[static_cast<std::size_t>(m)] = observe_slot(
            channels[static_cast<std::size_t>(b)].H,
            sched.ue_beams[static_cast<std::size_t>(m)],
            sched.bs_beams[static_cast<std::size_t>(m)]
                          [static_cast<std::size_t>(b)],
            cb_ue, cb_bs, p_lin, cfg.n0, rng_noise);
      }
      const MeasurementRecord rec =
          assemble_cs(sched, b, slot_obs, p_lin, cfg.n0);
      bd.est.push_back(recover(rec, rcfg));
    }
    const double r_ue_eff = sched.r_ue;
    const double a_g2 = p_lin * cfg.n_ue * cfg.n_bs / r_ue_eff;
    const double mean_hits = static_cast<double>(sched.t_slots) * r_ue_eff *
                             cfg.r_bs /
                             (static_cast<double>(cfg.n_ue) * cfg.n_bs);
    bd.w_sel = a_g2 * mean_hits / cfg.n0;
    bd.var_map = cfg.n0 / a_g2;
    bd.computed = true;
    return bd;
  };

  const BeamProbabilityMap flat =
      BeamProbabilityMap::Zero(cfg.n_bs, cfg.n_ue);
  UnitMetrics um;
  um.schemes.resize(specs.size());
  for (std::size_t si = 0; si < specs.size(); ++si) {
    const SchemeSpec& spec = specs[si];
    const BaseData& bd = ensure_base(spec.exhaustive);
    SchemeTrialMetrics& m = um.schemes[si];
    for (int b = 0; b < cfg.num_bs; ++b) {
      const Eigen::MatrixXcd& v_hat =
          bd.est[static_cast<std::size_t>(b)].v_hat;
      std::pair<int, int> sel(0, 0);
      if (!spec.rapid) {
        const auto picked = select_beams(flat, v_hat, 1);
        if (!picked.empty()) sel = picked.front();
      } else {
        std::vector<SharedRays> shares;
        shares.reserve(static_cast<std::size_t>(cfg.num_bs - 1));
        for (int p = 0; p < cfg.num_bs; ++p) {
          if (p == b) continue;
          const std::vector<bool> mask = boxed.row_mask(p, b);
          shares.push_back(
              {p, cfg.share_n_d,
               dominant_entries(bd.est[static_cast<std::size_t>(p)].v_hat,
                                cfg.share_n_d, mask)});
        }
        const BeamProbabilityMap fused =
            fuse_network(v_hat, shares, boxed, dep, b, cb_ue, cfg.beta,
                         bd.var_map);
        const BeamProbabilityMap post = posterior_selection_map(
            fused, v_hat, bd.w_sel, cfg.posterior_floor);
        const auto picked =
            select_beams(post, v_hat, 1, cfg.selection_floor);
        if (!picked.empty()) sel = picked.front();
      }
      m.selections.push_back(sel);
      m.rates.push_back(achievable_rate(channels[static_cast<std::size_t>(b)]
                                            .H,
                                        sel, cb_bs, cb_ue, p_lin, cfg.n0));
    }
    m.min_rate = *std::min_element(m.rates.begin(), m.rates.end());
    m.max_rate = *std::max_element(m.rates.begin(), m.rates.end());
    m.mean_rate = mean_of(m.rates);
    m.n_lo.reserve(cfg.r_th.size());
    for (double th : cfg.r_th) m.n_lo.push_back(coverage_counts(m.rates, th));
  }
  return um;
}

void aggregate(ExperimentResults& res) {
  const ExperimentConfig& cfg = res.cfg;
  const auto specs = cfg.scheme_specs();
  const std::size_t n = static_cast<std::size_t>(cfg.trials);
  for (std::size_t si = 0; si < specs.size(); ++si) {
    for (std::size_t pi = 0; pi < cfg.p_dbm.size(); ++pi) {
      std::vector<double> mins, means, maxs;
      mins.reserve(n);
      means.reserve(n);
      maxs.reserve(n);
      for (std::size_t t = 0; t < n; ++t) {
        const auto& sm = res.units[pi * n + t].schemes[si];
        mins.push_back(sm.min_rate);
        means.push_back(sm.mean_rate);
        maxs.push_back(sm.max_rate);
      }
      const double p = cfg.p_dbm[pi];
      const std::string& name = specs[si].name;
      res.rows.push_back({name, p, "min_rate", mean_of(mins), ci95_of(mins)});
      res.rows.push_back(
          {name, p, "mean_rate", mean_of(means), ci95_of(means)});
      res.rows.push_back({name, p, "max_rate", mean_of(maxs), ci95_of(maxs)});
      for (std::size_t ri = 0; ri < cfg.r_th.size(); ++ri) {
        for (int k = 1; k <= cfg.num_bs; ++k) {
          std::size_t count = 0;
          for (std::size_t t = 0; t < n; ++t) {
            if (res.units[pi * n + t].schemes[si].n_lo[ri] >= k) ++count;
          }
          const double phat =
              static_cast<double>(count) / static_cast<double>(n);
          const double ci =
              n > 0 ? 1.96 * std::sqrt(phat * (1.0 - phat) /
                                       static_cast<double>(n))
                    : 0.0;
          res.rows.push_back({name, p,
                              "pr_nlo_ge_" + std::to_string(k) + "_rth_" +
                                  fmt_g(cfg.r_th[ri]),
                              phat, ci});
        }
      }
    }
  }
}

}  // namespace

double dbm_to_linear(double p_dbm) { return std::pow(10.0, p_dbm / 10.0); }

SchemeSpec parse_scheme(const std::string& name) {
  std::string u;
  u.reserve(name.size());
  for (char c : name)
    u.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (u == "ES") return {true, false, "ES"};
  if (u == "RDB") return {false, false, "RDB"};
  if (u == "ES+RAPID") return {true, true, "ES+RAPID"};
  if (u == "RDB+RAPID") return {false, true, "RDB+RAPID"};
  throw ConfigError("unknown scheme: " + name +
                    " (expected ES, RDB, ES+RAPID, or RDB+RAPID)");
}

void ExperimentConfig::validate() const {
  if (num_bs < 1) throw ConfigError("num_bs must be >= 1");
  if (n_ue < 1 || n_bs < 1) throw ConfigError("array sizes must be >= 1");
  if (r_ue < 1 || r_ue > n_ue)
    throw ConfigError("r_ue must lie in [1, n_ue]");
  if (r_bs < 1 || r_bs > n_bs)
    throw ConfigError("r_bs must lie in [1, n_bs]");
  if (t_e < 1) throw ConfigError("t_e must be >= 1");
  if (!(grid_half_width > 0.0))
    throw ConfigError("grid_half_width must be > 0");
  if (!(beta > 0.0)) throw ConfigError("beta must be > 0");
  if (!(n0 > 0.0)) throw ConfigError("n0 must be > 0");
  if (p_dbm.empty()) throw ConfigError("p_dbm must be non-empty");
  for (double p : p_dbm)
    if (!std::isfinite(p)) throw ConfigError("p_dbm entries must be finite");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (schemes.empty()) throw ConfigError("schemes must be non-empty");
  if (share_n_d < 1) throw ConfigError("share_n_d must be >= 1");
  for (double th : r_th)
    if (!(th >= 0.0)) throw ConfigError("r_th entries must be >= 0");
  if (expected_paths < 1) throw ConfigError("expected_paths must be >= 1");
  if (!(posterior_floor > 0.0))
    throw ConfigError("posterior_floor must be > 0");
  if (!(selection_floor >= 0.0))
    throw ConfigError("selection_floor must be >= 0");
  if (workers < 0) throw ConfigError("workers must be >= 0");
  recovery().validate();
  bool any_es = false;
  bool any_rapid = false;
  for (const auto& s : schemes) {
    const SchemeSpec spec = parse_scheme(s);  // throws on unknown names
    any_es = any_es || spec.exhaustive;
    any_rapid = any_rapid || spec.rapid;
  }
  if (any_es && n_bs % r_bs != 0)
    throw ConfigError("exhaustive sweep requires n_bs divisible by r_bs");
  if (any_rapid && num_bs < 2)
    throw ConfigError("cooperative fusion requires num_bs >= 2");
}

RecoveryConfig ExperimentConfig::recovery() const {
  RecoveryConfig r;
  r.solver = solver_kind_from_string(solver);
  r.sparsity_k = sparsity_k;
  r.gamma = gamma;
  r.max_iters = max_iters;
  r.tol = tol;
  return r;
}

std::vector<SchemeSpec> ExperimentConfig::scheme_specs() const {
  std::vector<SchemeSpec> out;
  out.reserve(schemes.size());
  for (const auto& s : schemes) out.push_back(parse_scheme(s));
  return out;
}

nlohmann::json ExperimentConfig::to_json() const {
  return nlohmann::json{{"num_bs", num_bs},
                        {"n_ue", n_ue},
                        {"n_bs", n_bs},
                        {"r_ue", r_ue},
                        {"r_bs", r_bs},
                        {"t_e", t_e},
                        {"grid_half_width", grid_half_width},
                        {"beta", beta},
                        {"n0", n0},
                        {"p_dbm", p_dbm},
                        {"trials", trials},
                        {"seed", seed},
                        {"schemes", schemes},
                        {"share_n_d", share_n_d},
                        {"r_th", r_th},
                        {"expected_paths", expected_paths},
                        {"solver", solver},
                        {"sparsity_k", sparsity_k},
                        {"gamma", gamma},
                        {"max_iters", max_iters},
                        {"tol", tol},
                        {"posterior_floor", posterior_floor},
                        {"selection_floor", selection_floor},
                        {"workers", workers}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  static const char* known[] = {
      "num_bs",     "n_ue",           "n_bs",
      "r_ue",       "r_bs",           "t_e",
      "grid_half_width", "beta",      "n0",
      "p_dbm",      "trials",         "seed",
      "schemes",    "share_n_d",      "r_th",
      "expected_paths",  "solver",    "sparsity_k",
      "gamma",      "max_iters",      "tol",
      "posterior_floor", "selection_floor", "workers"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find_if(std::begin(known), std::end(known),
                     [&](const char* k) { return key == k; }) ==
        std::end(known)) {
      throw ConfigError("unknown config key: " + key);
    }
  }
  ExperimentConfig c;
  try {
    c.num_bs = j.value("num_bs", c.num_bs);
    c.n_ue = j.value("n_ue", c.n_ue);
    c.n_bs = j.value("n_bs", c.n_bs);
    c.r_ue = j.value("r_ue", c.r_ue);
    c.r_bs = j.value("r_bs", c.r_bs);
    c.t_e = j.value("t_e", c.t_e);
    c.grid_half_width = j.value("grid_half_width", c.grid_half_width);
    c.beta = j.value("beta", c.beta);
    c.n0 = j.value("n0", c.n0);
    c.p_dbm = j.value("p_dbm", c.p_dbm);
    c.trials = j.value("trials", c.trials);
    c.seed = j.value("seed", c.seed);
    c.schemes = j.value("schemes", c.schemes);
    c.share_n_d = j.value("share_n_d", c.share_n_d);
    c.r_th = j.value("r_th", c.r_th);
    c.expected_paths = j.value("expected_paths", c.expected_paths);
    c.solver = j.value("solver", c.solver);
    c.sparsity_k = j.value("sparsity_k", c.sparsity_k);
    c.gamma = j.value("gamma", c.gamma);
    c.max_iters = j.value("max_iters", c.max_iters);
    c.tol = j.value("tol", c.tol);
    c.posterior_floor = j.value("posterior_floor", c.posterior_floor);
    c.selection_floor = j.value("selection_floor", c.selection_floor);
    c.workers = j.value("workers", c.workers);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config type error: ") + e.what());
  }
  return c;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return from_json(j);
}

double achievable_rate(const Eigen::MatrixXcd& h_true,
                       const Eigen::MatrixXcd& w_d,
                       const Eigen::MatrixXcd& f_d, double p_lin, double n0) {
  if (w_d.rows() != h_true.rows() || f_d.rows() != h_true.cols() ||
      w_d.cols() != f_d.cols()) {
    throw ConfigError("achievable_rate: dimension mismatch");
  }
  if (!(n0 > 0.0)) throw ConfigError("achievable_rate: n0 must be > 0");
  const Eigen::MatrixXcd m = w_d.adjoint() * h_true * f_d;
  const Eigen::Index d = m.rows();
  const Eigen::MatrixXcd inner =
      Eigen::MatrixXcd::Identity(d, d) + (p_lin / n0) * m * m.adjoint();
  const double det = std::real(inner.determinant());
  const double rate = std::log2(std::max(det, 1.0));
  if (!std::isfinite(rate))
    throw NumericError("achievable_rate: non-finite rate");
  return rate;
}

double achievable_rate(const Eigen::MatrixXcd& h_true,
                       const std::pair<int, int>& beams,
                       const Eigen::MatrixXcd& codebook_bs,
                       const Eigen::MatrixXcd& codebook_ue, double p_lin,
                       double n0) {
  if (beams.first < 0 || beams.first >= codebook_bs.cols() ||
      beams.second < 0 || beams.second >= codebook_ue.cols()) {
    throw ConfigError("achievable_rate: beam index out of range");
  }
  const Eigen::MatrixXcd w_d = codebook_bs.col(beams.first);
  const Eigen::MatrixXcd f_d = codebook_ue.col(beams.second);
  return achievable_rate(h_true, w_d, f_d, p_lin, n0);
}

int coverage_counts(const std::vector<double>& rates, double r_th) {
  int count = 0;
  for (double r : rates)
    if (r > r_th) ++count;
  return count;
}

BeamProbabilityMap posterior_selection_map(const BeamProbabilityMap& prior,
                                           const Eigen::MatrixXcd& v_hat,
                                           double weight, double floor) {
  if (prior.rows() != v_hat.rows() || prior.cols() != v_hat.cols())
    throw ConfigError("posterior_selection_map: shape mismatch");
  if (!(floor > 0.0))
    throw ConfigError("posterior_selection_map: floor must be > 0");
  if (!(weight >= 0.0) || !std::isfinite(weight))
    throw ConfigError("posterior_selection_map: invalid weight");
  Eigen::MatrixXd score(prior.rows(), prior.cols());
  for (Eigen::Index i = 0; i < prior.rows(); ++i) {
    for (Eigen::Index j = 0; j < prior.cols(); ++j) {
      score(i, j) = weight * std::norm(v_hat(i, j)) +
                    std::log(std::max(prior(i, j), floor));
    }
  }
  const double mx = score.maxCoeff();
  const double lse =
      mx + std::log((score.array() - mx).exp().sum());
  return (score.array() - lse).exp().matrix();
}

ExperimentResults run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto specs = cfg.scheme_specs();
  const Eigen::MatrixXcd cb_bs = codebook(cfg.n_bs);
  const Eigen::MatrixXcd cb_ue = codebook(cfg.n_ue);
  const std::size_t n_units =
      cfg.p_dbm.size() * static_cast<std::size_t>(cfg.trials);

  ExperimentResults res;
  res.cfg = cfg;
  res.units.resize(n_units);

  std::size_t workers =
      cfg.workers > 0
          ? static_cast<std::size_t>(cfg.workers)
          : std::max<std::size_t>(1, std::thread::hardware_concurrency());
  workers = std::min(workers, n_units);

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex err_mutex;
  std::exception_ptr err;
  auto worker_fn = [&]() {
    for (;;) {
      if (failed.load(std::memory_order_relaxed)) return;
      const std::size_t u = next.fetch_add(1);
      if (u >= n_units) return;
      try {
        const int pi = static_cast<int>(u / static_cast<std::size_t>(
                                                cfg.trials));
        const int t = static_cast<int>(u % static_cast<std::size_t>(
                                               cfg.trials));
        res.units[u] = compute_unit(cfg, specs, cb_bs, cb_ue, pi, t);
      } catch (...) {
        {
          const std::lock_guard<std::mutex> lock(err_mutex);
          if (!err) err = std::current_exception();
        }
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };

  if (workers <= 1) {
    worker_fn();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker_fn);
    for (auto& th : pool) th.join();
  }
  if (err) std::rethrow_exception(err);

  aggregate(res);
  return res;
}

std::string to_csv(const ExperimentResults& results) {
  std::string out = "scheme,P_dBm,metric,value,ci95\n";
  for (const auto& row : results.rows) {
    out += row.scheme;
    out += ',';
    out += fmt_g(row.p_dbm);
    out += ',';
    out += row.metric;
    out += ',';
    out += fmt_g(row.value);
    out += ',';
    out += fmt_g(row.ci95);
    out += '\n';
  }
  return out;
}

nlohmann::json to_json(const ExperimentResults& results, bool verbose) {
  nlohmann::json j;
  j["config"] = results.cfg.to_json();
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : results.rows) {
    rows.push_back({{"scheme", row.scheme},
                    {"p_dbm", row.p_dbm},
                    {"metric", row.metric},
                    {"value", row.value},
                    {"ci95", row.ci95}});
  }
  j["aggregates"] = std::move(rows);
  if (verbose) {
    const auto specs = results.cfg.scheme_specs();
    const std::size_t n = static_cast<std::size_t>(results.cfg.trials);
    nlohmann::json powers = nlohmann::json::array();
    for (std::size_t pi = 0; pi < results.cfg.p_dbm.size(); ++pi) {
      nlohmann::json per_power;
      per_power["p_dbm"] = results.cfg.p_dbm[pi];
      nlohmann::json per_scheme;
      for (std::size_t si = 0; si < specs.size(); ++si) {
        nlohmann::json s;
        std::vector<double> mins, means, maxs;
        nlohmann::json n_lo = nlohmann::json::array();
        nlohmann::json selections = nlohmann::json::array();
        for (std::size_t t = 0; t < n; ++t) {
          const auto& sm = results.units[pi * n + t].schemes[si];
          mins.push_back(sm.min_rate);
          means.push_back(sm.mean_rate);
          maxs.push_back(sm.max_rate);
          n_lo.push_back(sm.n_lo);
          nlohmann::json sel = nlohmann::json::array();
          for (const auto& [nb, nu] : sm.selections)
            sel.push_back({nb, nu});
          selections.push_back(std::move(sel));
        }
        s["min_rate"] = mins;
        s["mean_rate"] = means;
        s["max_rate"] = maxs;
        s["n_lo"] = std::move(n_lo);
        s["selections"] = std::move(selections);
        per_scheme[specs[si].name] = std::move(s);
      }
      per_power["schemes"] = std::move(per_scheme);
      powers.push_back(std::move(per_power));
    }
    j["per_trial"] = std::move(powers);
  }
  return j;
}

void validate_invariants(const ExperimentConfig& cfg) {
  cfg.validate();

  // Candidate codebooks must be unitary.
  for (int n : {cfg.n_ue, cfg.n_bs}) {
    const Eigen::MatrixXcd cb = codebook(n);
    const double dev = (cb.adjoint() * cb -
                        Eigen::MatrixXcd::Identity(n, n))
                           .cwiseAbs()
                           .maxCoeff();
    if (dev > 1e-10)
      throw NumericError("codebook unitarity violated for N=" +
                         std::to_string(n));
  }

  // Exhaustive sweep covers each beam pair exactly once.
  if (cfg.n_bs % cfg.r_bs == 0) {
    const int t_es = es_slot_count(cfg.n_ue, cfg.n_bs, cfg.r_bs);
    if (t_es * cfg.r_bs != cfg.n_ue * cfg.n_bs)
      throw NumericError("exhaustive sweep slot count inconsistent");
  }

  // Intercept table mirror symmetry on a sampled deployment.
  Rng rng(derive_seed(cfg.seed, 0, 0));
  const NetworkDeployment dep = sample_deployment(cfg, rng);
  if (cfg.num_bs >= 2) {
    const RayInterceptTable table = build_intercept_table(dep, cfg.n_bs);
    for (int b = 0; b < cfg.num_bs; ++b) {
      for (int p = 0; p < cfg.num_bs; ++p) {
        if (p == b) continue;
        for (int nt = -(cfg.n_bs - 1); nt <= cfg.n_bs - 1; ++nt) {
          for (const auto& e : table.entries(b, p, nt)) {
            bool found = false;
            for (const auto& e2 : table.entries(p, b, e.nt_p)) {
              if (e2.nt_p == nt && e2.r_b == e.r_p && e2.r_p == e.r_b) {
                found = true;
                break;
              }
            }
            if (!found)
              throw NumericError("intercept table is not mirror-symmetric");
          }
        }
      }
    }
  }

  // Noise-free measurements must match the sensing model exactly.
  {
    Rng crng(derive_seed(cfg.seed, 0, 1));
    const Eigen::MatrixXcd cb_bs = codebook(cfg.n_bs);
    const Eigen::MatrixXcd cb_ue = codebook(cfg.n_ue);
    const ChannelMatrix ch =
        generate_channel(dep, 0, cfg.beta, cfg.n_bs, cfg.n_ue, crng);
    const BeamSchedule sched =
        draw_schedule(derive_seed(cfg.seed, 0, 2), cfg.t_e, cfg.n_ue,
                      cfg.n_bs, cfg.r_ue, cfg.r_bs, cfg.num_bs);
    Rng nrng(derive_seed(cfg.seed, 0, 3));
    std::vector<Eigen::VectorXcd> obs(static_cast<std::size_t>(
        sched.t_slots));
    for (int m = 0; m < sched.t_slots; ++m) {
      obs[static_cast<std::size_t>(m)] =
          observe_slot(ch.H, sched.ue_beams[static_cast<std::size_t>(m)],
                       sched.bs_beams[static_cast<std::size_t>(m)][0], cb_ue,
                       cb_bs, 1.0, 0.0, nrng);
    }
    const MeasurementRecord rec = assemble_cs(sched, 0, obs, 1.0, 0.0);
    const Eigen::MatrixXcd v = project_virtual(ch.H, cb_bs, cb_ue);
    const Eigen::VectorXcd v_vec =
        Eigen::Map<const Eigen::VectorXcd>(v.data(), v.size());
    const double rel =
        (rec.y - apply_sensing(rec, v_vec)).norm() / rec.y.norm();
    if (!(rel < 1e-9))
      throw NumericError("noise-free sensing model inconsistency: rel=" +
                         std::to_string(rel));
  }

  // Radial posterior stays inside the open unit interval and matches the
  // direct form where the latter is finite.
  for (int ia = 0; ia < 20; ++ia) {
    for (int ir = 0; ir < 20; ++ir) {
      const double a = std::pow(10.0, -6.0 + 8.0 * ia / 19.0);
      const double r = std::pow(10.0, -1.0 + 4.0 * ir / 19.0);
      const double p =
          radial_posterior(cplx(a, 0.0), r, cfg.beta, cfg.n0);
      if (!(p > 0.0 && p < 1.0))
        throw NumericError("radial posterior left the open unit interval");
      const double d =
          radial_posterior_direct(cplx(a, 0.0), r, cfg.beta, cfg.n0);
      if (std::isfinite(d) && d > 0.0 && d < 1.0) {
        if (std::abs(p - d) > 1e-12 * std::max(d, 1e-300))
          throw NumericError("radial posterior log/direct mismatch");
      }
    }
  }
}

}  // namespace rapid
