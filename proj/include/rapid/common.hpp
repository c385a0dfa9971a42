#pragma once

// Shared numeric utilities: canonical angle wrapping, log-domain helpers,
// a deterministic random stream, and the library's error taxonomy.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rapid {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Invalid user-facing configuration (dimensions, solver names, file schema).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A numeric invariant failed at runtime (non-finite value, failed check).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Canonical wrap to (-pi, pi]. Every angle comparison in the library goes
// through this one function so sums of atan2 outputs stay comparable.
inline double wrap_angle(double a) {
  double w = std::fmod(a + kPi, 2.0 * kPi);
  if (w < 0.0) w += 2.0 * kPi;  // [0, 2*pi)
  w -= kPi;                     // [-pi, pi)
  if (w == -kPi) w = kPi;       // (-pi, pi]
  return w;
}

// log(1 + e^x) without overflow.
inline double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

// Logistic sigmoid, stable for large |x|.
inline double logistic(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl64(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

// Combine a master seed with sub-identifiers into a derived seed. Used to
// hand independent deterministic streams to schedules and trials.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0) {
  std::uint64_t s = master;
  detail::splitmix64(s);
  s ^= 0x9E3779B97F4A7C15ULL * (a + 1);
  detail::splitmix64(s);
  s ^= 0xC2B2AE3D27D4EB4FULL * (b + 1);
  return detail::splitmix64(s);
}

// Deterministic pseudo-random stream (xoshiro256++ seeded via splitmix64).
// Self-contained on purpose: <random> distributions are implementation
// defined, and reproducibility across compilers and worker counts is a
// hard requirement of the simulator.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::uint64_t sm = seed;
    detail::splitmix64(sm);
    sm ^= 0x9E3779B97F4A7C15ULL * (stream + 1);
    bool all_zero = true;
    for (auto& w : s_) {
      w = detail::splitmix64(sm);
      all_zero = all_zero && w == 0;
    }
    if (all_zero) s_[0] = 1;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl64(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = detail::rotl64(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), unbiased (Lemire rejection).
  std::uint64_t uniform_int(std::uint64_t n) {
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      const std::uint64_t t = (0ULL - n) % n;
      while (lo < t) {
        x = next_u64();
        m = static_cast<__uint128_t>(x) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Standard normal via Box-Muller (one cached value).
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * kPi * u2;
    cached_ = rad * std::sin(ang);
    have_cached_ = true;
    return rad * std::cos(ang);
  }

  // Circularly-symmetric complex normal with total variance `var`.
  cplx cnormal(double var) {
    const double s = std::sqrt(var / 2.0);
    const double re = normal();
    const double im = normal();
    return {s * re, s * im};
  }

  // k distinct indexes from [0, n), ascending (partial Fisher-Yates).
  std::vector<int> sample_without_replacement(int n, int k);

 private:
  std::uint64_t s_[4] = {};
  bool have_cached_ = false;
  double cached_ = 0.0;
};

inline std::vector<int> Rng::sample_without_replacement(int n, int k) {
  if (k > n || k < 0) throw ConfigError("sample_without_replacement: k > n");
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  for (int i = 0; i < k; ++i) {
    const int j =
        i + static_cast<int>(uniform_int(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace rapid
