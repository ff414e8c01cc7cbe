#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace storm {

// Error taxonomy used across the library. CLI maps these onto exit codes:
// invalid_argument/DataError -> 2, NumericError -> 3.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

using cplx = std::complex<double>;

/// Deterministic RNG with pinned sampling algorithms. std::mt19937_64 drives
/// the bit stream; uniform/normal mappings are implemented here so sampled
/// values do not depend on the standard library's distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Inclusive integer range via 128-bit multiply-shift.
  int uniform_int(int lo, int hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    const auto wide = static_cast<unsigned __int128>(gen_()) * span;
    return lo + static_cast<int>(wide >> 64);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Box-Muller; consumes two uniforms per call.
  double normal() {
    const double u = 1.0 - uniform();  // (0, 1]
    const double r = std::sqrt(-2.0 * std::log(u));
    return r * std::cos(2.0 * M_PI * uniform());
  }

  // Circularly-symmetric complex normal with E|z|^2 = 1
  // (real and imaginary parts each have variance 1/2).
  cplx normal_complex() {
    const double u = 1.0 - uniform();
    const double r = std::sqrt(-std::log(u));
    const double th = 2.0 * M_PI * uniform();
    return {r * std::cos(th), r * std::sin(th)};
  }

  std::string serialize() const {
    std::ostringstream os;
    os << gen_;
    return os.str();
  }

  void deserialize(const std::string& state) {
    std::istringstream is(state);
    is >> gen_;
    if (is.fail()) throw DataError("rng state string is malformed");
  }

 private:
  std::mt19937_64 gen_;
};

/// Stable per-item seed derivation (splitmix64 over seed and index).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

inline bool all_finite(const std::vector<cplx>& v) {
  for (const cplx& x : v)
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
  return true;
}

}  // namespace storm
