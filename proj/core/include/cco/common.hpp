#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cco {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

[[noreturn]] inline void fail(const std::string& msg) { throw Error(msg); }

inline void require(bool ok, const std::string& msg) {
  if (!ok) fail(msg);
}

// ---------------------------------------------------------------------------
// Deterministic randomness. Everything in the project draws from these
// primitives so that a run is a pure function of its seeds; std:: distributions
// are avoided because their draw counts are implementation-defined.

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline uint64_t mix64(uint64_t a, uint64_t b) {
  uint64_t s = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  return splitmix64(s);
}

uint64_t fnv1a64(const void* data, size_t n);
uint64_t fnv1a64(std::string_view s);

// Stable seed for a named sub-stream of a master seed.
inline uint64_t derive_seed(uint64_t master, std::string_view tag) {
  return mix64(master, fnv1a64(tag));
}
inline uint64_t derive_seed(uint64_t master, std::string_view tag, uint64_t index) {
  return mix64(derive_seed(master, tag), index);
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() { return splitmix64(state_); }

  // [0, 1)
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // inclusive bounds
  int uniform_int(int lo, int hi) {
    return lo + int(next_u64() % uint64_t(hi - lo + 1));
  }

  // standard normal via Box-Muller; consumes two draws per call
  double gaussian() {
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = next_u64() % i;
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  uint64_t state_;
};

// Stateless standard normal keyed by an arbitrary hash; used for frozen
// shadowing values so a channel realization never re-rolls.
double gaussian_from_hash(uint64_t h);

// ---------------------------------------------------------------------------
// dB arithmetic

inline double db_to_linear(double db) { return std::pow(10.0, db * 0.1); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

inline double deg_to_rad(double d) { return d * (M_PI / 180.0); }
inline double rad_to_deg(double r) { return r * (180.0 / M_PI); }

// wrap an angle difference into (-180, 180]
double wrap_deg(double deg);

// ---------------------------------------------------------------------------
// Small file helpers

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// 64-bit FNV-1a content digest, hex-encoded; provenance marker, not crypto.
std::string file_digest(const std::filesystem::path& path);
std::string hex64(uint64_t v);

}  // namespace cco
