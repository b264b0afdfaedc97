#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace fkspde {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Seed for the stream addressed by (master, i0, i1, ...). Independent of scheduling.
inline std::uint64_t stream_seed(std::uint64_t master, std::initializer_list<std::uint64_t> index) {
  std::uint64_t h = splitmix64(master);
  for (auto i : index) h = splitmix64(h ^ splitmix64(i + 0x632BE59BD9B4E019ULL));
  return h;
}

class Stream {
 public:
  explicit Stream(std::uint64_t seed = 0) : engine_(seed) {}
  Stream(std::uint64_t master, std::initializer_list<std::uint64_t> index)
      : engine_(stream_seed(master, index)) {}

  std::uint64_t bits() { return engine_(); }
  // Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }
  double normal() { return normal_(engine_); }
  double exponential() { return -std::log(uniform()); }
  double gamma(double shape) { return std::gamma_distribution<double>(shape, 1.0)(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace fkspde
