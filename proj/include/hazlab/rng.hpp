#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace hazlab {

// Explicit random stream. Every sampling routine takes one of these by
// reference; parallel replicates use streams derived from
// (master_seed, i, j) so results never depend on scheduling.
class RngStream {
 public:
  using engine_type = std::mt19937_64;

  explicit RngStream(std::uint64_t seed = 0);

  // Deterministic, well-mixed child stream for (master, a, b).
  static RngStream derive(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0);

  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  double exponential();
  double gamma(double shape, double rate);
  double normal();
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  engine_type& engine() { return engine_; }
  std::uint64_t seed() const { return seed_; }

  std::string serialize() const;
  void restore(const std::string& state);

 private:
  std::uint64_t seed_;
  engine_type engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace hazlab
