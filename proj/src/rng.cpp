#include "hazlab/rng.hpp"

#include <cmath>
#include <sstream>

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "hazlab/errors.hpp"

namespace hazlab {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

RngStream RngStream::derive(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ splitmix64(a + 0x632BE59BD9B4E019ULL));
  h = splitmix64(h ^ splitmix64(b + 0x8CB92BA72F3D8DD7ULL));
  return RngStream(h);
}

double RngStream::uniform() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::exponential() { return -std::log(uniform()); }

double RngStream::gamma(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) throw DomainError("gamma: shape and rate must be positive");
  boost::random::gamma_distribution<double> d(shape, 1.0 / rate);
  return d(engine_);
}

double RngStream::normal() {
  boost::random::normal_distribution<double> d(0.0, 1.0);
  return d(engine_);
}

std::uint64_t RngStream::below(std::uint64_t n) {
  if (n == 0) throw DomainError("below: empty range");
  boost::random::uniform_int_distribution<std::uint64_t> d(0, n - 1);
  return d(engine_);
}

std::string RngStream::serialize() const {
  std::ostringstream os;
  os << seed_ << ' ' << engine_;
  return os.str();
}

void RngStream::restore(const std::string& state) {
  std::istringstream is(state);
  is >> seed_ >> engine_;
  if (is.fail()) throw ConfigurationError("cannot restore rng state");
}

}  // namespace hazlab
