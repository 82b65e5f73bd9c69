#include "rsb/random.hpp"

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

namespace rsb {

Engine::Engine(std::uint64_t seed) noexcept {
  std::uint64_t x = seed;
  for (auto& word : s_) {
    x += 0x9e3779b97f4a7c15ULL;
    word = mix64(x);
  }
}

double standard_normal(Engine& engine) {
  // Stateless per call: the ziggurat normal in Boost does not cache a second
  // variate, so draws depend only on the engine state.
  boost::random::normal_distribution<double> dist;
  return dist(engine);
}

double standard_exponential(Engine& engine) {
  boost::random::exponential_distribution<double> dist;
  return dist(engine);
}

}  // namespace rsb
