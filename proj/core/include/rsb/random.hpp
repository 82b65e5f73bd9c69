#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace rsb {

// Every random quantity in the library is drawn from an Engine whose seed is
// a pure function of (master seed, purpose, indices). The derivation tree is
//
//   master -> module stream -> replica -> purpose -> level -> node
//
// so any traversal order or parallel partition reproduces the same values.

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Child seed of `parent` along the labelled edge `label`.
constexpr std::uint64_t derive_seed(std::uint64_t parent,
                                    std::uint64_t label) noexcept {
  return mix64(parent ^ mix64(label ^ 0x5851f42d4c957f2dULL));
}

constexpr std::uint64_t derive_seed(
    std::uint64_t parent, std::initializer_list<std::uint64_t> path) noexcept {
  for (std::uint64_t label : path) parent = derive_seed(parent, label);
  return parent;
}

// Purpose labels used as the first edge below a replica seed.
enum class Stream : std::uint64_t {
  kPdPoints = 0x10,
  kPdMarks = 0x11,
  kMarkPool = 0x12,
  kCascadePoints = 0x20,
  kCascadeMarks = 0x21,
  kFields = 0x22,
  kHamiltonian = 0x30,
  kReplica = 0x40,
  kModule = 0x50,
};

constexpr std::uint64_t stream_seed(std::uint64_t parent, Stream s) noexcept {
  return derive_seed(parent, static_cast<std::uint64_t>(s));
}

/// Seed of replica `index` below `seed`.
constexpr std::uint64_t replica_seed(std::uint64_t seed,
                                     std::uint64_t index) noexcept {
  return derive_seed(stream_seed(seed, Stream::kReplica), index);
}

/// xoshiro256++ with SplitMix64 state expansion. Cheap to construct, which is
/// what per-node seeding needs.
class Engine {
 public:
  using result_type = std::uint64_t;

  explicit Engine(std::uint64_t seed) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on the open interval (0, 1).
  double uniform_open() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

/// Standard normal and unit exponential draws. Both use Boost's ziggurat
/// samplers, whose output is identical on every platform.
double standard_normal(Engine& engine);
double standard_exponential(Engine& engine);

}  // namespace rsb
