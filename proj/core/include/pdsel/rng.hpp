#pragma once

#include <cstdint>
#include <string_view>

#include "pdsel/numerics.hpp"

namespace pdsel {

/// Reproducible random stream: xoshiro256++ whose state is derived from
/// (seed, stream_index) through a SplitMix64 chain, so distinct stream
/// indices give independent streams and identical (seed, index) pairs give
/// identical sequences. Normal variates use the trigonometric Box-Muller
/// transform with pair caching; the choice is fixed so draw sequences are
/// deterministic within a build.
///
/// A stream is single-owner: do not share one instance across threads.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_index);

  static constexpr std::string_view algorithm() { return "xoshiro256++/box-muller"; }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_index() const { return stream_index_; }

  std::uint64_t next_u64();
  // Uniform on {0, ..., bound-1}; bound must be positive.
  std::uint64_t below(std::uint64_t bound);
  // Uniform on [0, 1), 53-bit resolution.
  double uniform();
  // Standard normal.
  double normal();

 private:
  std::uint64_t s_[4];
  std::uint64_t seed_;
  std::uint64_t stream_index_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

// factor * z with z a vector of independent standard normals drawn in index
// order from the stream. Requires factor square.
RealVector sample_gaussian_vector(RngStream& stream, const RealMatrix& factor);

}  // namespace pdsel
