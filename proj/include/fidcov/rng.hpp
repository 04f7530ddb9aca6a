#pragma once

#include <cstdint>
#include <random>

namespace fidcov {

/// Deterministic random stream. The same (seed, stream_id) pair always
/// produces the same draw sequence; separate stream ids give chains
/// independent, non-overlapping randomness. All distributions are generated
/// in-house so the sequence does not depend on the standard library vendor.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64();

  /// Uniform draw on the open interval (0, 1).
  double uniform();

  /// Standard normal via Box-Muller (one spare cached).
  double normal();

  /// Gamma(shape, 1) via Marsaglia-Tsang squeeze.
  double gamma(double shape);

  double chi_squared(double dof);

  /// Uniform integer in {0, ..., n-1}; n must be positive.
  std::size_t uniform_index(std::size_t n);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fidcov
