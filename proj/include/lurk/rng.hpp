#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <optional>

#include <Eigen/Core>

namespace lurk {

/// Deterministic, splittable random stream.
///
/// xoshiro256** seeded through SplitMix64 from a (seed, key...) tuple. The
/// generator and the normal transform are frozen: a given (seed, keys) pair
/// yields the same sequence on every platform with IEEE doubles.
class RngStream {
public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  /// Stream keyed by an arbitrary tuple of integers (e.g. cell and replication
  /// indices). Distinct key tuples give unrelated streams.
  static RngStream derive(std::uint64_t seed, std::initializer_list<std::uint64_t> keys);

  [[nodiscard]] std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1), 53 bits of resolution.
  double uniform();
  /// Standard normal via the Box-Muller transform; the sine branch is cached.
  double normal();

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next_u64(); }

private:
  RngStream(std::uint64_t mixed_seed, std::uint64_t stream_id, bool);

  std::array<std::uint64_t, 4> s_{};
  std::uint64_t stream_id_ = 0;
  std::optional<double> spare_;
};

/// SplitMix64 finalizer; exposed for key hashing.
std::uint64_t mix64(std::uint64_t x);

/// Independent Gaussian sampling design in log space: x ~ N(mu, diag(sigma^2)).
struct GaussianDesign {
  Eigen::VectorXd mu;
  Eigen::VectorXd sigma;

  GaussianDesign() = default;
  GaussianDesign(Eigen::VectorXd mean, Eigen::VectorXd sd);

  [[nodiscard]] Eigen::Index size() const { return mu.size(); }
};

/// n x p matrix whose rows are independent draws from `design`, filled row by row.
Eigen::MatrixXd sample_design(const GaussianDesign& design, Eigen::Index n, RngStream& rng);

} // namespace lurk
