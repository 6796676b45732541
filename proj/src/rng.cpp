#include "lurk/rng.hpp"

#include <cmath>
#include <numbers>

#include "lurk/errors.hpp"

namespace lurk {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t splitmix_next(std::uint64_t& state) {
  state += kGolden;
  return mix64(state);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

} // namespace

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : RngStream(mix64(seed) ^ mix64(stream_id + kGolden), stream_id, true) {}

RngStream::RngStream(std::uint64_t mixed_seed, std::uint64_t stream_id, bool)
    : stream_id_(stream_id) {
  std::uint64_t state = mixed_seed;
  for (auto& word : s_) word = splitmix_next(state);
}

RngStream RngStream::derive(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = mix64(seed);
  for (const auto key : keys) h = mix64(h ^ mix64(key + kGolden));
  return RngStream(h, h, true);
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RngStream::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
  if (spare_) {
    const double z = *spare_;
    spare_.reset();
    return z;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

GaussianDesign::GaussianDesign(Eigen::VectorXd mean, Eigen::VectorXd sd)
    : mu(std::move(mean)), sigma(std::move(sd)) {
  if (mu.size() != sigma.size()) throw DimensionMismatch("design mean and sd lengths differ");
  if ((sigma.array() <= 0.0).any() || !sigma.allFinite() || !mu.allFinite()) {
    throw DomainError("design standard deviations must be finite and positive");
  }
}

Eigen::MatrixXd sample_design(const GaussianDesign& design, Eigen::Index n, RngStream& rng) {
  Eigen::MatrixXd x(n, design.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < design.size(); ++j) {
      x(i, j) = design.mu(j) + design.sigma(j) * rng.normal();
    }
  }
  return x;
}

} // namespace lurk
