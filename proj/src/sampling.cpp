#include "landing/sampling.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace landing {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

SampleBox SampleBox::paper() {
  constexpr double pi = std::numbers::pi;
  SampleBox b;
  b.lower << -10, -10, 5, -0.5, -0.5, -0.5, -pi / 4, -pi / 4, -pi, 0, 0, 0;
  b.upper << 10, 10, 100, 0.5, 0.5, 0.5, pi / 4, pi / 4, pi, 0, 0, 0;
  return b;
}

void SampleBox::validate() const {
  if (!lower.allFinite() || !upper.allFinite()) throw std::invalid_argument("sample box bounds must be finite");
  if ((lower.array() > upper.array()).any()) throw std::invalid_argument("sample box lower bound exceeds upper bound");
}

std::uint64_t instance_seed(std::uint64_t seed, int index) {
  return splitmix64(splitmix64(seed) + static_cast<std::uint64_t>(index));
}

quad::State sample_state(const SampleBox& box, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  quad::Vec12 x;
  for (int i = 0; i < 12; ++i) {
    // 53 random bits in [0, 1), independent of the standard library's
    // distribution implementations.
    const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    x[i] = box.lower[i] + u * (box.upper[i] - box.lower[i]);
  }
  return quad::State::from_vector(x);
}

std::vector<quad::State> sample_initial_states(const SampleBox& box, int n, std::uint64_t seed) {
  box.validate();
  if (n < 0) throw std::invalid_argument("sample count must be non-negative");
  std::vector<quad::State> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(sample_state(box, instance_seed(seed, i)));
  return out;
}

}  // namespace landing
