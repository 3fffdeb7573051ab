#ifndef LANDING_SAMPLING_HPP
#define LANDING_SAMPLING_HPP

#include <cstdint>
#include <vector>

#include "landing/quad_model.hpp"

namespace landing {

/// Per-component bounds on the 12 state components (p, v, eta, w).
struct SampleBox {
  quad::Vec12 lower;
  quad::Vec12 upper;

  /// The paper's initial-state domain: x, y in [-10, 10], z in [5, 100],
  /// velocities in [-0.5, 0.5], roll and pitch in [-pi/4, pi/4], yaw in
  /// [-pi, pi], body rates zero.
  static SampleBox paper();
  /// Throws std::invalid_argument unless lower <= upper componentwise and all
  /// bounds are finite.
  void validate() const;
};

/// Deterministic seed of instance `index` in a run seeded with `seed`.
std::uint64_t instance_seed(std::uint64_t seed, int index);

/// One uniform draw per component. Components with lower == upper are returned
/// exactly.
quad::State sample_state(const SampleBox& box, std::uint64_t seed);

/// n states; state i is sample_state(box, instance_seed(seed, i)).
std::vector<quad::State> sample_initial_states(const SampleBox& box, int n, std::uint64_t seed);

}  // namespace landing

#endif  // LANDING_SAMPLING_HPP
