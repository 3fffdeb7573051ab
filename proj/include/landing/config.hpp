#ifndef LANDING_CONFIG_HPP
#define LANDING_CONFIG_HPP

#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>

#include "landing/bench.hpp"

// Experiment files: one `key = value` per line, `#` starts a comment. Vector
// values are comma separated.
//
//   quad.mass, quad.gravity, quad.arm_length, quad.moment_coeff
//   quad.inertia                 3 values
//   quad.control_weight          4 diagonal values or 16 row-major values
//   solver.rel_tol, solver.newton_tol, solver.max_nodes,
//   solver.max_newton_iters, solver.damping_factor, solver.max_halvings,
//   solver.initial_nodes
//   landing.max_step_bisections
//   box.lower, box.upper         12 values each
//   bench.algorithm, bench.K, bench.tf_guess, bench.samples, bench.seed,
//   bench.workers
namespace landing::config {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Entries = std::map<std::string, std::string>;

Entries parse(std::istream& in);
Entries load(const std::string& path);

/// Applies every entry to `config`; unknown keys and malformed values throw
/// ConfigError.
void apply(const Entries& entries, bench::BenchConfig& config);

}  // namespace landing::config

#endif  // LANDING_CONFIG_HPP
