#ifndef LANDING_BENCH_HPP
#define LANDING_BENCH_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "landing/landing_problems.hpp"
#include "landing/sampling.hpp"
#include "landing/time_predictor.hpp"

// Benchmark harness: sampled instances, one algorithm, per-instance records
// and aggregates.
namespace landing::bench {

enum class Algorithm { zero, warm, march };

std::string to_string(Algorithm a);
/// "zero", "warm" or "march"; throws std::invalid_argument otherwise.
Algorithm parse_algorithm(const std::string& name);

struct InstanceRecord;

/// Called from the worker thread after each solve.
using SolveObserver = std::function<void(const InstanceRecord&, const LandingOutcome&)>;

struct BenchConfig {
  Algorithm algorithm = Algorithm::march;
  /// Marching steps; ignored by zero and warm.
  int steps = 60;
  predict::Model predictor = predict::ConstantModel{24.0};
  /// Echoed in the aggregate JSON, e.g. "constant:24" or a model path.
  std::string predictor_label = "constant:24";
  int samples = 20;
  std::uint64_t seed = 1;
  SampleBox box = SampleBox::paper();
  LandingOptions landing;
  /// 0 defers to worker_count().
  int workers = 0;
  SolveObserver observer;

  void validate() const;
};

/// Runs one algorithm on x0.
LandingOutcome solve_instance(Algorithm algorithm, const quad::State& x0, double tf_guess, int steps,
                              const LandingOptions& options);

struct InstanceRecord {
  int id = 0;
  std::uint64_t seed = 0;
  quad::State x0;
  bool accepted = false;
  FailureStage failure = FailureStage::invalid_input;
  bool fixed_ok = false;
  int failed_step = 0;
  double tf_guess = 0.0;
  /// NaN unless accepted.
  double t_f = 0.0;
  double cost = 0.0;
  double wall_time = 0.0;
  int bisections = 0;
};

struct Aggregates {
  int total = 0;
  int accepted = 0;
  int fixed_ok = 0;
  double success_rate = 0.0;
  /// Share of instances whose fixed-time stage converged, whatever the
  /// free-time stage did.
  double fixed_stage_rate = 0.0;
  /// Wall time over all instances, seconds.
  double mean_time = 0.0;
  double median_time = 0.0;
  /// Wall time over accepted instances; 0 when none were accepted.
  double mean_time_accepted = 0.0;
};

Aggregates aggregate(const std::vector<InstanceRecord>& records);

struct BenchResult {
  BenchConfig config;
  std::vector<InstanceRecord> instances;
  Aggregates aggregates;
};

/// Samples config.samples states and solves them on the worker pool. Results
/// are in instance order and do not depend on the worker count.
BenchResult run_benchmark(const BenchConfig& config);

void write_instances_csv(std::ostream& out, const std::vector<InstanceRecord>& records);
std::vector<InstanceRecord> read_instances_csv(std::istream& in);
/// Config echo plus aggregates.
std::string aggregate_json(const BenchResult& result);

struct TfDistribution {
  int attempted = 0;
  /// Free-time horizons of the accepted instances, in instance order.
  std::vector<double> t_f;
  std::vector<double> bin_edges;
  std::vector<int> counts;
  double mean = 0.0;
  /// Sample standard deviation.
  double stddev = 0.0;
};

/// Space marching with constant guess 24 and K = 60 on n >= 30 sampled
/// states, plus an equal-width histogram of the accepted t_f*.
TfDistribution tf_distribution(int n, std::uint64_t seed, const LandingOptions& options = {}, int workers = 0,
                               int bins = 10, const SolveObserver& observer = {});
void write_tf_distribution_csv(std::ostream& out, const TfDistribution& d);
std::string tf_distribution_json(const TfDistribution& d);

/// t_f*, cost, PMP diagnostics and reports of a single solve.
std::string solution_summary_json(const LandingOutcome& outcome, Algorithm algorithm, double tf_guess, int steps);

}  // namespace landing::bench

#endif  // LANDING_BENCH_HPP
