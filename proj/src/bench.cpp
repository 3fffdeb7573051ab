#include "landing/bench.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "landing/parallel.hpp"

namespace landing::bench {

namespace {

using json = nlohmann::json;
using quad::State;

constexpr const char* kInstanceHeader =
    "instance_id,seed,x,y,z,vx,vy,vz,phi,theta,psi,wp,wq,wr,accepted,failure_stage,fixed_ok,failed_step,tf_guess,"
    "t_f,cost,wall_time_s,bisections";
constexpr double kTfGuess = 24.0;
constexpr int kTfSteps = 60;

FailureStage parse_stage(const std::string& s) {
  for (FailureStage f : {FailureStage::none, FailureStage::invalid_input, FailureStage::degenerate,
                         FailureStage::fixed, FailureStage::free, FailureStage::verification})
    if (to_string(f) == s) return f;
  throw std::invalid_argument("unknown failure stage '" + s + "'");
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

json report_json(const bvp::SolveReport& r) {
  return {{"status", bvp::to_string(r.status)},    {"converged", r.converged},
          {"final_residual", r.final_residual},    {"nodes", r.node_count},
          {"newton_iterations", r.newton_iterations}, {"mesh_refinements", r.mesh_refinements},
          {"wall_time_s", r.wall_time}};
}

json vec_json(const quad::Vec12& x) { return std::vector<double>(x.data(), x.data() + 12); }

}  // namespace

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::zero: return "zero";
    case Algorithm::warm: return "warm";
    case Algorithm::march: return "march";
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
  for (Algorithm a : {Algorithm::zero, Algorithm::warm, Algorithm::march})
    if (to_string(a) == name) return a;
  throw std::invalid_argument("unknown algorithm '" + name + "' (expected zero, warm or march)");
}

void BenchConfig::validate() const {
  if (samples < 1) throw std::invalid_argument("sample count must be at least 1");
  if (algorithm == Algorithm::march && steps < 1) throw std::invalid_argument("marching needs at least one step");
  if (landing.max_step_bisections < 0) throw std::invalid_argument("bisection depth must be non-negative");
  box.validate();
  landing.params.validate();
}

LandingOutcome solve_instance(Algorithm algorithm, const State& x0, double tf_guess, int steps,
                              const LandingOptions& options) {
  switch (algorithm) {
    case Algorithm::zero: return solve_zero_init(x0, tf_guess, options);
    case Algorithm::warm: return solve_warm_fixed(x0, tf_guess, options);
    case Algorithm::march: return solve_space_marching(x0, tf_guess, steps, options);
  }
  throw std::invalid_argument("unknown algorithm");
}

Aggregates aggregate(const std::vector<InstanceRecord>& records) {
  Aggregates a;
  a.total = static_cast<int>(records.size());
  std::vector<double> times;
  double accepted_time = 0.0;
  for (const InstanceRecord& r : records) {
    a.accepted += r.accepted;
    a.fixed_ok += r.fixed_ok;
    times.push_back(r.wall_time);
    if (r.accepted) accepted_time += r.wall_time;
  }
  if (a.total == 0) return a;
  a.success_rate = static_cast<double>(a.accepted) / a.total;
  a.fixed_stage_rate = static_cast<double>(a.fixed_ok) / a.total;
  a.mean_time = std::accumulate(times.begin(), times.end(), 0.0) / a.total;
  a.median_time = median(times);
  a.mean_time_accepted = a.accepted ? accepted_time / a.accepted : 0.0;
  return a;
}

BenchResult run_benchmark(const BenchConfig& config) {
  config.validate();
  BenchResult result;
  result.config = config;
  const std::vector<State> states = sample_initial_states(config.box, config.samples, config.seed);
  result.instances = parallel_map(config.samples, worker_count(config.workers), [&](int i) {
    InstanceRecord r;
    r.id = i;
    r.seed = instance_seed(config.seed, i);
    r.x0 = states[static_cast<std::size_t>(i)];
    r.tf_guess = predict::predict(config.predictor, r.x0);
    const LandingOutcome out = solve_instance(config.algorithm, r.x0, r.tf_guess, config.steps, config.landing);
    r.accepted = out.accepted();
    r.failure = out.failure;
    r.fixed_ok = out.fixed_stage_succeeded();
    r.failed_step = out.failed_step;
    r.t_f = r.accepted ? out.solution->t_f : std::numeric_limits<double>::quiet_NaN();
    r.cost = r.accepted ? out.solution->cost : std::numeric_limits<double>::quiet_NaN();
    r.wall_time = out.wall_time;
    r.bisections = out.bisections;
    if (config.observer) config.observer(r, out);
    return r;
  });
  result.aggregates = aggregate(result.instances);
  return result;
}

void write_instances_csv(std::ostream& out, const std::vector<InstanceRecord>& records) {
  out << kInstanceHeader << '\n' << std::setprecision(17);
  for (const InstanceRecord& r : records) {
    out << r.id << ',' << r.seed;
    const quad::Vec12 x = r.x0.to_vector();
    for (int c = 0; c < 12; ++c) out << ',' << x[c];
    out << ',' << int(r.accepted) << ',' << to_string(r.failure) << ',' << int(r.fixed_ok) << ',' << r.failed_step
        << ',' << r.tf_guess << ',' << r.t_f << ',' << r.cost << ',' << r.wall_time << ',' << r.bisections << '\n';
  }
}

std::vector<InstanceRecord> read_instances_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kInstanceHeader) throw std::runtime_error("unexpected instance CSV header");
  std::vector<InstanceRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> c;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) c.push_back(cell);
    if (c.size() != 23) throw std::runtime_error("instance CSV row has " + std::to_string(c.size()) + " columns");
    InstanceRecord r;
    r.id = std::stoi(c[0]);
    r.seed = std::stoull(c[1]);
    quad::Vec12 x;
    for (int k = 0; k < 12; ++k) x[k] = std::stod(c[static_cast<std::size_t>(k) + 2]);
    r.x0 = State::from_vector(x);
    r.accepted = c[14] == "1";
    r.failure = parse_stage(c[15]);
    r.fixed_ok = c[16] == "1";
    r.failed_step = std::stoi(c[17]);
    r.tf_guess = std::stod(c[18]);
    r.t_f = std::stod(c[19]);
    r.cost = std::stod(c[20]);
    r.wall_time = std::stod(c[21]);
    r.bisections = std::stoi(c[22]);
    out.push_back(r);
  }
  return out;
}

std::string aggregate_json(const BenchResult& result) {
  const BenchConfig& c = result.config;
  const Aggregates& a = result.aggregates;
  const json j = {
      {"config",
       {{"algorithm", to_string(c.algorithm)},
        {"K", c.steps},
        {"predictor", c.predictor_label},
        {"samples", c.samples},
        {"seed", c.seed},
        {"rel_tol", c.landing.solver.rel_tol},
        {"newton_tol", c.landing.solver.newton_tol},
        {"max_nodes", c.landing.solver.max_nodes},
        {"max_step_bisections", c.landing.max_step_bisections},
        {"box_lower", vec_json(c.box.lower)},
        {"box_upper", vec_json(c.box.upper)}}},
      {"aggregates",
       {{"total", a.total},
        {"accepted", a.accepted},
        {"fixed_ok", a.fixed_ok},
        {"success_rate", a.success_rate},
        {"fixed_stage_rate", a.fixed_stage_rate},
        {"mean_time_s", a.mean_time},
        {"median_time_s", a.median_time},
        {"mean_time_accepted_s", a.mean_time_accepted}}}};
  return j.dump(2);
}

TfDistribution tf_distribution(int n, std::uint64_t seed, const LandingOptions& options, int workers, int bins,
                               const SolveObserver& observer) {
  if (n < 30) throw std::invalid_argument("t_f distribution needs at least 30 instances");
  if (bins < 1) throw std::invalid_argument("histogram needs at least one bin");
  BenchConfig config;
  config.algorithm = Algorithm::march;
  config.steps = kTfSteps;
  config.predictor = predict::ConstantModel{kTfGuess};
  config.samples = n;
  config.seed = seed;
  config.landing = options;
  config.workers = workers;
  config.observer = observer;
  const BenchResult r = run_benchmark(config);

  TfDistribution d;
  d.attempted = n;
  for (const InstanceRecord& rec : r.instances)
    if (rec.accepted) d.t_f.push_back(rec.t_f);
  if (d.t_f.empty()) return d;
  const double m = static_cast<double>(d.t_f.size());
  d.mean = std::accumulate(d.t_f.begin(), d.t_f.end(), 0.0) / m;
  double ss = 0.0;
  for (double t : d.t_f) ss += (t - d.mean) * (t - d.mean);
  d.stddev = d.t_f.size() > 1 ? std::sqrt(ss / (m - 1.0)) : 0.0;

  const auto [lo_it, hi_it] = std::minmax_element(d.t_f.begin(), d.t_f.end());
  const double lo = *lo_it;
  const double width = (*hi_it > lo) ? (*hi_it - lo) / bins : 1.0;
  for (int b = 0; b <= bins; ++b) d.bin_edges.push_back(lo + b * width);
  d.counts.assign(static_cast<std::size_t>(bins), 0);
  for (double t : d.t_f) {
    const int b = std::min(bins - 1, static_cast<int>((t - lo) / width));
    ++d.counts[static_cast<std::size_t>(b)];
  }
  return d;
}

void write_tf_distribution_csv(std::ostream& out, const TfDistribution& d) {
  out << "bin_lower,bin_upper,count\n" << std::setprecision(17);
  for (std::size_t b = 0; b < d.counts.size(); ++b)
    out << d.bin_edges[b] << ',' << d.bin_edges[b + 1] << ',' << d.counts[b] << '\n';
}

std::string tf_distribution_json(const TfDistribution& d) {
  const json j = {{"attempted", d.attempted}, {"accepted", d.t_f.size()}, {"t_f", d.t_f},
                  {"mean", d.mean},           {"stddev", d.stddev},       {"bin_edges", d.bin_edges},
                  {"counts", d.counts}};
  return j.dump(2);
}

std::string solution_summary_json(const LandingOutcome& outcome, Algorithm algorithm, double tf_guess, int steps) {
  json j = {{"algorithm", to_string(algorithm)},
            {"K", steps},
            {"tf_guess", tf_guess},
            {"accepted", outcome.accepted()},
            {"failure_stage", to_string(outcome.failure)},
            {"failed_step", outcome.failed_step},
            {"bisections", outcome.bisections},
            {"wall_time_s", outcome.wall_time},
            {"message", outcome.message}};
  json fixed = json::array();
  for (const auto& r : outcome.fixed_reports) fixed.push_back(report_json(r));
  j["fixed_reports"] = std::move(fixed);
  if (outcome.free_report) j["free_report"] = report_json(*outcome.free_report);
  if (outcome.solution) {
    const LandingSolution& s = *outcome.solution;
    j["t_f"] = s.t_f;
    j["cost"] = s.cost;
    j["pmp"] = {{"max_abs_hamiltonian", s.pmp.max_abs_hamiltonian},
                {"hamiltonian_variation", s.pmp.hamiltonian_variation},
                {"lam_p_drift", s.pmp.lam_p_drift},
                {"terminal_residual", s.pmp.terminal_residual},
                {"max_control_gradient", s.pmp.max_control_gradient}};
  }
  return j.dump(2);
}

}  // namespace landing::bench
