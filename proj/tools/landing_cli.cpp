// Command-line front end: single solves, benchmarks, t_f* distributions and
// the predictor workflow (gen-data, train, eval-model).
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "landing/bench.hpp"
#include "landing/config.hpp"
#include "landing/time_predictor.hpp"

namespace fs = std::filesystem;
using namespace landing;

namespace {

struct Flags {
  std::string config;
  std::string x0;
  std::uint64_t seed = 1;
  int samples = 20;
  std::string algorithm = "march";
  int steps = 60;
  double tf_guess = 24.0;
  std::string predictor = "constant";
  std::string model;
  double tol = 0.0;
  std::string out;
  std::string data;
  int workers = 0;
  int epochs = 500;
  double holdout = 0.1;
  int samples_per_path = 100;
};

struct Registered {
  CLI::Option* seed = nullptr;
  CLI::Option* samples = nullptr;
  CLI::Option* algorithm = nullptr;
  CLI::Option* steps = nullptr;
  CLI::Option* tf_guess = nullptr;
  CLI::Option* tol = nullptr;
  CLI::Option* workers = nullptr;
};

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

quad::State parse_x0(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  for (std::string cell; std::getline(ss, cell, ',');) v.push_back(std::stod(cell));
  if (v.size() != 12) throw CLI::ValidationError("--x0", "expected 12 comma-separated values");
  return quad::State::from_vector(quad::Vec12(v.data()));
}

// Config file first, then any flag given explicitly on the command line.
bench::BenchConfig resolve(const Flags& f, const Registered& r) {
  bench::BenchConfig c;
  if (!f.config.empty()) config::apply(config::load(f.config), c);
  if (r.seed && r.seed->count()) c.seed = f.seed;
  if (r.samples && r.samples->count()) c.samples = f.samples;
  if (r.algorithm && r.algorithm->count()) c.algorithm = bench::parse_algorithm(f.algorithm);
  if (r.steps && r.steps->count()) c.steps = f.steps;
  if (r.tol && r.tol->count()) c.landing.solver.rel_tol = f.tol;
  if (r.workers && r.workers->count()) c.workers = f.workers;
  if (f.predictor == "constant") {
    if (r.tf_guess && r.tf_guess->count()) {
      c.predictor = predict::ConstantModel{f.tf_guess};
      std::ostringstream label;
      label << "constant:" << f.tf_guess;
      c.predictor_label = label.str();
    }
  } else {
    if (f.model.empty()) throw CLI::ValidationError("--model", "required with --predictor " + f.predictor);
    if (!fs::exists(f.model)) throw CLI::ValidationError("--model", "no such file: " + f.model);
    c.predictor = predict::load_model(f.model);
    if (predict::kind(c.predictor) != f.predictor)
      throw CLI::ValidationError("--model", "file holds a " + predict::kind(c.predictor) + " model");
    c.predictor_label = f.predictor + ":" + f.model;
  }
  return c;
}

predict::Dataset read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read dataset " + path);
  return predict::read_dataset_csv(in);
}

void print_evaluation(const std::string& name, const predict::Evaluation& e) {
  std::cout << name << ": n=" << e.count << " rmse=" << e.rmse << " median_abs=" << e.median_abs_error
            << " p90_abs=" << e.p90_abs_error << '\n';
}

int cmd_solve(const Flags& f, const Registered& r) {
  const bench::BenchConfig c = resolve(f, r);
  c.validate();
  const quad::State x0 = f.x0.empty() ? sample_initial_states(c.box, 1, c.seed)[0] : parse_x0(f.x0);
  const double guess = predict::predict(c.predictor, x0);
  const LandingOutcome out = bench::solve_instance(c.algorithm, x0, guess, c.steps, c.landing);
  const fs::path dir = f.out.empty() ? fs::path(".") : fs::path(f.out);
  write_file(dir / "summary.json", bench::solution_summary_json(out, c.algorithm, guess, c.steps) + "\n");
  if (out.accepted()) {
    std::ostringstream csv;
    write_trajectory_csv(csv, *out.solution, c.landing.params);
    write_file(dir / "trajectory.csv", csv.str());
    std::cout << "accepted t_f=" << out.solution->t_f << " cost=" << out.solution->cost
              << " time=" << out.wall_time << "s\n";
    return 0;
  }
  std::cerr << "failed at stage " << to_string(out.failure);
  if (out.failure == FailureStage::fixed) std::cerr << " (marching step " << out.failed_step << ")";
  if (!out.message.empty()) std::cerr << ": " << out.message;
  std::cerr << '\n';
  return 1;
}

int cmd_bench(const Flags& f, const Registered& r) {
  const bench::BenchResult res = bench::run_benchmark(resolve(f, r));
  const fs::path dir = f.out.empty() ? fs::path("bench_out") : fs::path(f.out);
  std::ostringstream csv;
  bench::write_instances_csv(csv, res.instances);
  write_file(dir / "instances.csv", csv.str());
  write_file(dir / "aggregate.json", bench::aggregate_json(res) + "\n");
  const auto& a = res.aggregates;
  std::cout << bench::to_string(res.config.algorithm) << " " << res.config.predictor_label << ": success "
            << a.accepted << "/" << a.total << " fixed-stage " << a.fixed_ok << "/" << a.total
            << " mean time " << a.mean_time << "s median " << a.median_time << "s\n";
  return 0;
}

int cmd_tf_dist(const Flags& f, const Registered& r) {
  Flags g = f;
  Registered q = r;
  q.samples = nullptr;
  bench::BenchConfig c = resolve(g, q);
  const int n = r.samples->count() ? f.samples : 50;
  const bench::TfDistribution d = bench::tf_distribution(n, c.seed, c.landing, c.workers);
  const fs::path dir = f.out.empty() ? fs::path("tf_dist") : fs::path(f.out);
  std::ostringstream csv;
  bench::write_tf_distribution_csv(csv, d);
  write_file(dir / "histogram.csv", csv.str());
  write_file(dir / "tf_distribution.json", bench::tf_distribution_json(d) + "\n");
  std::cout << "accepted " << d.t_f.size() << "/" << d.attempted << " mean t_f=" << d.mean
            << "s std=" << d.stddev << "s\n";
  return 0;
}

int cmd_gen_data(const Flags& f, const Registered& r) {
  const bench::BenchConfig c = resolve(f, r);
  predict::DatasetOptions o;
  o.instances = r.samples->count() ? f.samples : 96;
  o.steps = c.steps;
  o.tf_guess = r.tf_guess->count() ? f.tf_guess : 24.0;
  o.samples_per_path = f.samples_per_path;
  o.seed = c.seed;
  o.box = c.box;
  o.landing = c.landing;
  o.workers = c.workers;
  const predict::Dataset d = predict::generate_dataset(o);
  const fs::path dir = f.out.empty() ? fs::path("data") : fs::path(f.out);
  std::ostringstream csv;
  predict::write_dataset_csv(csv, d);
  write_file(dir / "dataset.csv", csv.str());
  write_file(dir / "dataset_meta.json", predict::dataset_meta_json(d.meta) + "\n");
  std::cout << "converged " << d.meta.converged << "/" << d.meta.instances << ", " << d.size() << " records\n";
  return 0;
}

int cmd_train(const Flags& f, const Registered& r) {
  const predict::Dataset all = read_dataset(f.data);
  const auto [train, hold] = predict::split_by_path(all, f.holdout, f.seed);
  predict::Model model;
  if (f.predictor == "linear") {
    model = predict::fit_linear(train);
  } else if (f.predictor == "mlp") {
    predict::TrainConfig tc;
    tc.epochs = f.epochs;
    if (r.seed->count()) tc.seed = f.seed;
    model = predict::fit_mlp(train, tc);
    const auto& info = std::get<predict::MlpModel>(model).info;
    std::cout << "loss " << info.train_loss.front() << " -> " << info.train_loss.back() << ", best epoch "
              << info.best_epoch << '\n';
  } else {
    throw CLI::ValidationError("--predictor", "train supports linear or mlp");
  }
  const std::string path = f.out.empty() ? f.predictor + "_model.json" : f.out;
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  predict::save_model(path, model);
  print_evaluation("holdout " + f.predictor, predict::evaluate(model, hold));
  print_evaluation("holdout constant 24", predict::evaluate(predict::ConstantModel{24.0}, hold));
  return 0;
}

int cmd_eval_model(const Flags& f, const Registered&) {
  const predict::Dataset all = read_dataset(f.data);
  const auto [train, hold] = predict::split_by_path(all, f.holdout, f.seed);
  const predict::Model model = f.model.empty() ? predict::Model{predict::ConstantModel{24.0}}
                                               : predict::load_model(f.model);
  print_evaluation("holdout " + predict::kind(model), predict::evaluate(model, hold));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal quadrotor landing: solver, benchmarks and terminal-time predictors"};
  app.require_subcommand(1);
  Flags f;

  struct Sub {
    CLI::App* app;
    Registered reg;
    int (*run)(const Flags&, const Registered&);
  };
  std::vector<Sub> subs;
  auto add = [&](const char* name, const char* help, int (*run)(const Flags&, const Registered&)) -> Sub& {
    subs.push_back({app.add_subcommand(name, help), {}, run});
    Sub& s = subs.back();
    s.app->add_option("--config", f.config, "key = value experiment file")->check(CLI::ExistingFile);
    s.reg.seed = s.app->add_option("--seed", f.seed, "Random seed");
    s.reg.workers = s.app->add_option("--workers", f.workers, "Worker threads (default: LANDING_WORKERS or cores)");
    return s;
  };

  subs.reserve(6);
  {
    Sub& s = add("solve", "Solve one landing and export the trajectory", cmd_solve);
    s.app->add_option("--x0", f.x0, "Initial state, 12 comma-separated values (default: sampled from --seed)");
    s.reg.algorithm = s.app->add_option("--algorithm", f.algorithm, "zero | warm | march");
    s.reg.steps = s.app->add_option("--K", f.steps, "Marching steps");
    s.reg.tf_guess = s.app->add_option("--tf-guess", f.tf_guess, "Constant terminal-time guess");
    s.app->add_option("--predictor", f.predictor, "constant | linear | mlp");
    s.app->add_option("--model", f.model, "Model file for linear or mlp predictors");
    s.reg.tol = s.app->add_option("--tol", f.tol, "Collocation tolerance");
    s.app->add_option("--out", f.out, "Output directory");
  }
  {
    Sub& s = add("bench", "Run one algorithm on sampled initial states", cmd_bench);
    s.reg.samples = s.app->add_option("--samples", f.samples, "Number of instances");
    s.reg.algorithm = s.app->add_option("--algorithm", f.algorithm, "zero | warm | march");
    s.reg.steps = s.app->add_option("--K", f.steps, "Marching steps");
    s.reg.tf_guess = s.app->add_option("--tf-guess", f.tf_guess, "Constant terminal-time guess");
    s.app->add_option("--predictor", f.predictor, "constant | linear | mlp");
    s.app->add_option("--model", f.model, "Model file for linear or mlp predictors");
    s.reg.tol = s.app->add_option("--tol", f.tol, "Collocation tolerance");
    s.app->add_option("--out", f.out, "Output directory");
  }
  {
    Sub& s = add("tf-dist", "Distribution of optimal terminal times (guess 24, K = 60)", cmd_tf_dist);
    s.reg.samples = s.app->add_option("--samples", f.samples, "Number of instances (>= 30, default 50)");
    s.reg.tol = s.app->add_option("--tol", f.tol, "Collocation tolerance");
    s.app->add_option("--out", f.out, "Output directory");
  }
  {
    Sub& s = add("gen-data", "Generate the terminal-time dataset", cmd_gen_data);
    s.reg.samples = s.app->add_option("--samples", f.samples, "Number of instances (default 96)");
    s.reg.steps = s.app->add_option("--K", f.steps, "Marching steps");
    s.reg.tf_guess = s.app->add_option("--tf-guess", f.tf_guess, "Constant terminal-time guess");
    s.app->add_option("--samples-per-path", f.samples_per_path, "Records per solved path");
    s.reg.tol = s.app->add_option("--tol", f.tol, "Collocation tolerance");
    s.app->add_option("--out", f.out, "Output directory");
  }
  {
    Sub& s = add("train", "Fit a linear or MLP terminal-time predictor", cmd_train);
    s.app->add_option("--data", f.data, "Dataset CSV")->required()->check(CLI::ExistingFile);
    s.app->add_option("--predictor", f.predictor, "linear | mlp")->required();
    s.app->add_option("--epochs", f.epochs, "MLP epochs");
    s.app->add_option("--holdout", f.holdout, "Held-out share of paths");
    s.app->add_option("--out", f.out, "Model file");
  }
  {
    Sub& s = add("eval-model", "Evaluate a model on the held-out paths", cmd_eval_model);
    s.app->add_option("--data", f.data, "Dataset CSV")->required()->check(CLI::ExistingFile);
    s.app->add_option("--model", f.model, "Model file (default: constant 24)")->check(CLI::ExistingFile);
    s.app->add_option("--holdout", f.holdout, "Held-out share of paths");
  }

  CLI11_PARSE(app, argc, argv);
  try {
    for (const Sub& s : subs)
      if (s.app->parsed()) return s.run(f, s.reg);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
