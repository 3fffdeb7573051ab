#include "landing/config.hpp"

#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

namespace landing::config {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::logic_error&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw ConfigError(key + ": '" + v + "' is not a number");
  return x;
}

long long to_integer(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long x = 0;
  try {
    x = std::stoll(v, &used);
  } catch (const std::logic_error&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw ConfigError(key + ": '" + v + "' is not an integer");
  return x;
}

std::vector<double> to_list(const std::string& key, const std::string& v, std::initializer_list<std::size_t> sizes) {
  std::vector<double> out;
  std::stringstream ss(v);
  for (std::string cell; std::getline(ss, cell, ',');) out.push_back(to_double(key, trim(cell)));
  for (std::size_t n : sizes)
    if (out.size() == n) return out;
  throw ConfigError(key + ": wrong number of values (" + std::to_string(out.size()) + ")");
}

}  // namespace

Entries parse(std::istream& in) {
  Entries out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

Entries load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  return parse(in);
}

void apply(const Entries& entries, bench::BenchConfig& c) {
  auto& q = c.landing.params;
  auto& s = c.landing.solver;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  auto real = [](double& field) -> Setter { return [&field](const auto& k, const auto& v) { field = to_double(k, v); }; };
  auto integer = [](int& field) -> Setter {
    return [&field](const auto& k, const auto& v) { field = static_cast<int>(to_integer(k, v)); };
  };
  const std::map<std::string, Setter> setters{
      {"quad.mass", real(q.mass)},
      {"quad.gravity", real(q.gravity)},
      {"quad.arm_length", real(q.arm_length)},
      {"quad.moment_coeff", real(q.moment_coeff)},
      {"quad.inertia",
       [&](const auto& k, const auto& v) {
         const auto x = to_list(k, v, {3});
         q.inertia = {x[0], x[1], x[2]};
       }},
      {"quad.control_weight",
       [&](const auto& k, const auto& v) {
         const auto x = to_list(k, v, {4, 16});
         if (x.size() == 4) {
           q.control_weight = quad::Vec4(x[0], x[1], x[2], x[3]).asDiagonal();
         } else {
           for (int r = 0; r < 4; ++r)
             for (int col = 0; col < 4; ++col) q.control_weight(r, col) = x[static_cast<std::size_t>(4 * r + col)];
         }
       }},
      {"solver.rel_tol", real(s.rel_tol)},
      {"solver.newton_tol", real(s.newton_tol)},
      {"solver.max_nodes", integer(s.max_nodes)},
      {"solver.max_newton_iters", integer(s.max_newton_iters)},
      {"solver.damping_factor", real(s.damping_factor)},
      {"solver.max_halvings", integer(s.max_halvings)},
      {"solver.initial_nodes", integer(s.default_initial_nodes)},
      {"landing.max_step_bisections", integer(c.landing.max_step_bisections)},
      {"box.lower", [&](const auto& k, const auto& v) { c.box.lower = quad::Vec12(to_list(k, v, {12}).data()); }},
      {"box.upper", [&](const auto& k, const auto& v) { c.box.upper = quad::Vec12(to_list(k, v, {12}).data()); }},
      {"bench.algorithm",
       [&](const auto& k, const auto& v) {
         try {
           c.algorithm = bench::parse_algorithm(v);
         } catch (const std::invalid_argument& e) {
           throw ConfigError(k + ": " + e.what());
         }
       }},
      {"bench.K", integer(c.steps)},
      {"bench.tf_guess",
       [&](const auto& k, const auto& v) {
         c.predictor = predict::ConstantModel{to_double(k, v)};
         c.predictor_label = "constant:" + v;
       }},
      {"bench.samples", integer(c.samples)},
      {"bench.seed",
       [&](const auto& k, const auto& v) {
         const long long x = to_integer(k, v);
         if (x < 0) throw ConfigError(k + ": seed must be non-negative");
         c.seed = static_cast<std::uint64_t>(x);
       }},
      {"bench.workers", integer(c.workers)},
  };
  for (const auto& [key, value] : entries) {
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(key, value);
  }
}

}  // namespace landing::config
