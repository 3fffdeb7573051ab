#include "landing/time_predictor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "landing/parallel.hpp"

namespace landing::predict {

namespace {

using json = nlohmann::json;

constexpr const char* kStateColumns = "x,y,z,vx,vy,vz,phi,theta,psi,wp,wq,wr";
constexpr double kRidge = 1e-8;
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

double unit_uniform(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

// Fisher-Yates with an explicit modulus draw so the order does not depend on
// the standard library's distributions.
template <class T>
void shuffle(std::vector<T>& v, std::mt19937_64& gen) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[gen() % i]);
}

double mse(const Eigen::RowVectorXd& pred, const Eigen::VectorXd& y) {
  if (y.size() == 0) return 0.0;
  return (pred.transpose() - y).squaredNorm() / static_cast<double>(y.size());
}

// Forward pass on already normalized inputs, keeping every activation.
void forward_normalized(const MlpModel& m, const Eigen::MatrixXd& a0, std::vector<Eigen::MatrixXd>& acts) {
  acts.resize(static_cast<std::size_t>(m.layers()) + 1);
  acts[0] = a0;
  for (int l = 0; l < m.layers(); ++l) {
    const auto L = static_cast<std::size_t>(l);
    Eigen::MatrixXd z = m.weights[L] * acts[L];
    z.colwise() += m.biases[L];
    acts[L + 1] = (l + 1 < m.layers()) ? Eigen::MatrixXd(z.array().tanh()) : z;
  }
}

Eigen::MatrixXd normalize(const MlpModel& m, const Eigen::MatrixXd& x) {
  return (x.colwise() - m.input_mean).array().colwise() / m.input_scale.array();
}

Gradients backprop(const MlpModel& m, const Eigen::MatrixXd& a0, const Eigen::VectorXd& y) {
  std::vector<Eigen::MatrixXd> acts;
  forward_normalized(m, a0, acts);
  const auto n = static_cast<double>(y.size());
  Gradients g;
  g.weights.resize(static_cast<std::size_t>(m.layers()));
  g.biases.resize(static_cast<std::size_t>(m.layers()));
  const Eigen::RowVectorXd err = acts.back().row(0) - y.transpose();
  g.loss = err.squaredNorm() / n;
  Eigen::MatrixXd delta = (2.0 / n) * err;
  for (int l = m.layers() - 1; l >= 0; --l) {
    const auto L = static_cast<std::size_t>(l);
    g.weights[L] = delta * acts[L].transpose();
    g.biases[L] = delta.rowwise().sum();
    if (l > 0) delta = (m.weights[L].transpose() * delta).cwiseProduct((1.0 - acts[L].array().square()).matrix());
  }
  return g;
}

struct Adam {
  std::vector<Eigen::MatrixXd> mw, vw;
  std::vector<Eigen::VectorXd> mb, vb;
  long step = 0;

  explicit Adam(const MlpModel& m) {
    for (int l = 0; l < m.layers(); ++l) {
      const auto L = static_cast<std::size_t>(l);
      mw.push_back(Eigen::MatrixXd::Zero(m.weights[L].rows(), m.weights[L].cols()));
      vw.push_back(mw.back());
      mb.push_back(Eigen::VectorXd::Zero(m.biases[L].size()));
      vb.push_back(mb.back());
    }
  }

  void update(MlpModel& m, const Gradients& g, double lr) {
    ++step;
    const double rate = lr * std::sqrt(1.0 - std::pow(kAdamBeta2, step)) / (1.0 - std::pow(kAdamBeta1, step));
    for (std::size_t l = 0; l < mw.size(); ++l) {
      mw[l] = kAdamBeta1 * mw[l] + (1.0 - kAdamBeta1) * g.weights[l];
      vw[l] = kAdamBeta2 * vw[l] + (1.0 - kAdamBeta2) * g.weights[l].cwiseAbs2();
      m.weights[l].array() -= rate * mw[l].array() / (vw[l].array().sqrt() + kAdamEps);
      mb[l] = kAdamBeta1 * mb[l] + (1.0 - kAdamBeta1) * g.biases[l];
      vb[l] = kAdamBeta2 * vb[l] + (1.0 - kAdamBeta2) * g.biases[l].cwiseAbs2();
      m.biases[l].array() -= rate * mb[l].array() / (vb[l].array().sqrt() + kAdamEps);
    }
  }
};

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

template <class Vec>
json to_array(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vector_from(const json& a, Eigen::Index expected, const char* what) {
  if (!a.is_array()) throw ModelFormatError(std::string(what) + " is not an array");
  if (static_cast<Eigen::Index>(a.size()) != expected)
    throw ModelVersionError(std::string(what) + " has " + std::to_string(a.size()) + " entries, expected " +
                            std::to_string(expected));
  Eigen::VectorXd v(expected);
  for (Eigen::Index i = 0; i < expected; ++i) v[i] = a.at(static_cast<std::size_t>(i)).get<double>();
  return v;
}

json config_json(const TrainConfig& c) {
  return {{"hidden", c.hidden},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"seed", c.seed},
          {"validation_fraction", c.validation_fraction}};
}

}  // namespace

Eigen::MatrixXd Dataset::features() const {
  Eigen::MatrixXd x(12, static_cast<Eigen::Index>(records.size()));
  for (std::size_t i = 0; i < records.size(); ++i) x.col(static_cast<Eigen::Index>(i)) = records[i].state;
  return x;
}

Eigen::VectorXd Dataset::labels() const {
  Eigen::VectorXd y(static_cast<Eigen::Index>(records.size()));
  for (std::size_t i = 0; i < records.size(); ++i) y[static_cast<Eigen::Index>(i)] = records[i].label;
  return y;
}

Dataset Dataset::subset(const std::vector<int>& ids) const {
  const std::set<int> keep(ids.begin(), ids.end());
  Dataset out;
  out.meta = meta;
  for (const Record& r : records)
    if (keep.count(r.path_id)) out.records.push_back(r);
  return out;
}

std::vector<int> Dataset::path_ids() const {
  std::set<int> ids;
  for (const Record& r : records) ids.insert(r.path_id);
  return {ids.begin(), ids.end()};
}

Dataset generate_dataset(const DatasetOptions& o) {
  if (o.instances < 1) throw std::invalid_argument("dataset needs at least one instance");
  if (o.steps < 1) throw std::invalid_argument("marching needs at least one step");
  if (!(o.tf_guess > 0.0)) throw std::invalid_argument("terminal time guess must be positive");
  if (o.samples_per_path < 2) throw std::invalid_argument("need at least two samples per path");

  const std::vector<quad::State> states = sample_initial_states(o.box, o.instances, o.seed);
  struct PathResult {
    std::string failure;
    std::vector<Record> records;
  };
  const int s = o.samples_per_path;
  auto results = parallel_map(o.instances, worker_count(o.workers), [&](int i) {
    PathResult r;
    const LandingOutcome out = solve_space_marching(states[static_cast<std::size_t>(i)], o.tf_guess, o.steps, o.landing);
    if (!out.accepted()) {
      r.failure = to_string(out.failure);
      return r;
    }
    const LandingSolution& sol = *out.solution;
    for (int j = 0; j < s; ++j) {
      const double tau = j == s - 1 ? 1.0 : static_cast<double>(j) / (s - 1);
      r.records.push_back({i, tau, sol.state(tau).to_vector(), sol.t_f * (1.0 - tau)});
    }
    return r;
  });

  Dataset data;
  data.meta.seed = o.seed;
  data.meta.steps = o.steps;
  data.meta.tf_guess = o.tf_guess;
  data.meta.instances = o.instances;
  data.meta.samples_per_path = s;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!results[i].failure.empty()) {
      data.meta.failures[static_cast<int>(i)] = results[i].failure;
      continue;
    }
    ++data.meta.converged;
    data.records.insert(data.records.end(), results[i].records.begin(), results[i].records.end());
  }
  if (2 * data.meta.converged < o.instances) {
    std::map<std::string, int> by_stage;
    for (const auto& [i, stage] : data.meta.failures) ++by_stage[stage];
    std::ostringstream msg;
    msg << "dataset generation: only " << data.meta.converged << " of " << o.instances << " instances converged (";
    bool first = true;
    for (const auto& [stage, count] : by_stage) {
      msg << (first ? "" : ", ") << stage << ": " << count;
      first = false;
    }
    msg << ")";
    throw DatasetError(msg.str());
  }
  return data;
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  out << "path_id,tau," << kStateColumns << ",label\n";
  out << std::setprecision(17);
  for (const Record& r : data.records) {
    out << r.path_id << ',' << r.tau;
    for (int c = 0; c < 12; ++c) out << ',' << r.state[c];
    out << ',' << r.label << '\n';
  }
}

Dataset read_dataset_csv(std::istream& in) {
  Dataset data;
  std::string line;
  if (!std::getline(in, line)) throw DatasetError("dataset file is empty");
  if (line != std::string("path_id,tau,") + kStateColumns + ",label") throw DatasetError("unexpected dataset header");
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 15) throw DatasetError("dataset line " + std::to_string(lineno) + ": expected 15 columns");
    try {
      Record r;
      r.path_id = std::stoi(cells[0]);
      r.tau = std::stod(cells[1]);
      for (int c = 0; c < 12; ++c) r.state[c] = std::stod(cells[static_cast<std::size_t>(c) + 2]);
      r.label = std::stod(cells[14]);
      data.records.push_back(r);
    } catch (const std::logic_error&) {
      throw DatasetError("dataset line " + std::to_string(lineno) + ": not a number");
    }
  }
  return data;
}

std::string dataset_meta_json(const DatasetMeta& m) {
  json failures = json::object();
  for (const auto& [i, stage] : m.failures) failures[std::to_string(i)] = stage;
  const json j = {{"seed", m.seed},
                  {"K", m.steps},
                  {"tf_guess", m.tf_guess},
                  {"instances", m.instances},
                  {"converged", m.converged},
                  {"samples_per_path", m.samples_per_path},
                  {"failures", failures}};
  return j.dump(2);
}

DatasetMeta parse_dataset_meta(const std::string& text) {
  try {
    const json j = json::parse(text);
    DatasetMeta m;
    m.seed = j.at("seed").get<std::uint64_t>();
    m.steps = j.at("K").get<int>();
    m.tf_guess = j.at("tf_guess").get<double>();
    m.instances = j.at("instances").get<int>();
    m.converged = j.at("converged").get<int>();
    m.samples_per_path = j.at("samples_per_path").get<int>();
    for (const auto& [k, v] : j.at("failures").items()) m.failures[std::stoi(k)] = v.get<std::string>();
    return m;
  } catch (const std::exception& e) {
    throw DatasetError(std::string("malformed dataset metadata: ") + e.what());
  }
}

std::pair<Dataset, Dataset> split_by_path(const Dataset& data, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw std::invalid_argument("holdout fraction must lie in (0, 1)");
  std::vector<int> ids = data.path_ids();
  if (ids.size() < 2) throw std::invalid_argument("path split needs at least two paths");
  std::mt19937_64 gen(seed);
  shuffle(ids, gen);
  const auto n = static_cast<double>(ids.size());
  const auto hold = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(fraction * n)), 1, ids.size() - 1);
  const std::vector<int> held(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(hold));
  const std::vector<int> kept(ids.begin() + static_cast<std::ptrdiff_t>(hold), ids.end());
  return {data.subset(kept), data.subset(held)};
}

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("epochs must be at least 1");
  if (batch_size < 1) throw std::invalid_argument("batch size must be at least 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
    throw std::invalid_argument("validation fraction must lie in (0, 1)");
  for (int w : hidden)
    if (w < 1) throw std::invalid_argument("hidden widths must be positive");
}

TrainingDivergedError::TrainingDivergedError(int epoch)
    : std::runtime_error("training diverged at epoch " + std::to_string(epoch)), epoch_(epoch) {}

MlpModel MlpModel::initialize(const std::vector<int>& widths, std::uint64_t seed) {
  if (widths.size() < 2) throw std::invalid_argument("network needs input and output widths");
  MlpModel m;
  m.widths = widths;
  std::mt19937_64 gen(seed);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const int in = widths[l], out = widths[l + 1];
    if (in < 1 || out < 1) throw std::invalid_argument("layer widths must be positive");
    const double a = std::sqrt(6.0 / (in + out));
    Eigen::MatrixXd w(out, in);
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < in; ++c) w(r, c) = -a + 2.0 * a * unit_uniform(gen);
    m.weights.push_back(std::move(w));
    m.biases.push_back(Eigen::VectorXd::Zero(out));
  }
  m.input_mean = Eigen::VectorXd::Zero(widths.front());
  m.input_scale = Eigen::VectorXd::Ones(widths.front());
  return m;
}

Eigen::RowVectorXd MlpModel::forward(const Eigen::MatrixXd& x) const {
  std::vector<Eigen::MatrixXd> acts;
  forward_normalized(*this, normalize(*this, x), acts);
  return acts.back().row(0);
}

double MlpModel::forward(const quad::Vec12& x) const { return forward(Eigen::MatrixXd(x))[0]; }

std::string kind(const Model& model) {
  switch (model.index()) {
    case 0: return "constant";
    case 1: return "linear";
    default: return "mlp";
  }
}

LinearModel fit_linear(const Dataset& data) {
  if (data.size() < 13) throw std::invalid_argument("linear fit needs at least 13 records");
  const auto n = static_cast<Eigen::Index>(data.size());
  Eigen::MatrixXd a(n, 13);
  a.leftCols(12) = data.features().transpose();
  a.col(12).setOnes();
  const Eigen::VectorXd y = data.labels();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  LinearModel m;
  Eigen::VectorXd coef;
  if (qr.rank() == 13) {
    coef = qr.solve(y);
  } else {
    m.regularized = true;
    const Eigen::MatrixXd normal = a.transpose() * a + kRidge * Eigen::MatrixXd::Identity(13, 13);
    coef = normal.ldlt().solve(a.transpose() * y);
  }
  m.weights = coef.head<12>();
  m.bias = coef[12];
  return m;
}

Gradients mse_gradients(const MlpModel& model, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.cols() != y.size() || y.size() == 0) throw std::invalid_argument("inputs and labels disagree in size");
  return backprop(model, normalize(model, x), y);
}

MlpModel train_mlp(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::MatrixXd& x_val,
                   const Eigen::VectorXd& y_val, const TrainConfig& config) {
  config.validate();
  if (x.cols() != y.size() || y.size() == 0) throw std::invalid_argument("inputs and labels disagree in size");
  if (x_val.cols() != y_val.size()) throw std::invalid_argument("validation inputs and labels disagree in size");

  std::vector<int> widths{static_cast<int>(x.rows())};
  widths.insert(widths.end(), config.hidden.begin(), config.hidden.end());
  widths.push_back(1);
  MlpModel m = MlpModel::initialize(widths, config.seed);
  m.input_mean = x.rowwise().mean();
  m.input_scale = ((x.colwise() - m.input_mean).array().square().rowwise().mean()).sqrt().matrix();
  for (Eigen::Index i = 0; i < m.input_scale.size(); ++i)
    if (!(m.input_scale[i] > 1e-12)) m.input_scale[i] = 1.0;
  m.info.config = config;
  m.info.normalized_inputs = true;

  const Eigen::MatrixXd xn = normalize(m, x);
  const Eigen::MatrixXd xv = normalize(m, x_val);
  const bool has_val = y_val.size() > 0;
  std::vector<Eigen::MatrixXd> acts;
  auto loss_on = [&](const Eigen::MatrixXd& a0, const Eigen::VectorXd& t) {
    if (t.size() == 0) return 0.0;
    forward_normalized(m, a0, acts);
    return mse(acts.back().row(0), t);
  };

  m.info.train_loss.push_back(loss_on(xn, y));
  m.info.validation_loss.push_back(loss_on(xv, y_val));
  MlpModel best = m;
  double best_val = has_val ? m.info.validation_loss[0] : m.info.train_loss[0];

  std::mt19937_64 gen(config.seed ^ 0xA5A5A5A5A5A5A5A5ull);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(y.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Adam adam(m);
  const auto n = static_cast<Eigen::Index>(order.size());
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle(order, gen);
    for (Eigen::Index start = 0; start < n; start += config.batch_size) {
      const Eigen::Index len = std::min<Eigen::Index>(config.batch_size, n - start);
      Eigen::MatrixXd xb(xn.rows(), len);
      Eigen::VectorXd yb(len);
      for (Eigen::Index k = 0; k < len; ++k) {
        const Eigen::Index src = order[static_cast<std::size_t>(start + k)];
        xb.col(k) = xn.col(src);
        yb[k] = y[src];
      }
      adam.update(m, backprop(m, xb, yb), config.learning_rate);
    }
    const double tl = loss_on(xn, y);
    const double vl = loss_on(xv, y_val);
    if (!std::isfinite(tl) || !std::isfinite(vl)) throw TrainingDivergedError(epoch);
    m.info.train_loss.push_back(tl);
    m.info.validation_loss.push_back(vl);
    const double score = has_val ? vl : tl;
    if (score < best_val || !has_val) {
      best_val = score;
      best.weights = m.weights;
      best.biases = m.biases;
      best.info.best_epoch = epoch;
    }
  }
  best.info.train_loss = m.info.train_loss;
  best.info.validation_loss = m.info.validation_loss;
  return best;
}

MlpModel fit_mlp(const Dataset& data, const TrainConfig& config) {
  config.validate();
  if (data.size() < 1000) throw std::invalid_argument("MLP training needs at least 1000 records");
  const auto [train, val] = split_by_path(data, config.validation_fraction, config.seed);
  return train_mlp(train.features(), train.labels(), val.features(), val.labels(), config);
}

double raw_predict(const Model& model, const quad::Vec12& x) {
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ConstantModel>) return m.value;
        else if constexpr (std::is_same_v<T, LinearModel>) return m.weights.dot(x) + m.bias;
        else return m.forward(x);
      },
      model);
}

double predict(const Model& model, const quad::State& x) {
  const double raw = raw_predict(model, x.to_vector());
  return std::isfinite(raw) ? std::max(raw, kPredictionFloor) : kPredictionFloor;
}

Evaluation evaluate(const Model& model, const Dataset& holdout) {
  if (holdout.size() == 0) throw std::invalid_argument("evaluation needs a non-empty holdout");
  std::vector<double> err;
  err.reserve(holdout.size());
  double sq = 0.0;
  for (const Record& r : holdout.records) {
    const double e = predict(model, quad::State::from_vector(r.state)) - r.label;
    sq += e * e;
    err.push_back(std::abs(e));
  }
  Evaluation ev;
  ev.count = holdout.size();
  ev.rmse = std::sqrt(sq / static_cast<double>(err.size()));
  ev.median_abs_error = quantile(err, 0.5);
  ev.p90_abs_error = quantile(err, 0.9);
  return ev;
}

std::string model_to_json(const Model& model) {
  json j = {{"schema_version", kModelSchemaVersion}, {"kind", kind(model)}};
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ConstantModel>) {
          j["value"] = m.value;
        } else if constexpr (std::is_same_v<T, LinearModel>) {
          j["weights"] = to_array(m.weights);
          j["bias"] = m.bias;
          j["regularized"] = m.regularized;
        } else {
          j["widths"] = m.widths;
          j["activation"] = "tanh";
          json w = json::array(), b = json::array();
          for (int l = 0; l < m.layers(); ++l) {
            const auto L = static_cast<std::size_t>(l);
            json flat = json::array();
            for (Eigen::Index r = 0; r < m.weights[L].rows(); ++r)
              for (Eigen::Index c = 0; c < m.weights[L].cols(); ++c) flat.push_back(m.weights[L](r, c));
            w.push_back(std::move(flat));
            b.push_back(to_array(m.biases[L]));
          }
          j["weights"] = std::move(w);
          j["biases"] = std::move(b);
          j["input_mean"] = to_array(m.input_mean);
          j["input_scale"] = to_array(m.input_scale);
          j["training"] = {{"train_loss", m.info.train_loss},
                           {"validation_loss", m.info.validation_loss},
                           {"best_epoch", m.info.best_epoch},
                           {"normalized_inputs", m.info.normalized_inputs},
                           {"config", config_json(m.info.config)}};
        }
      },
      model);
  return j.dump();
}

Model model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ModelFormatError(std::string("malformed model file: ") + e.what());
  }
  try {
    if (!j.is_object() || !j.contains("schema_version")) throw ModelFormatError("model file has no schema_version");
    const int version = j.at("schema_version").get<int>();
    if (version != kModelSchemaVersion)
      throw ModelVersionError("unsupported model schema version " + std::to_string(version));
    const std::string k = j.at("kind").get<std::string>();
    if (k == "constant") return ConstantModel{j.at("value").get<double>()};
    if (k == "linear") {
      LinearModel m;
      m.weights = vector_from(j.at("weights"), 12, "linear weights");
      m.bias = j.at("bias").get<double>();
      m.regularized = j.value("regularized", false);
      return m;
    }
    if (k != "mlp") throw ModelFormatError("unknown model kind '" + k + "'");
    MlpModel m;
    m.widths = j.at("widths").get<std::vector<int>>();
    if (m.widths.size() < 2 || m.widths.front() != 12 || m.widths.back() != 1)
      throw ModelVersionError("network must map 12 inputs to 1 output");
    for (int w : m.widths)
      if (w < 1) throw ModelVersionError("layer widths must be positive");
    const json& w = j.at("weights");
    const json& b = j.at("biases");
    const std::size_t layers = m.widths.size() - 1;
    if (!w.is_array() || !b.is_array() || w.size() != layers || b.size() != layers)
      throw ModelVersionError("layer count does not match widths");
    for (std::size_t l = 0; l < layers; ++l) {
      const int in = m.widths[l], out = m.widths[l + 1];
      const Eigen::VectorXd flat = vector_from(w[l], static_cast<Eigen::Index>(in) * out, "layer weights");
      m.weights.push_back(Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          flat.data(), out, in));
      m.biases.push_back(vector_from(b[l], out, "layer biases"));
    }
    m.input_mean = vector_from(j.at("input_mean"), 12, "input_mean");
    m.input_scale = vector_from(j.at("input_scale"), 12, "input_scale");
    if (j.contains("training")) {
      const json& t = j.at("training");
      m.info.train_loss = t.value("train_loss", std::vector<double>{});
      m.info.validation_loss = t.value("validation_loss", std::vector<double>{});
      m.info.best_epoch = t.value("best_epoch", 0);
      m.info.normalized_inputs = t.value("normalized_inputs", true);
      if (t.contains("config")) {
        const json& c = t.at("config");
        m.info.config.hidden = c.value("hidden", m.info.config.hidden);
        m.info.config.epochs = c.value("epochs", m.info.config.epochs);
        m.info.config.batch_size = c.value("batch_size", m.info.config.batch_size);
        m.info.config.learning_rate = c.value("learning_rate", m.info.config.learning_rate);
        m.info.config.seed = c.value("seed", m.info.config.seed);
        m.info.config.validation_fraction = c.value("validation_fraction", m.info.config.validation_fraction);
      }
    }
    return m;
  } catch (const json::exception& e) {
    throw ModelFormatError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const std::string& path, const Model& model) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file " + path);
  out << model_to_json(model) << '\n';
  if (!out) throw std::runtime_error("failed writing model file " + path);
}

Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read model file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace landing::predict
