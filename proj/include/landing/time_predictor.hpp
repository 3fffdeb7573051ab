#ifndef LANDING_TIME_PREDICTOR_HPP
#define LANDING_TIME_PREDICTOR_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "landing/landing_problems.hpp"
#include "landing/sampling.hpp"

// Terminal-time predictors: dataset generation from solved landings, the
// constant / linear / MLP models, training and evaluation.
namespace landing::predict {

struct Record {
  int path_id = 0;
  double tau = 0.0;
  quad::Vec12 state = quad::Vec12::Zero();
  /// Remaining time to touchdown, t_f* (1 - tau).
  double label = 0.0;
};

struct DatasetMeta {
  std::uint64_t seed = 0;
  int steps = 0;
  double tf_guess = 0.0;
  int instances = 0;
  int converged = 0;
  int samples_per_path = 0;
  /// Failed instance index -> failure stage.
  std::map<int, std::string> failures;
};

struct Dataset {
  std::vector<Record> records;
  DatasetMeta meta;

  std::size_t size() const { return records.size(); }
  Eigen::MatrixXd features() const;  // 12 x size
  Eigen::VectorXd labels() const;
  /// Records whose path_id is in `ids`, in original order.
  Dataset subset(const std::vector<int>& ids) const;
  std::vector<int> path_ids() const;
};

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DatasetOptions {
  int instances = 60;
  int steps = 60;
  double tf_guess = 24.0;
  int samples_per_path = 100;
  std::uint64_t seed = 1;
  SampleBox box = SampleBox::paper();
  LandingOptions landing;
  int workers = 0;
};

/// Solves sampled instances with space marching and samples each accepted
/// path at tau_j = j / (samples - 1). Throws DatasetError when fewer than half
/// of the instances are accepted.
Dataset generate_dataset(const DatasetOptions& options);

/// Columns: path_id, tau, 12 state components, label.
void write_dataset_csv(std::ostream& out, const Dataset& data);
Dataset read_dataset_csv(std::istream& in);
std::string dataset_meta_json(const DatasetMeta& meta);
DatasetMeta parse_dataset_meta(const std::string& json);

/// Splits by path so that no path contributes to both parts. The held-out
/// part gets round(fraction * paths) paths, at least one.
std::pair<Dataset, Dataset> split_by_path(const Dataset& data, double holdout_fraction, std::uint64_t seed);

struct ConstantModel {
  double value = 24.0;
};

struct LinearModel {
  quad::Vec12 weights = quad::Vec12::Zero();
  double bias = 0.0;
  /// Set when the design matrix was rank deficient and the ridge fallback
  /// was used.
  bool regularized = false;
};

struct TrainConfig {
  std::vector<int> hidden{64, 64, 64};
  int epochs = 500;
  int batch_size = 128;
  double learning_rate = 0.002;
  std::uint64_t seed = 7;
  double validation_fraction = 0.1;

  void validate() const;
};

struct TrainingInfo {
  /// Training MSE; entry 0 is the loss of the initial weights, entry e the
  /// loss after epoch e.
  std::vector<double> train_loss;
  std::vector<double> validation_loss;
  int best_epoch = 0;
  bool normalized_inputs = true;
  TrainConfig config;
};

/// tanh hidden layers, linear scalar output, standardized inputs, label in
/// seconds.
struct MlpModel {
  std::vector<int> widths;  // input, hidden..., output
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  Eigen::VectorXd input_mean;
  Eigen::VectorXd input_scale;
  TrainingInfo info;

  /// Uniform in +-sqrt(6 / (fan_in + fan_out)), zero biases, identity
  /// normalization.
  static MlpModel initialize(const std::vector<int>& widths, std::uint64_t seed);
  int layers() const { return static_cast<int>(weights.size()); }
  /// Raw outputs for the columns of x (inputs x samples).
  Eigen::RowVectorXd forward(const Eigen::MatrixXd& x) const;
  double forward(const quad::Vec12& x) const;
};

class TrainingDivergedError : public std::runtime_error {
 public:
  TrainingDivergedError(int epoch);
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

using Model = std::variant<ConstantModel, LinearModel, MlpModel>;

std::string kind(const Model& model);

/// Least squares by column-pivoted QR; ridge 1e-8 when rank deficient.
/// Requires at least 13 records.
LinearModel fit_linear(const Dataset& data);

/// Mini-batch Adam on the MSE. The validation part is a path-level split;
/// the returned weights are those of the epoch with the lowest validation
/// loss. Requires at least 1000 records.
MlpModel fit_mlp(const Dataset& data, const TrainConfig& config);

/// Training on explicit arrays with no size requirement. A validation set
/// with zero columns selects the final epoch.
MlpModel train_mlp(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::MatrixXd& x_val,
                   const Eigen::VectorXd& y_val, const TrainConfig& config);

struct Gradients {
  double loss = 0.0;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

/// MSE over the columns of x and its gradient by backpropagation.
Gradients mse_gradients(const MlpModel& model, const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

inline constexpr double kPredictionFloor = 0.5;

/// Model output before the floor.
double raw_predict(const Model& model, const quad::Vec12& x);
/// max(raw_predict, 0.5 s).
double predict(const Model& model, const quad::State& x);

struct Evaluation {
  std::size_t count = 0;
  double rmse = 0.0;
  double median_abs_error = 0.0;
  double p90_abs_error = 0.0;
};

Evaluation evaluate(const Model& model, const Dataset& holdout);

class ModelFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ModelVersionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kModelSchemaVersion = 1;

std::string model_to_json(const Model& model);
/// Throws ModelFormatError on malformed input, ModelVersionError on an
/// unknown schema version or inconsistent layer shapes.
Model model_from_json(const std::string& text);
void save_model(const std::string& path, const Model& model);
Model load_model(const std::string& path);

}  // namespace landing::predict

#endif  // LANDING_TIME_PREDICTOR_HPP
