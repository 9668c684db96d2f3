/**
 * @file classifier.hpp
 * @brief Feedforward neural networks for contact classification: tanh hidden
 *        layers, softmax output, cross-entropy loss with L2 regularization,
 *        Adam training and exhaustive grid search.
 *
 * Two networks are used downstream: FNN-1 maps the estimated wrench
 * (f_x, f_y, m_z) to {Collision, Clamping}; FNN-2 maps the wrench plus the
 * per-chain minimum distances (6 features) to the clamping chain.
 */
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prsim/types.hpp"

namespace prsim {

class FnnModel {
 public:
  FnnModel() = default;

  /// Builds a network with the given layer sizes (input, hidden..., output)
  /// and Xavier-uniform initial weights drawn from the seeded generator.
  FnnModel(const std::vector<int>& layer_sizes, std::uint64_t seed);

  /// Class probabilities for one feature vector. Throws DimensionMismatch.
  Eigen::VectorXd forward(const Eigen::VectorXd& features) const;

  /// Row-wise batch evaluation (rows are samples).
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& features) const;

  int predict(const Eigen::VectorXd& features) const;

  int input_dim() const;
  int output_dim() const;
  std::size_t parameter_count() const;
  const std::vector<int>& layer_sizes() const { return layer_sizes_; }

  /// Per-feature standardization applied before the first layer; set by
  /// train() from training statistics and persisted with the model.
  void set_standardization(const Eigen::VectorXd& mean,
                           const Eigen::VectorXd& stddev);

  void save(const std::string& path) const;
  static FnnModel load(const std::string& path);

  bool trained() const { return trained_; }
  double l2() const { return l2_; }

  const std::vector<Eigen::MatrixXd>& weights() const { return weights_; }
  const std::vector<Eigen::VectorXd>& biases() const { return biases_; }
  std::vector<Eigen::MatrixXd>& weights() { return weights_; }
  std::vector<Eigen::VectorXd>& biases() { return biases_; }

 private:
  friend struct FnnTrainer;

  Eigen::VectorXd standardize(const Eigen::VectorXd& x) const;

  std::vector<int> layer_sizes_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
  Eigen::VectorXd feat_mean_, feat_std_;
  double l2_ = 0.0;
  bool trained_ = false;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 256;
  int epochs = 50;
  double l2 = 0.0;  // lambda
  std::uint64_t seed = 1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
};

struct TrainResult {
  std::vector<double> epoch_loss;  // mean regularized loss per epoch
};

/// Trains in place with Adam on cross-entropy + l2 * ||W||^2. Deterministic
/// for a fixed seed. Throws EmptyDataset / NonFiniteLoss / DimensionMismatch.
TrainResult train(FnnModel& model, const Eigen::MatrixXd& features,
                  const Eigen::VectorXi& labels, const TrainConfig& cfg);

struct LossGradients {
  double loss = 0.0;  // mean cross-entropy + l2 ||W||^2
  std::vector<Eigen::MatrixXd> weight_grads;
  std::vector<Eigen::VectorXd> bias_grads;
};

/// Regularized batch loss and its analytic backprop gradients (the same
/// computation Adam consumes; exposed for finite-difference verification).
LossGradients loss_and_gradients(const FnnModel& model,
                                 const Eigen::MatrixXd& features,
                                 const Eigen::VectorXi& labels, double l2);

double accuracy(const FnnModel& model, const Eigen::MatrixXd& features,
                const Eigen::VectorXi& labels);

/// Row-normalized confusion matrix (rows = true class).
Eigen::MatrixXd confusion_matrix(const FnnModel& model,
                                 const Eigen::MatrixXd& features,
                                 const Eigen::VectorXi& labels,
                                 int num_classes);

struct GridSpec {
  std::vector<int> hidden_layers{2, 3, 5};
  std::vector<int> neurons{10, 25, 30};
  std::vector<double> l2{0.0, 1e-4, 1e-3};
};

struct GridSearchRow {
  int hidden_layers;
  int neurons;
  double l2;
  double val_accuracy;
  std::size_t parameter_count;
};

struct GridSearchResult {
  FnnModel best;
  GridSearchRow best_row;
  std::vector<GridSearchRow> report;  // one row per grid point, grid order
};

/// Exhaustive grid search; selection by validation accuracy, ties broken by
/// smaller parameter count. Grid points may be evaluated concurrently
/// (`jobs` > 1); results are merged in grid order so the outcome does not
/// depend on the job count. Throws EmptyGrid.
GridSearchResult grid_search(const Eigen::MatrixXd& train_x,
                             const Eigen::VectorXi& train_y,
                             const Eigen::MatrixXd& val_x,
                             const Eigen::VectorXi& val_y, int num_classes,
                             const GridSpec& grid, const TrainConfig& base,
                             int jobs = 1);

enum class ContactClass { Collision = 0, Clamping = 1 };

/// FNN-1 decision from the estimated wrench. Throws UntrainedModel.
ContactClass classify_contact(const FnnModel& model, const Wrench& f_ext_hat);

/// FNN-2 decision from wrench + min distances; returns the 0-based chain.
int classify_chain(const FnnModel& model, const Wrench& f_ext_hat,
                   const Vec3& min_dist);

}  // namespace prsim
