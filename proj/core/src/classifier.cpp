#include "prsim/classifier.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <numeric>
#include <random>
#include <sstream>

namespace prsim {

namespace {

Eigen::MatrixXd softmax_rows(Eigen::MatrixXd z) {
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    const double m = z.row(r).maxCoeff();
    z.row(r) = (z.row(r).array() - m).exp();
    z.row(r) /= z.row(r).sum();
  }
  return z;
}

}  // namespace

FnnModel::FnnModel(const std::vector<int>& layer_sizes, std::uint64_t seed)
    : layer_sizes_(layer_sizes) {
  if (layer_sizes.size() < 2)
    throw ConfigError("network needs at least input and output layers");
  for (int n : layer_sizes)
    if (n <= 0) throw ConfigError("layer sizes must be positive");
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int fan_in = layer_sizes[l], fan_out = layer_sizes[l + 1];
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Eigen::MatrixXd w(fan_out, fan_in);
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = dist(rng);
    weights_.push_back(std::move(w));
    biases_.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  feat_mean_ = Eigen::VectorXd::Zero(layer_sizes.front());
  feat_std_ = Eigen::VectorXd::Ones(layer_sizes.front());
}

int FnnModel::input_dim() const {
  return layer_sizes_.empty() ? 0 : layer_sizes_.front();
}

int FnnModel::output_dim() const {
  return layer_sizes_.empty() ? 0 : layer_sizes_.back();
}

std::size_t FnnModel::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l)
    n += static_cast<std::size_t>(weights_[l].size()) + biases_[l].size();
  return n;
}

void FnnModel::set_standardization(const Eigen::VectorXd& mean,
                                   const Eigen::VectorXd& stddev) {
  if (mean.size() != input_dim() || stddev.size() != input_dim())
    throw DimensionMismatch("standardization size does not match input dim");
  feat_mean_ = mean;
  feat_std_ = stddev.cwiseMax(1e-12);
}

Eigen::VectorXd FnnModel::standardize(const Eigen::VectorXd& x) const {
  return (x - feat_mean_).cwiseQuotient(feat_std_);
}

Eigen::VectorXd FnnModel::forward(const Eigen::VectorXd& features) const {
  if (features.size() != input_dim())
    throw DimensionMismatch("feature dimension does not match network input");
  Eigen::VectorXd a = standardize(features);
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Eigen::VectorXd z = weights_[l] * a + biases_[l];
    if (l + 1 < weights_.size()) {
      a = z.array().tanh();
    } else {
      const double m = z.maxCoeff();
      a = (z.array() - m).exp();
      a /= a.sum();
    }
  }
  return a;
}

Eigen::MatrixXd FnnModel::forward_batch(const Eigen::MatrixXd& features) const {
  if (features.cols() != input_dim())
    throw DimensionMismatch("feature dimension does not match network input");
  Eigen::MatrixXd a = (features.rowwise() - feat_mean_.transpose()).array()
                          .rowwise() /
                      feat_std_.transpose().array();
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Eigen::MatrixXd z =
        (a * weights_[l].transpose()).rowwise() + biases_[l].transpose();
    if (l + 1 < weights_.size())
      a = z.array().tanh();
    else
      a = softmax_rows(std::move(z));
  }
  return a;
}

int FnnModel::predict(const Eigen::VectorXd& features) const {
  Eigen::Index best;
  forward(features).maxCoeff(&best);
  return static_cast<int>(best);
}

void FnnModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open model file for writing: " + path);
  auto put = [&out](double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  out << "prsim-fnn v1\n";
  out << "layers";
  for (int n : layer_sizes_) out << ' ' << n;
  out << "\nl2 ";
  put(l2_);
  out << "\ntrained " << (trained_ ? 1 : 0) << "\nfeat_mean";
  for (Eigen::Index i = 0; i < feat_mean_.size(); ++i) {
    out << ' ';
    put(feat_mean_[i]);
  }
  out << "\nfeat_std";
  for (Eigen::Index i = 0; i < feat_std_.size(); ++i) {
    out << ' ';
    put(feat_std_[i]);
  }
  out << '\n';
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out << "W" << l << ' ' << weights_[l].rows() << ' ' << weights_[l].cols()
        << '\n';
    for (Eigen::Index i = 0; i < weights_[l].rows(); ++i) {
      for (Eigen::Index j = 0; j < weights_[l].cols(); ++j) {
        if (j) out << ' ';
        put(weights_[l](i, j));
      }
      out << '\n';
    }
    out << "b" << l << ' ' << biases_[l].size() << '\n';
    for (Eigen::Index i = 0; i < biases_[l].size(); ++i) {
      if (i) out << ' ';
      put(biases_[l][i]);
    }
    out << '\n';
  }
}

FnnModel FnnModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file: " + path);
  std::string magic, version;
  in >> magic >> version;
  if (magic != "prsim-fnn" || version != "v1")
    throw ConfigError("unrecognized model file format: " + path);
  FnnModel m;
  std::string token;
  in >> token;  // "layers"
  std::string line;
  std::getline(in, line);
  {
    std::istringstream ls(line);
    int n;
    while (ls >> n) m.layer_sizes_.push_back(n);
  }
  if (m.layer_sizes_.size() < 2) throw ConfigError("model file: bad layers");
  double l2v;
  int trained_flag;
  in >> token >> l2v;        // l2
  in >> token >> trained_flag;  // trained
  m.l2_ = l2v;
  m.trained_ = trained_flag != 0;
  const int d = m.layer_sizes_.front();
  m.feat_mean_.resize(d);
  m.feat_std_.resize(d);
  in >> token;  // feat_mean
  for (int i = 0; i < d; ++i) in >> m.feat_mean_[i];
  in >> token;  // feat_std
  for (int i = 0; i < d; ++i) in >> m.feat_std_[i];
  for (std::size_t l = 0; l + 1 < m.layer_sizes_.size(); ++l) {
    Eigen::Index rows, cols;
    in >> token >> rows >> cols;  // W<l>
    Eigen::MatrixXd w(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) in >> w(i, j);
    Eigen::Index bn;
    in >> token >> bn;  // b<l>
    Eigen::VectorXd b(bn);
    for (Eigen::Index i = 0; i < bn; ++i) in >> b[i];
    if (!in) throw ConfigError("model file truncated: " + path);
    if (rows != m.layer_sizes_[l + 1] || cols != m.layer_sizes_[l] ||
        bn != rows)
      throw ConfigError("model file: inconsistent layer dimensions");
    m.weights_.push_back(std::move(w));
    m.biases_.push_back(std::move(b));
  }
  return m;
}

struct FnnTrainer {
  static TrainResult run(FnnModel& model, const Eigen::MatrixXd& x,
                         const Eigen::VectorXi& y, const TrainConfig& cfg) {
    const Eigen::Index n = x.rows();
    if (n == 0) throw EmptyDataset("training set is empty");
    if (x.cols() != model.input_dim())
      throw DimensionMismatch("training features do not match network input");
    if (y.size() != n)
      throw DimensionMismatch("label count does not match feature rows");
    if (y.minCoeff() < 0 || y.maxCoeff() >= model.output_dim())
      throw DimensionMismatch("label outside network output range");

    model.l2_ = cfg.l2;
    // Standardize from training statistics unless already configured.
    Eigen::VectorXd mean = x.colwise().mean();
    Eigen::VectorXd stddev =
        ((x.rowwise() - mean.transpose()).array().square().colwise().sum() /
         std::max<double>(1.0, static_cast<double>(n - 1)))
            .sqrt()
            .matrix();
    model.set_standardization(mean, stddev);

    auto& w = model.weights_;
    auto& b = model.biases_;
    const std::size_t layers = w.size();
    std::vector<Eigen::MatrixXd> mw(layers), vw(layers);
    std::vector<Eigen::VectorXd> mb(layers), vb(layers);
    for (std::size_t l = 0; l < layers; ++l) {
      mw[l] = Eigen::MatrixXd::Zero(w[l].rows(), w[l].cols());
      vw[l] = mw[l];
      mb[l] = Eigen::VectorXd::Zero(b[l].size());
      vb[l] = mb[l];
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(cfg.seed);
    TrainResult result;
    long step = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      double epoch_loss = 0.0;
      Eigen::Index seen = 0;
      for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
        const Eigen::Index bs =
            std::min<Eigen::Index>(cfg.batch_size, n - start);
        Eigen::MatrixXd xb(bs, x.cols());
        Eigen::VectorXi yb(bs);
        for (Eigen::Index i = 0; i < bs; ++i) {
          xb.row(i) = x.row(order[start + i]);
          yb[i] = y[order[start + i]];
        }
        const double loss = sgd_step(model, xb, yb, cfg, mw, vw, mb, vb, ++step);
        if (!std::isfinite(loss)) throw NonFiniteLoss("training diverged");
        epoch_loss += loss * static_cast<double>(bs);
        seen += bs;
      }
      result.epoch_loss.push_back(epoch_loss / static_cast<double>(seen));
    }
    model.trained_ = true;
    return result;
  }

  /// Forward + backprop on a batch; returns the regularized loss and fills
  /// the per-layer gradients.
  static double gradients(const FnnModel& model, const Eigen::MatrixXd& xb,
                          const Eigen::VectorXi& yb, double l2,
                          std::vector<Eigen::MatrixXd>& grad_w,
                          std::vector<Eigen::VectorXd>& grad_b) {
    const auto& w = model.weights_;
    const auto& b = model.biases_;
    const std::size_t layers = w.size();
    const Eigen::Index bs = xb.rows();
    grad_w.resize(layers);
    grad_b.resize(layers);

    // Forward pass, keeping activations (rows = samples).
    std::vector<Eigen::MatrixXd> act(layers + 1);
    act[0] = (xb.rowwise() - model.feat_mean_.transpose()).array().rowwise() /
             model.feat_std_.transpose().array();
    for (std::size_t l = 0; l < layers; ++l) {
      Eigen::MatrixXd z =
          (act[l] * w[l].transpose()).rowwise() + b[l].transpose();
      act[l + 1] = (l + 1 < layers) ? z.array().tanh().matrix()
                                    : softmax_rows(std::move(z));
    }

    double loss = 0.0;
    for (Eigen::Index i = 0; i < bs; ++i)
      loss -= std::log(std::max(act[layers](i, yb[i]), 1e-300));
    loss /= static_cast<double>(bs);
    for (std::size_t l = 0; l < layers; ++l) loss += l2 * w[l].squaredNorm();

    // Backward pass: delta at the softmax output is (p - onehot)/bs.
    Eigen::MatrixXd delta = act[layers];
    for (Eigen::Index i = 0; i < bs; ++i) delta(i, yb[i]) -= 1.0;
    delta /= static_cast<double>(bs);

    for (std::size_t li = layers; li-- > 0;) {
      grad_w[li] = delta.transpose() * act[li] + 2.0 * l2 * w[li];
      grad_b[li] = delta.colwise().sum().transpose();
      if (li > 0) {
        // Propagate through tanh: act' = 1 - act^2.
        delta = (delta * w[li]).cwiseProduct(
            (1.0 - act[li].array().square()).matrix());
      }
    }
    return loss;
  }

  /// One Adam step on a batch; returns the regularized batch loss.
  static double sgd_step(FnnModel& model, const Eigen::MatrixXd& xb,
                         const Eigen::VectorXi& yb, const TrainConfig& cfg,
                         std::vector<Eigen::MatrixXd>& mw,
                         std::vector<Eigen::MatrixXd>& vw,
                         std::vector<Eigen::VectorXd>& mb,
                         std::vector<Eigen::VectorXd>& vb, long step) {
    std::vector<Eigen::MatrixXd> grad_w;
    std::vector<Eigen::VectorXd> grad_b;
    const double loss = gradients(model, xb, yb, cfg.l2, grad_w, grad_b);

    auto& w = model.weights_;
    auto& b = model.biases_;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
    for (std::size_t li = 0; li < w.size(); ++li) {
      mw[li] = cfg.beta1 * mw[li] + (1.0 - cfg.beta1) * grad_w[li];
      vw[li] = cfg.beta2 * vw[li] +
               (1.0 - cfg.beta2) * grad_w[li].cwiseProduct(grad_w[li]);
      mb[li] = cfg.beta1 * mb[li] + (1.0 - cfg.beta1) * grad_b[li];
      vb[li] = cfg.beta2 * vb[li] +
               (1.0 - cfg.beta2) * grad_b[li].cwiseProduct(grad_b[li]);
      w[li] -= (cfg.learning_rate * (mw[li] / bc1).array() /
                ((vw[li] / bc2).array().sqrt() + cfg.adam_eps))
                   .matrix();
      b[li] -= (cfg.learning_rate * (mb[li] / bc1).array() /
                ((vb[li] / bc2).array().sqrt() + cfg.adam_eps))
                   .matrix();
    }
    return loss;
  }
};

LossGradients loss_and_gradients(const FnnModel& model,
                                 const Eigen::MatrixXd& features,
                                 const Eigen::VectorXi& labels, double l2) {
  if (features.rows() == 0) throw EmptyDataset("empty batch");
  if (features.cols() != model.input_dim())
    throw DimensionMismatch("features do not match network input");
  LossGradients out;
  out.loss = FnnTrainer::gradients(model, features, labels, l2,
                                   out.weight_grads, out.bias_grads);
  return out;
}

TrainResult train(FnnModel& model, const Eigen::MatrixXd& features,
                  const Eigen::VectorXi& labels, const TrainConfig& cfg) {
  return FnnTrainer::run(model, features, labels, cfg);
}

double accuracy(const FnnModel& model, const Eigen::MatrixXd& features,
                const Eigen::VectorXi& labels) {
  if (features.rows() == 0) throw EmptyDataset("empty evaluation set");
  const Eigen::MatrixXd probs = model.forward_batch(features);
  Eigen::Index correct = 0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    Eigen::Index arg;
    probs.row(i).maxCoeff(&arg);
    if (arg == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(probs.rows());
}

Eigen::MatrixXd confusion_matrix(const FnnModel& model,
                                 const Eigen::MatrixXd& features,
                                 const Eigen::VectorXi& labels,
                                 int num_classes) {
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(num_classes, num_classes);
  const Eigen::MatrixXd probs = model.forward_batch(features);
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    Eigen::Index arg;
    probs.row(i).maxCoeff(&arg);
    counts(labels[i], arg) += 1.0;
  }
  for (int r = 0; r < num_classes; ++r) {
    const double total = counts.row(r).sum();
    if (total > 0.0) counts.row(r) /= total;
  }
  return counts;
}

GridSearchResult grid_search(const Eigen::MatrixXd& train_x,
                             const Eigen::VectorXi& train_y,
                             const Eigen::MatrixXd& val_x,
                             const Eigen::VectorXi& val_y, int num_classes,
                             const GridSpec& grid, const TrainConfig& base,
                             int jobs) {
  if (grid.hidden_layers.empty() || grid.neurons.empty() || grid.l2.empty())
    throw EmptyGrid("grid search requires a non-empty grid");

  struct Point {
    int layers, neurons;
    double l2;
  };
  std::vector<Point> points;
  for (int hl : grid.hidden_layers)
    for (int nn : grid.neurons)
      for (double l2 : grid.l2) points.push_back({hl, nn, l2});

  auto evaluate = [&](std::size_t idx) -> std::pair<FnnModel, GridSearchRow> {
    const Point& pt = points[idx];
    std::vector<int> sizes;
    sizes.push_back(static_cast<int>(train_x.cols()));
    for (int l = 0; l < pt.layers; ++l) sizes.push_back(pt.neurons);
    sizes.push_back(num_classes);
    FnnModel model(sizes, base.seed + idx);
    TrainConfig cfg = base;
    cfg.l2 = pt.l2;
    cfg.seed = base.seed + idx;
    train(model, train_x, train_y, cfg);
    GridSearchRow row{pt.layers, pt.neurons, pt.l2,
                      accuracy(model, val_x, val_y), model.parameter_count()};
    return {std::move(model), row};
  };

  std::vector<std::pair<FnnModel, GridSearchRow>> results(points.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < points.size(); ++i) results[i] = evaluate(i);
  } else {
    std::vector<std::future<void>> futures;
    std::atomic<std::size_t> next{0};
    const int workers = std::min<int>(jobs, static_cast<int>(points.size()));
    for (int t = 0; t < workers; ++t) {
      futures.push_back(std::async(std::launch::async, [&]() {
        for (std::size_t i = next.fetch_add(1); i < points.size();
             i = next.fetch_add(1))
          results[i] = evaluate(i);
      }));
    }
    for (auto& f : futures) f.get();
  }

  GridSearchResult out;
  std::size_t best_idx = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    out.report.push_back(results[i].second);
    const auto& cur = results[i].second;
    const auto& best = results[best_idx].second;
    if (cur.val_accuracy > best.val_accuracy ||
        (cur.val_accuracy == best.val_accuracy &&
         cur.parameter_count < best.parameter_count))
      best_idx = i;
  }
  out.best = std::move(results[best_idx].first);
  out.best_row = results[best_idx].second;
  return out;
}

ContactClass classify_contact(const FnnModel& model, const Wrench& f_ext_hat) {
  if (!model.trained())
    throw UntrainedModel("contact classifier has not been trained");
  return model.predict(f_ext_hat) == 0 ? ContactClass::Collision
                                       : ContactClass::Clamping;
}

int classify_chain(const FnnModel& model, const Wrench& f_ext_hat,
                   const Vec3& min_dist) {
  if (!model.trained())
    throw UntrainedModel("chain classifier has not been trained");
  Eigen::VectorXd feat(6);
  feat << f_ext_hat, min_dist;
  return model.predict(feat);
}

}  // namespace prsim
