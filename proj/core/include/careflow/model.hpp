#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "careflow/common.hpp"
#include "careflow/dataset.hpp"

namespace careflow {

/// Fully connected layer, weights stored row-major as outputs x inputs.
struct DenseLayer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  DenseLayer() = default;
  DenseLayer(std::size_t in, std::size_t out)
      : inputs(in), outputs(out), weights(in * out, 0.0), bias(out, 0.0) {}

  double& w(std::size_t out, std::size_t in) { return weights[out * inputs + in]; }
  double w(std::size_t out, std::size_t in) const { return weights[out * inputs + in]; }

  /// z = W x + b
  void apply(std::span<const double> x, std::span<double> z) const;

  bool operator==(const DenseLayer&) const = default;
};

/// Two-branch classifier.
///
///   timed state sample -> dense(76) -> dropout -> dense(20) --+
///                                                             +-> dense(96) -> dropout
///   demographics       -> dense(5) ---------------------------+     -> dense(10) -> dense(1)
///
/// Hidden layers use ReLU, the output a sigmoid. Layer order here is the
/// order used by the weight file and by parameter iteration.
struct NetworkWeights {
  static constexpr std::size_t kTssHidden = 76;
  static constexpr std::size_t kTssBottleneck = 20;
  static constexpr std::size_t kDemoHidden = 5;
  static constexpr std::size_t kHeadHidden = 96;
  static constexpr std::size_t kHeadBottleneck = 10;
  static constexpr std::array<const char*, 6> kLayerNames = {
      "tss_hidden", "tss_bottleneck", "demo_hidden", "head_hidden", "head_bottleneck", "output"};

  DenseLayer tss_hidden;
  DenseLayer tss_bottleneck;
  DenseLayer demo_hidden;
  DenseLayer head_hidden;
  DenseLayer head_bottleneck;
  DenseLayer output;

  /// All-zero weights with the canonical shapes.
  static NetworkWeights zeros(std::size_t tss_width, std::size_t demo_width = kDemographicWidth);

  std::array<DenseLayer*, 6> layers();
  std::array<const DenseLayer*, 6> layers() const;

  std::size_t tss_width() const { return tss_hidden.inputs; }
  std::size_t demo_width() const { return demo_hidden.inputs; }
  std::size_t parameter_count() const;

  /// Throws NumericError if any parameter is NaN or infinite.
  void check_finite() const;

  bool operator==(const NetworkWeights&) const = default;
};

/// Glorot-uniform weights, bound sqrt(6 / (fan_in + fan_out)), zero biases.
/// Draws come from Rng(seed) layer by layer in row-major order.
NetworkWeights init_weights(std::size_t tss_width, std::uint64_t seed,
                            std::size_t demo_width = kDemographicWidth);

inline double glorot_bound(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

/// Intermediate values of one forward pass. Activations after a dropout
/// site are already masked; masks hold 0 or 1/(1-d) (all ones at inference).
struct ForwardTrace {
  std::vector<double> tss_pre, tss_act, tss_mask;
  std::vector<double> tss2_pre, tss2_act;
  std::vector<double> demo_pre, demo_act;
  std::vector<double> concat;
  std::vector<double> head_pre, head_act, head_mask;
  std::vector<double> head2_pre, head2_act;
  double logit = 0.0;
  double probability = 0.5;
};

/// Runs the network. When `dropout_rng` is non-null the pass is in
/// training mode: inverted dropout at rate `dropout` after the 76- and
/// 96-unit layers, drawing 76 then 96 uniforms per row. Throws
/// std::invalid_argument on width mismatch.
ForwardTrace forward_trace(const NetworkWeights& w, std::span<const double> tss,
                           std::span<const double> demo, double dropout = 0.0,
                           Rng* dropout_rng = nullptr);

inline double forward(const NetworkWeights& w, std::span<const double> tss,
                      std::span<const double> demo, double dropout = 0.0,
                      Rng* dropout_rng = nullptr) {
  return forward_trace(w, tss, demo, dropout, dropout_rng).probability;
}

/// Mean (optionally weighted) binary cross-entropy over the given rows and
/// its gradient. `grad` is reset to the network's shapes and overwritten.
/// `sample_weights` may be empty (all ones).
double loss_and_gradient(const NetworkWeights& w, const PredictionDataset& data,
                         std::span<const std::size_t> rows, std::span<const double> sample_weights,
                         double dropout, Rng* dropout_rng, NetworkWeights& grad);

/// Loss only, no dropout.
double batch_loss(const NetworkWeights& w, const PredictionDataset& data,
                  std::span<const std::size_t> rows, std::span<const double> sample_weights = {});

/// v <- rho v + (1 - rho) g^2 ; theta <- theta - lr g / (sqrt(v) + eps)
class RmsProp {
 public:
  RmsProp(const NetworkWeights& shape, double learning_rate, double decay, double epsilon);
  void step(NetworkWeights& w, const NetworkWeights& grad);

 private:
  NetworkWeights accumulator_;
  double learning_rate_;
  double decay_;
  double epsilon_;
};

struct TrainConfig {
  std::size_t epochs = 350;
  std::size_t batch_size = 50;
  double learning_rate = 5e-4;
  double dropout = 0.5;
  double rmsprop_decay = 0.9;
  double rmsprop_epsilon = 1e-8;
  std::uint64_t seed = 0;
  /// Weight classes by n / (2 n_class).
  bool class_weighting = false;

  /// Throws ConfigError when a field is out of range.
  void validate() const;
};

/// Applies `key=value` settings; unknown keys are an error unless
/// `ignore_unknown` is set. Throws ConfigError.
void apply_train_settings(TrainConfig& cfg, const std::map<std::string, std::string>& settings,
                          bool ignore_unknown = false);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double validation_auc = 0.0;

  bool operator==(const EpochRecord&) const = default;
};

struct TrainResult {
  NetworkWeights weights;
  /// Entry 0 is the untrained network; entry k follows epoch k.
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
};

/// Mini-batch RMSprop on binary cross-entropy. Each epoch reshuffles the
/// training rows; validation AUC is recorded after every epoch and the
/// weights of the best epoch (earliest on ties) are returned. Seeds for
/// initialization, shuffling and dropout derive from cfg.seed. Throws
/// DataError for empty or single-class validation data and NumericError
/// for a non-finite loss.
TrainResult train(const PredictionDataset& train_data, const PredictionDataset& validation_data,
                  const TrainConfig& cfg);

/// Row-wise inference-mode probabilities.
std::vector<double> predict_proba(const NetworkWeights& w, const PredictionDataset& data);

void write_weights(std::ostream& out, const NetworkWeights& w);
NetworkWeights read_weights(std::istream& in);

}  // namespace careflow
