#include "careflow/model.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "careflow/eval.hpp"

namespace careflow {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

void relu_inplace(std::span<const double> pre, std::vector<double>& act) {
  act.resize(pre.size());
  for (std::size_t i = 0; i < pre.size(); ++i) act[i] = pre[i] > 0.0 ? pre[i] : 0.0;
}

void draw_mask(std::vector<double>& mask, std::size_t n, double dropout, Rng* rng) {
  mask.assign(n, 1.0);
  if (!rng) return;
  const double keep_scale = 1.0 / (1.0 - dropout);
  for (auto& m : mask) m = rng->uniform() < dropout ? 0.0 : keep_scale;
}

// grad.W += dz (x) x ; grad.b += dz ; optionally dx = W^T dz.
void backprop_layer(const DenseLayer& layer, std::span<const double> x, std::span<const double> dz,
                    DenseLayer& grad, std::vector<double>* dx) {
  if (dx) dx->assign(layer.inputs, 0.0);
  for (std::size_t o = 0; o < layer.outputs; ++o) {
    const double g = dz[o];
    if (g == 0.0) continue;
    grad.bias[o] += g;
    double* gw = grad.weights.data() + o * layer.inputs;
    const double* w = layer.weights.data() + o * layer.inputs;
    for (std::size_t i = 0; i < layer.inputs; ++i) gw[i] += g * x[i];
    if (dx) {
      for (std::size_t i = 0; i < layer.inputs; ++i) (*dx)[i] += g * w[i];
    }
  }
}

double row_weight(std::span<const double> weights, std::size_t row) {
  return weights.empty() ? 1.0 : weights[row];
}

}  // namespace

void DenseLayer::apply(std::span<const double> x, std::span<double> z) const {
  for (std::size_t o = 0; o < outputs; ++o) {
    const double* w = weights.data() + o * inputs;
    double acc = bias[o];
    for (std::size_t i = 0; i < inputs; ++i) acc += w[i] * x[i];
    z[o] = acc;
  }
}

NetworkWeights NetworkWeights::zeros(std::size_t tss_width, std::size_t demo_width) {
  NetworkWeights w;
  w.tss_hidden = DenseLayer(tss_width, kTssHidden);
  w.tss_bottleneck = DenseLayer(kTssHidden, kTssBottleneck);
  w.demo_hidden = DenseLayer(demo_width, kDemoHidden);
  w.head_hidden = DenseLayer(kTssBottleneck + kDemoHidden, kHeadHidden);
  w.head_bottleneck = DenseLayer(kHeadHidden, kHeadBottleneck);
  w.output = DenseLayer(kHeadBottleneck, 1);
  return w;
}

std::array<DenseLayer*, 6> NetworkWeights::layers() {
  return {&tss_hidden, &tss_bottleneck, &demo_hidden, &head_hidden, &head_bottleneck, &output};
}

std::array<const DenseLayer*, 6> NetworkWeights::layers() const {
  return {&tss_hidden, &tss_bottleneck, &demo_hidden, &head_hidden, &head_bottleneck, &output};
}

std::size_t NetworkWeights::parameter_count() const {
  std::size_t n = 0;
  for (const auto* layer : layers()) n += layer->weights.size() + layer->bias.size();
  return n;
}

void NetworkWeights::check_finite() const {
  const auto names = kLayerNames;
  std::size_t k = 0;
  for (const auto* layer : layers()) {
    for (const auto& block : {std::cref(layer->weights), std::cref(layer->bias)}) {
      for (const double v : block.get()) {
        if (!std::isfinite(v)) {
          throw NumericError(std::string("non-finite parameter in layer ") + names[k]);
        }
      }
    }
    ++k;
  }
}

NetworkWeights init_weights(std::size_t tss_width, std::uint64_t seed, std::size_t demo_width) {
  auto w = NetworkWeights::zeros(tss_width, demo_width);
  Rng rng(seed);
  for (auto* layer : w.layers()) {
    const double bound = glorot_bound(layer->inputs, layer->outputs);
    for (auto& v : layer->weights) v = rng.uniform(-bound, bound);
  }
  return w;
}

ForwardTrace forward_trace(const NetworkWeights& w, std::span<const double> tss,
                           std::span<const double> demo, double dropout, Rng* dropout_rng) {
  if (tss.size() != w.tss_width()) {
    throw std::invalid_argument("timed state sample width " + std::to_string(tss.size()) +
                                " does not match network input " +
                                std::to_string(w.tss_width()));
  }
  if (demo.size() != w.demo_width()) {
    throw std::invalid_argument("demographic width " + std::to_string(demo.size()) +
                                " does not match network input " +
                                std::to_string(w.demo_width()));
  }
  ForwardTrace t;
  t.tss_pre.resize(w.tss_hidden.outputs);
  w.tss_hidden.apply(tss, t.tss_pre);
  relu_inplace(t.tss_pre, t.tss_act);
  draw_mask(t.tss_mask, t.tss_act.size(), dropout, dropout_rng);
  for (std::size_t i = 0; i < t.tss_act.size(); ++i) t.tss_act[i] *= t.tss_mask[i];

  t.tss2_pre.resize(w.tss_bottleneck.outputs);
  w.tss_bottleneck.apply(t.tss_act, t.tss2_pre);
  relu_inplace(t.tss2_pre, t.tss2_act);

  t.demo_pre.resize(w.demo_hidden.outputs);
  w.demo_hidden.apply(demo, t.demo_pre);
  relu_inplace(t.demo_pre, t.demo_act);

  t.concat = t.tss2_act;
  t.concat.insert(t.concat.end(), t.demo_act.begin(), t.demo_act.end());

  t.head_pre.resize(w.head_hidden.outputs);
  w.head_hidden.apply(t.concat, t.head_pre);
  relu_inplace(t.head_pre, t.head_act);
  draw_mask(t.head_mask, t.head_act.size(), dropout, dropout_rng);
  for (std::size_t i = 0; i < t.head_act.size(); ++i) t.head_act[i] *= t.head_mask[i];

  t.head2_pre.resize(w.head_bottleneck.outputs);
  w.head_bottleneck.apply(t.head_act, t.head2_pre);
  relu_inplace(t.head2_pre, t.head2_act);

  double logit = 0.0;
  w.output.apply(t.head2_act, std::span<double>(&logit, 1));
  t.logit = logit;
  t.probability = sigmoid(logit);
  return t;
}

double loss_and_gradient(const NetworkWeights& w, const PredictionDataset& data,
                         std::span<const std::size_t> rows, std::span<const double> sample_weights,
                         double dropout, Rng* dropout_rng, NetworkWeights& grad) {
  if (rows.empty()) throw DataError("empty batch");
  grad = NetworkWeights::zeros(w.tss_width(), w.demo_width());
  double loss = 0.0;
  std::vector<double> d_head2, d_head, d_concat, d_tss2, d_tss, d_demo, scratch;
  for (const std::size_t r : rows) {
    const auto t = forward_trace(w, data.samples.row(r), data.demographics.row(r), dropout,
                                 dropout_rng);
    const double y = data.labels[r];
    const double weight = row_weight(sample_weights, r);
    loss += weight * (softplus(t.logit) - y * t.logit);

    const double d_logit = weight * (t.probability - y);
    backprop_layer(w.output, t.head2_act, std::span<const double>(&d_logit, 1), grad.output,
                   &scratch);
    d_head2.resize(scratch.size());
    for (std::size_t i = 0; i < scratch.size(); ++i) {
      d_head2[i] = t.head2_pre[i] > 0.0 ? scratch[i] : 0.0;
    }
    backprop_layer(w.head_bottleneck, t.head_act, d_head2, grad.head_bottleneck, &scratch);
    d_head.resize(scratch.size());
    for (std::size_t i = 0; i < scratch.size(); ++i) {
      d_head[i] = t.head_pre[i] > 0.0 ? scratch[i] * t.head_mask[i] : 0.0;
    }
    backprop_layer(w.head_hidden, t.concat, d_head, grad.head_hidden, &d_concat);

    const std::size_t split = t.tss2_act.size();
    d_tss2.resize(split);
    for (std::size_t i = 0; i < split; ++i) d_tss2[i] = t.tss2_pre[i] > 0.0 ? d_concat[i] : 0.0;
    d_demo.resize(t.demo_act.size());
    for (std::size_t i = 0; i < d_demo.size(); ++i) {
      d_demo[i] = t.demo_pre[i] > 0.0 ? d_concat[split + i] : 0.0;
    }
    backprop_layer(w.demo_hidden, data.demographics.row(r), d_demo, grad.demo_hidden, nullptr);

    backprop_layer(w.tss_bottleneck, t.tss_act, d_tss2, grad.tss_bottleneck, &scratch);
    d_tss.resize(scratch.size());
    for (std::size_t i = 0; i < scratch.size(); ++i) {
      d_tss[i] = t.tss_pre[i] > 0.0 ? scratch[i] * t.tss_mask[i] : 0.0;
    }
    backprop_layer(w.tss_hidden, data.samples.row(r), d_tss, grad.tss_hidden, nullptr);
  }
  const double scale = 1.0 / static_cast<double>(rows.size());
  for (auto* layer : grad.layers()) {
    for (auto& v : layer->weights) v *= scale;
    for (auto& v : layer->bias) v *= scale;
  }
  return loss * scale;
}

double batch_loss(const NetworkWeights& w, const PredictionDataset& data,
                  std::span<const std::size_t> rows, std::span<const double> sample_weights) {
  if (rows.empty()) throw DataError("empty batch");
  double loss = 0.0;
  for (const std::size_t r : rows) {
    const auto t = forward_trace(w, data.samples.row(r), data.demographics.row(r));
    loss += row_weight(sample_weights, r) * (softplus(t.logit) - data.labels[r] * t.logit);
  }
  return loss / static_cast<double>(rows.size());
}

RmsProp::RmsProp(const NetworkWeights& shape, double learning_rate, double decay, double epsilon)
    : accumulator_(NetworkWeights::zeros(shape.tss_width(), shape.demo_width())),
      learning_rate_(learning_rate),
      decay_(decay),
      epsilon_(epsilon) {}

void RmsProp::step(NetworkWeights& w, const NetworkWeights& grad) {
  auto acc = accumulator_.layers();
  auto params = w.layers();
  auto grads = grad.layers();
  for (std::size_t k = 0; k < acc.size(); ++k) {
    auto update = [&](std::vector<double>& v, std::vector<double>& theta,
                      const std::vector<double>& g) {
      for (std::size_t i = 0; i < theta.size(); ++i) {
        v[i] = decay_ * v[i] + (1.0 - decay_) * g[i] * g[i];
        theta[i] -= learning_rate_ * g[i] / (std::sqrt(v[i]) + epsilon_);
      }
    };
    update(acc[k]->weights, params[k]->weights, grads[k]->weights);
    update(acc[k]->bias, params[k]->bias, grads[k]->bias);
  }
}

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (!(rmsprop_decay > 0.0 && rmsprop_decay < 1.0)) {
    throw ConfigError("rmsprop_decay must lie in (0, 1)");
  }
  if (!(rmsprop_epsilon > 0.0)) throw ConfigError("rmsprop_epsilon must be positive");
}

void apply_train_settings(TrainConfig& cfg, const std::map<std::string, std::string>& settings,
                          bool ignore_unknown) {
  auto as_size = [](const std::string& key, const std::string& v) {
    std::int64_t n = 0;
    if (!parse_int64(v, n) || n < 0) throw ConfigError(key + ": expected a non-negative integer");
    return static_cast<std::uint64_t>(n);
  };
  auto as_double = [](const std::string& key, const std::string& v) {
    double d = 0;
    if (!parse_double(v, d)) throw ConfigError(key + ": expected a number");
    return d;
  };
  for (const auto& [key, value] : settings) {
    if (key == "epochs") {
      cfg.epochs = as_size(key, value);
    } else if (key == "batch_size") {
      cfg.batch_size = as_size(key, value);
    } else if (key == "learning_rate") {
      cfg.learning_rate = as_double(key, value);
    } else if (key == "dropout") {
      cfg.dropout = as_double(key, value);
    } else if (key == "rmsprop_decay") {
      cfg.rmsprop_decay = as_double(key, value);
    } else if (key == "rmsprop_epsilon") {
      cfg.rmsprop_epsilon = as_double(key, value);
    } else if (key == "seed") {
      cfg.seed = as_size(key, value);
    } else if (key == "class_weighting") {
      if (value != "true" && value != "false") {
        throw ConfigError("class_weighting: expected true or false");
      }
      cfg.class_weighting = value == "true";
    } else if (!ignore_unknown) {
      throw ConfigError("unknown training setting '" + key + "'");
    }
  }
  cfg.validate();
}

std::vector<double> predict_proba(const NetworkWeights& w, const PredictionDataset& data) {
  std::vector<double> out;
  out.reserve(data.size());
  for (std::size_t r = 0; r < data.size(); ++r) {
    out.push_back(forward(w, data.samples.row(r), data.demographics.row(r)));
  }
  return out;
}

TrainResult train(const PredictionDataset& train_data, const PredictionDataset& validation_data,
                  const TrainConfig& cfg) {
  cfg.validate();
  if (train_data.size() == 0) throw DataError("empty training set");
  if (validation_data.size() == 0) throw DataError("empty validation set");
  const auto positives = std::count(validation_data.labels.begin(), validation_data.labels.end(), 1);
  if (positives == 0 || positives == static_cast<long>(validation_data.size())) {
    throw DataError("validation set must contain both outcomes");
  }

  std::vector<double> sample_weights;
  if (cfg.class_weighting) {
    const auto n = static_cast<double>(train_data.size());
    const auto n_pos = static_cast<double>(
        std::count(train_data.labels.begin(), train_data.labels.end(), 1));
    const auto n_neg = n - n_pos;
    sample_weights.resize(train_data.size());
    for (std::size_t r = 0; r < train_data.size(); ++r) {
      const double count = train_data.labels[r] == 1 ? n_pos : n_neg;
      sample_weights[r] = count > 0 ? n / (2.0 * count) : 0.0;
    }
  }

  TrainResult result;
  NetworkWeights w = init_weights(train_data.samples.cols(), derive_seed(cfg.seed, 1),
                                  train_data.demographics.cols());
  RmsProp optimizer(w, cfg.learning_rate, cfg.rmsprop_decay, cfg.rmsprop_epsilon);
  Rng shuffle_rng(derive_seed(cfg.seed, 2));
  Rng dropout_rng(derive_seed(cfg.seed, 3));

  std::vector<std::size_t> order(train_data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  auto validation_auc = [&](const NetworkWeights& weights) {
    return roc_auc(predict_proba(weights, validation_data), validation_data.labels);
  };

  result.history.push_back(EpochRecord{0, batch_loss(w, train_data, order, sample_weights),
                                       validation_auc(w)});
  result.weights = w;
  double best_auc = result.history.front().validation_auc;

  NetworkWeights grad;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(begin + cfg.batch_size, order.size());
      const std::span<const std::size_t> batch(order.data() + begin, end - begin);
      const double loss =
          loss_and_gradient(w, train_data, batch, sample_weights, cfg.dropout, &dropout_rng, grad);
      if (!std::isfinite(loss)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batches));
      }
      optimizer.step(w, grad);
      loss_sum += loss;
      ++batches;
    }
    w.check_finite();
    const double auc = validation_auc(w);
    result.history.push_back(EpochRecord{epoch, loss_sum / static_cast<double>(batches), auc});
    if (auc > best_auc) {
      best_auc = auc;
      result.best_epoch = epoch;
      result.weights = w;
    }
  }
  return result;
}

void write_weights(std::ostream& out, const NetworkWeights& w) {
  out << "careflow-weights 1\n";
  std::size_t k = 0;
  for (const auto* layer : w.layers()) {
    out << "layer " << NetworkWeights::kLayerNames[k++] << ' ' << layer->inputs << ' '
        << layer->outputs << '\n';
    out << 'w';
    for (const double v : layer->weights) out << ' ' << format_double(v);
    out << "\nb";
    for (const double v : layer->bias) out << ' ' << format_double(v);
    out << '\n';
  }
  out << "end\n";
}

NetworkWeights read_weights(std::istream& in) {
  auto fail = [](const std::string& what) -> NetworkWeights {
    throw DataError("weight file: " + what);
  };
  std::string line;
  if (!std::getline(in, line) || chomp(line) != "careflow-weights 1") {
    return fail("missing 'careflow-weights 1' header");
  }
  NetworkWeights w;
  auto read_values = [&](char tag, std::vector<double>& values, std::size_t expected) {
    if (!std::getline(in, line)) fail("truncated file");
    std::istringstream row{std::string(chomp(line))};
    std::string token;
    if (!(row >> token) || token != std::string(1, tag)) {
      fail(std::string("expected '") + tag + "' row");
    }
    values.clear();
    while (row >> token) {
      double v = 0;
      if (!parse_double(token, v)) fail("bad number '" + token + "'");
      values.push_back(v);
    }
    if (values.size() != expected) fail("wrong value count in '" + std::string(1, tag) + "' row");
  };
  std::size_t k = 0;
  for (auto* layer : w.layers()) {
    if (!std::getline(in, line)) return fail("truncated file");
    std::istringstream header{std::string(chomp(line))};
    std::string keyword, name;
    std::size_t inputs = 0, outputs = 0;
    if (!(header >> keyword >> name >> inputs >> outputs) || keyword != "layer" ||
        name != NetworkWeights::kLayerNames[k]) {
      return fail(std::string("expected layer ") + NetworkWeights::kLayerNames[k]);
    }
    *layer = DenseLayer(inputs, outputs);
    read_values('w', layer->weights, inputs * outputs);
    read_values('b', layer->bias, outputs);
    ++k;
  }
  if (!std::getline(in, line) || chomp(line) != "end") return fail("missing 'end' marker");

  const auto expected = NetworkWeights::zeros(w.tss_width(), w.demo_width());
  auto el = expected.layers();
  auto wl = w.layers();
  for (std::size_t i = 0; i < el.size(); ++i) {
    if (el[i]->inputs != wl[i]->inputs || el[i]->outputs != wl[i]->outputs) {
      return fail(std::string("layer ") + NetworkWeights::kLayerNames[i] + " has the wrong shape");
    }
  }
  w.check_finite();
  return w;
}

}  // namespace careflow
