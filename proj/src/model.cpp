#include "seisint/model.hpp"

#include <array>
#include <cmath>
#include <string>

#include "seisint/error.hpp"
#include "seisint/nn/layers.hpp"
#include "seisint/nn/loss.hpp"
#include "seisint/nn/optimizer.hpp"
#include "seisint/random.hpp"

namespace seisint {

void ModelConfig::validate(const GridSpec&) const {
  if (conv_filters < 1) throw ValidationError("model: conv_filters must be >= 1");
  if (conv_kernel < 1 || conv_kernel % 2 == 0) throw ValidationError("model: conv_kernel must be odd");
}

void HybridConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ValidationError("hybrid: alpha must be >= 0");
  if (!(felt_threshold > 0.0 && felt_threshold < 1.0)) {
    throw ValidationError("hybrid: felt_threshold must lie in (0, 1)");
  }
}

void TrainingSchedule::validate() const {
  if (batch_size < 1) throw ValidationError("training: batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ValidationError("training: learning_rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ValidationError("training: betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw ValidationError("training: epsilon must be > 0");
}

namespace {

template <typename T>
nn::BasicTensor<T> glorot(nn::Shape shape, std::size_t fan_in, std::size_t fan_out,
                          random::Engine& rng) {
  nn::BasicTensor<T> t(std::move(shape));
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (auto& v : t.values()) v = static_cast<T>(random::uniform(rng, -limit, limit));
  return t;
}

// B x (C*n*n) classifier inputs.
template <typename T>
nn::BasicTensor<T> stack_classifier_inputs(std::span<const HypocenterEvent> events,
                                           const FeatureConfig& features, const GridSpec& spec) {
  const std::size_t width = features.classifier_orders.size() * spec.cell_count();
  nn::BasicTensor<T> x({events.size(), width});
  for (std::size_t b = 0; b < events.size(); ++b) {
    const auto enc = encode_classifier_input(events[b], features, spec);
    for (std::size_t i = 0; i < width; ++i) x[b * width + i] = static_cast<T>(enc[i]);
  }
  return x;
}

template <typename T>
nn::BasicTensor<T> row(const nn::BasicTensor<T>& m, std::size_t b) {
  const std::size_t w = m.extent(1);
  return nn::BasicTensor<T>({w}, std::vector<T>(m.data() + b * w, m.data() + (b + 1) * w));
}

template <typename T>
void set_row(nn::BasicTensor<T>& m, std::size_t b, const nn::BasicTensor<T>& r, double scale) {
  const std::size_t w = m.extent(1);
  for (std::size_t i = 0; i < w; ++i) m[b * w + i] = static_cast<T>(static_cast<double>(r[i]) * scale);
}

template <typename T>
struct RegressorPass {
  std::vector<nn::BasicTensor<T>> inputs;  // C x n x n per event
  std::vector<nn::BasicTensor<T>> pre;     // F x n x n conv output before relu
  nn::BasicTensor<T> hidden;               // B x F*n*n
  nn::BasicTensor<T> output;               // B x n*n
};

template <typename T>
RegressorPass<T> regressor_forward(const RegressorModel<T>& model,
                                   std::span<const HypocenterEvent> events,
                                   const FeatureConfig& features, const GridSpec& spec,
                                   const nn::Executor& exec) {
  RegressorPass<T> pass;
  const std::size_t hidden_width = model.dense.weights.extent(1);
  pass.hidden = nn::BasicTensor<T>({events.size(), hidden_width});
  for (std::size_t b = 0; b < events.size(); ++b) {
    pass.inputs.push_back(
        nn::tensor_cast<T>(encode_regressor_input(events[b], features, spec)));
    pass.pre.push_back(nn::conv2d_forward(pass.inputs.back(), model.conv.weights, model.conv.bias,
                                          model.padding(), exec));
    const auto act = nn::relu_forward(pass.pre.back());
    if (act.size() != hidden_width) throw ShapeError("regressor: conv output does not match dense input");
    std::copy(act.data(), act.data() + hidden_width, pass.hidden.data() + b * hidden_width);
  }
  pass.output = nn::dense_forward_batch(pass.hidden, model.dense.weights, model.dense.bias, exec);
  return pass;
}

Grid to_grid(const nn::Tensor& flat, std::size_t n) {
  Grid g(n);
  for (std::size_t i = 0; i < g.size(); ++i) g.values[i] = static_cast<double>(flat[i]);
  return g;
}

}  // namespace

template <typename T>
ClassifierModel<T> make_classifier(const FeatureConfig& features, const GridSpec& spec,
                                   std::uint64_t seed) {
  features.validate();
  const std::size_t cells = spec.cell_count();
  const std::size_t n_in = features.classifier_orders.size() * cells;
  random::Engine rng(seed);
  ClassifierModel<T> m;
  m.dense.name = "classifier.dense";
  m.dense.weights = glorot<T>({cells, n_in}, n_in, cells, rng);
  m.dense.bias = nn::BasicTensor<T>({cells});
  return m;
}

template <typename T>
RegressorModel<T> make_regressor(const FeatureConfig& features, const ModelConfig& model,
                                 const GridSpec& spec, std::uint64_t seed) {
  features.validate();
  model.validate(spec);
  const std::size_t cells = spec.cell_count();
  const std::size_t c = features.regressor_orders.size(), f = model.conv_filters,
                    k = model.conv_kernel;
  random::Engine rng(seed);
  RegressorModel<T> m;
  m.conv.name = "regressor.conv";
  m.conv.weights = glorot<T>({f, c, k, k}, c * k * k, f * k * k, rng);
  m.conv.bias = nn::BasicTensor<T>({f});
  m.dense.name = "regressor.dense";
  m.dense.weights = glorot<T>({cells, f * cells}, f * cells, cells, rng);
  m.dense.bias = nn::BasicTensor<T>({cells});
  return m;
}

Grid classifier_predict(const HypocenterEvent& event, const ClassifierModel<float>& model,
                        const FeatureConfig& features, const GridSpec& spec,
                        const nn::Executor& exec) {
  const auto x = stack_classifier_inputs<float>(std::span(&event, 1), features, spec);
  const auto logits = nn::dense_forward_batch(x, model.dense.weights, model.dense.bias, exec);
  Grid g(spec.n_cells);
  for (std::size_t i = 0; i < g.size(); ++i) g.values[i] = nn::sigmoid(static_cast<double>(logits[i]));
  return g;
}

Grid binarize_felt(const Grid& prob, double threshold) {
  Grid out(prob.n_cells);
  for (std::size_t i = 0; i < prob.size(); ++i) out.values[i] = prob.values[i] >= threshold ? 1.0 : 0.0;
  return out;
}

Grid regressor_predict(const HypocenterEvent& event, const RegressorModel<float>& model,
                       const FeatureConfig& features, const GridSpec& spec,
                       const nn::Executor& exec) {
  const auto pass = regressor_forward(model, std::span(&event, 1), features, spec, exec);
  return to_grid(pass.output, spec.n_cells);
}

Grid hybrid_combine(const Grid& regressed, const Grid& felt, double alpha) {
  if (regressed.size() != felt.size()) throw ShapeError("hybrid_combine: grid sizes differ");
  Grid out(regressed.n_cells);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.values[i] = hybrid_combine(regressed.values[i], felt.values[i], alpha);
  }
  return out;
}

Grid hybrid_predict(const HypocenterEvent& event, const RegressorModel<float>& regressor,
                    const ClassifierModel<float>& classifier, const HybridConfig& hybrid,
                    const FeatureConfig& features, const GridSpec& spec, const nn::Executor& exec) {
  const Grid felt = binarize_felt(classifier_predict(event, classifier, features, spec, exec),
                                  hybrid.felt_threshold);
  return hybrid_combine(regressor_predict(event, regressor, features, spec, exec), felt, hybrid.alpha);
}

nn::Tensor felt_labels(const IntensityGrid& grid) {
  nn::Tensor t({grid.size()});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    t[i] = grid.observed_mask[i] && grid.values[i] >= kCatalogFloor ? 1.0f : 0.0f;
  }
  return t;
}

template <typename T>
double classifier_objective(ClassifierModel<T>& model, std::span<const HypocenterEvent> events,
                            const FeatureConfig& features, const GridSpec& spec, bool accumulate,
                            const nn::Executor& exec) {
  if (events.empty()) return 0.0;
  const auto x = stack_classifier_inputs<T>(events, features, spec);
  auto prob = nn::sigmoid_forward(nn::dense_forward_batch(x, model.dense.weights, model.dense.bias, exec));
  const double inv_b = 1.0 / static_cast<double>(events.size());
  nn::BasicTensor<T> upstream(prob.shape());
  double total = 0.0;
  for (std::size_t b = 0; b < events.size(); ++b) {
    const auto target = nn::tensor_cast<T>(felt_labels(rasterize(events[b], spec)));
    const auto p = row(prob, b);
    auto res = nn::bce_loss(p, target);
    total += res.loss;
    if (accumulate) set_row(upstream, b, nn::sigmoid_backward(res.grad, p), inv_b);
  }
  if (accumulate) {
    nn::dense_backward_accumulate(upstream, x, model.dense.weights, model.dense.weight_grad,
                                  model.dense.bias_grad, static_cast<nn::BasicTensor<T>*>(nullptr), exec);
  }
  return total * inv_b;
}

template <typename T>
double regressor_objective(RegressorModel<T>& model, std::span<const HypocenterEvent> events,
                           const FeatureConfig& features, const GridSpec& spec, bool accumulate,
                           const nn::Executor& exec) {
  if (events.empty()) return 0.0;
  const auto pass = regressor_forward(model, events, features, spec, exec);
  const double inv_b = 1.0 / static_cast<double>(events.size());
  nn::BasicTensor<T> upstream(pass.output.shape());
  double total = 0.0;
  for (std::size_t b = 0; b < events.size(); ++b) {
    auto res = nn::masked_mse_loss(row(pass.output, b), rasterize(events[b], spec));
    total += res.loss;
    if (accumulate) set_row(upstream, b, res.grad, inv_b);
  }
  if (accumulate) {
    nn::BasicTensor<T> hidden_grad(pass.hidden.shape());
    nn::dense_backward_accumulate(upstream, pass.hidden, model.dense.weights, model.dense.weight_grad,
                                  model.dense.bias_grad, &hidden_grad, exec);
    const std::size_t width = pass.hidden.extent(1);
    for (std::size_t b = 0; b < events.size(); ++b) {
      nn::BasicTensor<T> g(pass.pre[b].shape(),
                           std::vector<T>(hidden_grad.data() + b * width,
                                          hidden_grad.data() + (b + 1) * width));
      nn::conv2d_backward_accumulate(nn::relu_backward(g, pass.pre[b]), pass.inputs[b],
                                     model.conv.weights, model.padding(), model.conv.weight_grad,
                                     model.conv.bias_grad, static_cast<nn::BasicTensor<T>*>(nullptr),
                                     exec);
    }
  }
  return total * inv_b;
}

namespace {

template <typename Model, typename Objective>
TrainHistory run_training(std::span<const HypocenterEvent> events, Model& model,
                          std::span<nn::LayerParams<float>* const> params,
                          const TrainingSchedule& schedule, std::uint64_t shuffle_seed,
                          const EpochCallback& on_epoch, Objective&& objective,
                          const nn::Executor& exec) {
  schedule.validate();
  for (auto* p : params) {
    p->allocate_gradients();
    p->zero_gradients();
  }
  nn::OptimizerState<float> state;
  state.learning_rate = schedule.learning_rate;
  state.beta1 = schedule.beta1;
  state.beta2 = schedule.beta2;
  state.epsilon = schedule.epsilon;

  std::vector<std::size_t> order(events.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  random::Engine rng(shuffle_seed);

  TrainHistory history;
  std::vector<HypocenterEvent> batch;
  for (std::size_t epoch = 0; epoch < schedule.epochs; ++epoch) {
    random::fisher_yates(std::span<std::size_t>(order), rng);
    double sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += schedule.batch_size) {
      const std::size_t end = std::min(order.size(), start + schedule.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(events[order[i]]);
      sum += objective(model, std::span<const HypocenterEvent>(batch)) * static_cast<double>(batch.size());
      nn::optimizer_step(params, state, exec);
    }
    history.epoch_losses.push_back(sum / static_cast<double>(order.size()));
    if (on_epoch) on_epoch(epoch, history.epoch_losses.back());
  }
  for (auto* p : params) p->release_gradients();
  return history;
}

}  // namespace

TrainHistory train_classifier(std::span<const HypocenterEvent> events, ClassifierModel<float>& model,
                              const FeatureConfig& features, const GridSpec& spec,
                              const TrainingSchedule& schedule, const nn::Executor& exec,
                              const EpochCallback& on_epoch) {
  if (events.empty()) throw ValidationError("train_classifier: empty training set");
  std::array<nn::LayerParams<float>*, 1> params{&model.dense};
  return run_training(
      events, model, params, schedule, random::derive_seed(schedule.seed, 2), on_epoch,
      [&](ClassifierModel<float>& m, std::span<const HypocenterEvent> batch) {
        return classifier_objective(m, batch, features, spec, true, exec);
      },
      exec);
}

TrainHistory train_regressor(std::span<const HypocenterEvent> events, RegressorModel<float>& model,
                             const FeatureConfig& features, const GridSpec& spec,
                             const TrainingSchedule& schedule, const nn::Executor& exec,
                             const EpochCallback& on_epoch) {
  if (events.empty()) throw ValidationError("train_regressor: empty training set");
  const bool any_observed = std::ranges::any_of(
      events, [&](const HypocenterEvent& e) { return rasterize(e, spec).observed_count() > 0; });
  if (!any_observed) throw ValidationError("train_regressor: no event has an observed cell");
  std::array<nn::LayerParams<float>*, 2> params{&model.conv, &model.dense};
  return run_training(
      events, model, params, schedule, random::derive_seed(schedule.seed, 3), on_epoch,
      [&](RegressorModel<float>& m, std::span<const HypocenterEvent> batch) {
        return regressor_objective(m, batch, features, spec, true, exec);
      },
      exec);
}

#define SEISINT_INSTANTIATE(T)                                                                  \
  template ClassifierModel<T> make_classifier<T>(const FeatureConfig&, const GridSpec&,         \
                                                 std::uint64_t);                                \
  template RegressorModel<T> make_regressor<T>(const FeatureConfig&, const ModelConfig&,        \
                                               const GridSpec&, std::uint64_t);                 \
  template double classifier_objective<T>(ClassifierModel<T>&, std::span<const HypocenterEvent>, \
                                          const FeatureConfig&, const GridSpec&, bool,          \
                                          const nn::Executor&);                                 \
  template double regressor_objective<T>(RegressorModel<T>&, std::span<const HypocenterEvent>,  \
                                         const FeatureConfig&, const GridSpec&, bool,           \
                                         const nn::Executor&);

SEISINT_INSTANTIATE(float)
SEISINT_INSTANTIATE(double)

#undef SEISINT_INSTANTIATE

}  // namespace seisint
