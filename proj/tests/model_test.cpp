#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "seisint/error.hpp"
#include "seisint/model.hpp"
#include "seisint/nn/gradient_check.hpp"
#include "seisint/synth.hpp"
#include "test_support.hpp"

namespace seisint {
namespace {

using testing::make_event;
using testing::station;

// Small geometry so whole-model checks stay fast.
struct SmallSetup {
  GridSpec spec;
  FeatureConfig features;
  ModelConfig model;

  SmallSetup() {
    spec.n_cells = 10;
    features.k = 3;
    features.regressor_orders = {{FeatureSource::kMagnitude, 1}, {FeatureSource::kMagnitude, 2},
                                 {FeatureSource::kDepth, 1}};
    model.conv_filters = 2;
    model.conv_kernel = 5;
  }
};

std::vector<HypocenterEvent> small_events(const GridSpec& spec, std::uint64_t seed, std::size_t n) {
  AttenuationParams p;
  p.station_density = 60;
  return generate_catalog(n, p, seed, spec);
}

TEST(Hybrid, Equation) {
  EXPECT_DOUBLE_EQ(hybrid_combine(2.0, 0.0, 0.3), 1.7);
  EXPECT_EQ(hybrid_combine(2.0, 1.0, 0.3), 2.0);
  EXPECT_EQ(hybrid_combine(2.0, 0.0, 0.0), 2.0);
  Grid r(2), c(2);
  r.values = {1.0, 2.0, 3.0, 4.0};
  c.values = {1.0, 0.0, 0.0, 1.0};
  const auto h = hybrid_combine(r, c, 0.3);
  EXPECT_EQ(h.values[0], 1.0);
  EXPECT_EQ(h.values[1], 2.0 - 0.3);
  EXPECT_EQ(h.values[3], 4.0);
  EXPECT_THROW(hybrid_combine(r, Grid(3), 0.3), ShapeError);
}

TEST(Hybrid, BinarizeThreshold) {
  Grid p(2);
  p.values = {0.49, 0.5, 0.51, 0.0};
  EXPECT_EQ(binarize_felt(p, 0.5).values, (std::vector<double>{0, 1, 1, 0}));
}

TEST(Hybrid, ConfigValidation) {
  HybridConfig h;
  h.alpha = -0.1;
  EXPECT_THROW(h.validate(), ValidationError);
  h = HybridConfig{};
  h.felt_threshold = 1.0;
  EXPECT_THROW(h.validate(), ValidationError);
  TrainingSchedule s;
  s.batch_size = 0;
  EXPECT_THROW(s.validate(), ValidationError);
  ModelConfig m;
  m.conv_kernel = 124;
  EXPECT_THROW(m.validate(GridSpec{}), ValidationError);
}

TEST(FeltLabels, UnobservedCellsAreZero) {
  IntensityGrid g(2);
  g.values = {3.0, 0.7, 5.0, 0.2};
  g.observed_mask = {1, 1, 0, 0};
  const auto t = felt_labels(g);
  EXPECT_EQ(std::vector<float>(t.values().begin(), t.values().end()), (std::vector<float>{1, 1, 0, 0}));
}

TEST(Init, GlorotBoundsAndZeroBias) {
  const auto c = make_classifier<float>(FeatureConfig{}, GridSpec{}, 1);
  EXPECT_EQ(c.dense.weights.shape(), (nn::Shape{4096, 2 * 4096}));
  const double limit = std::sqrt(6.0 / (4096 + 8192));
  double lo = 0, hi = 0;
  for (float w : c.dense.weights.values()) {
    lo = std::min<double>(lo, w);
    hi = std::max<double>(hi, w);
  }
  EXPECT_LE(hi, limit);
  EXPECT_GE(lo, -limit);
  EXPECT_GT(hi, 0.99 * limit);
  for (float b : c.dense.bias.values()) EXPECT_EQ(b, 0.0f);

  const SmallSetup s;
  const auto r = make_regressor<double>(s.features, s.model, s.spec, 1);
  EXPECT_EQ(r.conv.weights.shape(), (nn::Shape{2, 3, 5, 5}));
  EXPECT_EQ(r.dense.weights.shape(), (nn::Shape{100, 200}));
  EXPECT_EQ(r.padding(), 2u);
  EXPECT_EQ(make_regressor<double>(s.features, s.model, s.spec, 1).conv.weights, r.conv.weights);
  EXPECT_NE(make_regressor<double>(s.features, s.model, s.spec, 2).conv.weights, r.conv.weights);
}

TEST(Objective, ClassifierGradientMatchesFiniteDifferences) {
  const SmallSetup s;
  const auto events = small_events(s.spec, 3, 4);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto model = make_classifier<double>(s.features, s.spec, seed);
    model.dense.allocate_gradients();
    classifier_objective(model, events, s.features, s.spec, true);
    nn::LayerParams<double>* params[] = {&model.dense};
    nn::GradientCheckOptions opt;
    opt.seed = seed;
    opt.step = 1e-5;
    const auto r = nn::gradient_check<double>(
        [&] { return classifier_objective(model, events, s.features, s.spec, false); }, params, opt);
    EXPECT_LT(r.max_relative_error, 1e-5);
  }
}

TEST(Objective, RegressorGradientMatchesFiniteDifferences) {
  const SmallSetup s;
  const auto events = small_events(s.spec, 4, 3);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto model = make_regressor<double>(s.features, s.model, s.spec, seed);
    model.conv.allocate_gradients();
    model.dense.allocate_gradients();
    regressor_objective(model, events, s.features, s.spec, true);
    nn::LayerParams<double>* params[] = {&model.conv, &model.dense};
    nn::GradientCheckOptions opt;
    opt.seed = seed;
    opt.step = 1e-6;
    const auto r = nn::gradient_check<double>(
        [&] { return regressor_objective(model, events, s.features, s.spec, false); }, params, opt);
    EXPECT_LT(r.max_relative_error, 1e-4);
    EXPECT_GT(r.checked, 50u);
  }
}

TEST(Objective, RegressorIgnoresUnobservedCells) {
  const SmallSetup s;
  const GridSpec& g = s.spec;
  auto model = make_regressor<double>(s.features, s.model, g, 7);
  // Stations outside the grid never reach the loss.
  std::vector<HypocenterEvent> a{make_event("a", 38, 137, 20, 6.5, {station(38.5, 137.5, 3.0)})};
  auto b = a;
  b[0].observations.push_back(station(47.0, 137.0, 6.0));
  model.conv.allocate_gradients();
  model.dense.allocate_gradients();
  const double la = regressor_objective(model, a, s.features, g, true);
  const auto ga = model.dense.weight_grad;
  model.conv.zero_gradients();
  model.dense.zero_gradients();
  const double lb = regressor_objective(model, b, s.features, g, true);
  EXPECT_EQ(la, lb);
  EXPECT_EQ(ga, model.dense.weight_grad);
}

TEST(Predict, ShapesAndHybridAgreement) {
  const SmallSetup s;
  const auto classifier = make_classifier<float>(s.features, s.spec, 1);
  const auto regressor = make_regressor<float>(s.features, s.model, s.spec, 2);
  const auto ev = make_event("x", 40.0, 140.0, 100.0, 6.0);
  const auto prob = classifier_predict(ev, classifier, s.features, s.spec);
  const auto reg = regressor_predict(ev, regressor, s.features, s.spec);
  ASSERT_EQ(prob.size(), 100u);
  for (double p : prob.values) {
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
  }
  HybridConfig h;
  const auto hyb = hybrid_predict(ev, regressor, classifier, h, s.features, s.spec);
  EXPECT_EQ(hyb, hybrid_combine(reg, binarize_felt(prob, 0.5), 0.3));
  EXPECT_THROW(regressor_predict(make_event("y", 20.0, 140.0, 10, 6), regressor, s.features, s.spec),
               OutOfBoundsError);
}

TEST(Train, LossDecreasesAndIsDeterministic) {
  const SmallSetup s;
  const auto events = small_events(s.spec, 5, 24);
  TrainingSchedule sched;
  sched.epochs = 8;
  sched.batch_size = 4;
  sched.learning_rate = 3e-3;
  auto run = [&] {
    auto c = make_classifier<float>(s.features, s.spec, 1);
    auto r = make_regressor<float>(s.features, s.model, s.spec, 2);
    const auto hc = train_classifier(events, c, s.features, s.spec, sched);
    const auto hr = train_regressor(events, r, s.features, s.spec, sched, nn::Executor(2));
    EXPECT_FALSE(c.dense.has_gradients());
    return std::tuple(hc.epoch_losses, hr.epoch_losses, c.dense.weights, r.dense.weights);
  };
  const auto a = run();
  const auto b = run();
  EXPECT_EQ(a, b);
  const auto& cl = std::get<0>(a);
  const auto& rl = std::get<1>(a);
  ASSERT_EQ(cl.size(), 8u);
  EXPECT_LT(cl.back(), cl.front());
  EXPECT_LT(rl.back(), 0.5 * rl.front());
}

TEST(Train, RejectsUnusableSets) {
  const SmallSetup s;
  auto c = make_classifier<float>(s.features, s.spec, 1);
  auto r = make_regressor<float>(s.features, s.model, s.spec, 2);
  EXPECT_THROW(train_classifier({}, c, s.features, s.spec, TrainingSchedule{}), ValidationError);
  std::vector<HypocenterEvent> silent{make_event("q", 38, 137, 10, 5)};
  EXPECT_THROW(train_regressor(silent, r, s.features, s.spec, TrainingSchedule{}), ValidationError);
}

}  // namespace
}  // namespace seisint
