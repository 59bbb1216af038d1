#include <doctest.h>

#include "charblock/numcore/optimizer.hpp"

using namespace charblock;

TEST_CASE("lr schedule: linear warmup then constant") {
  TrainHyper h;
  h.warmup_steps = 4000;
  CHECK(lr_schedule(0, h) == doctest::Approx(0.0));
  CHECK(lr_schedule(2000, h) == doctest::Approx(0.5));
  CHECK(lr_schedule(4000, h) == doctest::Approx(1.0));
  CHECK(lr_schedule(123456, h) == doctest::Approx(1.0));
  h.warmup_steps = 0;
  CHECK(lr_schedule(1, h) == doctest::Approx(1.0));
}

TEST_CASE("zero gradients leave adam parameters unchanged") {
  ParamStore<double> store;
  store.add("w", MatD::Constant(2, 2, 0.3));
  TrainHyper h;
  h.learning_rate = 1e-3;
  std::map<std::string, MatD> grads;
  grads["w"] = MatD::Zero(2, 2);
  optimizer_step(store, grads, h, 1);
  CHECK(store.at("w")(0, 0) == doctest::Approx(0.3));
  CHECK(store.slots.at("w").m.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("first adam step from zero moments moves by ~lr") {
  // Hand recurrence: m1 = (1-b1)g, v1 = (1-b2)g^2, bias-corrected m^ = g,
  // v^ = g^2, so the step is lr * g/(|g|+eps) ~ lr.
  ParamStore<double> store;
  store.add("w", MatD::Constant(1, 1, 1.0));
  TrainHyper h;
  h.learning_rate = 1e-4;
  std::map<std::string, MatD> grads;
  grads["w"] = MatD::Constant(1, 1, 1.0);
  optimizer_step(store, grads, h, 1);
  const double delta = 1.0 - store.at("w")(0, 0);
  CHECK(delta == doctest::Approx(1e-4).epsilon(1e-6));
}

TEST_CASE("adam trajectory matches the hand recurrence for a few steps") {
  ParamStore<double> store;
  store.add("w", MatD::Constant(1, 1, 0.5));
  TrainHyper h;
  h.learning_rate = 1e-2;
  double m = 0, v = 0, w = 0.5;
  for (int step = 1; step <= 5; ++step) {
    const double g = 2.0 * w;  // gradient of w^2
    std::map<std::string, MatD> grads;
    grads["w"] = MatD::Constant(1, 1, g);
    optimizer_step(store, grads, h, step);
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mh = m / (1 - std::pow(0.9, step));
    const double vh = v / (1 - std::pow(0.999, step));
    w -= 1e-2 * mh / (std::sqrt(vh) + 1e-8);
    CHECK(store.at("w")(0, 0) == doctest::Approx(w).epsilon(1e-12));
  }
}

TEST_CASE("adamw decoupled decay shrinks parameters under zero gradients") {
  ParamStore<double> store;
  store.add("w", MatD::Constant(2, 2, 1.0));
  TrainHyper h;
  h.optimizer = OptimizerKind::adamw;
  h.learning_rate = 1e-2;
  h.weight_decay = 0.1;
  std::map<std::string, MatD> grads;
  grads["w"] = MatD::Zero(2, 2);
  for (int step = 1; step <= 10; ++step) optimizer_step(store, grads, h, step);
  CHECK(store.at("w")(0, 0) == doctest::Approx(std::pow(1.0 - 1e-3, 10)));
  CHECK(store.at("w")(0, 0) < 1.0);
}

TEST_CASE("optimizer step is deterministic and validates shapes") {
  ParamStore<float> a, b;
  Rng rng(3);
  a.add("w", rng.normal<float>(3, 3, 1.0));
  b.add("w", a.at("w"));
  std::map<std::string, MatF> grads;
  grads["w"] = Rng(4).normal<float>(3, 3, 1.0);
  TrainHyper h;
  h.learning_rate = 3e-3;
  optimizer_step(a, grads, h, 1);
  optimizer_step(b, grads, h, 1);
  CHECK((a.at("w") - b.at("w")).cwiseAbs().maxCoeff() == 0.0f);

  grads["w"] = MatF::Zero(2, 2);
  CHECK_THROWS_AS(optimizer_step(a, grads, h, 2), std::invalid_argument);
  grads.clear();
  grads["nope"] = MatF::Zero(3, 3);
  CHECK_THROWS_AS(optimizer_step(a, grads, h, 2), std::invalid_argument);
}

TEST_CASE("train hyper validation") {
  TrainHyper h;
  h.learning_rate = 0;
  CHECK_THROWS_AS(h.validate(), std::invalid_argument);
  h.learning_rate = 1e-3;
  h.label_smoothing = 1.0;
  CHECK_THROWS_AS(h.validate(), std::invalid_argument);
  h.label_smoothing = 0.1;
  h.validate();
}
