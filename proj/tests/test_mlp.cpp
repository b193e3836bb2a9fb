#include <doctest.h>

#include <stdexcept>

#include <stdexcept>

#include <cmath>
#include <random>

#include "pfrl/mlp.hpp"
#include "support/finite_diff.hpp"

using namespace pfrl;
using pfrl::testing::relative_error;

namespace {

MlpSpec spec_of(std::vector<int> sizes, Activation hidden, OutputActivation output) {
  MlpSpec spec;
  spec.layer_sizes = std::move(sizes);
  spec.hidden_activation = hidden;
  spec.output_activation = output;
  return spec;
}

double projected_output(const MlpParams& params, const std::vector<double>& x,
                        const std::vector<double>& upstream) {
  const std::vector<double> y = forward(params, x);
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) acc += upstream[i] * y[i];
  return acc;
}

}  // namespace

TEST_CASE("forward basics") {
  SUBCASE("zero network gives zero output") {
    const MlpParams params =
        zero_mlp(spec_of({3, 4, 2}, Activation::kRelu, OutputActivation::kIdentity));
    for (double v : forward(params, std::vector<double>{1.0, -2.0, 0.5})) CHECK(v == 0.0);
  }
  SUBCASE("single linear layer") {
    MlpParams params = zero_mlp(spec_of({1, 1}, Activation::kRelu, OutputActivation::kIdentity));
    params.weights[0] = {2.0};
    params.biases[0] = {1.0};
    CHECK(forward(params, std::vector<double>{3.0})[0] == 7.0);
  }
  SUBCASE("tanh output stays in (-1, 1) and finite") {
    const MlpParams params =
        init_mlp(spec_of({4, 16, 16, 3}, Activation::kTanh, OutputActivation::kTanh), 123);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(-5.0, 5.0);
    for (int i = 0; i < 20; ++i) {
      std::vector<double> x(4);
      for (double& v : x) v = dist(rng);
      for (double v : forward(params, x)) {
        CHECK(std::isfinite(v));
        CHECK(v > -1.0);
        CHECK(v < 1.0);
      }
    }
  }
  SUBCASE("dimension mismatch throws") {
    const MlpParams params =
        zero_mlp(spec_of({3, 2}, Activation::kRelu, OutputActivation::kIdentity));
    CHECK_THROWS_AS(forward(params, std::vector<double>{1.0, 2.0}), std::invalid_argument);
  }
  SUBCASE("forward is deterministic") {
    const MlpParams params =
        init_mlp(spec_of({5, 32, 32, 2}, Activation::kRelu, OutputActivation::kTanh), 9);
    const std::vector<double> x{0.1, -0.4, 2.0, 0.0, -1.3};
    const std::vector<double> a = forward(params, x);
    const std::vector<double> b = forward(params, x);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  }
}

TEST_CASE("backward on a single linear layer") {
  MlpParams params = zero_mlp(spec_of({1, 1}, Activation::kRelu, OutputActivation::kIdentity));
  params.weights[0] = {2.0};
  params.biases[0] = {1.0};
  const GradientBundle g =
      backward(params, std::vector<double>{3.0}, std::vector<double>{1.0});
  CHECK(g.weight_grads[0][0] == 3.0);
  CHECK(g.bias_grads[0][0] == 1.0);
  CHECK(g.input_grad[0] == 2.0);
}

TEST_CASE("backward with zero upstream is zero") {
  const MlpParams params =
      init_mlp(spec_of({3, 8, 2}, Activation::kTanh, OutputActivation::kIdentity), 77);
  const GradientBundle g =
      backward(params, std::vector<double>{0.3, -0.2, 1.1}, std::vector<double>{0.0, 0.0});
  for (const auto& layer : g.weight_grads)
    for (double v : layer) CHECK(v == 0.0);
  for (const auto& layer : g.bias_grads)
    for (double v : layer) CHECK(v == 0.0);
  for (double v : g.input_grad) CHECK(v == 0.0);
}

TEST_CASE("backward matches finite differences for every activation pairing") {
  const Activation hiddens[] = {Activation::kRelu, Activation::kTanh};
  const OutputActivation outputs[] = {OutputActivation::kIdentity, OutputActivation::kTanh};
  const double step = 1e-5;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);

  for (Activation hidden : hiddens) {
    for (OutputActivation output : outputs) {
      for (int net = 0; net < 20; ++net) {
        const MlpSpec spec = spec_of({3, 8, 6, 2}, hidden, output);
        const MlpParams params = init_mlp(spec, rng());
        std::vector<double> x(3), upstream(2);
        for (double& v : x) v = dist(rng);
        for (double& v : upstream) v = dist(rng);

        const GradientBundle g = backward(params, x, upstream);

        for (std::size_t l = 0; l < params.weights.size(); ++l) {
          for (std::size_t i = 0; i < params.weights[l].size(); ++i) {
            MlpParams plus = params, minus = params;
            plus.weights[l][i] += step;
            minus.weights[l][i] -= step;
            const double fd = (projected_output(plus, x, upstream) -
                               projected_output(minus, x, upstream)) /
                              (2.0 * step);
            CHECK(relative_error(g.weight_grads[l][i], fd) <= 1e-4);
          }
          for (std::size_t i = 0; i < params.biases[l].size(); ++i) {
            MlpParams plus = params, minus = params;
            plus.biases[l][i] += step;
            minus.biases[l][i] -= step;
            const double fd = (projected_output(plus, x, upstream) -
                               projected_output(minus, x, upstream)) /
                              (2.0 * step);
            CHECK(relative_error(g.bias_grads[l][i], fd) <= 1e-4);
          }
        }
        for (std::size_t i = 0; i < x.size(); ++i) {
          std::vector<double> plus = x, minus = x;
          plus[i] += step;
          minus[i] -= step;
          const double fd =
              (projected_output(params, plus, upstream) - projected_output(params, minus, upstream)) /
              (2.0 * step);
          CHECK(relative_error(g.input_grad[i], fd) <= 1e-4);
        }
      }
    }
  }
}

TEST_CASE("gradient steps") {
  MlpParams params = zero_mlp(spec_of({1, 1}, Activation::kRelu, OutputActivation::kIdentity));
  params.weights[0] = {1.0};
  GradientBundle g = zero_gradients(params.spec);

  SUBCASE("zero gradient leaves parameters unchanged") {
    const MlpParams out = apply_gradient_step(params, g, 0.5, StepDirection::kAscent);
    CHECK(out.weights[0][0] == 1.0);
    CHECK(out.biases[0][0] == 0.0);
  }
  SUBCASE("ascent adds lr times gradient") {
    g.weight_grads[0][0] = 2.0;
    const MlpParams out = apply_gradient_step(params, g, 0.1, StepDirection::kAscent);
    CHECK(out.weights[0][0] == doctest::Approx(1.2));
    const MlpParams down = apply_gradient_step(params, g, 0.1, StepDirection::kDescent);
    CHECK(down.weights[0][0] == doctest::Approx(0.8));
  }
  SUBCASE("lr zero is the identity") {
    g.weight_grads[0][0] = 123.0;
    const MlpParams out = apply_gradient_step(params, g, 0.0, StepDirection::kDescent);
    CHECK(out.weights[0][0] == 1.0);
  }
  SUBCASE("two steps apply sequentially") {
    GradientBundle g1 = zero_gradients(params.spec);
    GradientBundle g2 = zero_gradients(params.spec);
    g1.weight_grads[0][0] = 0.5;
    g2.weight_grads[0][0] = -0.25;
    const MlpParams once = apply_gradient_step(params, g1, 1.0, StepDirection::kAscent);
    const MlpParams twice = apply_gradient_step(once, g2, 1.0, StepDirection::kAscent);
    CHECK(twice.weights[0][0] == doctest::Approx((1.0 + 0.5) + -0.25));
  }
}

TEST_CASE("soft update") {
  const MlpSpec spec = spec_of({2, 3, 1}, Activation::kRelu, OutputActivation::kIdentity);
  const MlpParams online = init_mlp(spec, 1);
  MlpParams target = init_mlp(spec, 2);

  SUBCASE("tau = 1 copies the online network") {
    const MlpParams out = soft_update(target, online, 1.0);
    for (std::size_t l = 0; l < out.weights.size(); ++l)
      for (std::size_t i = 0; i < out.weights[l].size(); ++i)
        CHECK(out.weights[l][i] == online.weights[l][i]);
  }
  SUBCASE("tau = 0 is the identity") {
    const MlpParams out = soft_update(target, online, 0.0);
    for (std::size_t l = 0; l < out.weights.size(); ++l)
      for (std::size_t i = 0; i < out.weights[l].size(); ++i)
        CHECK(out.weights[l][i] == target.weights[l][i]);
  }
  SUBCASE("midpoint blend") {
    MlpParams zeros = zero_mlp(spec);
    MlpParams twos = zero_mlp(spec);
    for (auto& layer : twos.weights)
      for (double& v : layer) v = 2.0;
    const MlpParams out = soft_update(zeros, twos, 0.5);
    for (const auto& layer : out.weights)
      for (double v : layer) CHECK(v == doctest::Approx(1.0));
  }
  SUBCASE("repeated updates converge geometrically") {
    const double tau = 0.01;
    const double gap0 = target.weights[0][0] - online.weights[0][0];
    MlpParams t = target;
    for (int k = 0; k < 100; ++k) t = soft_update(t, online, tau);
    const double expected_gap = std::pow(1.0 - tau, 100) * gap0;
    CHECK(t.weights[0][0] - online.weights[0][0] == doctest::Approx(expected_gap).epsilon(1e-9));
  }
  SUBCASE("spec mismatch throws") {
    const MlpParams other =
        init_mlp(spec_of({2, 4, 1}, Activation::kRelu, OutputActivation::kIdentity), 3);
    CHECK_THROWS_AS(soft_update(target, other, 0.5), std::invalid_argument);
  }
}

TEST_CASE("initialization is bounded by fan-in and seeded") {
  const MlpSpec spec = spec_of({16, 8, 4}, Activation::kRelu, OutputActivation::kIdentity);
  const MlpParams a = init_mlp(spec, 99);
  const MlpParams b = init_mlp(spec, 99);
  const MlpParams c = init_mlp(spec, 100);

  const double bound0 = 1.0 / std::sqrt(16.0);
  for (double v : a.weights[0]) CHECK(std::fabs(v) <= bound0);
  const double bound1 = 1.0 / std::sqrt(8.0);
  for (double v : a.weights[1]) CHECK(std::fabs(v) <= bound1);

  CHECK(a.weights[0] == b.weights[0]);
  CHECK(a.weights[0] != c.weights[0]);
}

TEST_CASE("adam steps") {
  const MlpSpec spec = spec_of({1, 1}, Activation::kRelu, OutputActivation::kIdentity);
  MlpParams params = zero_mlp(spec);
  params.weights[0] = {5.0};
  AdamState state = make_adam_state(params);

  SUBCASE("zero gradient leaves parameters unchanged") {
    const GradientBundle g = zero_gradients(spec);
    const MlpParams out = adam_step(params, g, state, 0.1, StepDirection::kDescent);
    CHECK(out.weights[0][0] == 5.0);
  }
  SUBCASE("descent shrinks a quadratic objective") {
    // minimize 0.5 w^2; gradient = w
    MlpParams w = params;
    for (int i = 0; i < 2000; ++i) {
      GradientBundle g = zero_gradients(spec);
      g.weight_grads[0][0] = w.weights[0][0];
      w = adam_step(w, g, state, 0.05, StepDirection::kDescent);
    }
    CHECK(std::fabs(w.weights[0][0]) < 0.05);
  }
}
