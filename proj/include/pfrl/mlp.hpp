#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pfrl {

enum class Activation { kRelu, kTanh };
enum class OutputActivation { kIdentity, kTanh };

std::string to_string(Activation a);
std::string to_string(OutputActivation a);
Activation activation_from_string(const std::string& s);
OutputActivation output_activation_from_string(const std::string& s);

struct MlpSpec {
  std::vector<int> layer_sizes;  // input, hidden..., output
  Activation hidden_activation = Activation::kRelu;
  OutputActivation output_activation = OutputActivation::kIdentity;

  void validate() const;
  int input_size() const { return layer_sizes.front(); }
  int output_size() const { return layer_sizes.back(); }
  bool operator==(const MlpSpec&) const = default;
};

// Weight matrix l is flat row-major: layer_sizes[l+1] rows x layer_sizes[l]
// columns. All arithmetic is double precision.
struct MlpParams {
  MlpSpec spec;
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;

  void validate() const;
};

struct GradientBundle {
  std::vector<std::vector<double>> weight_grads;
  std::vector<std::vector<double>> bias_grads;
  std::vector<double> input_grad;
};

enum class StepDirection { kAscent, kDescent };

// Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)], deterministic per seed.
MlpParams init_mlp(const MlpSpec& spec, std::uint64_t seed);
MlpParams zero_mlp(const MlpSpec& spec);

std::vector<double> forward(const MlpParams& params, std::span<const double> x);

// Exact reverse-mode gradients of (upstream . forward(params, x)) with
// respect to every parameter and to x.
GradientBundle backward(const MlpParams& params, std::span<const double> x,
                        std::span<const double> upstream);

GradientBundle zero_gradients(const MlpSpec& spec);

// Adds the parameter gradients into `into` and returns the input gradient.
std::vector<double> accumulate_backward(const MlpParams& params, std::span<const double> x,
                                        std::span<const double> upstream, GradientBundle& into);

// Input gradient only; skips the parameter accumulation work.
std::vector<double> input_gradient(const MlpParams& params, std::span<const double> x,
                                   std::span<const double> upstream);

void scale_gradients(GradientBundle& g, double c);

// params +/- lr * grads elementwise.
MlpParams apply_gradient_step(const MlpParams& params, const GradientBundle& grads, double lr,
                              StepDirection direction);

// target' = tau * online + (1 - tau) * target, tau in [0, 1].
MlpParams soft_update(const MlpParams& target, const MlpParams& online, double tau);

bool params_finite(const MlpParams& params);

struct AdamState {
  std::vector<std::vector<double>> m_w, v_w, m_b, v_b;
  std::int64_t step = 0;
};

AdamState make_adam_state(const MlpParams& params);

// One Adam step (beta1 0.9, beta2 0.999, eps 1e-8). Mutates `state`.
MlpParams adam_step(const MlpParams& params, const GradientBundle& grads, AdamState& state,
                    double lr, StepDirection direction);

}  // namespace pfrl
