#include "pfrl/mlp.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace pfrl {

std::string to_string(Activation a) {
  return a == Activation::kRelu ? "relu" : "tanh";
}

std::string to_string(OutputActivation a) {
  return a == OutputActivation::kIdentity ? "identity" : "tanh";
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "tanh") return Activation::kTanh;
  throw std::invalid_argument("unknown hidden activation: " + s);
}

OutputActivation output_activation_from_string(const std::string& s) {
  if (s == "identity") return OutputActivation::kIdentity;
  if (s == "tanh") return OutputActivation::kTanh;
  throw std::invalid_argument("unknown output activation: " + s);
}

void MlpSpec::validate() const {
  if (layer_sizes.size() < 2)
    throw std::invalid_argument("MlpSpec: need at least input and output sizes");
  for (int n : layer_sizes)
    if (n <= 0) throw std::invalid_argument("MlpSpec: layer sizes must be positive");
}

void MlpParams::validate() const {
  spec.validate();
  const std::size_t n_layers = spec.layer_sizes.size() - 1;
  if (weights.size() != n_layers || biases.size() != n_layers)
    throw std::invalid_argument("MlpParams: layer count mismatch");
  for (std::size_t l = 0; l < n_layers; ++l) {
    const std::size_t rows = static_cast<std::size_t>(spec.layer_sizes[l + 1]);
    const std::size_t cols = static_cast<std::size_t>(spec.layer_sizes[l]);
    if (weights[l].size() != rows * cols)
      throw std::invalid_argument("MlpParams: weight shape mismatch");
    if (biases[l].size() != rows)
      throw std::invalid_argument("MlpParams: bias shape mismatch");
  }
}

MlpParams init_mlp(const MlpSpec& spec, std::uint64_t seed) {
  spec.validate();
  MlpParams params;
  params.spec = spec;
  std::mt19937_64 rng(seed);
  const std::size_t n_layers = spec.layer_sizes.size() - 1;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const int rows = spec.layer_sizes[l + 1];
    const int cols = spec.layer_sizes[l];
    const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
    std::uniform_real_distribution<double> dist(-bound, bound);
    std::vector<double> w(static_cast<std::size_t>(rows) * cols);
    for (double& v : w) v = dist(rng);
    std::vector<double> b(rows);
    for (double& v : b) v = dist(rng);
    params.weights.push_back(std::move(w));
    params.biases.push_back(std::move(b));
  }
  return params;
}

MlpParams zero_mlp(const MlpSpec& spec) {
  spec.validate();
  MlpParams params;
  params.spec = spec;
  for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
    const std::size_t rows = static_cast<std::size_t>(spec.layer_sizes[l + 1]);
    const std::size_t cols = static_cast<std::size_t>(spec.layer_sizes[l]);
    params.weights.emplace_back(rows * cols, 0.0);
    params.biases.emplace_back(rows, 0.0);
  }
  return params;
}

namespace {

double apply_hidden(Activation act, double z) {
  return act == Activation::kRelu ? (z > 0.0 ? z : 0.0) : std::tanh(z);
}

double hidden_derivative(Activation act, double z) {
  if (act == Activation::kRelu) return z > 0.0 ? 1.0 : 0.0;
  const double t = std::tanh(z);
  return 1.0 - t * t;
}

// Forward pass caching per-layer pre-activations; activations[0] is x.
struct ForwardCache {
  std::vector<std::vector<double>> activations;
  std::vector<std::vector<double>> pre_activations;
};

ForwardCache run_forward(const MlpParams& params, std::span<const double> x) {
  const MlpSpec& spec = params.spec;
  if (static_cast<int>(x.size()) != spec.input_size())
    throw std::invalid_argument("forward: input dimension mismatch");

  ForwardCache cache;
  cache.activations.emplace_back(x.begin(), x.end());
  const std::size_t n_layers = spec.layer_sizes.size() - 1;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const int rows = spec.layer_sizes[l + 1];
    const int cols = spec.layer_sizes[l];
    const std::vector<double>& in = cache.activations.back();
    const double* w = params.weights[l].data();
    std::vector<double> z(rows);
    for (int r = 0; r < rows; ++r) {
      double acc = params.biases[l][r];
      const double* row = w + static_cast<std::size_t>(r) * cols;
      for (int c = 0; c < cols; ++c) acc += row[c] * in[c];
      z[r] = acc;
    }
    std::vector<double> h(rows);
    const bool is_output = (l + 1 == n_layers);
    if (is_output) {
      if (spec.output_activation == OutputActivation::kIdentity)
        h = z;
      else
        for (int r = 0; r < rows; ++r) h[r] = std::tanh(z[r]);
    } else {
      for (int r = 0; r < rows; ++r) h[r] = apply_hidden(spec.hidden_activation, z[r]);
    }
    cache.pre_activations.push_back(std::move(z));
    cache.activations.push_back(std::move(h));
  }
  return cache;
}

std::vector<double> run_backward(const MlpParams& params, const ForwardCache& cache,
                                 std::span<const double> upstream, GradientBundle* into) {
  const MlpSpec& spec = params.spec;
  if (static_cast<int>(upstream.size()) != spec.output_size())
    throw std::invalid_argument("backward: upstream dimension mismatch");

  const std::size_t n_layers = spec.layer_sizes.size() - 1;
  std::vector<double> delta(upstream.begin(), upstream.end());

  // Output activation derivative.
  if (spec.output_activation == OutputActivation::kTanh) {
    const std::vector<double>& z = cache.pre_activations.back();
    for (std::size_t r = 0; r < delta.size(); ++r) {
      const double t = std::tanh(z[r]);
      delta[r] *= 1.0 - t * t;
    }
  }

  for (std::size_t l = n_layers; l-- > 0;) {
    const int rows = spec.layer_sizes[l + 1];
    const int cols = spec.layer_sizes[l];
    const std::vector<double>& in = cache.activations[l];
    const double* w = params.weights[l].data();

    if (into != nullptr) {
      double* wg = into->weight_grads[l].data();
      double* bg = into->bias_grads[l].data();
      for (int r = 0; r < rows; ++r) {
        const double d = delta[r];
        bg[r] += d;
        double* wrow = wg + static_cast<std::size_t>(r) * cols;
        for (int c = 0; c < cols; ++c) wrow[c] += d * in[c];
      }
    }

    std::vector<double> prev(cols, 0.0);
    for (int r = 0; r < rows; ++r) {
      const double d = delta[r];
      const double* row = w + static_cast<std::size_t>(r) * cols;
      for (int c = 0; c < cols; ++c) prev[c] += d * row[c];
    }
    if (l > 0) {
      const std::vector<double>& z = cache.pre_activations[l - 1];
      for (int c = 0; c < cols; ++c)
        prev[c] *= hidden_derivative(spec.hidden_activation, z[c]);
    }
    delta = std::move(prev);
  }
  return delta;  // gradient with respect to x
}

}  // namespace

std::vector<double> forward(const MlpParams& params, std::span<const double> x) {
  return run_forward(params, x).activations.back();
}

GradientBundle zero_gradients(const MlpSpec& spec) {
  GradientBundle g;
  for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
    const std::size_t rows = static_cast<std::size_t>(spec.layer_sizes[l + 1]);
    const std::size_t cols = static_cast<std::size_t>(spec.layer_sizes[l]);
    g.weight_grads.emplace_back(rows * cols, 0.0);
    g.bias_grads.emplace_back(rows, 0.0);
  }
  g.input_grad.assign(static_cast<std::size_t>(spec.input_size()), 0.0);
  return g;
}

GradientBundle backward(const MlpParams& params, std::span<const double> x,
                        std::span<const double> upstream) {
  GradientBundle g = zero_gradients(params.spec);
  const ForwardCache cache = run_forward(params, x);
  g.input_grad = run_backward(params, cache, upstream, &g);
  return g;
}

std::vector<double> accumulate_backward(const MlpParams& params, std::span<const double> x,
                                        std::span<const double> upstream, GradientBundle& into) {
  const ForwardCache cache = run_forward(params, x);
  return run_backward(params, cache, upstream, &into);
}

std::vector<double> input_gradient(const MlpParams& params, std::span<const double> x,
                                   std::span<const double> upstream) {
  const ForwardCache cache = run_forward(params, x);
  return run_backward(params, cache, upstream, nullptr);
}

void scale_gradients(GradientBundle& g, double c) {
  for (auto& layer : g.weight_grads)
    for (double& v : layer) v *= c;
  for (auto& layer : g.bias_grads)
    for (double& v : layer) v *= c;
  for (double& v : g.input_grad) v *= c;
}

namespace {

void check_step_shapes(const MlpParams& params, const GradientBundle& grads) {
  if (grads.weight_grads.size() != params.weights.size() ||
      grads.bias_grads.size() != params.biases.size())
    throw std::invalid_argument("gradient step: layer count mismatch");
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    if (grads.weight_grads[l].size() != params.weights[l].size() ||
        grads.bias_grads[l].size() != params.biases[l].size())
      throw std::invalid_argument("gradient step: shape mismatch");
  }
}

}  // namespace

MlpParams apply_gradient_step(const MlpParams& params, const GradientBundle& grads, double lr,
                              StepDirection direction) {
  if (!(lr >= 0.0)) throw std::invalid_argument("gradient step: lr must be >= 0");
  check_step_shapes(params, grads);
  const double scale = direction == StepDirection::kAscent ? lr : -lr;
  MlpParams out = params;
  for (std::size_t l = 0; l < out.weights.size(); ++l) {
    for (std::size_t i = 0; i < out.weights[l].size(); ++i)
      out.weights[l][i] += scale * grads.weight_grads[l][i];
    for (std::size_t i = 0; i < out.biases[l].size(); ++i)
      out.biases[l][i] += scale * grads.bias_grads[l][i];
  }
  return out;
}

MlpParams soft_update(const MlpParams& target, const MlpParams& online, double tau) {
  if (!(target.spec == online.spec))
    throw std::invalid_argument("soft_update: spec mismatch");
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("soft_update: tau out of [0,1]");
  MlpParams out = target;
  for (std::size_t l = 0; l < out.weights.size(); ++l) {
    for (std::size_t i = 0; i < out.weights[l].size(); ++i)
      out.weights[l][i] = tau * online.weights[l][i] + (1.0 - tau) * target.weights[l][i];
    for (std::size_t i = 0; i < out.biases[l].size(); ++i)
      out.biases[l][i] = tau * online.biases[l][i] + (1.0 - tau) * target.biases[l][i];
  }
  return out;
}

bool params_finite(const MlpParams& params) {
  for (const auto& layer : params.weights)
    for (double v : layer)
      if (!std::isfinite(v)) return false;
  for (const auto& layer : params.biases)
    for (double v : layer)
      if (!std::isfinite(v)) return false;
  return true;
}

AdamState make_adam_state(const MlpParams& params) {
  AdamState state;
  for (const auto& layer : params.weights) {
    state.m_w.emplace_back(layer.size(), 0.0);
    state.v_w.emplace_back(layer.size(), 0.0);
  }
  for (const auto& layer : params.biases) {
    state.m_b.emplace_back(layer.size(), 0.0);
    state.v_b.emplace_back(layer.size(), 0.0);
  }
  return state;
}

MlpParams adam_step(const MlpParams& params, const GradientBundle& grads, AdamState& state,
                    double lr, StepDirection direction) {
  check_step_shapes(params, grads);
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;

  state.step += 1;
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.step));
  const double sign = direction == StepDirection::kAscent ? 1.0 : -1.0;

  MlpParams out = params;
  auto update = [&](std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
                    std::vector<double>& v) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g[i];
      v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g[i] * g[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      p[i] += sign * lr * m_hat / (std::sqrt(v_hat) + kEps);
    }
  };
  for (std::size_t l = 0; l < out.weights.size(); ++l) {
    update(out.weights[l], grads.weight_grads[l], state.m_w[l], state.v_w[l]);
    update(out.biases[l], grads.bias_grads[l], state.m_b[l], state.v_b[l]);
  }
  return out;
}

}  // namespace pfrl
