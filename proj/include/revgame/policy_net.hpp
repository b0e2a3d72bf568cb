#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#if defined(__SSE2__)
#include <pmmintrin.h>
#include <xmmintrin.h>
#endif

#include "revgame/decision.hpp"
#include "revgame/random.hpp"

namespace revgame {

enum class Activation : std::uint8_t { Rectifier = 0, Tanh = 1 };

// Fixed topology: scalar score in, one affine lift to the hidden width, a
// chain of residual blocks (block(x) = x + A2(act(A1(x)))), affine head down
// to one logit per decision.
struct NetworkConfig {
  int input_dim = 1;
  int hidden_width = 256;
  int residual_blocks = 10;
  int output_dim = kDecisionCount;
  Activation activation = Activation::Rectifier;
  std::uint64_t init_seed = 0;

  void validate() const {
    if (input_dim != 1) throw std::invalid_argument("input_dim must be 1");
    if (hidden_width < 1) throw std::invalid_argument("hidden_width must be >= 1");
    if (residual_blocks < 0) throw std::invalid_argument("residual_blocks must be >= 0");
    if (output_dim != kDecisionCount)
      throw std::invalid_argument("output_dim must equal the decision count");
  }

  bool operator==(const NetworkConfig&) const = default;
};

template <class Scalar>
struct Affine {
  std::vector<Scalar> weight;  // row-major, fan_out x fan_in
  std::vector<Scalar> bias;    // fan_out
  int fan_in = 0;
  int fan_out = 0;

  void resize(int in, int out) {
    fan_in = in;
    fan_out = out;
    weight.assign(static_cast<std::size_t>(in) * out, Scalar(0));
    bias.assign(out, Scalar(0));
  }
};

// One table per parameter tensor. Reused for parameters, gradients, and the
// Adam moment estimates, which all share this shape.
template <class Scalar>
struct ParamSet {
  Affine<Scalar> input;
  std::vector<Affine<Scalar>> blocks;  // two affines per residual block
  Affine<Scalar> output;

  // No-op when the shape already matches; existing contents are preserved in
  // that case, so repeated backward() calls reuse their buffers.
  void resize(const NetworkConfig& cfg) {
    const std::size_t want = 2 * static_cast<std::size_t>(cfg.residual_blocks);
    if (input.fan_in == cfg.input_dim && input.fan_out == cfg.hidden_width &&
        blocks.size() == want && output.fan_in == cfg.hidden_width &&
        output.fan_out == cfg.output_dim &&
        (want == 0 ||
         (blocks[0].fan_in == cfg.hidden_width && blocks[0].fan_out == cfg.hidden_width)))
      return;
    input.resize(cfg.input_dim, cfg.hidden_width);
    blocks.assign(want, Affine<Scalar>{});
    for (auto& a : blocks) a.resize(cfg.hidden_width, cfg.hidden_width);
    output.resize(cfg.hidden_width, cfg.output_dim);
  }

  // Tensors in declared order: input weight/bias, per-block weight/bias
  // pairs, output weight/bias. Checkpoints rely on this order.
  std::vector<std::vector<Scalar>*> tensors() {
    std::vector<std::vector<Scalar>*> out;
    out.reserve(2 * (blocks.size() + 2));
    out.push_back(&input.weight);
    out.push_back(&input.bias);
    for (auto& a : blocks) {
      out.push_back(&a.weight);
      out.push_back(&a.bias);
    }
    out.push_back(&output.weight);
    out.push_back(&output.bias);
    return out;
  }
  std::vector<const std::vector<Scalar>*> tensors() const {
    std::vector<const std::vector<Scalar>*> out;
    out.reserve(2 * (blocks.size() + 2));
    out.push_back(&input.weight);
    out.push_back(&input.bias);
    for (const auto& a : blocks) {
      out.push_back(&a.weight);
      out.push_back(&a.bias);
    }
    out.push_back(&output.weight);
    out.push_back(&output.bias);
    return out;
  }

  std::size_t count() const {
    std::size_t n = 0;
    for (const auto* t : tensors()) n += t->size();
    return n;
  }

  void zero() {
    for (auto* t : tensors()) std::fill(t->begin(), t->end(), Scalar(0));
  }

  bool congruent_with(const ParamSet& other) const {
    auto a = tensors();
    auto b = other.tensors();
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i]->size() != b[i]->size()) return false;
    return true;
  }
};

namespace detail {

// Training drives the Adam moments of dead units into a geometric decay
// toward zero; once they underflow into subnormal range, every multiply in
// the update loop takes a microcode assist and the run slows several-fold.
// Flushing subnormals to zero on the training threads avoids that; the
// affected values sit below 1e-38, far under Adam's epsilon. Scoped so the
// caller's FP environment is restored.
#if defined(__SSE2__)
class ScopedFlushDenormals {
 public:
  ScopedFlushDenormals()
      : ftz_(_MM_GET_FLUSH_ZERO_MODE()), daz_(_MM_GET_DENORMALS_ZERO_MODE()) {
    _MM_SET_FLUSH_ZERO_MODE(_MM_FLUSH_ZERO_ON);
    _MM_SET_DENORMALS_ZERO_MODE(_MM_DENORMALS_ZERO_ON);
  }
  ~ScopedFlushDenormals() {
    _MM_SET_FLUSH_ZERO_MODE(ftz_);
    _MM_SET_DENORMALS_ZERO_MODE(daz_);
  }
  ScopedFlushDenormals(const ScopedFlushDenormals&) = delete;
  ScopedFlushDenormals& operator=(const ScopedFlushDenormals&) = delete;

 private:
  unsigned ftz_, daz_;
};
#else
class ScopedFlushDenormals {};
#endif

// Dot products accumulate in 16 independent lanes with a pairwise reduction
// at the end. The summation order is fixed (deterministic) and the lane loop
// vectorizes, unlike a single strict-order accumulator.
template <class Scalar>
inline void affine_apply(const Affine<Scalar>& L, const Scalar* x, Scalar* y) {
  constexpr int kLanes = 16;
  const Scalar* w = L.weight.data();
  const int in = L.fan_in;
  for (int r = 0; r < L.fan_out; ++r) {
    const Scalar* row = w + static_cast<std::size_t>(r) * in;
    Scalar lanes[kLanes] = {};
    int c = 0;
    for (; c + kLanes <= in; c += kLanes)
      for (int k = 0; k < kLanes; ++k) lanes[k] += row[c + k] * x[c + k];
    Scalar tail = L.bias[r];
    for (; c < in; ++c) tail += row[c] * x[c];
    for (int half = kLanes / 2; half > 0; half /= 2)
      for (int k = 0; k < half; ++k) lanes[k] += lanes[k + half];
    y[r] = tail + lanes[0];
  }
}

// dx (+)= W^T d
template <class Scalar>
inline void affine_back_input(const Affine<Scalar>& L, const Scalar* d, Scalar* dx,
                              bool accumulate) {
  if (!accumulate)
    for (int c = 0; c < L.fan_in; ++c) dx[c] = Scalar(0);
  const Scalar* w = L.weight.data();
  for (int r = 0; r < L.fan_out; ++r) {
    const Scalar dr = d[r];
    if (dr == Scalar(0)) continue;
    const Scalar* row = w + static_cast<std::size_t>(r) * L.fan_in;
    for (int c = 0; c < L.fan_in; ++c) dx[c] += row[c] * dr;
  }
}

// Weight gradient is the outer product of the output-side gradient with the
// layer input; bias gradient is the output-side gradient.
template <class Scalar>
inline void affine_grads(const Scalar* d, const Scalar* x, Affine<Scalar>& g) {
  Scalar* gw = g.weight.data();
  for (int r = 0; r < g.fan_out; ++r) {
    const Scalar dr = d[r];
    Scalar* row = gw + static_cast<std::size_t>(r) * g.fan_in;
    for (int c = 0; c < g.fan_in; ++c) row[c] = dr * x[c];
    g.bias[r] = dr;
  }
}

}  // namespace detail

// Numerically safe softmax over the three logits, computed in double
// regardless of the parameter scalar type.
inline std::array<double, 3> softmax3(const std::array<double, 3>& z) {
  const double m = std::max(z[0], std::max(z[1], z[2]));
  std::array<double, 3> e{std::exp(z[0] - m), std::exp(z[1] - m), std::exp(z[2] - m)};
  const double s = e[0] + e[1] + e[2];
  return {e[0] / s, e[1] / s, e[2] / s};
}

// Everything backward() needs from the matching forward() call.
template <class Scalar>
struct ForwardCache {
  int width = 0;
  int block_count = 0;
  double input = 0.0;
  std::vector<Scalar> trunk;   // after the input affine
  std::vector<Scalar> pre;     // per block: A1 x
  std::vector<Scalar> hidden;  // per block: act(A1 x)
  std::vector<Scalar> post;    // per block: block output
  std::array<double, 3> logits{};
  std::array<double, 3> probs{};
  bool valid = false;
};

template <class Scalar>
class PolicyNetwork {
  static_assert(std::is_same_v<Scalar, float> || std::is_same_v<Scalar, double>,
                "PolicyNetwork supports float or double parameters");

 public:
  PolicyNetwork() = default;

  explicit PolicyNetwork(const NetworkConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    p_.resize(cfg_);
    init_params();
  }

  const NetworkConfig& config() const { return cfg_; }
  ParamSet<Scalar>& params() { return p_; }
  const ParamSet<Scalar>& params() const { return p_; }
  std::size_t parameter_count() const { return p_.count(); }

  // Fills `cache` with the probability vector over decisions plus all
  // intermediate activations.
  void forward(double score, ForwardCache<Scalar>& cache) const {
    if (!std::isfinite(score)) throw std::invalid_argument("network input must be finite");
    const int W = cfg_.hidden_width;
    const int B = cfg_.residual_blocks;
    cache.width = W;
    cache.block_count = B;
    cache.input = score;
    cache.trunk.resize(W);
    cache.pre.resize(static_cast<std::size_t>(B) * W);
    cache.hidden.resize(static_cast<std::size_t>(B) * W);
    cache.post.resize(static_cast<std::size_t>(B) * W);

    const Scalar in = static_cast<Scalar>(score);
    detail::affine_apply(p_.input, &in, cache.trunk.data());

    const Scalar* x = cache.trunk.data();
    for (int k = 0; k < B; ++k) {
      Scalar* u = cache.pre.data() + static_cast<std::size_t>(k) * W;
      Scalar* a = cache.hidden.data() + static_cast<std::size_t>(k) * W;
      Scalar* y = cache.post.data() + static_cast<std::size_t>(k) * W;
      detail::affine_apply(p_.blocks[2 * k], x, u);
      if (cfg_.activation == Activation::Rectifier) {
        for (int i = 0; i < W; ++i) a[i] = u[i] > Scalar(0) ? u[i] : Scalar(0);
      } else {
        for (int i = 0; i < W; ++i) a[i] = std::tanh(u[i]);
      }
      detail::affine_apply(p_.blocks[2 * k + 1], a, y);
      for (int i = 0; i < W; ++i) y[i] += x[i];
      x = y;
    }

    std::array<Scalar, 3> logits_s{};
    detail::affine_apply(p_.output, x, logits_s.data());
    for (int r = 0; r < 3; ++r) cache.logits[r] = static_cast<double>(logits_s[r]);
    cache.probs = softmax3(cache.logits);
    cache.valid = true;
  }

  std::array<double, 3> forward_probs(double score) const {
    ForwardCache<Scalar> cache;
    forward(score, cache);
    return cache.probs;
  }

  // Reverse-mode gradients of a scalar loss with the given gradient w.r.t.
  // the output logits. `grads` is overwritten with tables congruent to the
  // parameters.
  void backward(const ForwardCache<Scalar>& cache, const std::array<double, 3>& logit_grad,
                ParamSet<Scalar>& grads) const {
    const int W = cfg_.hidden_width;
    const int B = cfg_.residual_blocks;
    if (!cache.valid || cache.width != W || cache.block_count != B)
      throw std::invalid_argument("forward cache does not match this network");
    grads.resize(cfg_);

    std::array<Scalar, 3> dz{static_cast<Scalar>(logit_grad[0]),
                             static_cast<Scalar>(logit_grad[1]),
                             static_cast<Scalar>(logit_grad[2])};

    const Scalar* x_last =
        B > 0 ? cache.post.data() + static_cast<std::size_t>(B - 1) * W : cache.trunk.data();
    detail::affine_grads(dz.data(), x_last, grads.output);

    std::vector<Scalar> dx(W), da(W), du(W);
    detail::affine_back_input(p_.output, dz.data(), dx.data(), false);

    for (int k = B - 1; k >= 0; --k) {
      const Scalar* u = cache.pre.data() + static_cast<std::size_t>(k) * W;
      const Scalar* a = cache.hidden.data() + static_cast<std::size_t>(k) * W;
      const Scalar* x_in =
          k > 0 ? cache.post.data() + static_cast<std::size_t>(k - 1) * W : cache.trunk.data();

      detail::affine_grads(dx.data(), a, grads.blocks[2 * k + 1]);
      detail::affine_back_input(p_.blocks[2 * k + 1], dx.data(), da.data(), false);
      if (cfg_.activation == Activation::Rectifier) {
        for (int i = 0; i < W; ++i) du[i] = u[i] > Scalar(0) ? da[i] : Scalar(0);
      } else {
        for (int i = 0; i < W; ++i) du[i] = da[i] * (Scalar(1) - a[i] * a[i]);
      }
      detail::affine_grads(du.data(), x_in, grads.blocks[2 * k]);
      // Skip connection: gradient flows through both the block and identity.
      detail::affine_back_input(p_.blocks[2 * k], du.data(), dx.data(), true);
    }

    const Scalar in = static_cast<Scalar>(cache.input);
    for (int i = 0; i < W; ++i) {
      grads.input.weight[i] = dx[i] * in;
      grads.input.bias[i] = dx[i];
    }
  }

 private:
  // Weights uniform in +-1/sqrt(fan_in), biases zero, drawn in declared
  // tensor order from a generator seeded with init_seed.
  void init_params() {
    std::mt19937_64 rng(cfg_.init_seed);
    auto init_affine = [&rng](Affine<Scalar>& a) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(a.fan_in));
      for (auto& w : a.weight) w = static_cast<Scalar>(uniform_range(rng, -bound, bound));
      std::fill(a.bias.begin(), a.bias.end(), Scalar(0));
    };
    init_affine(p_.input);
    for (auto& a : p_.blocks) init_affine(a);
    init_affine(p_.output);
  }

  NetworkConfig cfg_;
  ParamSet<Scalar> p_;
};

inline constexpr double kLogProbFloor = -30.0;

namespace detail {
inline void check_distribution(const std::array<double, 3>& probs) {
  double sum = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < -1e-12)
      throw std::invalid_argument("probabilities must be nonnegative");
    sum += p;
  }
  if (std::fabs(sum - 1.0) > 1e-6)
    throw std::invalid_argument("probabilities must sum to 1");
}
}  // namespace detail

struct SampledDecision {
  Decision decision = Decision::Accept;
  double log_prob = 0.0;
};

// Categorical draw by inverse CDF on a uniform variate in [0, 1). The
// log-probability is floored to keep downstream losses finite.
inline SampledDecision sample_decision(const std::array<double, 3>& probs, double u01) {
  detail::check_distribution(probs);
  int idx = 2;
  double cum = 0.0;
  for (int i = 0; i < 3; ++i) {
    cum += probs[i];
    if (u01 < cum) {
      idx = i;
      break;
    }
  }
  const double lp = probs[idx] > 0.0 ? std::log(probs[idx]) : kLogProbFloor;
  return {decision_from_ordinal(idx), std::max(lp, kLogProbFloor)};
}

template <class Rng>
SampledDecision sample_decision(const std::array<double, 3>& probs, Rng& rng) {
  return sample_decision(probs, uniform01(rng));
}

template <class Scalar>
struct AdamState {
  double learning_rate = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step_count = 0;
  ParamSet<Scalar> first_moment;
  ParamSet<Scalar> second_moment;

  static AdamState zeros(const NetworkConfig& cfg, double learning_rate) {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
      throw std::invalid_argument("learning rate must be positive");
    AdamState st;
    st.learning_rate = learning_rate;
    st.first_moment.resize(cfg);
    st.second_moment.resize(cfg);
    return st;
  }
};

// One bias-corrected Adam update, in place.
template <class Scalar>
void adam_step(PolicyNetwork<Scalar>& net, AdamState<Scalar>& st,
               const ParamSet<Scalar>& grads) {
  if (!net.params().congruent_with(grads) || !net.params().congruent_with(st.first_moment) ||
      !net.params().congruent_with(st.second_moment))
    throw std::invalid_argument("gradient/moment tables must match the parameter shapes");

  ++st.step_count;
  // Bias corrections in double once per step; the per-element update runs in
  // the parameter precision.
  const double c1 = 1.0 / (1.0 - std::pow(st.beta1, static_cast<double>(st.step_count)));
  const double c2 = 1.0 / (1.0 - std::pow(st.beta2, static_cast<double>(st.step_count)));
  const Scalar b1 = static_cast<Scalar>(st.beta1);
  const Scalar b2 = static_cast<Scalar>(st.beta2);
  const Scalar k1 = static_cast<Scalar>(1.0 - st.beta1);
  const Scalar k2 = static_cast<Scalar>(1.0 - st.beta2);
  const Scalar step = static_cast<Scalar>(st.learning_rate * c1);
  const Scalar vscale = static_cast<Scalar>(c2);
  const Scalar eps = static_cast<Scalar>(st.epsilon);

  auto ws = net.params().tensors();
  auto gs = grads.tensors();
  auto ms = st.first_moment.tensors();
  auto vs = st.second_moment.tensors();
  for (std::size_t t = 0; t < ws.size(); ++t) {
    Scalar* w = ws[t]->data();
    const Scalar* g = gs[t]->data();
    Scalar* m = ms[t]->data();
    Scalar* v = vs[t]->data();
    const std::size_t n = ws[t]->size();
    for (std::size_t i = 0; i < n; ++i) {
      const Scalar gi = g[i];
      const Scalar mi = b1 * m[i] + k1 * gi;
      const Scalar vi = b2 * v[i] + k2 * gi * gi;
      m[i] = mi;
      v[i] = vi;
      w[i] -= step * mi / (std::sqrt(vi * vscale) + eps);
    }
  }
}

// ---------------------------------------------------------------------------
// Checkpoints.
//
// Binary container, little-endian host layout:
//   magic "RVGC", u32 version (1), u8 scalar code ('f' or 'd'),
//   u8 activation, i32 input_dim / hidden_width / residual_blocks /
//   output_dim, u64 init_seed, f64 learning_rate / beta1 / beta2 / epsilon,
//   i64 step_count, then raw tensors in declared order: parameters, first
//   moments, second moments. Round-trips are lossless.
// ---------------------------------------------------------------------------

namespace detail {

template <class T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint truncated");
  return v;
}

template <class Scalar>
constexpr char scalar_code() {
  return std::is_same_v<Scalar, float> ? 'f' : 'd';
}

template <class Scalar>
void write_tensors(std::ostream& out, const ParamSet<Scalar>& set) {
  for (const auto* t : set.tensors())
    out.write(reinterpret_cast<const char*>(t->data()),
              static_cast<std::streamsize>(t->size() * sizeof(Scalar)));
}

template <class Scalar>
void read_tensors(std::istream& in, ParamSet<Scalar>& set) {
  for (auto* t : set.tensors()) {
    in.read(reinterpret_cast<char*>(t->data()),
            static_cast<std::streamsize>(t->size() * sizeof(Scalar)));
    if (!in) throw std::runtime_error("checkpoint truncated");
  }
}

}  // namespace detail

inline constexpr std::uint32_t kCheckpointVersion = 1;

template <class Scalar>
void save_checkpoint(std::ostream& out, const PolicyNetwork<Scalar>& net,
                     const AdamState<Scalar>& st) {
  out.write("RVGC", 4);
  detail::write_pod(out, kCheckpointVersion);
  detail::write_pod(out, detail::scalar_code<Scalar>());
  detail::write_pod(out, static_cast<std::uint8_t>(net.config().activation));
  detail::write_pod(out, static_cast<std::int32_t>(net.config().input_dim));
  detail::write_pod(out, static_cast<std::int32_t>(net.config().hidden_width));
  detail::write_pod(out, static_cast<std::int32_t>(net.config().residual_blocks));
  detail::write_pod(out, static_cast<std::int32_t>(net.config().output_dim));
  detail::write_pod(out, net.config().init_seed);
  detail::write_pod(out, st.learning_rate);
  detail::write_pod(out, st.beta1);
  detail::write_pod(out, st.beta2);
  detail::write_pod(out, st.epsilon);
  detail::write_pod(out, st.step_count);
  detail::write_tensors(out, net.params());
  detail::write_tensors(out, st.first_moment);
  detail::write_tensors(out, st.second_moment);
  if (!out) throw std::runtime_error("checkpoint write failed");
}

template <class Scalar>
std::pair<PolicyNetwork<Scalar>, AdamState<Scalar>> load_checkpoint(std::istream& in) {
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "RVGC", 4) != 0)
    throw std::runtime_error("not a checkpoint file");
  const auto version = detail::read_pod<std::uint32_t>(in);
  if (version != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  const char code = detail::read_pod<char>(in);
  if (code != detail::scalar_code<Scalar>())
    throw std::runtime_error("checkpoint scalar type mismatch");

  NetworkConfig cfg;
  cfg.activation = static_cast<Activation>(detail::read_pod<std::uint8_t>(in));
  cfg.input_dim = detail::read_pod<std::int32_t>(in);
  cfg.hidden_width = detail::read_pod<std::int32_t>(in);
  cfg.residual_blocks = detail::read_pod<std::int32_t>(in);
  cfg.output_dim = detail::read_pod<std::int32_t>(in);
  cfg.init_seed = detail::read_pod<std::uint64_t>(in);

  PolicyNetwork<Scalar> net(cfg);
  AdamState<Scalar> st;
  st.learning_rate = detail::read_pod<double>(in);
  st.beta1 = detail::read_pod<double>(in);
  st.beta2 = detail::read_pod<double>(in);
  st.epsilon = detail::read_pod<double>(in);
  st.step_count = detail::read_pod<std::int64_t>(in);
  st.first_moment.resize(cfg);
  st.second_moment.resize(cfg);
  detail::read_tensors(in, net.params());
  detail::read_tensors(in, st.first_moment);
  detail::read_tensors(in, st.second_moment);
  return {std::move(net), std::move(st)};
}

template <class Scalar>
void save_checkpoint_file(const std::filesystem::path& path, const PolicyNetwork<Scalar>& net,
                          const AdamState<Scalar>& st) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path.string());
  save_checkpoint(out, net, st);
}

template <class Scalar>
std::pair<PolicyNetwork<Scalar>, AdamState<Scalar>> load_checkpoint_file(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
  return load_checkpoint<Scalar>(in);
}

}  // namespace revgame
