#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cco/common.hpp"

namespace cco::neural {

inline constexpr int kActionCount = 11;  // tilt deltas -5..+5, class = delta + 5

struct ActionDistribution {
  std::array<double, kActionCount> logits{};
  std::array<double, kActionCount> probs{};
};

ActionDistribution softmax(const std::array<double, kActionCount>& logits);
int sample_action(const ActionDistribution& dist, Rng& rng);
int argmax_action(const ActionDistribution& dist);  // ties -> lowest class

struct NetConfig {
  int k_fov = 32;    // input height == width
  int m = 21;        // input channels
  int channels = 32; // internal width C
  int blocks = 3;    // residual blocks R
  double l2 = 1e-4;  // per-sample weight decay on conv/head weights

  void validate() const;
};

template <typename Real>
struct GradAccumulator {
  std::vector<Real> grad;
  std::int64_t count = 0;

  explicit GradAccumulator(size_t param_count) : grad(param_count, Real(0)) {}
  void reset() {
    std::fill(grad.begin(), grad.end(), Real(0));
    count = 0;
  }
};

// Residual policy CNN with hand-rolled reverse-mode gradients.
//
//   input (M,K,K) -> conv3x3 (no bias) -> BN -> ReLU
//   R x [ conv3x3 -> BN -> ReLU -> conv3x3 -> BN -> (+skip) -> ReLU ]
//   global average pool -> affine -> 11 logits
//
// Gradients follow the ascent convention: accumulate_from_pass adds
// scale * d log pi(action) / d theta (minus the L2 term), and SgdMomentum
// steps parameters in the +gradient direction. Train-mode batch norm uses
// per-sample spatial statistics so each sample's gradient is independent of
// its batch; running statistics (momentum 0.99) serve eval mode.
template <typename Real>
class PolicyNetwork {
 public:
  PolicyNetwork(const NetConfig& cfg, uint64_t seed);

  const NetConfig& config() const { return cfg_; }
  size_t param_count() const { return params_.size(); }
  std::vector<Real>& params() { return params_; }
  const std::vector<Real>& params() const { return params_; }
  std::vector<Real>& running_stats() { return running_; }
  const std::vector<Real>& running_stats() const { return running_; }

  // Eval mode (running statistics).
  ActionDistribution forward(std::span<const float> input_hwc) const;

  struct ForwardPass {
    std::vector<Real> input;                // (M,K,K) channels-first
    std::vector<Real> stem_conv, stem_act;  // pre-BN / post-ReLU
    std::vector<Real> stem_mean, stem_istd;
    struct Block {
      std::vector<Real> conv1, act1, conv2, out;
      std::vector<Real> mean1, istd1, mean2, istd2;
    };
    std::vector<Block> blocks;
    std::vector<Real> pooled;
    ActionDistribution dist;
  };

  // Train mode (per-sample statistics); pure, does not touch running stats.
  ForwardPass forward_pass(std::span<const float> input_hwc) const;

  // Folds one pass's batch statistics into the running statistics.
  void absorb_stats(const ForwardPass& pass);

  // grad += scale * d log pi(action | pass.input) / d theta  -  l2 * theta
  void accumulate_from_pass(const ForwardPass& pass, int action, Real scale,
                            GradAccumulator<Real>& acc) const;

 private:
  struct BlockOffsets {
    size_t conv1, gamma1, beta1, conv2, gamma2, beta2;
  };

  std::vector<Real> to_chw(std::span<const float> input_hwc) const;
  void batch_stats(const Real* pre, Real* mean, Real* istd) const;
  void bn_relu(const Real* pre, const Real* mean, const Real* istd, size_t gamma_off,
               Real* out, const Real* skip, bool relu) const;
  void bn_eval(const Real* pre, size_t stat_off, size_t gamma_off, Real* out,
               const Real* skip, bool relu) const;

  NetConfig cfg_;
  size_t hw_ = 0;  // k_fov * k_fov
  size_t stem_w_ = 0, stem_gamma_ = 0, stem_beta_ = 0;
  std::vector<BlockOffsets> block_off_;
  size_t head_w_ = 0, head_b_ = 0;
  std::vector<Real> params_;
  std::vector<Real> running_;  // per BN layer: mean[C] then var[C], layer order
};

struct SgdConfig {
  double lr = 1e-3;
  double momentum = 0.9;
  double lr_min = 0.0;
  std::int64_t total_steps = 0;  // 0 -> constant learning rate, else cosine decay

  void validate() const;
};

template <typename Real>
class SgdMomentum {
 public:
  SgdMomentum(const SgdConfig& cfg, size_t param_count)
      : cfg_(cfg), velocity_(param_count, Real(0)) {
    cfg.validate();
  }

  double current_lr() const;
  std::int64_t step_count() const { return step_; }

  // theta += lr * (momentum * v + mean grad); resets the accumulator.
  void apply(PolicyNetwork<Real>& net, GradAccumulator<Real>& acc);

 private:
  SgdConfig cfg_;
  std::vector<Real> velocity_;
  std::int64_t step_ = 0;
};

// Binary checkpoint: magic "CCOPNET1", int32 LE (k_fov, m, channels, blocks),
// parameters then running stats as little-endian float32.
template <typename Real>
void save_checkpoint(const std::filesystem::path& path, const PolicyNetwork<Real>& net);

template <typename Real>
PolicyNetwork<Real> load_checkpoint(const std::filesystem::path& path, double l2 = 1e-4);

}  // namespace cco::neural
