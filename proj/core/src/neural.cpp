#include "cco/neural.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace cco::neural {

namespace {

constexpr double kBnEps = 1e-5;
constexpr double kRunningMomentum = 0.99;
constexpr char kMagic[8] = {'C', 'C', 'O', 'P', 'N', 'E', 'T', '1'};

// out[co,y,x] += sum_{ci,ky,kx} w[co,ci,ky,kx] * in[ci,y+ky-1,x+kx-1], zero padded.
template <typename Real>
void conv3x3_fwd(const Real* in, int cin, const Real* w, Real* out, int cout, int k) {
  for (int co = 0; co < cout; ++co) {
    for (int ci = 0; ci < cin; ++ci) {
      const Real* wp = w + (size_t(co) * cin + ci) * 9;
      for (int ky = 0; ky < 3; ++ky) {
        const int sy = ky - 1;
        for (int kx = 0; kx < 3; ++kx) {
          const int sx = kx - 1;
          const Real wv = wp[ky * 3 + kx];
          const int x0 = std::max(0, -sx), x1 = std::min(k, k - sx);
          for (int y = std::max(0, -sy); y < std::min(k, k - sy); ++y) {
            const Real* irow = in + (size_t(ci) * k + y + sy) * k + sx;
            Real* orow = out + (size_t(co) * k + y) * k;
            for (int x = x0; x < x1; ++x) orow[x] += wv * irow[x];
          }
        }
      }
    }
  }
}

template <typename Real>
void conv3x3_bwd_input(Real* din, int cin, const Real* w, const Real* dout, int cout,
                       int k) {
  for (int co = 0; co < cout; ++co) {
    for (int ci = 0; ci < cin; ++ci) {
      const Real* wp = w + (size_t(co) * cin + ci) * 9;
      for (int ky = 0; ky < 3; ++ky) {
        const int sy = ky - 1;
        for (int kx = 0; kx < 3; ++kx) {
          const int sx = kx - 1;
          const Real wv = wp[ky * 3 + kx];
          const int x0 = std::max(0, -sx), x1 = std::min(k, k - sx);
          for (int y = std::max(0, -sy); y < std::min(k, k - sy); ++y) {
            Real* irow = din + (size_t(ci) * k + y + sy) * k + sx;
            const Real* orow = dout + (size_t(co) * k + y) * k;
            for (int x = x0; x < x1; ++x) irow[x] += wv * orow[x];
          }
        }
      }
    }
  }
}

template <typename Real>
void conv3x3_bwd_weight(const Real* in, int cin, Real* dw, const Real* dout, int cout,
                        int k) {
  for (int co = 0; co < cout; ++co) {
    for (int ci = 0; ci < cin; ++ci) {
      Real* wp = dw + (size_t(co) * cin + ci) * 9;
      for (int ky = 0; ky < 3; ++ky) {
        const int sy = ky - 1;
        for (int kx = 0; kx < 3; ++kx) {
          const int sx = kx - 1;
          const int x0 = std::max(0, -sx), x1 = std::min(k, k - sx);
          Real sum = 0;
          for (int y = std::max(0, -sy); y < std::min(k, k - sy); ++y) {
            const Real* irow = in + (size_t(ci) * k + y + sy) * k + sx;
            const Real* orow = dout + (size_t(co) * k + y) * k;
            for (int x = x0; x < x1; ++x) sum += orow[x] * irow[x];
          }
          wp[ky * 3 + kx] += sum;
        }
      }
    }
  }
}

// dx = gamma*istd*(dy - mean(dy) - xhat*mean(dy*xhat)); also emits dgamma/dbeta.
template <typename Real>
void bn_backward(const Real* pre, const Real* dy, const Real* mean, const Real* istd,
                 const Real* gamma, Real* dx, Real* dgamma, Real* dbeta, int channels,
                 size_t n) {
  for (int c = 0; c < channels; ++c) {
    const Real* p = pre + c * n;
    const Real* d = dy + c * n;
    Real* o = dx + c * n;
    Real sum_dy = 0, sum_dy_xhat = 0;
    for (size_t i = 0; i < n; ++i) {
      const Real xhat = (p[i] - mean[c]) * istd[c];
      sum_dy += d[i];
      sum_dy_xhat += d[i] * xhat;
    }
    dgamma[c] += sum_dy_xhat;
    dbeta[c] += sum_dy;
    const Real mdy = sum_dy / Real(n);
    const Real mdyx = sum_dy_xhat / Real(n);
    const Real g = gamma[c] * istd[c];
    for (size_t i = 0; i < n; ++i) {
      const Real xhat = (p[i] - mean[c]) * istd[c];
      o[i] = g * (d[i] - mdy - xhat * mdyx);
    }
  }
}

}  // namespace

ActionDistribution softmax(const std::array<double, kActionCount>& logits) {
  ActionDistribution d;
  d.logits = logits;
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0;
  for (int i = 0; i < kActionCount; ++i) {
    d.probs[i] = std::exp(logits[i] - mx);
    sum += d.probs[i];
  }
  for (auto& p : d.probs) p /= sum;
  return d;
}

int sample_action(const ActionDistribution& dist, Rng& rng) {
  const double u = rng.uniform();
  double cum = 0;
  for (int i = 0; i < kActionCount; ++i) {
    cum += dist.probs[i];
    if (u < cum) return i;
  }
  return kActionCount - 1;
}

int argmax_action(const ActionDistribution& dist) {
  int best = 0;
  for (int i = 1; i < kActionCount; ++i)
    if (dist.probs[i] > dist.probs[best]) best = i;
  return best;
}

void NetConfig::validate() const {
  require(k_fov >= 1, "net: k_fov must be positive");
  require(m >= 1, "net: input channels must be positive");
  require(channels >= 1, "net: width must be positive");
  require(blocks >= 0, "net: negative block count");
  require(l2 >= 0, "net: negative l2 coefficient");
}

void SgdConfig::validate() const {
  require(lr > 0, "sgd: learning rate must be positive");
  require(momentum >= 0 && momentum < 1, "sgd: momentum out of [0,1)");
  require(lr_min >= 0 && lr_min <= lr, "sgd: lr_min out of range");
  require(total_steps >= 0, "sgd: negative step budget");
}

template <typename Real>
PolicyNetwork<Real>::PolicyNetwork(const NetConfig& cfg, uint64_t seed) : cfg_(cfg) {
  cfg.validate();
  const int c = cfg_.channels;
  hw_ = size_t(cfg_.k_fov) * cfg_.k_fov;

  size_t off = 0;
  auto take = [&off](size_t n) {
    const size_t at = off;
    off += n;
    return at;
  };
  stem_w_ = take(size_t(c) * cfg_.m * 9);
  stem_gamma_ = take(c);
  stem_beta_ = take(c);
  block_off_.resize(cfg_.blocks);
  for (auto& b : block_off_) {
    b.conv1 = take(size_t(c) * c * 9);
    b.gamma1 = take(c);
    b.beta1 = take(c);
    b.conv2 = take(size_t(c) * c * 9);
    b.gamma2 = take(c);
    b.beta2 = take(c);
  }
  head_w_ = take(size_t(kActionCount) * c);
  head_b_ = take(kActionCount);
  params_.assign(off, Real(0));
  running_.assign(size_t(2 * c) * (1 + 2 * cfg_.blocks), Real(0));
  for (int l = 0; l < 1 + 2 * cfg_.blocks; ++l)  // mean 0, var 1
    for (int i = 0; i < c; ++i) running_[size_t(2 * c) * l + c + i] = Real(1);

  Rng rng(seed);
  auto he_fill = [&](size_t at, size_t n, int fan_in) {
    const double std = std::sqrt(2.0 / double(fan_in));
    for (size_t i = 0; i < n; ++i) params_[at + i] = Real(std * rng.gaussian());
  };
  he_fill(stem_w_, size_t(c) * cfg_.m * 9, cfg_.m * 9);
  for (const auto& b : block_off_) {
    he_fill(b.conv1, size_t(c) * c * 9, c * 9);
    he_fill(b.conv2, size_t(c) * c * 9, c * 9);
    for (int i = 0; i < c; ++i) {
      params_[b.gamma1 + i] = Real(1);
      params_[b.gamma2 + i] = Real(1);
    }
  }
  for (int i = 0; i < c; ++i) params_[stem_gamma_ + i] = Real(1);
  // head stays zero: uniform initial policy
}

template <typename Real>
std::vector<Real> PolicyNetwork<Real>::to_chw(std::span<const float> input_hwc) const {
  const int k = cfg_.k_fov, m = cfg_.m;
  require(input_hwc.size() == hw_ * size_t(m), "net: input size mismatch");
  std::vector<Real> x(size_t(m) * hw_);
  for (int j = 0; j < k; ++j)
    for (int kk = 0; kk < k; ++kk)
      for (int ch = 0; ch < m; ++ch)
        x[size_t(ch) * hw_ + size_t(j) * k + kk] =
            Real(input_hwc[(size_t(j) * k + kk) * m + ch]);
  return x;
}

template <typename Real>
void PolicyNetwork<Real>::batch_stats(const Real* pre, Real* mean, Real* istd) const {
  const int c = cfg_.channels;
  for (int ch = 0; ch < c; ++ch) {
    const Real* p = pre + ch * hw_;
    Real sum = 0;
    for (size_t i = 0; i < hw_; ++i) sum += p[i];
    const Real mu = sum / Real(hw_);
    Real var = 0;
    for (size_t i = 0; i < hw_; ++i) var += (p[i] - mu) * (p[i] - mu);
    var /= Real(hw_);
    mean[ch] = mu;
    istd[ch] = Real(1) / std::sqrt(var + Real(kBnEps));
  }
}

template <typename Real>
void PolicyNetwork<Real>::bn_relu(const Real* pre, const Real* mean, const Real* istd,
                                  size_t gamma_off, Real* out, const Real* skip,
                                  bool relu) const {
  const int c = cfg_.channels;
  for (int ch = 0; ch < c; ++ch) {
    const Real g = params_[gamma_off + ch];
    const Real b = params_[gamma_off + c + ch];  // beta follows gamma
    const Real* p = pre + ch * hw_;
    Real* o = out + ch * hw_;
    const Real* s = skip ? skip + ch * hw_ : nullptr;
    for (size_t i = 0; i < hw_; ++i) {
      Real v = g * (p[i] - mean[ch]) * istd[ch] + b;
      if (s) v += s[i];
      o[i] = relu ? std::max(Real(0), v) : v;
    }
  }
}

template <typename Real>
void PolicyNetwork<Real>::bn_eval(const Real* pre, size_t stat_off, size_t gamma_off,
                                  Real* out, const Real* skip, bool relu) const {
  const int c = cfg_.channels;
  for (int ch = 0; ch < c; ++ch) {
    const Real mean = running_[stat_off + ch];
    const Real var = running_[stat_off + c + ch];
    const Real istd = Real(1) / std::sqrt(var + Real(kBnEps));
    const Real g = params_[gamma_off + ch];
    const Real b = params_[gamma_off + c + ch];
    const Real* p = pre + ch * hw_;
    Real* o = out + ch * hw_;
    const Real* s = skip ? skip + ch * hw_ : nullptr;
    for (size_t i = 0; i < hw_; ++i) {
      Real v = g * (p[i] - mean) * istd + b;
      if (s) v += s[i];
      o[i] = relu ? std::max(Real(0), v) : v;
    }
  }
}

template <typename Real>
ActionDistribution PolicyNetwork<Real>::forward(std::span<const float> input_hwc) const {
  const int c = cfg_.channels;
  const auto x = to_chw(input_hwc);
  std::vector<Real> conv(size_t(c) * hw_, Real(0));
  std::vector<Real> act(size_t(c) * hw_);
  conv3x3_fwd(x.data(), cfg_.m, params_.data() + stem_w_, conv.data(), c, cfg_.k_fov);
  bn_eval(conv.data(), 0, stem_gamma_, act.data(), nullptr, true);

  std::vector<Real> mid(size_t(c) * hw_);
  for (int r = 0; r < cfg_.blocks; ++r) {
    const auto& b = block_off_[r];
    const size_t stat = size_t(2 * c) * (1 + 2 * r);
    std::fill(conv.begin(), conv.end(), Real(0));
    conv3x3_fwd(act.data(), c, params_.data() + b.conv1, conv.data(), c, cfg_.k_fov);
    bn_eval(conv.data(), stat, b.gamma1, mid.data(), nullptr, true);
    std::fill(conv.begin(), conv.end(), Real(0));
    conv3x3_fwd(mid.data(), c, params_.data() + b.conv2, conv.data(), c, cfg_.k_fov);
    bn_eval(conv.data(), stat + size_t(2 * c), b.gamma2, act.data(), act.data(), true);
  }

  std::array<double, kActionCount> logits{};
  for (int a = 0; a < kActionCount; ++a) {
    Real sum = params_[head_b_ + a];
    for (int ch = 0; ch < c; ++ch) {
      const Real* p = act.data() + size_t(ch) * hw_;
      Real pool = 0;
      for (size_t i = 0; i < hw_; ++i) pool += p[i];
      sum += params_[head_w_ + size_t(a) * c + ch] * (pool / Real(hw_));
    }
    logits[a] = double(sum);
  }
  return neural::softmax(logits);
}

template <typename Real>
typename PolicyNetwork<Real>::ForwardPass PolicyNetwork<Real>::forward_pass(
    std::span<const float> input_hwc) const {
  const int c = cfg_.channels;
  ForwardPass pass;
  pass.input = to_chw(input_hwc);
  pass.stem_conv.assign(size_t(c) * hw_, Real(0));
  conv3x3_fwd(pass.input.data(), cfg_.m, params_.data() + stem_w_, pass.stem_conv.data(),
              c, cfg_.k_fov);
  pass.stem_mean.resize(c);
  pass.stem_istd.resize(c);
  batch_stats(pass.stem_conv.data(), pass.stem_mean.data(), pass.stem_istd.data());
  pass.stem_act.resize(size_t(c) * hw_);
  bn_relu(pass.stem_conv.data(), pass.stem_mean.data(), pass.stem_istd.data(),
          stem_gamma_, pass.stem_act.data(), nullptr, true);

  const std::vector<Real>* prev = &pass.stem_act;
  pass.blocks.resize(cfg_.blocks);
  for (int r = 0; r < cfg_.blocks; ++r) {
    auto& bp = pass.blocks[r];
    const auto& b = block_off_[r];
    bp.conv1.assign(size_t(c) * hw_, Real(0));
    conv3x3_fwd(prev->data(), c, params_.data() + b.conv1, bp.conv1.data(), c,
                cfg_.k_fov);
    bp.mean1.resize(c);
    bp.istd1.resize(c);
    batch_stats(bp.conv1.data(), bp.mean1.data(), bp.istd1.data());
    bp.act1.resize(size_t(c) * hw_);
    bn_relu(bp.conv1.data(), bp.mean1.data(), bp.istd1.data(), b.gamma1, bp.act1.data(),
            nullptr, true);

    bp.conv2.assign(size_t(c) * hw_, Real(0));
    conv3x3_fwd(bp.act1.data(), c, params_.data() + b.conv2, bp.conv2.data(), c,
                cfg_.k_fov);
    bp.mean2.resize(c);
    bp.istd2.resize(c);
    batch_stats(bp.conv2.data(), bp.mean2.data(), bp.istd2.data());
    bp.out.resize(size_t(c) * hw_);
    bn_relu(bp.conv2.data(), bp.mean2.data(), bp.istd2.data(), b.gamma2, bp.out.data(),
            prev->data(), true);
    prev = &bp.out;
  }

  pass.pooled.resize(c);
  for (int ch = 0; ch < c; ++ch) {
    const Real* p = prev->data() + size_t(ch) * hw_;
    Real sum = 0;
    for (size_t i = 0; i < hw_; ++i) sum += p[i];
    pass.pooled[ch] = sum / Real(hw_);
  }
  std::array<double, kActionCount> logits{};
  for (int a = 0; a < kActionCount; ++a) {
    Real sum = params_[head_b_ + a];
    for (int ch = 0; ch < c; ++ch) sum += params_[head_w_ + size_t(a) * c + ch] * pass.pooled[ch];
    logits[a] = double(sum);
  }
  pass.dist = neural::softmax(logits);
  return pass;
}

template <typename Real>
void PolicyNetwork<Real>::absorb_stats(const ForwardPass& pass) {
  const int c = cfg_.channels;
  auto fold = [&](size_t stat_off, const std::vector<Real>& mean,
                  const std::vector<Real>& istd) {
    for (int ch = 0; ch < c; ++ch) {
      const Real var = Real(1) / (istd[ch] * istd[ch]) - Real(kBnEps);
      running_[stat_off + ch] = Real(kRunningMomentum) * running_[stat_off + ch] +
                                Real(1 - kRunningMomentum) * mean[ch];
      running_[stat_off + c + ch] = Real(kRunningMomentum) * running_[stat_off + c + ch] +
                                    Real(1 - kRunningMomentum) * var;
    }
  };
  fold(0, pass.stem_mean, pass.stem_istd);
  for (int r = 0; r < cfg_.blocks; ++r) {
    const size_t stat = size_t(2 * c) * (1 + 2 * r);
    fold(stat, pass.blocks[r].mean1, pass.blocks[r].istd1);
    fold(stat + size_t(2 * c), pass.blocks[r].mean2, pass.blocks[r].istd2);
  }
}

template <typename Real>
void PolicyNetwork<Real>::accumulate_from_pass(const ForwardPass& pass, int action,
                                               Real scale,
                                               GradAccumulator<Real>& acc) const {
  require(action >= 0 && action < kActionCount, "accumulate: action out of range");
  require(acc.grad.size() == params_.size(), "accumulate: accumulator size mismatch");
  const int c = cfg_.channels;
  Real* g = acc.grad.data();

  std::array<Real, kActionCount> dlogits;
  for (int a = 0; a < kActionCount; ++a)
    dlogits[a] = scale * (Real(a == action) - Real(pass.dist.probs[a]));

  std::vector<Real> dpool(c, Real(0));
  for (int a = 0; a < kActionCount; ++a) {
    g[head_b_ + a] += dlogits[a];
    for (int ch = 0; ch < c; ++ch) {
      g[head_w_ + size_t(a) * c + ch] += dlogits[a] * pass.pooled[ch];
      dpool[ch] += params_[head_w_ + size_t(a) * c + ch] * dlogits[a];
    }
  }

  std::vector<Real> d(size_t(c) * hw_);
  for (int ch = 0; ch < c; ++ch) {
    const Real v = dpool[ch] / Real(hw_);
    Real* row = d.data() + size_t(ch) * hw_;
    for (size_t i = 0; i < hw_; ++i) row[i] = v;
  }

  std::vector<Real> ds(size_t(c) * hw_), dmid(size_t(c) * hw_), dconv(size_t(c) * hw_);
  for (int r = cfg_.blocks - 1; r >= 0; --r) {
    const auto& bp = pass.blocks[r];
    const auto& b = block_off_[r];
    const std::vector<Real>& in = r == 0 ? pass.stem_act : pass.blocks[r - 1].out;

    for (size_t i = 0; i < d.size(); ++i) ds[i] = bp.out[i] > Real(0) ? d[i] : Real(0);
    bn_backward(bp.conv2.data(), ds.data(), bp.mean2.data(), bp.istd2.data(),
                params_.data() + b.gamma2, dconv.data(), g + b.gamma2, g + b.beta2, c,
                hw_);
    std::fill(dmid.begin(), dmid.end(), Real(0));
    conv3x3_bwd_input(dmid.data(), c, params_.data() + b.conv2, dconv.data(), c,
                      cfg_.k_fov);
    conv3x3_bwd_weight(bp.act1.data(), c, g + b.conv2, dconv.data(), c, cfg_.k_fov);

    for (size_t i = 0; i < dmid.size(); ++i)
      dmid[i] = bp.act1[i] > Real(0) ? dmid[i] : Real(0);
    bn_backward(bp.conv1.data(), dmid.data(), bp.mean1.data(), bp.istd1.data(),
                params_.data() + b.gamma1, dconv.data(), g + b.gamma1, g + b.beta1, c,
                hw_);
    std::fill(d.begin(), d.end(), Real(0));
    conv3x3_bwd_input(d.data(), c, params_.data() + b.conv1, dconv.data(), c, cfg_.k_fov);
    conv3x3_bwd_weight(in.data(), c, g + b.conv1, dconv.data(), c, cfg_.k_fov);
    for (size_t i = 0; i < d.size(); ++i) d[i] += ds[i];  // skip connection
  }

  for (size_t i = 0; i < d.size(); ++i)
    d[i] = pass.stem_act[i] > Real(0) ? d[i] : Real(0);
  bn_backward(pass.stem_conv.data(), d.data(), pass.stem_mean.data(),
              pass.stem_istd.data(), params_.data() + stem_gamma_, dconv.data(),
              g + stem_gamma_, g + stem_beta_, c, hw_);
  conv3x3_bwd_weight(pass.input.data(), cfg_.m, g + stem_w_, dconv.data(), c,
                     cfg_.k_fov);

  if (cfg_.l2 > 0) {  // weight decay on conv and head weights only
    const Real l2 = Real(cfg_.l2);
    auto decay = [&](size_t at, size_t n) {
      for (size_t i = 0; i < n; ++i) g[at + i] -= l2 * params_[at + i];
    };
    decay(stem_w_, size_t(c) * cfg_.m * 9);
    for (const auto& b : block_off_) {
      decay(b.conv1, size_t(c) * c * 9);
      decay(b.conv2, size_t(c) * c * 9);
    }
    decay(head_w_, size_t(kActionCount) * c);
  }
  ++acc.count;
}

template <typename Real>
double SgdMomentum<Real>::current_lr() const {
  if (cfg_.total_steps <= 0) return cfg_.lr;
  const double t = double(std::min(step_, cfg_.total_steps)) / double(cfg_.total_steps);
  return cfg_.lr_min + 0.5 * (cfg_.lr - cfg_.lr_min) * (1.0 + std::cos(t * 3.14159265358979323846));
}

template <typename Real>
void SgdMomentum<Real>::apply(PolicyNetwork<Real>& net, GradAccumulator<Real>& acc) {
  require(acc.count > 0, "sgd: empty accumulator");
  require(acc.grad.size() == net.param_count(), "sgd: accumulator size mismatch");
  const Real lr = Real(current_lr());
  const Real mu = Real(cfg_.momentum);
  const Real inv = Real(1) / Real(acc.count);
  auto& p = net.params();
  for (size_t i = 0; i < p.size(); ++i) {
    velocity_[i] = mu * velocity_[i] + acc.grad[i] * inv;
    p[i] += lr * velocity_[i];
  }
  ++step_;
  acc.reset();
}

// --- checkpoints ------------------------------------------------------------------

template <typename Real>
void save_checkpoint(const std::filesystem::path& path, const PolicyNetwork<Real>& net) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  require(bool(out), "cannot open for write: " + path.string());
  out.write(kMagic, sizeof(kMagic));
  const std::int32_t cfg[4] = {net.config().k_fov, net.config().m, net.config().channels,
                               net.config().blocks};
  out.write(reinterpret_cast<const char*>(cfg), sizeof(cfg));
  auto write_f32 = [&out](const std::vector<Real>& v) {
    std::vector<float> f(v.size());
    for (size_t i = 0; i < v.size(); ++i) f[i] = float(v[i]);
    out.write(reinterpret_cast<const char*>(f.data()),
              std::streamsize(f.size() * sizeof(float)));
  };
  write_f32(net.params());
  write_f32(net.running_stats());
  require(bool(out), "checkpoint write failed: " + path.string());
}

template <typename Real>
PolicyNetwork<Real> load_checkpoint(const std::filesystem::path& path, double l2) {
  std::ifstream in(path, std::ios::binary);
  require(bool(in), "cannot open: " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  require(bool(in) && std::memcmp(magic, kMagic, sizeof(magic)) == 0,
          "bad checkpoint magic: " + path.string());
  std::int32_t raw[4];
  in.read(reinterpret_cast<char*>(raw), sizeof(raw));
  require(bool(in), "truncated checkpoint: " + path.string());
  NetConfig cfg;
  cfg.k_fov = raw[0];
  cfg.m = raw[1];
  cfg.channels = raw[2];
  cfg.blocks = raw[3];
  cfg.l2 = l2;
  cfg.validate();

  PolicyNetwork<Real> net(cfg, 0);
  auto read_f32 = [&in, &path](std::vector<Real>& v) {
    std::vector<float> f(v.size());
    in.read(reinterpret_cast<char*>(f.data()), std::streamsize(f.size() * sizeof(float)));
    require(bool(in), "truncated checkpoint: " + path.string());
    for (size_t i = 0; i < v.size(); ++i) v[i] = Real(f[i]);
  };
  read_f32(net.params());
  read_f32(net.running_stats());
  in.peek();
  require(in.eof(), "trailing bytes in checkpoint: " + path.string());
  return net;
}

template class PolicyNetwork<float>;
template class PolicyNetwork<double>;
template class SgdMomentum<float>;
template class SgdMomentum<double>;
template void save_checkpoint<float>(const std::filesystem::path&,
                                     const PolicyNetwork<float>&);
template void save_checkpoint<double>(const std::filesystem::path&,
                                      const PolicyNetwork<double>&);
template PolicyNetwork<float> load_checkpoint<float>(const std::filesystem::path&,
                                                     double);
template PolicyNetwork<double> load_checkpoint<double>(const std::filesystem::path&,
                                                       double);

}  // namespace cco::neural
