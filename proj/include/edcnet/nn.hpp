#ifndef EDCNET_NN_HPP
#define EDCNET_NN_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "edcnet/error.hpp"
#include "edcnet/io.hpp"
#include "edcnet/kernels.hpp"
#include "edcnet/rng.hpp"

namespace edcnet {

template <typename T>
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<T> data;
  std::vector<T> grad;  // same size as data when gradients are tracked

  std::size_t size() const { return data.size(); }
  static Tensor zeros(std::vector<std::size_t> s, bool with_grad = false) {
    Tensor t;
    std::size_t n = 1;
    for (auto d : s) n *= d;
    t.shape = std::move(s);
    t.data.assign(n, T(0));
    if (with_grad) t.grad.assign(n, T(0));
    return t;
  }
};

// Encoder MLP into a (channels, length) latent, decoded by three 1D convs
// each followed by linear-interpolation upsampling, closed by a Sigmoid.
struct ModelConfig {
  int input_dim = 16;
  int num_bands = 24;
  int edc_length = 1000;
  std::vector<int> encoder_hidden = {256, 512};
  int latent_channels = 64;
  int latent_length = 125;
  std::vector<int> conv_channels = {64, 32, 24};
  int kernel_size = 5;
  std::vector<int> upsample_lengths = {250, 500, 1000};
  std::uint64_t init_seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);

  // Named presets; edc_length of the dataset must match.
  static ModelConfig desk();
  static ModelConfig tiny();       // small enough to memorize a handful of rooms
  static ModelConfig gradcheck();  // latent 8, channels 4, L=20
  static ModelConfig paper9m();    // full-scale parameter count (~9e6)
  static ModelConfig preset(const std::string& name);
};

namespace layers {

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ShapeError(msg);
}

// y = W x + b, W row-major (out, in)
template <typename T>
void dense_forward(std::span<const T> x, std::span<const T> w, std::span<const T> b,
                   std::span<T> y, int in, int out) {
  require(static_cast<int>(x.size()) == in && static_cast<int>(y.size()) == out &&
              w.size() == static_cast<std::size_t>(in) * out &&
              static_cast<int>(b.size()) == out,
          "dense_forward: got x[" + std::to_string(x.size()) + "] W[" +
              std::to_string(w.size()) + "] for (" + std::to_string(out) + "x" +
              std::to_string(in) + ")");
  for (int i = 0; i < out; ++i)
    y[i] = kern::dot(w.data() + static_cast<std::size_t>(i) * in, x.data(),
                     static_cast<std::size_t>(in)) + b[i];
}

// Accumulates into gw/gb, overwrites gx.
template <typename T>
void dense_backward(std::span<const T> gy, std::span<const T> x, std::span<const T> w,
                    std::span<T> gx, std::span<T> gw, std::span<T> gb, int in, int out) {
  require(static_cast<int>(gy.size()) == out && static_cast<int>(gx.size()) == in &&
              gw.size() == w.size() && static_cast<int>(gb.size()) == out,
          "dense_backward: gradient shapes disagree with (" + std::to_string(out) +
              "x" + std::to_string(in) + ")");
  std::fill(gx.begin(), gx.end(), T(0));
  for (int i = 0; i < out; ++i) {
    T g = gy[i];
    gb[i] += g;
    kern::axpy(g, x.data(), gw.data() + static_cast<std::size_t>(i) * in,
               static_cast<std::size_t>(in));
    kern::axpy(g, w.data() + static_cast<std::size_t>(i) * in, gx.data(),
               static_cast<std::size_t>(in));
  }
}

// Cross-correlation with stride 1 and zero padding (k-1)/2; kernel row-major
// (cout, cin, k). Length is preserved.
template <typename T>
void conv1d_forward(std::span<const T> x, std::span<const T> kern_w, std::span<const T> b,
                    std::span<T> y, int cin, int cout, int k, int t) {
  require(k % 2 == 1, "conv1d: kernel size must be odd");
  require(x.size() == static_cast<std::size_t>(cin) * t &&
              y.size() == static_cast<std::size_t>(cout) * t &&
              kern_w.size() == static_cast<std::size_t>(cout) * cin * k &&
              static_cast<int>(b.size()) == cout,
          "conv1d_forward: got x[" + std::to_string(x.size()) + "] K[" +
              std::to_string(kern_w.size()) + "] for (" + std::to_string(cout) + "," +
              std::to_string(cin) + "," + std::to_string(k) + ") at length " +
              std::to_string(t));
  int pad = (k - 1) / 2;
  for (int co = 0; co < cout; ++co) {
    T* yr = y.data() + static_cast<std::size_t>(co) * t;
    std::fill(yr, yr + t, b[co]);
    for (int ci = 0; ci < cin; ++ci) {
      const T* xr = x.data() + static_cast<std::size_t>(ci) * t;
      const T* kr = kern_w.data() + (static_cast<std::size_t>(co) * cin + ci) * k;
      for (int kk = 0; kk < k; ++kk) {
        int start = std::max(0, pad - kk);
        int end = std::min(t, t + pad - kk);
        if (end <= start) continue;
        kern::axpy(kr[kk], xr + start + kk - pad, yr + start,
                   static_cast<std::size_t>(end - start));
      }
    }
  }
}

// Accumulates into gk/gb, overwrites gx.
template <typename T>
void conv1d_backward(std::span<const T> gy, std::span<const T> x, std::span<const T> kern_w,
                     std::span<T> gx, std::span<T> gk, std::span<T> gb, int cin, int cout,
                     int k, int t) {
  require(gy.size() == static_cast<std::size_t>(cout) * t && gx.size() == x.size() &&
              gk.size() == kern_w.size() && static_cast<int>(gb.size()) == cout,
          "conv1d_backward: gradient shapes disagree");
  int pad = (k - 1) / 2;
  std::fill(gx.begin(), gx.end(), T(0));
  for (int co = 0; co < cout; ++co) {
    const T* gyr = gy.data() + static_cast<std::size_t>(co) * t;
    gb[co] += kern::sum(gyr, static_cast<std::size_t>(t));
    for (int ci = 0; ci < cin; ++ci) {
      const T* xr = x.data() + static_cast<std::size_t>(ci) * t;
      T* gxr = gx.data() + static_cast<std::size_t>(ci) * t;
      const T* kr = kern_w.data() + (static_cast<std::size_t>(co) * cin + ci) * k;
      T* gkr = gk.data() + (static_cast<std::size_t>(co) * cin + ci) * k;
      for (int kk = 0; kk < k; ++kk) {
        int start = std::max(0, pad - kk);
        int end = std::min(t, t + pad - kk);
        if (end <= start) continue;
        std::size_t len = static_cast<std::size_t>(end - start);
        gkr[kk] += kern::dot(gyr + start, xr + start + kk - pad, len);
        kern::axpy(kr[kk], gyr + start, gxr + start + kk - pad, len);
      }
    }
  }
}

// Align-corners linear interpolation plan shared by forward and backward so
// both sides use bit-identical weights.
template <typename T>
struct InterpPlan {
  int t_in = 0, t_out = 0;
  std::vector<int> i0;
  std::vector<T> w1;  // weight of sample i0+1; sample i0 gets 1-w1

  InterpPlan() = default;
  InterpPlan(int tin, int tout) : t_in(tin), t_out(tout) {
    if (tout < 2) throw ArgumentError("interp_upsample: output length must be >= 2");
    if (tin < 2) throw ArgumentError("interp_upsample: input length must be >= 2");
    i0.resize(tout);
    w1.resize(tout);
    for (int j = 0; j < tout; ++j) {
      double pos = static_cast<double>(j) * (tin - 1) / (tout - 1);
      int lo = static_cast<int>(pos);
      if (lo >= tin - 1) {
        lo = tin - 2;
        pos = tin - 1;
      }
      i0[j] = lo;
      w1[j] = static_cast<T>(pos - lo);
    }
  }

  void forward(std::span<const T> x, std::span<T> y, int channels) const {
    for (int c = 0; c < channels; ++c) {
      const T* xr = x.data() + static_cast<std::size_t>(c) * t_in;
      T* yr = y.data() + static_cast<std::size_t>(c) * t_out;
      for (int j = 0; j < t_out; ++j)
        yr[j] = (T(1) - w1[j]) * xr[i0[j]] + w1[j] * xr[i0[j] + 1];
    }
  }

  // Transpose of the linear map; overwrites gx.
  void backward(std::span<const T> gy, std::span<T> gx, int channels) const {
    std::fill(gx.begin(), gx.end(), T(0));
    for (int c = 0; c < channels; ++c) {
      const T* gyr = gy.data() + static_cast<std::size_t>(c) * t_out;
      T* gxr = gx.data() + static_cast<std::size_t>(c) * t_in;
      for (int j = 0; j < t_out; ++j) {
        gxr[i0[j]] += (T(1) - w1[j]) * gyr[j];
        gxr[i0[j] + 1] += w1[j] * gyr[j];
      }
    }
  }
};

template <typename T>
void interp_upsample(std::span<const T> x, std::span<T> y, int channels, int t_in,
                     int t_out) {
  InterpPlan<T>(t_in, t_out).forward(x, y, channels);
}

// Output clamped into the open interval (0,1) so downstream logs stay finite.
template <typename T>
void sigmoid_forward(std::span<const T> x, std::span<T> y) {
  constexpr T lo = std::numeric_limits<T>::min();
  const T hi = T(1) - std::numeric_limits<T>::epsilon() / 2;
  for (std::size_t i = 0; i < x.size(); ++i) {
    T v = T(1) / (T(1) + std::exp(-x[i]));
    y[i] = v < lo ? lo : (v > hi ? hi : v);
  }
}

template <typename T>
void sigmoid_backward(std::span<const T> gy, std::span<const T> y, std::span<T> gx) {
  for (std::size_t i = 0; i < gy.size(); ++i) gx[i] = gy[i] * y[i] * (T(1) - y[i]);
}

template <typename T>
void relu_forward(std::span<const T> x, std::span<T> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

template <typename T>
void relu_backward(std::span<const T> gy, std::span<const T> pre, std::span<T> gx) {
  for (std::size_t i = 0; i < gy.size(); ++i) gx[i] = pre[i] > T(0) ? gy[i] : T(0);
}

}  // namespace layers

// Serialized model + optional optimizer state. Parameter blob order follows
// declaration order: encoder dense W,b pairs, then conv K,b pairs.
struct Checkpoint {
  int format_version = 1;
  ModelConfig config;
  std::uint64_t seed = 0;
  std::vector<float> params;
  bool has_optimizer = false;
  std::vector<float> adam_m, adam_v;
  std::int64_t adam_t = 0;
  int epochs_completed = 0;
  double best_val_loss = std::numeric_limits<double>::infinity();
  int best_epoch = -1;
  // Feature scaling carried along so `predict` works from a checkpoint alone.
  bool has_scaler = false;
  std::vector<double> scaler_min, scaler_max;
  int sample_rate = 0;
};

constexpr char kCheckpointMagic[9] = "EDCNETCK";

void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

template <typename T>
class Model {
 public:
  explicit Model(const ModelConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    build();
    init_params();
  }

  static Model from_checkpoint(const Checkpoint& ck) {
    Model m(ck.config);
    if (ck.params.size() != m.params_.size())
      throw ShapeError("checkpoint parameter count " + std::to_string(ck.params.size()) +
                       " does not match config (" + std::to_string(m.params_.size()) + ")");
    for (std::size_t i = 0; i < ck.params.size(); ++i)
      m.params_[i] = static_cast<T>(ck.params[i]);
    return m;
  }

  Checkpoint to_checkpoint() const {
    Checkpoint ck;
    ck.config = cfg_;
    ck.seed = cfg_.init_seed;
    ck.params.resize(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i)
      ck.params[i] = static_cast<float>(params_[i]);
    return ck;
  }

  const ModelConfig& config() const { return cfg_; }
  std::size_t count_params() const { return params_.size(); }
  std::span<T> params() { return params_; }
  std::span<const T> params() const { return params_; }
  std::span<T> grads() { return grads_; }

  void zero_grad() { std::fill(grads_.begin(), grads_.end(), T(0)); }

  // Returns the (num_bands x edc_length) prediction; the view stays valid
  // until the next forward call.
  std::span<const T> forward(std::span<const T> features) {
    if (static_cast<int>(features.size()) != cfg_.input_dim)
      throw ShapeError("model_forward: expected " + std::to_string(cfg_.input_dim) +
                       " features, got " + std::to_string(features.size()));
    std::copy(features.begin(), features.end(), enc_a_[0].begin());
    int n_dense = static_cast<int>(dense_.size());
    for (int i = 0; i < n_dense; ++i) {
      const auto& d = dense_[i];
      layers::dense_forward<T>(enc_a_[i], pspan(d.w_off, d.w_len), pspan(d.b_off, d.out),
                               enc_z_[i], d.in, d.out);
      check_finite(enc_z_[i], "dense" + std::to_string(i));
      if (i < n_dense - 1)
        layers::relu_forward<T>(enc_z_[i], enc_a_[i + 1]);
      else
        enc_a_[i + 1] = enc_z_[i];  // linear latent, reshaped to (C0, L0)
    }
    int n_conv = static_cast<int>(conv_.size());
    for (int s = 0; s < n_conv; ++s) {
      const auto& c = conv_[s];
      std::span<const T> in = (s == 0) ? std::span<const T>(enc_a_[n_dense])
                                       : std::span<const T>(stage_u_[s - 1]);
      layers::conv1d_forward<T>(in, pspan(c.w_off, c.w_len), pspan(c.b_off, c.cout),
                                stage_z_[s], c.cin, c.cout, c.k, c.t);
      check_finite(stage_z_[s], "conv" + std::to_string(s));
      if (s < n_conv - 1)
        layers::relu_forward<T>(stage_z_[s], stage_r_[s]);
      else
        stage_r_[s] = stage_z_[s];
      interp_[s].forward(stage_r_[s], stage_u_[s], c.cout);
    }
    layers::sigmoid_forward<T>(stage_u_[n_conv - 1], output_);
    check_finite(output_, "sigmoid");
    return output_;
  }

  Tensor<T> predict(std::span<const T> features) {
    auto y = forward(features);
    Tensor<T> t = Tensor<T>::zeros({static_cast<std::size_t>(cfg_.num_bands),
                                    static_cast<std::size_t>(cfg_.edc_length)});
    std::copy(y.begin(), y.end(), t.data.begin());
    return t;
  }

  // Accumulates parameter gradients for the most recent forward pass.
  void backward(std::span<const T> grad_output) {
    if (grad_output.size() != output_.size())
      throw ShapeError("model_backward: gradient size " + std::to_string(grad_output.size()) +
                       " does not match output " + std::to_string(output_.size()));
    int n_dense = static_cast<int>(dense_.size());
    int n_conv = static_cast<int>(conv_.size());
    std::vector<T>& g_out = scratch_;
    g_out.resize(output_.size());
    layers::sigmoid_backward<T>(grad_output, output_, g_out);
    std::vector<T> g_cur = g_out;
    for (int s = n_conv - 1; s >= 0; --s) {
      const auto& c = conv_[s];
      std::vector<T> g_r(stage_r_[s].size());
      interp_[s].backward(g_cur, g_r, c.cout);
      if (s < n_conv - 1) layers::relu_backward<T>(g_r, std::span<const T>(stage_z_[s]), g_r);
      std::span<const T> in = (s == 0) ? std::span<const T>(enc_a_[n_dense])
                                       : std::span<const T>(stage_u_[s - 1]);
      std::vector<T> g_in(in.size());
      layers::conv1d_backward<T>(g_r, in, pspan(c.w_off, c.w_len), g_in,
                                 gspan(c.w_off, c.w_len), gspan(c.b_off, c.cout), c.cin,
                                 c.cout, c.k, c.t);
      g_cur = std::move(g_in);
    }
    for (int i = n_dense - 1; i >= 0; --i) {
      const auto& d = dense_[i];
      if (i < n_dense - 1)
        layers::relu_backward<T>(g_cur, std::span<const T>(enc_z_[i]), g_cur);
      std::vector<T> g_in(static_cast<std::size_t>(d.in));
      layers::dense_backward<T>(g_cur, enc_a_[i], pspan(d.w_off, d.w_len), g_in,
                                gspan(d.w_off, d.w_len), gspan(d.b_off, d.out), d.in,
                                d.out);
      g_cur = std::move(g_in);
    }
  }

 private:
  struct DenseSpec {
    int in, out;
    std::size_t w_off, w_len, b_off;
  };
  struct ConvSpec {
    int cin, cout, k, t;  // t: input/output length of this conv
    std::size_t w_off, w_len, b_off;
  };

  std::span<const T> pspan(std::size_t off, std::size_t len) const {
    return {params_.data() + off, len};
  }
  std::span<T> gspan(std::size_t off, std::size_t len) {
    return {grads_.data() + off, len};
  }

  void check_finite(const std::vector<T>& v, const std::string& layer) const {
    for (T x : v)
      if (!std::isfinite(x))
        throw DomainError("non-finite activation in layer " + layer);
  }

  void build() {
    std::size_t off = 0;
    std::vector<int> widths;
    widths.push_back(cfg_.input_dim);
    for (int h : cfg_.encoder_hidden) widths.push_back(h);
    widths.push_back(cfg_.latent_channels * cfg_.latent_length);
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
      DenseSpec d;
      d.in = widths[i];
      d.out = widths[i + 1];
      d.w_off = off;
      d.w_len = static_cast<std::size_t>(d.in) * d.out;
      off += d.w_len;
      d.b_off = off;
      off += static_cast<std::size_t>(d.out);
      dense_.push_back(d);
    }
    int cin = cfg_.latent_channels;
    int t = cfg_.latent_length;
    for (std::size_t s = 0; s < cfg_.conv_channels.size(); ++s) {
      ConvSpec c;
      c.cin = cin;
      c.cout = cfg_.conv_channels[s];
      c.k = cfg_.kernel_size;
      c.t = t;
      c.w_off = off;
      c.w_len = static_cast<std::size_t>(c.cout) * c.cin * c.k;
      off += c.w_len;
      c.b_off = off;
      off += static_cast<std::size_t>(c.cout);
      conv_.push_back(c);
      interp_.emplace_back(t, cfg_.upsample_lengths[s]);
      t = cfg_.upsample_lengths[s];
      cin = c.cout;
    }
    params_.assign(off, T(0));
    grads_.assign(off, T(0));

    enc_a_.resize(dense_.size() + 1);
    enc_z_.resize(dense_.size());
    for (std::size_t i = 0; i < dense_.size(); ++i) {
      enc_a_[i].assign(static_cast<std::size_t>(dense_[i].in), T(0));
      enc_z_[i].assign(static_cast<std::size_t>(dense_[i].out), T(0));
    }
    enc_a_[dense_.size()].assign(static_cast<std::size_t>(dense_.back().out), T(0));
    stage_z_.resize(conv_.size());
    stage_r_.resize(conv_.size());
    stage_u_.resize(conv_.size());
    for (std::size_t s = 0; s < conv_.size(); ++s) {
      std::size_t zn = static_cast<std::size_t>(conv_[s].cout) * conv_[s].t;
      stage_z_[s].assign(zn, T(0));
      stage_r_[s].assign(zn, T(0));
      stage_u_[s].assign(static_cast<std::size_t>(conv_[s].cout) * cfg_.upsample_lengths[s],
                         T(0));
    }
    output_.assign(static_cast<std::size_t>(cfg_.num_bands) * cfg_.edc_length, T(0));
  }

  void init_params() {
    Rng rng(cfg_.init_seed);
    auto fill_uniform = [&](std::size_t off, std::size_t len, double limit) {
      for (std::size_t i = 0; i < len; ++i)
        params_[off + i] = static_cast<T>(rng.uniform(-limit, limit));
    };
    for (const auto& d : dense_) {
      double limit = std::sqrt(6.0 / (d.in + d.out));
      fill_uniform(d.w_off, d.w_len, limit);  // biases stay zero
    }
    for (const auto& c : conv_) {
      double limit = std::sqrt(6.0 / (static_cast<double>(c.cin) * c.k +
                                      static_cast<double>(c.cout) * c.k));
      fill_uniform(c.w_off, c.w_len, limit);
    }
  }

  ModelConfig cfg_;
  std::vector<T> params_, grads_;
  std::vector<DenseSpec> dense_;
  std::vector<ConvSpec> conv_;
  std::vector<layers::InterpPlan<T>> interp_;
  std::vector<std::vector<T>> enc_a_, enc_z_, stage_z_, stage_r_, stage_u_;
  std::vector<T> output_, scratch_;
};

}  // namespace edcnet

#endif
