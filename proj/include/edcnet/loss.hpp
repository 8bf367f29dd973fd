#ifndef EDCNET_LOSS_HPP
#define EDCNET_LOSS_HPP

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "edcnet/error.hpp"
#include "edcnet/kernels.hpp"

namespace edcnet {

struct LossConfig {
  double alpha = 0.2;     // weight of the slope term
  int stride_k = 50;      // finite-difference stride in EDC samples
  double epsilon = 1e-10; // log floor; 0 is allowed for tests on positive curves

  void validate(int length) const {
    if (alpha < 0) throw ArgumentError("loss: alpha must be >= 0");
    if (stride_k < 1 || stride_k >= length)
      throw ArgumentError("loss: stride k must satisfy 1 <= k < L (k=" +
                          std::to_string(stride_k) + ", L=" + std::to_string(length) + ")");
    if (epsilon < 0) throw ArgumentError("loss: epsilon must be >= 0");
  }
};

// out[n] = y_db[n+k] - y_db[n]
template <typename T>
std::vector<T> slope(std::span<const T> y_db, int k) {
  if (k < 1 || y_db.size() <= static_cast<std::size_t>(k))
    throw ArgumentError("slope: need 1 <= k < length");
  std::vector<T> out(y_db.size() - static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = y_db[i + static_cast<std::size_t>(k)] - y_db[i];
  return out;
}

template <typename T>
struct LossResult {
  T total = 0, level = 0, slope = 0;
};

// MSE(pred_db, target_db) + alpha * MSE(delta pred_db, delta target_db),
// both in the 10*log10(y+eps) domain, means taken over all elements. When
// grad_pred is non-empty the exact gradient w.r.t. the linear-domain
// prediction is written there (including the chain through the log).
template <typename T>
LossResult<T> composite_loss(std::span<const T> pred, std::span<const T> target,
                             int bands, int length, const LossConfig& cfg,
                             std::span<T> grad_pred = {}) {
  std::size_t n = static_cast<std::size_t>(bands) * length;
  if (pred.size() != n || target.size() != n)
    throw ShapeError("composite_loss: got pred[" + std::to_string(pred.size()) +
                     "], target[" + std::to_string(target.size()) + "], expected " +
                     std::to_string(bands) + "x" + std::to_string(length));
  if (!grad_pred.empty() && grad_pred.size() != n)
    throw ShapeError("composite_loss: gradient buffer has wrong size");
  cfg.validate(length);

  const T eps = static_cast<T>(cfg.epsilon);
  const T alpha = static_cast<T>(cfg.alpha);
  const std::size_t k = static_cast<std::size_t>(cfg.stride_k);
  const std::size_t len = static_cast<std::size_t>(length);
  const T ln10_inv10 = static_cast<T>(10.0 / std::log(10.0));

  std::vector<T> p_db(len), e(len), g_db;
  if (!grad_pred.empty()) g_db.resize(len);
  T level_sum = 0, slope_sum = 0;
  const T level_norm = T(1) / static_cast<T>(n);
  const T slope_norm = T(1) / (static_cast<T>(bands) * static_cast<T>(len - k));

  for (int b = 0; b < bands; ++b) {
    const T* pr = pred.data() + static_cast<std::size_t>(b) * len;
    const T* tr = target.data() + static_cast<std::size_t>(b) * len;
    for (std::size_t i = 0; i < len; ++i) {
      if (!std::isfinite(pr[i]) || !std::isfinite(tr[i]))
        throw DomainError("composite_loss: non-finite input");
      p_db[i] = T(10) * std::log10(pr[i] + eps);
      e[i] = p_db[i] - T(10) * std::log10(tr[i] + eps);
    }
    level_sum += kern::dot(e.data(), e.data(), len);
    slope_sum += kern::sum_sq_lag_diff(e.data(), len, k);
    if (!grad_pred.empty()) {
      for (std::size_t i = 0; i < len; ++i) g_db[i] = T(2) * e[i] * level_norm;
      const T sc = T(2) * alpha * slope_norm;
      for (std::size_t i = 0; i + k < len; ++i) {
        T d = sc * (e[i + k] - e[i]);
        g_db[i + k] += d;
        g_db[i] -= d;
      }
      T* gp = grad_pred.data() + static_cast<std::size_t>(b) * len;
      for (std::size_t i = 0; i < len; ++i)
        gp[i] = g_db[i] * ln10_inv10 / (pr[i] + eps);
    }
  }

  LossResult<T> r;
  r.level = level_sum * level_norm;
  r.slope = slope_sum * slope_norm;
  r.total = r.level + alpha * r.slope;
  return r;
}

}  // namespace edcnet

#endif
