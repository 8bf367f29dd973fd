#ifndef EDCNET_TRAINER_HPP
#define EDCNET_TRAINER_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "edcnet/loss.hpp"
#include "edcnet/nn.hpp"
#include "edcnet/roomgen.hpp"

namespace edcnet {

struct TrainConfig {
  int epochs = 200;
  int batch_size = 32;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  int patience = 20;  // early stop after this many epochs without val improvement
  std::string checkpoint_dir;
  LossConfig loss;

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

struct TrainLog {
  int first_epoch = 1;  // > 1 when resumed
  std::vector<double> train_loss, val_loss, seconds;
  int best_epoch = -1;  // 1-based, absolute
  double best_val = 0;

  nlohmann::json to_json() const;
};

template <typename T>
struct AdamState {
  std::vector<T> m, v;
  std::int64_t t = 0;

  explicit AdamState(std::size_t n) : m(n, T(0)), v(n, T(0)) {}
};

// One bias-corrected Adam update. Throws DomainError on non-finite gradients.
template <typename T>
void adam_step(std::span<T> params, std::span<const T> grads, AdamState<T>& st,
               double lr, double beta1, double beta2, double eps) {
  if (params.size() != grads.size() || st.m.size() != params.size())
    throw ShapeError("adam_step: parameter/gradient/state sizes disagree");
  for (T g : grads)
    if (!std::isfinite(g)) throw DomainError("adam_step: non-finite gradient");
  ++st.t;
  T bc1 = T(1) - static_cast<T>(std::pow(beta1, static_cast<double>(st.t)));
  T bc2 = T(1) - static_cast<T>(std::pow(beta2, static_cast<double>(st.t)));
  kern::adam_update(params.data(), st.m.data(), st.v.data(), grads.data(),
                    params.size(), static_cast<T>(lr), static_cast<T>(beta1),
                    static_cast<T>(beta2), static_cast<T>(eps), bc1, bc2);
}

struct TrainResult {
  Checkpoint best;   // best-validation parameters
  Checkpoint last;   // final parameters + optimizer state, resume point
  TrainLog log;
};

// Mini-batch training with deterministic per-epoch shuffles. Writes
// best.ckpt, last.ckpt and log.json into cfg.checkpoint_dir (when set).
// resume, when given, must come from a last.ckpt of the same run.
TrainResult train(const Dataset& ds, const ModelConfig& model_cfg,
                  const TrainConfig& cfg, const Checkpoint* resume = nullptr);

}  // namespace edcnet

#endif
