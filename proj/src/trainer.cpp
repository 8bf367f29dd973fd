#include "edcnet/trainer.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>

namespace edcnet {

void TrainConfig::validate() const {
  if (epochs < 1 || batch_size < 1 || patience < 1)
    throw ArgumentError("train config: epochs, batch_size and patience must be positive");
  if (learning_rate <= 0 || adam_eps <= 0)
    throw ArgumentError("train config: learning rate and adam eps must be positive");
  if (beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1)
    throw ArgumentError("train config: betas must lie in [0, 1)");
}

nlohmann::json TrainConfig::to_json() const {
  return {{"epochs", epochs},
          {"batch_size", batch_size},
          {"learning_rate", learning_rate},
          {"beta1", beta1},
          {"beta2", beta2},
          {"adam_eps", adam_eps},
          {"seed", seed},
          {"patience", patience},
          {"loss", {{"alpha", loss.alpha}, {"stride_k", loss.stride_k}, {"epsilon", loss.epsilon}}}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.adam_eps = j.value("adam_eps", c.adam_eps);
  c.seed = j.value("seed", c.seed);
  c.patience = j.value("patience", c.patience);
  if (j.contains("loss")) {
    const auto& l = j.at("loss");
    c.loss.alpha = l.value("alpha", c.loss.alpha);
    c.loss.stride_k = l.value("stride_k", c.loss.stride_k);
    c.loss.epsilon = l.value("epsilon", c.loss.epsilon);
  }
  c.validate();
  return c;
}

nlohmann::json TrainLog::to_json() const {
  nlohmann::json epochs = nlohmann::json::array();
  for (std::size_t i = 0; i < train_loss.size(); ++i)
    epochs.push_back({{"epoch", first_epoch + static_cast<int>(i)},
                      {"train_loss", train_loss[i]},
                      {"val_loss", val_loss[i]},
                      {"seconds", seconds[i]}});
  return {{"epochs", epochs},
          {"first_epoch", first_epoch},
          {"best_epoch", best_epoch},
          {"best_val_loss", best_val}};
}

TrainResult train(const Dataset& ds, const ModelConfig& model_cfg,
                  const TrainConfig& cfg, const Checkpoint* resume) {
  cfg.validate();
  const auto& man = ds.manifest;
  if (man.train.empty()) throw ArgumentError("train: dataset has no training split");
  const int bands = kNumBands;
  const int L = man.edc_length;
  cfg.loss.validate(L);

  // An empty validation split falls back to tracking the training split, so
  // tiny overfit datasets remain trainable.
  const std::vector<std::size_t>& val_idx = man.val.empty() ? man.train : man.val;
  if (man.val.empty())
    std::cerr << "train: validation split empty, tracking train split instead\n";

  ModelConfig mc = model_cfg;
  if (mc.edc_length != L)
    throw ShapeError("train: model edc_length " + std::to_string(mc.edc_length) +
                     " does not match dataset " + std::to_string(L));
  int start_epoch = 0;
  if (!resume) mc.init_seed = derive_seed(cfg.seed, 1);

  Model<float> model = resume ? Model<float>::from_checkpoint(*resume) : Model<float>(mc);
  AdamState<float> adam(model.count_params());
  double best_val = std::numeric_limits<double>::infinity();
  int best_epoch = -1;
  std::vector<float> best_params(model.params().begin(), model.params().end());

  if (resume) {
    if (!resume->has_optimizer)
      throw ArgumentError("train: resume checkpoint lacks optimizer state");
    adam.m = resume->adam_m;
    adam.v = resume->adam_v;
    adam.t = resume->adam_t;
    start_epoch = resume->epochs_completed;
    best_val = resume->best_val_loss;
    best_epoch = resume->best_epoch;
  }

  const std::size_t n_out = static_cast<std::size_t>(bands) * L;
  std::vector<float> gbuf(n_out);
  TrainLog log;
  log.first_epoch = start_epoch + 1;

  std::size_t clamped_features = 0;
  auto sample_loss = [&](std::size_t room, bool with_grad) {
    auto feats = ds.scaled_features(room, &clamped_features);
    auto pred = model.forward(std::span<const float>(feats.data(), feats.size()));
    std::span<const float> tgt(ds.edc_block(room), n_out);
    auto r = composite_loss<float>(pred, tgt, bands, L, cfg.loss,
                                   with_grad ? std::span<float>(gbuf) : std::span<float>{});
    if (with_grad) model.backward(gbuf);
    return static_cast<double>(r.total);
  };

  for (int epoch = start_epoch + 1; epoch <= cfg.epochs; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();
    std::vector<std::size_t> order = man.train;
    shuffle(order, derive_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(epoch)));

    double epoch_loss = 0.0;
    for (std::size_t i = 0; i < order.size(); i += cfg.batch_size) {
      std::size_t batch_end = std::min(order.size(), i + cfg.batch_size);
      model.zero_grad();
      for (std::size_t s = i; s < batch_end; ++s)
        epoch_loss += sample_loss(order[s], true);
      float inv = 1.0f / static_cast<float>(batch_end - i);
      for (float& g : model.grads()) g *= inv;
      try {
        adam_step<float>(model.params(), model.grads(), adam, cfg.learning_rate,
                         cfg.beta1, cfg.beta2, cfg.adam_eps);
      } catch (const DomainError& e) {
        throw DomainError("epoch " + std::to_string(epoch) + " aborted: " + e.what());
      }
    }
    epoch_loss /= static_cast<double>(order.size());

    double vloss = 0.0;
    for (std::size_t room : val_idx) vloss += sample_loss(room, false);
    vloss /= static_cast<double>(val_idx.size());

    auto t1 = std::chrono::steady_clock::now();
    log.train_loss.push_back(epoch_loss);
    log.val_loss.push_back(vloss);
    log.seconds.push_back(std::chrono::duration<double>(t1 - t0).count());

    if (vloss < best_val) {
      best_val = vloss;
      best_epoch = epoch;
      std::copy(model.params().begin(), model.params().end(), best_params.begin());
    }
    if (epoch - best_epoch >= cfg.patience) break;
  }

  log.best_epoch = best_epoch;
  log.best_val = best_val;
  if (clamped_features > 0)
    std::cerr << "train: clamped " << clamped_features
              << " scaled feature values outside [-0.5, 1.5]\n";

  TrainResult res;
  res.last = model.to_checkpoint();
  res.last.has_scaler = true;
  res.last.scaler_min.assign(man.scaler.min.begin(), man.scaler.min.end());
  res.last.scaler_max.assign(man.scaler.max.begin(), man.scaler.max.end());
  res.last.sample_rate = man.sample_rate;
  res.last.has_optimizer = true;
  res.last.adam_m = adam.m;
  res.last.adam_v = adam.v;
  res.last.adam_t = adam.t;
  res.last.epochs_completed = start_epoch + static_cast<int>(log.train_loss.size());
  res.last.best_val_loss = best_val;
  res.last.best_epoch = best_epoch;

  res.best = res.last;
  res.best.has_optimizer = false;
  res.best.adam_m.clear();
  res.best.adam_v.clear();
  res.best.params = best_params;

  res.log = log;

  if (!cfg.checkpoint_dir.empty()) {
    std::filesystem::create_directories(cfg.checkpoint_dir);
    save_checkpoint(res.best, cfg.checkpoint_dir + "/best.ckpt");
    save_checkpoint(res.last, cfg.checkpoint_dir + "/last.ckpt");
    nlohmann::json lj = log.to_json();
    lj["stamp"] = stamp_to_json(make_stamp(cfg.to_json(), cfg.seed));
    write_json_file(cfg.checkpoint_dir + "/log.json", lj);
  }
  return res;
}

}  // namespace edcnet
