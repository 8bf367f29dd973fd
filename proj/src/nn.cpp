#include "edcnet/nn.hpp"

namespace edcnet {

void ModelConfig::validate() const {
  if (input_dim < 1 || num_bands < 1 || edc_length < 2)
    throw ArgumentError("model config: bad input/output dims");
  if (encoder_hidden.empty()) throw ArgumentError("model config: encoder needs hidden layers");
  for (int h : encoder_hidden)
    if (h < 1) throw ArgumentError("model config: hidden width must be positive");
  if (latent_channels < 1 || latent_length < 2)
    throw ArgumentError("model config: latent shape too small");
  if (conv_channels.empty() || conv_channels.back() != num_bands)
    throw ArgumentError("model config: last conv must emit num_bands channels");
  if (kernel_size < 1 || kernel_size % 2 == 0)
    throw ArgumentError("model config: kernel size must be odd");
  if (upsample_lengths.size() != conv_channels.size())
    throw ArgumentError("model config: one upsample length per conv layer");
  int t = latent_length;
  for (int u : upsample_lengths) {
    if (u < t) throw ArgumentError("model config: upsample lengths must not shrink");
    t = u;
  }
  if (upsample_lengths.back() != edc_length)
    throw ArgumentError("model config: final upsample length must equal edc_length");
}

nlohmann::json ModelConfig::to_json() const {
  return {{"input_dim", input_dim},
          {"num_bands", num_bands},
          {"edc_length", edc_length},
          {"encoder_hidden", encoder_hidden},
          {"latent_channels", latent_channels},
          {"latent_length", latent_length},
          {"conv_channels", conv_channels},
          {"kernel_size", kernel_size},
          {"upsample_lengths", upsample_lengths},
          {"init_seed", init_seed}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  try {
    c.input_dim = j.at("input_dim").get<int>();
    c.num_bands = j.at("num_bands").get<int>();
    c.edc_length = j.at("edc_length").get<int>();
    c.encoder_hidden = j.at("encoder_hidden").get<std::vector<int>>();
    c.latent_channels = j.at("latent_channels").get<int>();
    c.latent_length = j.at("latent_length").get<int>();
    c.conv_channels = j.at("conv_channels").get<std::vector<int>>();
    c.kernel_size = j.at("kernel_size").get<int>();
    c.upsample_lengths = j.at("upsample_lengths").get<std::vector<int>>();
    c.init_seed = j.at("init_seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed model config: ") + e.what());
  }
  c.validate();
  return c;
}

ModelConfig ModelConfig::desk() { return ModelConfig{}; }

ModelConfig ModelConfig::tiny() {
  ModelConfig c;
  c.edc_length = 200;
  c.encoder_hidden = {64, 128};
  c.latent_channels = 32;
  c.latent_length = 25;
  c.conv_channels = {32, 32, 24};
  c.upsample_lengths = {50, 100, 200};
  return c;
}

ModelConfig ModelConfig::gradcheck() {
  ModelConfig c;
  c.edc_length = 20;
  c.encoder_hidden = {8};
  c.latent_channels = 4;
  c.latent_length = 2;
  c.conv_channels = {4, 4, 24};
  c.upsample_lengths = {5, 10, 20};
  return c;
}

ModelConfig ModelConfig::paper9m() {
  ModelConfig c;
  c.encoder_hidden = {256, 512};
  c.latent_channels = 136;
  c.latent_length = 125;
  c.conv_channels = {68, 34, 24};
  c.upsample_lengths = {250, 500, 1000};
  return c;
}

ModelConfig ModelConfig::preset(const std::string& name) {
  if (name == "desk") return desk();
  if (name == "tiny") return tiny();
  if (name == "gradcheck") return gradcheck();
  if (name == "paper9m") return paper9m();
  throw ArgumentError("unknown model preset: " + name);
}

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  nlohmann::json header;
  header["format_version"] = ck.format_version;
  header["model"] = ck.config.to_json();
  header["seed"] = ck.seed;
  header["param_count"] = ck.params.size();
  header["has_optimizer"] = ck.has_optimizer;
  if (ck.has_scaler) {
    header["scaler"] = {{"min", ck.scaler_min}, {"max", ck.scaler_max}};
    header["sample_rate"] = ck.sample_rate;
  }
  header["stamp"] = stamp_to_json(make_stamp(ck.config.to_json(), ck.seed));
  std::vector<std::vector<float>> blobs{ck.params};
  if (ck.has_optimizer) {
    header["adam_t"] = ck.adam_t;
    header["epochs_completed"] = ck.epochs_completed;
    header["best_val_loss"] = ck.best_val_loss;
    header["best_epoch"] = ck.best_epoch;
    blobs.push_back(ck.adam_m);
    blobs.push_back(ck.adam_v);
  }
  write_framed(path, kCheckpointMagic, header, blobs);
}

Checkpoint load_checkpoint(const std::string& path) {
  // Parse the header first to learn blob sizes, then reread with payloads.
  std::vector<std::vector<float>> blobs;
  nlohmann::json header = read_framed(path, kCheckpointMagic, blobs, {});
  Checkpoint ck;
  try {
    ck.format_version = header.at("format_version").get<int>();
    if (ck.format_version != 1)
      throw VersionError("unsupported checkpoint format_version " +
                         std::to_string(ck.format_version));
    ck.config = ModelConfig::from_json(header.at("model"));
    ck.seed = header.at("seed").get<std::uint64_t>();
    ck.has_optimizer = header.at("has_optimizer").get<bool>();
    if (header.contains("scaler")) {
      ck.has_scaler = true;
      ck.scaler_min = header.at("scaler").at("min").get<std::vector<double>>();
      ck.scaler_max = header.at("scaler").at("max").get<std::vector<double>>();
      ck.sample_rate = header.value("sample_rate", 16000);
    }
    std::uint64_t n = header.at("param_count").get<std::uint64_t>();
    std::vector<std::uint64_t> sizes{n};
    if (ck.has_optimizer) {
      sizes.push_back(n);
      sizes.push_back(n);
      ck.adam_t = header.at("adam_t").get<std::int64_t>();
      ck.epochs_completed = header.at("epochs_completed").get<int>();
      ck.best_val_loss = header.at("best_val_loss").get<double>();
      ck.best_epoch = header.at("best_epoch").get<int>();
    }
    read_framed(path, kCheckpointMagic, blobs, sizes);
    ck.params = std::move(blobs[0]);
    if (ck.has_optimizer) {
      ck.adam_m = std::move(blobs[1]);
      ck.adam_v = std::move(blobs[2]);
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed checkpoint header: ") + e.what());
  }
  return ck;
}

}  // namespace edcnet
