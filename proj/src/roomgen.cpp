#include "edcnet/roomgen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <set>

#include "edcnet/error.hpp"
#include "edcnet/rng.hpp"

namespace edcnet {

const std::array<double, kNumBands> kBandCenters = {
    100,  125,  160,  200,  250,  315,  400,   500,   630,   800,   1000,  1250,
    1600, 2000, 2500, 3150, 4000, 5000, 6300,  8000,  10000, 12500, 16000, 20000};

const std::array<const char*, kNumFeatures> kFeatureNames = {
    "length_m", "width_m", "height_m", "source_x", "source_y", "source_z",
    "receiver_x", "receiver_y", "receiver_z", "src_rcv_distance",
    "absorption_g1", "absorption_g2", "absorption_g3", "absorption_g4",
    "absorption_g5", "absorption_g6"};

double distance(const Vec3& a, const Vec3& b) {
  double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

void RoomConfig::validate() const {
  auto in = [](double v, double lo, double hi) { return v >= lo && v <= hi; };
  if (!in(length_m, kMinLength, kMaxLength) || !in(width_m, kMinWidth, kMaxWidth) ||
      !in(height_m, kMinHeight, kMaxHeight))
    throw ValidationError("room dimensions out of range");
  double d = source_receiver_distance();
  if (d < kMinDistance || d > kMaxDistance)
    throw ValidationError("source-receiver distance out of range: " + std::to_string(d));
  for (double a : absorption)
    if (a < kMinAbsorption || a > kMaxAbsorption)
      throw ValidationError("absorption out of range: " + std::to_string(a));
  auto inside = [&](const Vec3& p) {
    return p.x >= kWallClearance && p.x <= length_m - kWallClearance &&
           p.y >= kWallClearance && p.y <= width_m - kWallClearance &&
           p.z >= kWallClearance && p.z <= height_m - kWallClearance;
  };
  if (!inside(source) || !inside(receiver))
    throw ValidationError("source or receiver too close to a wall");
}

RoomConfig sample_room(std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  RoomConfig cfg;
  cfg.seed = rng_seed;
  cfg.length_m = rng.uniform(kMinLength, kMaxLength);
  cfg.width_m = rng.uniform(kMinWidth, kMaxWidth);
  cfg.height_m = rng.uniform(kMinHeight, kMaxHeight);

  // Independent per-band draws smoothed with a 3-band moving average so the
  // absorption curve looks like a material rather than white noise.
  std::array<double, kNumBands> raw{};
  for (double& a : raw) a = rng.uniform(kMinAbsorption, kMaxAbsorption);
  for (int b = 0; b < kNumBands; ++b) {
    double acc = raw[b];
    int n = 1;
    if (b > 0) { acc += raw[b - 1]; ++n; }
    if (b < kNumBands - 1) { acc += raw[b + 1]; ++n; }
    double v = acc / n;
    cfg.absorption[b] = std::clamp(v, kMinAbsorption, kMaxAbsorption);
  }

  for (int attempt = 0; attempt < 10000; ++attempt) {
    auto draw = [&](double dim) { return rng.uniform(kWallClearance, dim - kWallClearance); };
    cfg.source = {draw(cfg.length_m), draw(cfg.width_m), draw(cfg.height_m)};
    cfg.receiver = {draw(cfg.length_m), draw(cfg.width_m), draw(cfg.height_m)};
    double d = cfg.source_receiver_distance();
    if (d >= kMinDistance && d <= kMaxDistance) {
      cfg.validate();
      return cfg;
    }
  }
  throw GenerationError("could not place source/receiver after 10000 attempts; "
                        "constraints are inconsistent");
}

FeatureVector featurize(const RoomConfig& cfg) {
  FeatureVector f{};
  f[0] = cfg.length_m;
  f[1] = cfg.width_m;
  f[2] = cfg.height_m;
  f[3] = cfg.source.x;
  f[4] = cfg.source.y;
  f[5] = cfg.source.z;
  f[6] = cfg.receiver.x;
  f[7] = cfg.receiver.y;
  f[8] = cfg.receiver.z;
  f[9] = cfg.source_receiver_distance();
  for (int g = 0; g < 6; ++g) {
    double s = 0;
    for (int b = 4 * g; b < 4 * g + 4; ++b) s += cfg.absorption[b];
    f[10 + g] = s / 4.0;
  }
  return f;
}

MinMaxScaler fit_scaler(const std::vector<FeatureVector>& features) {
  if (features.empty()) throw ArgumentError("fit_scaler: empty feature list");
  MinMaxScaler sc;
  sc.min = sc.max = features[0];
  for (const auto& f : features)
    for (int j = 0; j < kNumFeatures; ++j) {
      sc.min[j] = std::min(sc.min[j], f[j]);
      sc.max[j] = std::max(sc.max[j], f[j]);
    }
  return sc;
}

FeatureVector MinMaxScaler::scale(const FeatureVector& x, std::size_t* clamped) const {
  FeatureVector out{};
  for (int j = 0; j < kNumFeatures; ++j) {
    double range = max[j] - min[j];
    double v = range > 0 ? (x[j] - min[j]) / range : 0.0;  // constant feature -> 0
    if (v < -0.5 || v > 1.5) {
      v = std::clamp(v, -0.5, 1.5);
      if (clamped) ++*clamped;
    }
    out[j] = v;
  }
  return out;
}

FeatureVector MinMaxScaler::unscale(const FeatureVector& s) const {
  FeatureVector out{};
  for (int j = 0; j < kNumFeatures; ++j) {
    double range = max[j] - min[j];
    out[j] = range > 0 ? s[j] * range + min[j] : min[j];
  }
  return out;
}

double DatasetManifest::frame_dt(std::size_t room) const {
  return static_cast<double>(rir_samples.at(room)) /
         (static_cast<double>(sample_rate) * edc_length);
}

void DatasetManifest::validate() const {
  if (train.size() + val.size() + test.size() != count)
    throw ValidationError("split sizes do not sum to count");
  std::set<std::size_t> seen;
  for (const auto* split : {&train, &val, &test})
    for (std::size_t i : *split) {
      if (i >= count) throw ValidationError("split index out of range");
      if (!seen.insert(i).second)
        throw ValidationError("splits overlap at index " + std::to_string(i));
    }
  if (rir_samples.size() != count)
    throw ValidationError("rir_samples length does not match count");
  if (edc_length < 2) throw ValidationError("edc_length must be >= 2");
}

nlohmann::json DatasetManifest::to_json() const {
  nlohmann::json j;
  j["format_version"] = format_version;
  j["count"] = count;
  j["sample_rate"] = sample_rate;
  j["edc_length"] = edc_length;
  j["max_order"] = max_order;
  j["seed"] = seed;
  j["bands"] = bands;
  j["splits"] = {{"train", train}, {"val", val}, {"test", test}};
  j["scaler"] = {{"min", scaler.min}, {"max", scaler.max}};
  j["rir_samples"] = rir_samples;
  j["feature_names"] = kFeatureNames;
  j["stamp"] = stamp_to_json(stamp);
  return j;
}

DatasetManifest DatasetManifest::from_json(const nlohmann::json& j) {
  DatasetManifest m;
  try {
    m.format_version = j.at("format_version").get<int>();
    if (m.format_version != 1)
      throw VersionError("unsupported manifest format_version " +
                         std::to_string(m.format_version));
    m.count = j.at("count").get<std::size_t>();
    m.sample_rate = j.at("sample_rate").get<int>();
    m.edc_length = j.at("edc_length").get<int>();
    m.max_order = j.value("max_order", 30);
    m.seed = j.at("seed").get<std::uint64_t>();
    m.bands = j.at("bands").get<std::array<double, kNumBands>>();
    m.train = j.at("splits").at("train").get<std::vector<std::size_t>>();
    m.val = j.at("splits").at("val").get<std::vector<std::size_t>>();
    m.test = j.at("splits").at("test").get<std::vector<std::size_t>>();
    m.scaler.min = j.at("scaler").at("min").get<std::array<double, kNumFeatures>>();
    m.scaler.max = j.at("scaler").at("max").get<std::array<double, kNumFeatures>>();
    m.rir_samples = j.at("rir_samples").get<std::vector<std::uint32_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed manifest: ") + e.what());
  }
  m.validate();
  return m;
}

std::array<float, kNumFeatures> Dataset::scaled_features(std::size_t i,
                                                         std::size_t* clamped) const {
  FeatureVector raw{};
  for (int j = 0; j < kNumFeatures; ++j) raw[j] = feature_row(i)[j];
  FeatureVector s = manifest.scaler.scale(raw, clamped);
  std::array<float, kNumFeatures> out{};
  for (int j = 0; j < kNumFeatures; ++j) out[j] = static_cast<float>(s[j]);
  return out;
}

void write_dataset(const Dataset& ds, const std::string& dir) {
  ds.manifest.validate();
  std::size_t n = ds.manifest.count;
  std::size_t L = static_cast<std::size_t>(ds.manifest.edc_length);
  if (ds.features.size() != n * kNumFeatures)
    throw ShapeError("features size does not match manifest count");
  if (ds.edcs.size() != n * kNumBands * L)
    throw ShapeError("edcs size does not match manifest count/edc_length");
  std::filesystem::create_directories(dir);
  write_json_file(dir + "/manifest.json", ds.manifest.to_json());
  write_blob(dir + "/features.bin", {n, kNumFeatures, 1}, ds.features);
  write_blob(dir + "/edcs.bin", {n, kNumBands, L}, ds.edcs);
}

Dataset read_dataset(const std::string& dir) {
  Dataset ds;
  ds.manifest = DatasetManifest::from_json(read_json_file(dir + "/manifest.json"));
  BlobDims fd, ed;
  ds.features = read_blob(dir + "/features.bin", fd);
  ds.edcs = read_blob(dir + "/edcs.bin", ed);
  std::size_t n = ds.manifest.count;
  std::size_t L = static_cast<std::size_t>(ds.manifest.edc_length);
  if (fd.d0 != n || fd.d1 != kNumFeatures || fd.d2 != 1)
    throw ShapeError("features.bin dims do not match manifest");
  if (ed.d0 != n || ed.d1 != kNumBands || ed.d2 != L)
    throw ShapeError("edcs.bin dims do not match manifest");
  return ds;
}

void assign_splits(DatasetManifest& m, std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> idx(count);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  shuffle(idx, derive_seed(seed, 0xA110C));
  std::size_t n_val = count / 10;
  std::size_t n_test = count / 10;
  std::size_t n_train = count - n_val - n_test;
  m.count = count;
  m.train.assign(idx.begin(), idx.begin() + n_train);
  m.val.assign(idx.begin() + n_train, idx.begin() + n_train + n_val);
  m.test.assign(idx.begin() + n_train + n_val, idx.end());
}

}  // namespace edcnet
