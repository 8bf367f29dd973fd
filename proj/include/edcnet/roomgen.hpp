#ifndef EDCNET_ROOMGEN_HPP
#define EDCNET_ROOMGEN_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "edcnet/io.hpp"

namespace edcnet {

constexpr int kNumBands = 24;
constexpr int kNumFeatures = 16;

// Third-octave band centers, 100 Hz .. 20 kHz.
extern const std::array<double, kNumBands> kBandCenters;

// Feature order: L, W, H, sx, sy, sz, rx, ry, rz, d_sr, abar1..abar6
// where abar_g is the mean of absorption bands 4g-4 .. 4g-1.
extern const std::array<const char*, kNumFeatures> kFeatureNames;

struct Vec3 {
  double x = 0, y = 0, z = 0;
};

double distance(const Vec3& a, const Vec3& b);

struct RoomConfig {
  double length_m = 0, width_m = 0, height_m = 0;
  Vec3 source;
  Vec3 receiver;
  std::array<double, kNumBands> absorption{};
  std::uint64_t seed = 0;

  double volume() const { return length_m * width_m * height_m; }
  double surface_area() const {
    return 2.0 * (length_m * width_m + length_m * height_m + width_m * height_m);
  }
  double source_receiver_distance() const { return distance(source, receiver); }

  // Throws ValidationError if any of the sampling-range invariants fail.
  void validate() const;
};

// Sampling ranges. Positions keep this much clearance from every wall.
constexpr double kMinLength = 3.0, kMaxLength = 6.0;
constexpr double kMinWidth = 3.0, kMaxWidth = 6.0;
constexpr double kMinHeight = 2.5, kMaxHeight = 4.0;
constexpr double kMinDistance = 1.0, kMaxDistance = 4.0;
constexpr double kMinAbsorption = 0.14, kMaxAbsorption = 0.65;
constexpr double kWallClearance = 0.3;

// Deterministic for a fixed seed. Throws GenerationError if the position
// constraints cannot be met within 10000 attempts.
RoomConfig sample_room(std::uint64_t rng_seed);

using FeatureVector = std::array<double, kNumFeatures>;

FeatureVector featurize(const RoomConfig& cfg);

struct MinMaxScaler {
  std::array<double, kNumFeatures> min{};
  std::array<double, kNumFeatures> max{};

  // Applies (x-min)/(max-min); constant features map to 0. Values outside
  // [-0.5, 1.5] after scaling are clamped; the count of clamped entries is
  // accumulated into *clamped when given.
  FeatureVector scale(const FeatureVector& x, std::size_t* clamped = nullptr) const;
  FeatureVector unscale(const FeatureVector& s) const;
};

MinMaxScaler fit_scaler(const std::vector<FeatureVector>& features);

struct DatasetManifest {
  int format_version = 1;
  std::size_t count = 0;
  int sample_rate = 16000;
  int edc_length = 1000;
  int max_order = 30;
  std::uint64_t seed = 0;
  std::array<double, kNumBands> bands{};
  std::vector<std::size_t> train, val, test;
  MinMaxScaler scaler;
  std::vector<std::uint32_t> rir_samples;  // per room; frame_dt = n/(fs*L)
  RunStamp stamp;

  double frame_dt(std::size_t room) const;
  void validate() const;  // splits disjoint + covering, sizes consistent
  nlohmann::json to_json() const;
  static DatasetManifest from_json(const nlohmann::json& j);
};

// In-memory dataset: raw (unscaled) features plus per-band EDC targets.
struct Dataset {
  DatasetManifest manifest;
  std::vector<float> features;  // count x 16
  std::vector<float> edcs;      // count x 24 x L

  const float* feature_row(std::size_t i) const { return features.data() + i * kNumFeatures; }
  const float* edc_row(std::size_t i, int band) const {
    return edcs.data() + (i * kNumBands + band) * manifest.edc_length;
  }
  const float* edc_block(std::size_t i) const {
    return edcs.data() + i * kNumBands * manifest.edc_length;
  }
  // Scaled-and-clamped feature row as the model consumes it. Clamps happen
  // for val/test rows outside the train range; the count accumulates into
  // *clamped when given.
  std::array<float, kNumFeatures> scaled_features(std::size_t i,
                                                  std::size_t* clamped = nullptr) const;
};

// Writes manifest.json + features.bin + edcs.bin into dir.
void write_dataset(const Dataset& ds, const std::string& dir);
Dataset read_dataset(const std::string& dir);

// 80/10/10 split of 0..count-1 after a seeded shuffle.
void assign_splits(DatasetManifest& m, std::size_t count, std::uint64_t seed);

// Full pipeline: sample rooms, simulate band RIRs, reduce to EDC targets, fit
// the scaler on the training split. Deterministic in (count, seed, fs,
// edc_length, max_order) regardless of thread count.
Dataset build_dataset(std::size_t count, std::uint64_t seed, int fs = 16000,
                      int edc_length = 1000, int max_order = -1,
                      unsigned threads = 0);

}  // namespace edcnet

#endif
