#include "edcnet/acoustics.hpp"
#include "edcnet/edc.hpp"
#include "edcnet/error.hpp"
#include "edcnet/parallel.hpp"
#include "edcnet/rng.hpp"
#include "edcnet/roomgen.hpp"

namespace edcnet {

Dataset build_dataset(std::size_t count, std::uint64_t seed, int fs, int edc_length,
                      int max_order, unsigned threads) {
  if (count < 1) throw ArgumentError("build_dataset: count must be >= 1");
  Dataset ds;
  ds.manifest.count = count;
  ds.manifest.sample_rate = fs;
  ds.manifest.edc_length = edc_length;
  ds.manifest.seed = seed;
  ds.manifest.bands = kBandCenters;
  ds.manifest.rir_samples.assign(count, 0);
  ds.features.assign(count * kNumFeatures, 0.0f);
  ds.edcs.assign(count * static_cast<std::size_t>(kNumBands) * edc_length, 0.0f);

  int effective_order = max_order;
  std::vector<FeatureVector> raw_features(count);

  parallel_for(count, [&](std::size_t i) {
    RoomConfig cfg = sample_room(derive_seed(seed, i));
    raw_features[i] = featurize(cfg);
    for (int j = 0; j < kNumFeatures; ++j)
      ds.features[i * kNumFeatures + j] = static_cast<float>(raw_features[i][j]);
    BandRirSet rirs = simulate_band_rirs(cfg, fs, max_order);
    ds.manifest.rir_samples[i] = static_cast<std::uint32_t>(rirs.length);
    EdcMatrix targets = rirs_to_targets(rirs, edc_length);
    float* out = ds.edcs.data() + i * static_cast<std::size_t>(kNumBands) * edc_length;
    for (std::size_t j = 0; j < targets.curves.size(); ++j)
      out[j] = static_cast<float>(targets.curves[j]);
  }, threads);

  ds.manifest.max_order = effective_order;
  assign_splits(ds.manifest, count, seed);

  std::vector<FeatureVector> train_features;
  train_features.reserve(ds.manifest.train.size());
  for (std::size_t i : ds.manifest.train) train_features.push_back(raw_features[i]);
  ds.manifest.scaler = fit_scaler(train_features);

  ds.manifest.stamp = make_stamp(
      {{"count", count}, {"fs", fs}, {"edc_length", edc_length}, {"max_order", max_order}},
      seed);
  ds.manifest.validate();
  return ds;
}

}  // namespace edcnet
