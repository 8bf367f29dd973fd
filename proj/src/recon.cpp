#include "edcnet/recon.hpp"

#include <algorithm>
#include <cmath>

#include "edcnet/error.hpp"
#include "edcnet/rng.hpp"

namespace edcnet {

void RssConfig::validate() const {
  if (stickiness < 0.0 || stickiness > 1.0)
    throw ArgumentError("rss: stickiness must lie in [0, 1]");
}

std::vector<double> edc_to_envelope(std::span<const double> edc, std::size_t* warnings) {
  if (edc.size() < 2) throw ArgumentError("edc_to_envelope: need at least 2 samples");
  std::vector<double> env(edc.size() - 1);
  for (std::size_t i = 0; i + 1 < edc.size(); ++i) {
    double release = edc[i] - edc[i + 1];
    if (release < 0.0) {
      if (release < -1e-9 && warnings) ++*warnings;
      release = 0.0;
    }
    env[i] = std::sqrt(release);
  }
  return env;
}

std::vector<int> rss_signs(std::size_t length, const RssConfig& cfg) {
  cfg.validate();
  if (length < 1) throw ArgumentError("rss_signs: length must be >= 1");
  Rng rng(cfg.seed);
  std::vector<int> s(length);
  s[0] = rng.sign();
  for (std::size_t i = 1; i < length; ++i)
    s[i] = rng.next_double() < cfg.stickiness ? s[i - 1] : -s[i - 1];
  return s;
}

std::vector<double> reconstruct_band(std::span<const double> edc_row, double frame_dt,
                                     int fs, const RssConfig& cfg,
                                     std::size_t* warnings) {
  cfg.validate();
  if (frame_dt <= 0) throw ArgumentError("reconstruct_band: frame_dt must be positive");
  auto env = edc_to_envelope(edc_row, warnings);
  std::size_t frames = env.size();  // L-1
  auto signs = rss_signs(frames, cfg);

  // Audio length covers all L frames so a later Schroeder + downsample lands
  // exactly on the frame grid; samples past the last release stay silent.
  double samples_per_frame = frame_dt * fs;
  auto n_audio = static_cast<std::size_t>(
      std::llround(static_cast<double>(edc_row.size()) * samples_per_frame));
  if (n_audio < 1) n_audio = 1;

  std::vector<double> out(n_audio, 0.0);
  double mag_scale = 1.0 / std::sqrt(samples_per_frame);
  for (std::size_t t = 0; t < n_audio; ++t) {
    double pos = static_cast<double>(t) / samples_per_frame;
    if (pos >= static_cast<double>(frames)) break;
    auto i0 = static_cast<std::size_t>(pos);
    double mag;
    if (i0 + 1 < frames) {
      double w = pos - static_cast<double>(i0);
      mag = (1.0 - w) * env[i0] + w * env[i0 + 1];
    } else {
      mag = env[frames - 1];
    }
    out[t] = static_cast<double>(signs[i0]) * mag * mag_scale;
  }

  // Exact band-energy preservation: match the envelope's total energy.
  double target = 0.0;
  for (double e : env) target += e * e;
  double actual = 0.0;
  for (double y : out) actual += y * y;
  if (actual > 0.0 && target > 0.0) {
    double s = std::sqrt(target / actual);
    for (double& y : out) y *= s;
  }
  return out;
}

std::vector<double> reconstruct_rir(const EdcMatrix& edcs, int fs, const RssConfig& cfg) {
  cfg.validate();
  if (edcs.length < 2 || edcs.curves.empty())
    throw ArgumentError("reconstruct_rir: empty EDC matrix");
  std::vector<double> mix;
  std::vector<double> row(static_cast<std::size_t>(edcs.length));
  for (int b = 0; b < kNumBands; ++b) {
    const double* r = edcs.row(b);
    double head = r[0];
    if (head <= 0.0) continue;  // band carries no energy
    for (int i = 0; i < edcs.length; ++i) row[static_cast<std::size_t>(i)] = r[i] / head;
    RssConfig band_cfg{cfg.stickiness, derive_seed(cfg.seed, static_cast<std::uint64_t>(b))};
    auto sig = reconstruct_band(row, edcs.frame_dt, fs, band_cfg);
    if (mix.empty()) mix.assign(sig.size(), 0.0);
    for (std::size_t i = 0; i < sig.size() && i < mix.size(); ++i) mix[i] += sig[i];
  }
  if (mix.empty()) throw DomainError("reconstruct_rir: no band carries energy");
  double peak = 0.0;
  for (double v : mix) peak = std::max(peak, std::fabs(v));
  if (peak > 0.0) {
    double s = 0.99 / peak;
    for (double& v : mix) v *= s;
  }
  return mix;
}

}  // namespace edcnet
