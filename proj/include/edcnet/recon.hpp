#ifndef EDCNET_RECON_HPP
#define EDCNET_RECON_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "edcnet/edc.hpp"

namespace edcnet {

struct RssConfig {
  double stickiness = 0.9;  // probability of keeping the previous sign
  std::uint64_t seed = 0;

  void validate() const;
};

// env[n] = sqrt(max(edc[n]-edc[n+1], 0)), length L-1. Increasing segments
// beyond 1e-9 are clamped to zero and counted into *warnings.
std::vector<double> edc_to_envelope(std::span<const double> edc,
                                    std::size_t* warnings = nullptr);

// Sticky polarity sequence: s[0] uniform, s[n] keeps s[n-1] with probability p.
std::vector<int> rss_signs(std::size_t length, const RssConfig& cfg);

// One band: envelope at the EDC frame rate times sticky signs, upsampled to
// the audio rate with the interpolated envelope as per-sample magnitude, then
// rescaled so total band energy matches the envelope exactly.
std::vector<double> reconstruct_band(std::span<const double> edc_row, double frame_dt,
                                     int fs, const RssConfig& cfg,
                                     std::size_t* warnings = nullptr);

// All 24 bands (seeds derived per band from cfg.seed) summed into one
// waveform, peak-normalized to 0.99. Rows are renormalized by their first
// element so predicted curves with row[0] != 1 are accepted.
std::vector<double> reconstruct_rir(const EdcMatrix& edcs, int fs, const RssConfig& cfg);

}  // namespace edcnet

#endif
