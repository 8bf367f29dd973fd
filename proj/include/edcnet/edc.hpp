#ifndef EDCNET_EDC_HPP
#define EDCNET_EDC_HPP

#include <span>
#include <vector>

#include "edcnet/acoustics.hpp"

namespace edcnet {

constexpr double kDbEpsilon = 1e-10;  // -100 dB floor

// Normalized backward-integrated energy: out[n] = sum_{m>=n} s[m]^2 / total.
// Throws DomainError on zero-energy input.
std::vector<double> schroeder(std::span<const double> signal);

// Stride subsampling out[j] = edc[floor(j*len/L)]; keeps edc[0] and
// monotonicity untouched.
std::vector<double> downsample_edc(std::span<const double> edc, int target_length);

// 10*log10(y + epsilon), elementwise. Negative input throws DomainError.
std::vector<double> to_db(std::span<const double> y, double epsilon = kDbEpsilon);

enum class DecayStatus { ok, insufficient_range, degenerate_fit };

struct DecayEstimate {
  double seconds = 0.0;
  DecayStatus status = DecayStatus::ok;
  bool valid() const { return status == DecayStatus::ok; }
  // Throws DomainError when the fit was flagged.
  double value() const;
};

// Least-squares line over the segment between the first crossings of hi and
// lo (dB), extrapolated to a 60 dB fall: T = scale*(hi-lo)/(-slope).
DecayEstimate decay_time(std::span<const double> edc_db, double frame_dt,
                         double hi, double lo, double scale);

inline DecayEstimate edt(std::span<const double> edc_db, double frame_dt) {
  return decay_time(edc_db, frame_dt, 0.0, -10.0, 6.0);
}
inline DecayEstimate t20(std::span<const double> edc_db, double frame_dt) {
  return decay_time(edc_db, frame_dt, -5.0, -25.0, 3.0);
}
inline DecayEstimate t30(std::span<const double> edc_db, double frame_dt) {
  return decay_time(edc_db, frame_dt, -5.0, -35.0, 2.0);
}

struct ClarityResult {
  double db = 0.0;
  bool clamped = false;  // zero late energy, value pinned to +50 dB
};

// Early(<50 ms)/late energy ratio in dB, measured from the direct-sound
// onset (first sample above 1% of peak magnitude).
ClarityResult clarity_c50(std::span<const double> signal, int fs);

// The model's target representation: 24 rows of L normalized energies.
struct EdcMatrix {
  int length = 0;
  double frame_dt = 0.0;           // seconds per EDC sample
  std::vector<double> curves;      // 24 x L, row-major

  double* row(int b) { return curves.data() + static_cast<std::size_t>(b) * length; }
  const double* row(int b) const {
    return curves.data() + static_cast<std::size_t>(b) * length;
  }
  std::span<const double> row_span(int b) const { return {row(b), static_cast<std::size_t>(length)}; }
};

EdcMatrix rirs_to_targets(const BandRirSet& rirs, int target_length);

struct BandAcousticParams {
  double band_hz = 0.0;
  DecayEstimate edt, t20, t30;
  ClarityResult c50;
};

// One code path for parameter extraction from a band RIR.
BandAcousticParams analyze_band(std::span<const double> signal, int fs, double band_hz);

}  // namespace edcnet

#endif
