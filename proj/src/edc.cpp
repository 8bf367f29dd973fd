#include "edcnet/edc.hpp"

#include <algorithm>
#include <cmath>

#include "edcnet/error.hpp"

namespace edcnet {

std::vector<double> schroeder(std::span<const double> signal) {
  if (signal.empty()) throw ArgumentError("schroeder: empty signal");
  std::vector<double> out(signal.size());
  double acc = 0.0;
  for (std::size_t i = signal.size(); i-- > 0;) {
    acc += signal[i] * signal[i];
    out[i] = acc;
  }
  if (acc <= 0.0) throw DomainError("schroeder: signal has no energy");
  double inv = 1.0 / out[0];
  for (double& v : out) v *= inv;
  out[0] = 1.0;
  return out;
}

std::vector<double> downsample_edc(std::span<const double> edc, int target_length) {
  if (target_length < 2) throw ArgumentError("downsample_edc: target length must be >= 2");
  if (edc.size() < static_cast<std::size_t>(target_length))
    throw ArgumentError("downsample_edc: curve shorter than target length");
  std::vector<double> out(static_cast<std::size_t>(target_length));
  std::size_t len = edc.size();
  for (int j = 0; j < target_length; ++j)
    out[static_cast<std::size_t>(j)] =
        edc[static_cast<std::size_t>(j) * len / static_cast<std::size_t>(target_length)];
  return out;
}

std::vector<double> to_db(std::span<const double> y, double epsilon) {
  if (epsilon <= 0.0) throw ArgumentError("to_db: epsilon must be positive");
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] < 0.0) throw DomainError("to_db: negative energy value");
    out[i] = 10.0 * std::log10(y[i] + epsilon);
  }
  return out;
}

double DecayEstimate::value() const {
  switch (status) {
    case DecayStatus::ok:
      return seconds;
    case DecayStatus::insufficient_range:
      throw DomainError("decay time undefined: curve does not reach the fit range");
    default:
      throw DomainError("decay time undefined: degenerate (non-negative) slope fit");
  }
}

DecayEstimate decay_time(std::span<const double> edc_db, double frame_dt,
                         double hi, double lo, double scale) {
  if (hi <= lo) throw ArgumentError("decay_time: hi must be above lo");
  if (frame_dt <= 0) throw ArgumentError("decay_time: frame_dt must be positive");
  std::size_t n = edc_db.size();
  std::size_t i_hi = n, i_lo = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (i_hi == n && edc_db[i] <= hi) i_hi = i;
    if (edc_db[i] <= lo) {
      i_lo = i;
      break;
    }
  }
  DecayEstimate est;
  if (i_lo == n || i_hi == n) {
    est.status = DecayStatus::insufficient_range;
    return est;
  }
  if (i_lo - i_hi < 1) {
    est.status = DecayStatus::degenerate_fit;
    return est;
  }
  // least-squares line over [i_hi, i_lo]
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double np = static_cast<double>(i_lo - i_hi + 1);
  for (std::size_t i = i_hi; i <= i_lo; ++i) {
    double x = static_cast<double>(i) * frame_dt;
    double y = edc_db[i];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double denom = sxx - sx * sx / np;
  if (denom <= 0) {
    est.status = DecayStatus::degenerate_fit;
    return est;
  }
  double slope = (sxy - sx * sy / np) / denom;  // dB per second
  if (slope >= 0) {
    est.status = DecayStatus::degenerate_fit;
    return est;
  }
  est.seconds = scale * (hi - lo) / (-slope);
  return est;
}

ClarityResult clarity_c50(std::span<const double> signal, int fs) {
  std::size_t window = static_cast<std::size_t>(std::lround(0.05 * fs));
  if (signal.size() <= window)
    throw ArgumentError("clarity_c50: signal shorter than the 50 ms window");
  double peak = 0.0;
  for (double s : signal) peak = std::max(peak, std::fabs(s));
  if (peak <= 0.0) throw DomainError("clarity_c50: signal has no energy");
  std::size_t onset = 0;
  while (onset < signal.size() && std::fabs(signal[onset]) < 0.01 * peak) ++onset;
  double early = 0.0, late = 0.0;
  for (std::size_t i = onset; i < signal.size(); ++i) {
    double e = signal[i] * signal[i];
    (i < onset + window ? early : late) += e;
  }
  ClarityResult r;
  if (late <= 0.0) {
    r.db = 50.0;
    r.clamped = true;
    return r;
  }
  r.db = 10.0 * std::log10(early / late);
  return r;
}

EdcMatrix rirs_to_targets(const BandRirSet& rirs, int target_length) {
  EdcMatrix m;
  m.length = target_length;
  m.frame_dt = static_cast<double>(rirs.length) /
               (static_cast<double>(rirs.sample_rate) * target_length);
  m.curves.resize(static_cast<std::size_t>(kNumBands) * target_length);
  for (int b = 0; b < kNumBands; ++b) {
    auto edc = schroeder({rirs.band(b), rirs.length});
    auto ds = downsample_edc(edc, target_length);
    std::copy(ds.begin(), ds.end(), m.row(b));
  }
  return m;
}

BandAcousticParams analyze_band(std::span<const double> signal, int fs, double band_hz) {
  BandAcousticParams p;
  p.band_hz = band_hz;
  auto edc = schroeder(signal);
  auto db = to_db(edc);
  double dt = 1.0 / fs;
  p.edt = edt(db, dt);
  p.t20 = t20(db, dt);
  p.t30 = t30(db, dt);
  p.c50 = clarity_c50(signal, fs);
  return p;
}

}  // namespace edcnet
