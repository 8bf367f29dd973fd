#ifndef EDCNET_ACOUSTICS_HPP
#define EDCNET_ACOUSTICS_HPP

#include <cstddef>
#include <vector>

#include "edcnet/roomgen.hpp"

namespace edcnet {

constexpr double kSpeedOfSound = 343.0;  // m/s

struct ImageSource {
  int nx = 0, ny = 0, nz = 0;  // lattice box indices
  int qx = 0, qy = 0, qz = 0;  // near-wall flips, 0 or 1
  Vec3 position;
  int hits_x = 0, hits_y = 0, hits_z = 0;  // wall hits per axis pair
  int order = 0;                            // total wall hits
};

// All images with total order <= max_order; the order-0 direct source is
// always first.
std::vector<ImageSource> enumerate_images(const RoomConfig& cfg, int max_order);

// 24 per-band impulse responses sharing one time axis.
struct BandRirSet {
  int sample_rate = 16000;
  int max_order = 0;
  std::size_t length = 0;            // N, samples per band
  std::vector<double> signals;       // band-major, 24 x N
  std::size_t skipped_images = 0;    // receiver-coincident images dropped

  double* band(int b) { return signals.data() + static_cast<std::size_t>(b) * length; }
  const double* band(int b) const {
    return signals.data() + static_cast<std::size_t>(b) * length;
  }
};

// Classical Eyring estimate 0.161*V / (-S*ln(1-a)) for one band.
// Throws DomainError unless 0 < a < 1.
double eyring_t60(const RoomConfig& cfg, int band);

// Signal length covering 1.5x the worst-band Eyring decay, at least 0.5 s.
std::size_t rir_length_for(const RoomConfig& cfg, int fs);

// Frequency-dependent image-source simulation. Amplitude per image and band
// is (1/d) * sqrt(1-a_b)^order, split linearly across the two samples around
// the fractional delay d/c*fs. max_order < 0 picks the default: 30, or less
// when even the nearest image of a higher order would land past the signal.
BandRirSet simulate_band_rirs(const RoomConfig& cfg, int fs, int max_order = -1);

int default_max_order(const RoomConfig& cfg, int fs, std::size_t length);

}  // namespace edcnet

#endif
