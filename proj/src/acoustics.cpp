#include "edcnet/acoustics.hpp"

#include <cmath>
#include <cstdlib>

#include "edcnet/error.hpp"
#include "edcnet/kernels.hpp"

namespace edcnet {

namespace {

void check_simulatable(const RoomConfig& cfg) {
  if (cfg.length_m <= 0 || cfg.width_m <= 0 || cfg.height_m <= 0)
    throw ArgumentError("room dimensions must be positive");
  for (double a : cfg.absorption)
    if (a <= 0.0 || a > 1.0)
      throw ArgumentError("absorption must be in (0, 1]");
}

// Visits every (box, flip) combination with total order <= max_order.
template <typename Fn>
void for_each_image(const RoomConfig& cfg, int max_order, Fn&& fn) {
  const double dims[3] = {cfg.length_m, cfg.width_m, cfg.height_m};
  const double src[3] = {cfg.source.x, cfg.source.y, cfg.source.z};
  int half = max_order / 2 + 1;
  for (int q = 0; q <= 1; ++q)
    for (int nx = -half; nx <= half; ++nx) {
      int hx = std::abs(nx - q) + std::abs(nx);
      if (hx > max_order) continue;
      double px = (1 - 2 * q) * src[0] + 2.0 * nx * dims[0];
      for (int j = 0; j <= 1; ++j)
        for (int ny = -half; ny <= half; ++ny) {
          int hy = std::abs(ny - j) + std::abs(ny);
          if (hx + hy > max_order) continue;
          double py = (1 - 2 * j) * src[1] + 2.0 * ny * dims[1];
          for (int k = 0; k <= 1; ++k)
            for (int nz = -half; nz <= half; ++nz) {
              int hz = std::abs(nz - k) + std::abs(nz);
              if (hx + hy + hz > max_order) continue;
              double pz = (1 - 2 * k) * src[2] + 2.0 * nz * dims[2];
              ImageSource img;
              img.nx = nx; img.ny = ny; img.nz = nz;
              img.qx = q; img.qy = j; img.qz = k;
              img.position = {px, py, pz};
              img.hits_x = hx; img.hits_y = hy; img.hits_z = hz;
              img.order = hx + hy + hz;
              fn(img);
            }
        }
    }
}

}  // namespace

std::vector<ImageSource> enumerate_images(const RoomConfig& cfg, int max_order) {
  if (max_order < 0) throw ArgumentError("max_order must be >= 0");
  std::vector<ImageSource> out;
  // direct source first
  ImageSource direct;
  direct.position = cfg.source;
  out.push_back(direct);
  for_each_image(cfg, max_order, [&](const ImageSource& img) {
    if (img.order > 0) out.push_back(img);
  });
  return out;
}

double eyring_t60(const RoomConfig& cfg, int band) {
  double a = cfg.absorption.at(static_cast<std::size_t>(band));
  if (a <= 0.0 || a >= 1.0)
    throw DomainError("eyring_t60 needs absorption in (0,1), got " + std::to_string(a));
  return 0.161 * cfg.volume() / (-cfg.surface_area() * std::log(1.0 - a));
}

std::size_t rir_length_for(const RoomConfig& cfg, int fs) {
  double t60_max = 0.0;
  for (int b = 0; b < kNumBands; ++b) {
    double a = cfg.absorption[b];
    double t = a < 1.0 ? 0.161 * cfg.volume() / (-cfg.surface_area() * std::log(1.0 - a))
                       : 0.0;
    t60_max = std::max(t60_max, t);
  }
  double seconds = std::max(0.5, 1.5 * t60_max);
  return static_cast<std::size_t>(std::ceil(seconds * fs));
}

int default_max_order(const RoomConfig& cfg, int fs, std::size_t length) {
  // An image of order k sits at least (k-1)*min_dim - diag away from any
  // receiver; beyond the signal horizon it cannot contribute.
  double min_dim = std::min({cfg.length_m, cfg.width_m, cfg.height_m});
  double horizon_m = kSpeedOfSound * static_cast<double>(length) / fs;
  double diag = std::sqrt(cfg.length_m * cfg.length_m + cfg.width_m * cfg.width_m +
                          cfg.height_m * cfg.height_m);
  int k_horizon = static_cast<int>(std::ceil((horizon_m + diag) / min_dim)) + 1;
  return std::min(30, k_horizon);
}

BandRirSet simulate_band_rirs(const RoomConfig& cfg, int fs, int max_order) {
  check_simulatable(cfg);
  const std::size_t n = rir_length_for(cfg, fs);
  if (max_order < 0) max_order = default_max_order(cfg, fs, n);

  BandRirSet out;
  out.sample_rate = fs;
  out.max_order = max_order;
  out.length = n;

  // Reflection amplitude per band raised to every possible hit count.
  std::vector<double> pow_tab(static_cast<std::size_t>(max_order + 1) * kNumBands);
  for (int b = 0; b < kNumBands; ++b) pow_tab[b] = 1.0;
  for (int h = 1; h <= max_order; ++h)
    for (int b = 0; b < kNumBands; ++b)
      pow_tab[static_cast<std::size_t>(h) * kNumBands + b] =
          pow_tab[static_cast<std::size_t>(h - 1) * kNumBands + b] *
          std::sqrt(1.0 - cfg.absorption[b]);

  // Accumulate time-major so each image is one 24-wide axpy per sample.
  std::vector<double> acc(n * kNumBands, 0.0);
  const double samples_per_meter = fs / kSpeedOfSound;

  for_each_image(cfg, max_order, [&](const ImageSource& img) {
    double d = distance(img.position, cfg.receiver);
    if (d < 1e-6) {
      ++out.skipped_images;
      return;
    }
    double delay = d * samples_per_meter;
    auto i0 = static_cast<std::size_t>(delay);
    if (i0 >= n) return;
    double frac = delay - static_cast<double>(i0);
    const double* prow = pow_tab.data() + static_cast<std::size_t>(img.order) * kNumBands;
    kern::axpy((1.0 - frac) / d, prow, acc.data() + i0 * kNumBands, kNumBands);
    if (i0 + 1 < n)
      kern::axpy(frac / d, prow, acc.data() + (i0 + 1) * kNumBands, kNumBands);
  });

  out.signals.assign(static_cast<std::size_t>(kNumBands) * n, 0.0);
  for (std::size_t t = 0; t < n; ++t)
    for (int b = 0; b < kNumBands; ++b)
      out.signals[static_cast<std::size_t>(b) * n + t] = acc[t * kNumBands + b];
  return out;
}

}  // namespace edcnet
