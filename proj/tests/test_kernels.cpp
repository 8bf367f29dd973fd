#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "edcnet/kernels.hpp"
#include "edcnet/rng.hpp"

using namespace edcnet;

namespace {

template <typename T>
std::vector<T> random_vec(std::size_t n, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(rng.uniform(lo, hi));
  return v;
}

template <typename T>
double rel_err(T a, T b) {
  double d = std::fabs(static_cast<double>(a) - static_cast<double>(b));
  double scale = std::max({std::fabs(static_cast<double>(a)),
                           std::fabs(static_cast<double>(b)), 1e-30});
  return d / scale;
}

}  // namespace

TEST_CASE("scalar dot matches long-double reference") {
  Rng rng(7);
  for (std::size_t n : {1u, 7u, 64u, 1001u}) {
    auto a = random_vec<double>(n, rng);
    auto b = random_vec<double>(n, rng);
    long double ref = 0;
    for (std::size_t i = 0; i < n; ++i)
      ref += static_cast<long double>(a[i]) * b[i];
    double got = kern::scalar::dot(a.data(), b.data(), n);
    CHECK(rel_err(got, static_cast<double>(ref)) < 1e-12);
  }
}

#ifdef EDCNET_X86

TEST_CASE("avx2 variants agree with scalar") {
  if (!kern::cpu_has_avx2()) return;
  Rng rng(13);
  // sizes straddle the vector width to exercise remainders
  for (std::size_t n : {1u, 3u, 8u, 9u, 17u, 255u, 1024u, 4097u}) {
    auto af = random_vec<float>(n, rng);
    auto bf = random_vec<float>(n, rng);
    auto ad = random_vec<double>(n, rng);
    auto bd = random_vec<double>(n, rng);

    CHECK(rel_err(kern::avx2::dot(af.data(), bf.data(), n),
                  kern::scalar::dot(af.data(), bf.data(), n)) < 1e-4);
    CHECK(rel_err(kern::avx2::dot(ad.data(), bd.data(), n),
                  kern::scalar::dot(ad.data(), bd.data(), n)) < 1e-12);
    CHECK(rel_err(kern::avx2::sum(af.data(), n), kern::scalar::sum(af.data(), n)) < 1e-4);
    CHECK(rel_err(kern::avx2::sum(ad.data(), n), kern::scalar::sum(ad.data(), n)) < 1e-12);
    CHECK(rel_err(kern::avx2::sum_sq_diff(af.data(), bf.data(), n),
                  kern::scalar::sum_sq_diff(af.data(), bf.data(), n)) < 1e-4);
    CHECK(rel_err(kern::avx2::sum_sq_diff(ad.data(), bd.data(), n),
                  kern::scalar::sum_sq_diff(ad.data(), bd.data(), n)) < 1e-12);
    if (n > 3) {
      CHECK(rel_err(kern::avx2::sum_sq_lag_diff(ad.data(), n, 3),
                    kern::scalar::sum_sq_lag_diff(ad.data(), n, 3)) < 1e-12);
    }

    auto y1 = random_vec<float>(n, rng);
    auto y2 = y1;
    kern::scalar::axpy(0.37f, af.data(), y1.data(), n);
    kern::avx2::axpy(0.37f, af.data(), y2.data(), n);
    // single-rounded fma vs mul+add: compare absolutely, inputs are O(1)
    for (std::size_t i = 0; i < n; ++i)
      CHECK(std::fabs(y1[i] - y2[i]) < 1e-6);
  }
}

TEST_CASE("avx2 adam update agrees with scalar") {
  if (!kern::cpu_has_avx2()) return;
  Rng rng(29);
  std::size_t n = 1003;
  auto p1 = random_vec<double>(n, rng);
  auto m1 = random_vec<double>(n, rng, 0.0, 0.1);
  auto v1 = random_vec<double>(n, rng, 0.0, 0.1);
  auto g = random_vec<double>(n, rng);
  auto p2 = p1;
  auto m2 = m1;
  auto v2 = v1;
  kern::scalar::adam_update(p1.data(), m1.data(), v1.data(), g.data(), n, 1e-3, 0.9,
                            0.999, 1e-8, 0.1, 0.001);
  kern::avx2::adam_update(p2.data(), m2.data(), v2.data(), g.data(), n, 1e-3, 0.9,
                          0.999, 1e-8, 0.1, 0.001);
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(rel_err(p1[i], p2[i]) < 1e-12);
    CHECK(rel_err(m1[i], m2[i]) < 1e-12);
    CHECK(rel_err(v1[i], v2[i]) < 1e-12);
  }
}

#endif  // EDCNET_X86

TEST_CASE("backend forcing changes dispatch but not results") {
  Rng rng(51);
  auto a = random_vec<double>(513, rng);
  auto b = random_vec<double>(513, rng);
  kern::Backend original = kern::active();
  kern::force(kern::Backend::scalar);
  double s = kern::dot(a.data(), b.data(), a.size());
  kern::force(kern::Backend::avx2);  // falls back to scalar off-x86
  double v = kern::dot(a.data(), b.data(), a.size());
  kern::force(original);
  CHECK(rel_err(s, v) < 1e-12);
}

TEST_CASE("sum_sq_lag_diff reduces the strided difference") {
  std::vector<double> a{1, 2, 4, 8, 16};
  // lag 2: (4-1)^2 + (8-2)^2 + (16-4)^2 = 9 + 36 + 144
  CHECK(kern::sum_sq_lag_diff(a.data(), a.size(), 2) == doctest::Approx(189.0));
  CHECK(kern::sum_sq_lag_diff(a.data(), a.size(), 5) == doctest::Approx(0.0));
}
