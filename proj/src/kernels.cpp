#include "edcnet/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>

namespace edcnet::kern {

namespace scalar {

template <typename T>
T dot(const T* a, const T* b, std::size_t n) {
  T s = 0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

template <typename T>
void axpy(T alpha, const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <typename T>
T sum(const T* a, std::size_t n) {
  T s = 0;
  for (std::size_t i = 0; i < n; ++i) s += a[i];
  return s;
}

template <typename T>
T sum_sq_diff(const T* a, const T* b, std::size_t n) {
  T s = 0;
  for (std::size_t i = 0; i < n; ++i) {
    T d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

template <typename T>
T sum_sq_lag_diff(const T* a, std::size_t n, std::size_t k) {
  T s = 0;
  for (std::size_t i = 0; i + k < n; ++i) {
    T d = a[i + k] - a[i];
    s += d * d;
  }
  return s;
}

template <typename T>
void adam_update(T* p, T* m, T* v, const T* g, std::size_t n, T lr, T b1, T b2,
                 T eps, T bc1, T bc2) {
  for (std::size_t i = 0; i < n; ++i) {
    T gi = g[i];
    m[i] = b1 * m[i] + (T(1) - b1) * gi;
    v[i] = b2 * v[i] + (T(1) - b2) * gi * gi;
    T mhat = m[i] / bc1;
    T vhat = v[i] / bc2;
    p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

template float dot<float>(const float*, const float*, std::size_t);
template double dot<double>(const double*, const double*, std::size_t);
template void axpy<float>(float, const float*, float*, std::size_t);
template void axpy<double>(double, const double*, double*, std::size_t);
template float sum<float>(const float*, std::size_t);
template double sum<double>(const double*, std::size_t);
template float sum_sq_diff<float>(const float*, const float*, std::size_t);
template double sum_sq_diff<double>(const double*, const double*, std::size_t);
template float sum_sq_lag_diff<float>(const float*, std::size_t, std::size_t);
template double sum_sq_lag_diff<double>(const double*, std::size_t, std::size_t);
template void adam_update<float>(float*, float*, float*, const float*, std::size_t,
                                 float, float, float, float, float, float);
template void adam_update<double>(double*, double*, double*, const double*,
                                  std::size_t, double, double, double, double,
                                  double, double);

}  // namespace scalar

bool cpu_has_avx2() {
#if defined(EDCNET_X86) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

Backend resolve_initial() {
  if (const char* env = std::getenv("EDCNET_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
    if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) return Backend::avx2;
    if (std::strcmp(env, "auto") != 0) return Backend::scalar;
  }
  return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend> g_backend{resolve_initial()};

}  // namespace

Backend active() { return g_backend.load(std::memory_order_relaxed); }

void force(Backend b) {
  if (b == Backend::avx2 && !cpu_has_avx2()) b = Backend::scalar;
  g_backend.store(b, std::memory_order_relaxed);
}

#ifdef EDCNET_X86
#define EDCNET_DISPATCH(fn, ...)                                    \
  (active() == Backend::avx2 ? avx2::fn(__VA_ARGS__)                \
                             : scalar::fn(__VA_ARGS__))
#else
#define EDCNET_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

float dot(const float* a, const float* b, std::size_t n) {
  return EDCNET_DISPATCH(dot, a, b, n);
}
double dot(const double* a, const double* b, std::size_t n) {
  return EDCNET_DISPATCH(dot, a, b, n);
}
void axpy(float alpha, const float* x, float* y, std::size_t n) {
  EDCNET_DISPATCH(axpy, alpha, x, y, n);
}
void axpy(double alpha, const double* x, double* y, std::size_t n) {
  EDCNET_DISPATCH(axpy, alpha, x, y, n);
}
float sum(const float* a, std::size_t n) { return EDCNET_DISPATCH(sum, a, n); }
double sum(const double* a, std::size_t n) { return EDCNET_DISPATCH(sum, a, n); }
float sum_sq_diff(const float* a, const float* b, std::size_t n) {
  return EDCNET_DISPATCH(sum_sq_diff, a, b, n);
}
double sum_sq_diff(const double* a, const double* b, std::size_t n) {
  return EDCNET_DISPATCH(sum_sq_diff, a, b, n);
}
float sum_sq_lag_diff(const float* a, std::size_t n, std::size_t k) {
  return EDCNET_DISPATCH(sum_sq_lag_diff, a, n, k);
}
double sum_sq_lag_diff(const double* a, std::size_t n, std::size_t k) {
  return EDCNET_DISPATCH(sum_sq_lag_diff, a, n, k);
}
void adam_update(float* p, float* m, float* v, const float* g, std::size_t n,
                 float lr, float b1, float b2, float eps, float bc1, float bc2) {
  EDCNET_DISPATCH(adam_update, p, m, v, g, n, lr, b1, b2, eps, bc1, bc2);
}
void adam_update(double* p, double* m, double* v, const double* g, std::size_t n,
                 double lr, double b1, double b2, double eps, double bc1,
                 double bc2) {
  EDCNET_DISPATCH(adam_update, p, m, v, g, n, lr, b1, b2, eps, bc1, bc2);
}

}  // namespace edcnet::kern
