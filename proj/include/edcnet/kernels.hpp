#ifndef EDCNET_KERNELS_HPP
#define EDCNET_KERNELS_HPP

#include <cstddef>

// Arithmetic inner loops shared by the network, the loss, the optimizer and
// the image-source accumulation. Scalar reference implementations plus AVX2
// variants; the active backend is picked once at startup (EDCNET_SIMD=scalar
// or avx2 overrides auto-detection) and can be forced from tests.

namespace edcnet::kern {

enum class Backend { scalar, avx2 };

Backend active();
void force(Backend b);
bool cpu_has_avx2();

// sum_i a[i]*b[i]
float dot(const float* a, const float* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);

// y[i] += alpha * x[i]
void axpy(float alpha, const float* x, float* y, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);

float sum(const float* a, std::size_t n);
double sum(const double* a, std::size_t n);

// sum_i (a[i]-b[i])^2
float sum_sq_diff(const float* a, const float* b, std::size_t n);
double sum_sq_diff(const double* a, const double* b, std::size_t n);

// sum_{i<n-k} (a[i+k]-a[i])^2, the slope-penalty reduction
float sum_sq_lag_diff(const float* a, std::size_t n, std::size_t k);
double sum_sq_lag_diff(const double* a, std::size_t n, std::size_t k);

// Fused Adam update over a flat parameter block.
//   m = b1*m + (1-b1)*g;  v = b2*v + (1-b2)*g^2
//   p -= lr * (m/bc1) / (sqrt(v/bc2) + eps)
// bc1/bc2 are the bias corrections 1-b1^t / 1-b2^t, computed by the caller.
void adam_update(float* p, float* m, float* v, const float* g, std::size_t n,
                 float lr, float b1, float b2, float eps, float bc1, float bc2);
void adam_update(double* p, double* m, double* v, const double* g, std::size_t n,
                 double lr, double b1, double b2, double eps, double bc1, double bc2);

// Concrete variants, exposed so the tests can check scalar/AVX2 equivalence
// directly instead of flipping the global backend.
namespace scalar {
template <typename T> T dot(const T* a, const T* b, std::size_t n);
template <typename T> void axpy(T alpha, const T* x, T* y, std::size_t n);
template <typename T> T sum(const T* a, std::size_t n);
template <typename T> T sum_sq_diff(const T* a, const T* b, std::size_t n);
template <typename T> T sum_sq_lag_diff(const T* a, std::size_t n, std::size_t k);
template <typename T>
void adam_update(T* p, T* m, T* v, const T* g, std::size_t n, T lr, T b1, T b2,
                 T eps, T bc1, T bc2);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define EDCNET_X86 1
namespace avx2 {
float dot(const float* a, const float* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
void axpy(float alpha, const float* x, float* y, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
float sum(const float* a, std::size_t n);
double sum(const double* a, std::size_t n);
float sum_sq_diff(const float* a, const float* b, std::size_t n);
double sum_sq_diff(const double* a, const double* b, std::size_t n);
float sum_sq_lag_diff(const float* a, std::size_t n, std::size_t k);
double sum_sq_lag_diff(const double* a, std::size_t n, std::size_t k);
void adam_update(float* p, float* m, float* v, const float* g, std::size_t n,
                 float lr, float b1, float b2, float eps, float bc1, float bc2);
void adam_update(double* p, double* m, double* v, const double* g, std::size_t n,
                 double lr, double b1, double b2, double eps, double bc1, double bc2);
}  // namespace avx2
#endif

}  // namespace edcnet::kern

#endif
