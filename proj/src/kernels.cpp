#include "verisynth/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define VERISYNTH_X86 1
#include <immintrin.h>
#endif

namespace verisynth::kernels {

namespace detail {

void scale_scalar(double* x, double a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

#ifdef VERISYNTH_X86

bool avx2_available() { return __builtin_cpu_supports("avx2"); }

__attribute__((target("avx2"))) void scale_avx2(double* x, double a,
                                                std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), va));
  }
  for (; i < n; ++i) x[i] *= a;
}

__attribute__((target("avx2"))) void axpy_avx2(double a, const double* x,
                                               double* y, std::size_t n) {
  // mul + add (no FMA) so each lane matches the scalar computation exactly
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

__attribute__((target("avx2"))) double dot_avx2(const double* x,
                                                const double* y,
                                                std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc,
                        _mm256_mul_pd(_mm256_loadu_pd(x + i),
                                      _mm256_loadu_pd(y + i)));
  }
  double lanes[4];
  _mm256_storeu_pd(lanes, acc);
  double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

#else  // non-x86: scalar only

bool avx2_available() { return false; }
void scale_avx2(double* x, double a, std::size_t n) { scale_scalar(x, a, n); }
void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  axpy_scalar(a, x, y, n);
}
double dot_avx2(const double* x, const double* y, std::size_t n) {
  return dot_scalar(x, y, n);
}

#endif

}  // namespace detail

namespace {

struct Dispatch {
  void (*scale)(double*, double, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  double (*dot)(const double*, const double*, std::size_t);
  std::string name;
};

Dispatch make_default() {
  if (detail::avx2_available()) {
    return {detail::scale_avx2, detail::axpy_avx2, detail::dot_avx2, "avx2"};
  }
  return {detail::scale_scalar, detail::axpy_scalar, detail::dot_scalar,
          "scalar"};
}

Dispatch& dispatch() {
  static Dispatch d = make_default();
  return d;
}

}  // namespace

void scale(double* x, double a, std::size_t n) { dispatch().scale(x, a, n); }
void axpy(double a, const double* x, double* y, std::size_t n) {
  dispatch().axpy(a, x, y, n);
}
double dot(const double* x, const double* y, std::size_t n) {
  return dispatch().dot(x, y, n);
}

const std::string& active_implementation() { return dispatch().name; }

bool force_implementation(const std::string& name) {
  if (name == "scalar") {
    dispatch() = {detail::scale_scalar, detail::axpy_scalar,
                  detail::dot_scalar, "scalar"};
    return true;
  }
  if (name == "avx2" && detail::avx2_available()) {
    dispatch() = {detail::scale_avx2, detail::axpy_avx2, detail::dot_avx2,
                  "avx2"};
    return true;
  }
  return false;
}

}  // namespace verisynth::kernels
