#pragma once

#include <cstddef>
#include <string>

// Dense row kernels used by the simplex tableau (row scaling, row
// elimination, dot products). A scalar reference implementation is always
// available; on x86-64 an AVX2 variant is selected once at startup when the
// CPU supports it. scale/axpy are elementwise and therefore produce results
// bit-identical to the scalar path (the AVX2 code uses mul+add, never FMA);
// dot is a lane-wise reduction and only agrees with scalar up to rounding.

namespace verisynth::kernels {

// x[i] *= a
void scale(double* x, double a, std::size_t n);

// y[i] += a * x[i]
void axpy(double a, const double* x, double* y, std::size_t n);

// sum_i x[i] * y[i]
double dot(const double* x, const double* y, std::size_t n);

// Name of the active implementation: "scalar" or "avx2".
const std::string& active_implementation();

// Force a specific implementation ("scalar" or "avx2"); used by the
// equivalence tests. Returns false if the requested variant is unavailable
// on this machine.
bool force_implementation(const std::string& name);

namespace detail {
void scale_scalar(double* x, double a, std::size_t n);
void axpy_scalar(double a, const double* x, double* y, std::size_t n);
double dot_scalar(const double* x, const double* y, std::size_t n);
bool avx2_available();
void scale_avx2(double* x, double a, std::size_t n);
void axpy_avx2(double a, const double* x, double* y, std::size_t n);
double dot_avx2(const double* x, const double* y, std::size_t n);
}  // namespace detail

}  // namespace verisynth::kernels
