#include "doctest.h"

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "verisynth/kernels.hpp"

namespace k = verisynth::kernels;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

long double dot_reference(const std::vector<double>& a,
                          const std::vector<double>& b) {
  long double acc = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i)
    acc += static_cast<long double>(a[i]) * b[i];
  return acc;
}

// Restores whichever implementation was active when constructed.
struct ImplGuard {
  std::string saved = k::active_implementation();
  ~ImplGuard() { k::force_implementation(saved); }
};

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("active implementation is one of the published ones") {
  const std::string& name = k::active_implementation();
  CHECK((name == "scalar" || name == "avx2"));
  if (!k::detail::avx2_available()) CHECK(name == "scalar");
}

TEST_CASE("forcing an unknown implementation fails and changes nothing") {
  ImplGuard guard;
  const std::string before = k::active_implementation();
  CHECK_FALSE(k::force_implementation("bogus"));
  CHECK(k::active_implementation() == before);
}

TEST_CASE("scalar can always be forced") {
  ImplGuard guard;
  CHECK(k::force_implementation("scalar"));
  CHECK(k::active_implementation() == "scalar");
}

TEST_CASE("dot of empty vectors is zero") {
  CHECK(k::dot(nullptr, nullptr, 0) == 0.0);
}

TEST_CASE("axpy and scale match hand values") {
  double x[3] = {1.0, 2.0, 3.0};
  double y[3] = {10.0, 20.0, 30.0};
  k::axpy(2.0, x, y, 3);
  CHECK(y[0] == 12.0);
  CHECK(y[1] == 24.0);
  CHECK(y[2] == 36.0);
  k::scale(y, 0.5, 3);
  CHECK(y[0] == 6.0);
  CHECK(y[1] == 12.0);
  CHECK(y[2] == 18.0);
}

TEST_CASE("dispatched kernels agree with the scalar reference") {
  std::mt19937_64 rng(20240817);
  for (std::size_t n : {std::size_t{1}, std::size_t{3}, std::size_t{4},
                        std::size_t{7}, std::size_t{8}, std::size_t{64},
                        std::size_t{257}}) {
    std::vector<double> a = random_vec(rng, n);
    std::vector<double> b = random_vec(rng, n);

    const double d = k::dot(a.data(), b.data(), n);
    const double ds = k::detail::dot_scalar(a.data(), b.data(), n);
    CHECK(std::abs(d - ds) <= 1e-12 * static_cast<double>(n));
    CHECK(std::abs(d - static_cast<double>(dot_reference(a, b))) <=
          1e-12 * static_cast<double>(n));

    std::vector<double> y1 = b, y2 = b;
    k::axpy(1.5, a.data(), y1.data(), n);
    k::detail::axpy_scalar(1.5, a.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == y2[i]);

    std::vector<double> s1 = a, s2 = a;
    k::scale(s1.data(), -0.75, n);
    k::detail::scale_scalar(s2.data(), -0.75, n);
    for (std::size_t i = 0; i < n; ++i) CHECK(s1[i] == s2[i]);
  }
}

TEST_CASE("avx2 variant, when available, agrees with scalar") {
  if (!k::detail::avx2_available()) return;
  std::mt19937_64 rng(7);
  for (std::size_t n : {std::size_t{1}, std::size_t{5}, std::size_t{32},
                        std::size_t{100}}) {
    std::vector<double> a = random_vec(rng, n);
    std::vector<double> b = random_vec(rng, n);
    const double dv = k::detail::dot_avx2(a.data(), b.data(), n);
    const double ds = k::detail::dot_scalar(a.data(), b.data(), n);
    CHECK(std::abs(dv - ds) <= 1e-12 * static_cast<double>(n));

    std::vector<double> y1 = b, y2 = b;
    k::detail::axpy_avx2(2.5, a.data(), y1.data(), n);
    k::detail::axpy_scalar(2.5, a.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == y2[i]);
  }
}

}
