/*
Copyright 2026 The mmthink Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#pragma once

// Dense double-precision kernels used by the policy heads, the trainers and the
// advantage reductions. A scalar reference implementation is always built; an
// AVX2+FMA variant is compiled on x86-64 and selected at runtime when the CPU
// supports it. Setting MMTHINK_KERNELS=scalar in the environment forces the
// reference path.

#include <cassert>
#include <cstddef>
#include <span>
#include <string_view>

namespace mmthink::kernels {

struct KernelTable {
  std::string_view name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  double (*sum)(const double* x, std::size_t n);
  // sum_i (x_i - center)^2
  double (*sum_sq_dev)(const double* x, std::size_t n, double center);
};

const KernelTable& scalar_table();

/// nullptr when the variant was not compiled in or the CPU lacks the instructions.
const KernelTable* avx2_table();

/// The table every public helper below routes through.
const KernelTable& active();

/// Select a backend by name ("scalar", "avx2"). Returns false if unavailable.
bool select(std::string_view name);

inline double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline double sum(std::span<const double> x) { return active().sum(x.data(), x.size()); }

inline double sum_sq_dev(std::span<const double> x, double center) {
  return active().sum_sq_dev(x.data(), x.size(), center);
}

}  // namespace mmthink::kernels
