#pragma once

// Data-parallel inner loops used by the field algebra and the spectral engine.
//
// Every kernel has a scalar reference implementation. Vector variants (AVX2 on
// x86-64, NEON on AArch64) are selected at runtime and are required to produce
// bit-identical results: no fused multiply-add, identical operation order, and
// reductions use a fixed four-lane accumulation pattern that the scalar path
// reproduces exactly.

#include <cstddef>
#include <string_view>

namespace cforge::simd {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);

struct KernelTable {
  Isa isa;
  // out = a + b, a - b, a * b (elementwise)
  void (*add)(const double* a, const double* b, double* out, std::size_t n);
  void (*sub)(const double* a, const double* b, double* out, std::size_t n);
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);
  // y = y + alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out = alpha * x
  void (*scale)(double alpha, const double* x, double* out, std::size_t n);
  // sum_i a_i b_i, lanes accumulated as ((s0 + s1) + (s2 + s3)) + tail
  double (*dot)(const double* a, const double* b, std::size_t n);
  // Interleaved complex c_j = (re, im); out_j = i * k_j * c_j.
  void (*mul_ik)(const double* k, const double* c, double* out, std::size_t ncomplex);
  // Interleaved complex out_j = m_j * c_j with real multiplier m_j.
  void (*mul_real)(const double* m, const double* c, double* out, std::size_t ncomplex);
  // Pointwise inverse and determinant of a field of symmetric 3x3 matrices in
  // packed upper-triangular component order (00, 01, 02, 11, 12, 22).
  void (*sym3_inverse)(const double* const* g, double* const* inv, double* det, std::size_t n);
};

/// Kernel table of the best ISA available on this CPU, unless the environment
/// variable CONSTRAINT_FORGE_ISA forces one ("scalar", "avx2", "neon").
const KernelTable& kernels();

bool isa_available(Isa isa);

/// Throws std::invalid_argument if the ISA is not available on this machine.
const KernelTable& kernels_for(Isa isa);

namespace detail {
extern const KernelTable scalar_table;
const KernelTable* avx2_table();  // nullptr when not compiled in
const KernelTable* neon_table();  // nullptr when not compiled in
}  // namespace detail

}  // namespace cforge::simd
