#include <cstdlib>
#include <stdexcept>
#include <string>

#include "cforge/simd/kernels.hpp"

namespace cforge::simd {

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "unknown";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return detail::avx2_table() != nullptr && __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::neon:
      return detail::neon_table() != nullptr;
  }
  return false;
}

const KernelTable& kernels_for(Isa isa) {
  if (!isa_available(isa)) {
    throw std::invalid_argument("ISA not available on this machine: " + std::string(isa_name(isa)));
  }
  switch (isa) {
    case Isa::avx2:
      return *detail::avx2_table();
    case Isa::neon:
      return *detail::neon_table();
    case Isa::scalar:
      break;
  }
  return detail::scalar_table;
}

namespace {

const KernelTable& select() {
  if (const char* forced = std::getenv("CONSTRAINT_FORGE_ISA")) {
    const std::string_view want(forced);
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
      if (want == isa_name(isa)) return kernels_for(isa);
    }
    throw std::invalid_argument("CONSTRAINT_FORGE_ISA: unknown ISA '" + std::string(want) + "'");
  }
  if (isa_available(Isa::avx2)) return kernels_for(Isa::avx2);
  if (isa_available(Isa::neon)) return kernels_for(Isa::neon);
  return detail::scalar_table;
}

}  // namespace

const KernelTable& kernels() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace cforge::simd
