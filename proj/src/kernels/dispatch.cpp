#include <cstdlib>
#include <string_view>

#include "mmla/kernels.hpp"

namespace mmla::kernels {
namespace {

const Table& select() {
  const char* force = std::getenv("MMLA_SIMD");
  if (force != nullptr && std::string_view(force) == "scalar") return scalar();
  if (const Table* t = avx2()) return *t;
  if (const Table* t = neon()) return *t;
  return scalar();
}

}  // namespace

const Table& active() {
  static const Table& table = select();
  return table;
}

}  // namespace mmla::kernels
