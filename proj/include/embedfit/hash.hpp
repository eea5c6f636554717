#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string_view>
#include <vector>

namespace embedfit {

// 64-bit FNV-1a, used for weight and basis checksums.
class Fnv1a {
 public:
  void update(const void* data, std::size_t size) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      state_ ^= p[i];
      state_ *= 0x100000001b3ULL;
    }
  }
  void update(std::span<const double> values) { update(values.data(), values.size_bytes()); }
  void update(std::string_view s) { update(s.data(), s.size()); }
  void update(std::uint64_t v) { update(&v, sizeof v); }

  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace embedfit
