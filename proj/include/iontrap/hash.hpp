#pragma once

#include <cstdint>
#include <cstring>
#include <string_view>

namespace iontrap {

// FNV-1a 64-bit. Used for mesh/cache keys and manifest content hashes;
// not a cryptographic hash.
class Fnv1a64 {
 public:
  void update(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      state_ ^= p[i];
      state_ *= 0x100000001b3ull;
    }
  }
  void update(std::string_view s) { update(s.data(), s.size()); }
  template <typename T>
  void update_value(const T& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    update(&v, sizeof(T));
  }
  uint64_t digest() const { return state_; }

 private:
  uint64_t state_ = 0xcbf29ce484222325ull;
};

inline uint64_t fnv1a64(std::string_view s) {
  Fnv1a64 h;
  h.update(s);
  return h.digest();
}

}  // namespace iontrap
