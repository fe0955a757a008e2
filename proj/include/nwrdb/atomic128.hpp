#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>

#include "nwrdb/pivot.hpp"

namespace nwrdb {

#if defined(__x86_64__) || defined(__aarch64__)
#define NWRDB_HAS_CAS16 1
#else
#define NWRDB_HAS_CAS16 0
#endif

#if NWRDB_HAS_CAS16

// Double-width atomic published with 16-byte compare-and-swap.
class Atomic128 {
 public:
  Atomic128() : word_(0) {}
  explicit Atomic128(Word128 w) : word_(w) {}

  Word128 load() const {
    Word128 out;
    __atomic_load(&word_, &out, __ATOMIC_SEQ_CST);
    return out;
  }

  void store(Word128 w) { __atomic_store(&word_, &w, __ATOMIC_SEQ_CST); }

  bool compare_exchange(Word128& expected, Word128 desired) {
    return __atomic_compare_exchange(&word_, &expected, &desired, false,
                                     __ATOMIC_SEQ_CST, __ATOMIC_SEQ_CST);
  }

 private:
  alignas(16) Word128 word_;
};

#else

// Striped spinlock fallback for targets without 16-byte atomics. The
// public contract matches the lock-free variant.
class Atomic128 {
 public:
  Atomic128() : word_(0) {}
  explicit Atomic128(Word128 w) : word_(w) {}

  Word128 load() const {
    std::lock_guard<std::mutex> g(lock_for(this));
    return word_;
  }

  void store(Word128 w) {
    std::lock_guard<std::mutex> g(lock_for(this));
    word_ = w;
  }

  bool compare_exchange(Word128& expected, Word128 desired) {
    std::lock_guard<std::mutex> g(lock_for(this));
    if (word_ == expected) {
      word_ = desired;
      return true;
    }
    expected = word_;
    return false;
  }

 private:
  static std::mutex& lock_for(const void* p) {
    static std::mutex stripes[64];
    return stripes[(reinterpret_cast<uintptr_t>(p) >> 4) & 63];
  }

  Word128 word_;
};

#endif

}  // namespace nwrdb
