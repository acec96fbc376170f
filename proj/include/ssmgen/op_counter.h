// Copyright 2026 The ssmgen Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <atomic>
#include <cstdint>

namespace ssmgen {

// FLOPs are itemized by class so analytic and measured counts can be compared
// per class. One multiply-add pair counts as 2.
enum class FlopClass : std::size_t {
  kMultiplyAdd = 0,    // matmul, convolution taps, scan recurrences
  kElementwise = 1,    // add, scale, bias, normalization arithmetic
  kTranscendental = 2, // exp, softplus, silu, rsqrt; 1 per element
};

inline constexpr std::size_t kNumFlopClasses = 3;

struct FlopCounts {
  std::array<std::uint64_t, kNumFlopClasses> by_class{};

  std::uint64_t total() const {
    return by_class[0] + by_class[1] + by_class[2];
  }
  std::uint64_t operator[](FlopClass c) const {
    return by_class[static_cast<std::size_t>(c)];
  }
};

const char* flop_class_name(FlopClass c);

// Process-wide counter. Recording is lock-free; counts only grow while
// enabled and reset() returns them to zero.
class OpCounter {
 public:
  static OpCounter& global();

  void set_enabled(bool enabled) { enabled_.store(enabled, std::memory_order_relaxed); }
  bool enabled() const { return enabled_.load(std::memory_order_relaxed); }
  void reset();

  void record(FlopClass c, std::uint64_t flops) {
    if (enabled()) {
      counts_[static_cast<std::size_t>(c)].fetch_add(flops, std::memory_order_relaxed);
    }
  }

  std::uint64_t flops() const;
  FlopCounts snapshot() const;

 private:
  std::atomic<bool> enabled_{false};
  std::array<std::atomic<std::uint64_t>, kNumFlopClasses> counts_{};
};

// Enables and zeroes the global counter for its lifetime, restoring the
// previous enabled flag on exit.
class ScopedFlopCount {
 public:
  ScopedFlopCount();
  ~ScopedFlopCount();
  ScopedFlopCount(const ScopedFlopCount&) = delete;
  ScopedFlopCount& operator=(const ScopedFlopCount&) = delete;

  FlopCounts counts() const { return OpCounter::global().snapshot(); }

 private:
  bool was_enabled_;
};

// Per-op cost conventions shared by the instrumented kernels and the
// analytic profiler.
namespace flop_cost {
// mean, center, square, accumulate, normalize, gain, bias
inline constexpr std::uint64_t kLayerNormElementwise = 7;
// one rsqrt per row
inline constexpr std::uint64_t kLayerNormRowTranscendental = 1;
// shift by max, accumulate, divide
inline constexpr std::uint64_t kSoftmaxElementwise = 3;
inline constexpr std::uint64_t kSoftmaxTranscendental = 1;
// delta*a, minus one, divide by a, times b; plus one exp
inline constexpr std::uint64_t kZohElementwise = 4;
inline constexpr std::uint64_t kZohTranscendental = 1;
// abar*h + bbar*u (3) and c*h accumulated into v (2), per state cell
inline constexpr std::uint64_t kScanMultiplyAdd = 5;
// d_skip*u + add, per channel
inline constexpr std::uint64_t kScanSkipElementwise = 2;
}  // namespace flop_cost

}  // namespace ssmgen
