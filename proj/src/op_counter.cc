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

#include "ssmgen/op_counter.h"

namespace ssmgen {

const char* flop_class_name(FlopClass c) {
  switch (c) {
    case FlopClass::kMultiplyAdd: return "multiply-add";
    case FlopClass::kElementwise: return "elementwise";
    case FlopClass::kTranscendental: return "transcendental";
  }
  return "?";
}

OpCounter& OpCounter::global() {
  static OpCounter counter;
  return counter;
}

void OpCounter::reset() {
  for (auto& c : counts_) c.store(0, std::memory_order_relaxed);
}

std::uint64_t OpCounter::flops() const { return snapshot().total(); }

FlopCounts OpCounter::snapshot() const {
  FlopCounts out;
  for (std::size_t i = 0; i < kNumFlopClasses; ++i) {
    out.by_class[i] = counts_[i].load(std::memory_order_relaxed);
  }
  return out;
}

ScopedFlopCount::ScopedFlopCount() : was_enabled_(OpCounter::global().enabled()) {
  OpCounter::global().reset();
  OpCounter::global().set_enabled(true);
}

ScopedFlopCount::~ScopedFlopCount() { OpCounter::global().set_enabled(was_enabled_); }

}  // namespace ssmgen
