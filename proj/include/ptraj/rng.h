// Copyright 2026 The ptraj Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PTRAJ_RNG_H_
#define PTRAJ_RNG_H_

#include <cstdint>
#include <random>

#include "absl/strings/string_view.h"

namespace ptraj {

using Rng = std::mt19937_64;

// Stream tags keep independent consumers of one master seed apart.
enum class RngStream : uint64_t {
  kInit = 1,
  kBatch = 2,
  kNoise = 3,
  kVaeNoise = 4,
  kGenerate = 5,
  kEvalSample = 6,
};

// Deterministic engine for (seed, stream, index). Used wherever a draw must
// not depend on the order in which work is scheduled.
inline Rng DeriveRng(uint64_t seed, RngStream stream, uint64_t index = 0) {
  std::seed_seq seq{static_cast<uint32_t>(seed),
                    static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(stream),
                    static_cast<uint32_t>(index),
                    static_cast<uint32_t>(index >> 32)};
  return Rng(seq);
}

// 64-bit FNV-1a. Stable across platforms, unlike std::hash.
inline uint64_t Fnv1a64(absl::string_view bytes,
                        uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace ptraj

#endif  // PTRAJ_RNG_H_
