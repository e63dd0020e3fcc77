// Copyright 2026 The DeSIA Authors
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

#ifndef DESIA_RANDOM_H_
#define DESIA_RANDOM_H_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace desia {

// Mixes any number of 64-bit words into one seed. Used to derive independent
// per-target / per-shadow streams from a master seed so that results do not
// depend on the order in which workers pick up tasks.
uint64_t DeriveSeed(std::initializer_list<uint64_t> parts);

// FNV-1a over bytes; stable across platforms and runs.
uint64_t Fnv1a64(std::string_view bytes);

// Seeded random source. Distributions are implemented here rather than taken
// from <random> so that streams are identical across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }

  // Uniform in [0, n). n must be > 0.
  uint64_t UniformInt(uint64_t n);

  // Uniform in [0, 1) with 53 bits of precision.
  double UniformDouble();

  // Laplace(0, scale) by inverse CDF.
  double Laplace(double scale);

  // Standard normal (Box-Muller, no caching).
  double Normal();

  bool Bernoulli(double p) { return UniformDouble() < p; }

  template <typename T>
  void Shuffle(std::span<T> items) {
    for (size_t i = items.size(); i > 1; --i) {
      size_t j = UniformInt(i);
      std::swap(items[i - 1], items[j]);
    }
  }

  template <typename T>
  void Shuffle(std::vector<T>& items) {
    Shuffle(std::span<T>(items));
  }

  // Draws k distinct indices from [0, n) without replacement (partial
  // Fisher-Yates over `scratch`, which must hold 0..n-1 in any order and is
  // left permuted).
  void SampleWithoutReplacement(std::vector<uint32_t>& scratch, size_t k,
                                std::vector<uint32_t>& out);

  // Index drawn from unnormalized non-negative weights.
  size_t Categorical(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
};

}  // namespace desia

#endif  // DESIA_RANDOM_H_
