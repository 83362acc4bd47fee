// Copyright 2026 The nullspace-unlearn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef UNSC_RNG_HPP_
#define UNSC_RNG_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace unsc {

// SplitMix64 step (Steele, Lea, Flood 2014). Constants:
//   state += 0x9e3779b97f4a7c15
//   z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9
//   z = (z ^ (z >> 27)) * 0x94d049bb133111eb
//   z ^= z >> 31
std::uint64_t splitmix64(std::uint64_t& state);

// 64-bit FNV-1a over raw bytes (offset basis 0xcbf29ce484222325, prime
// 0x100000001b3). Used for content hashes and seed derivation.
std::uint64_t fnv1a64(std::string_view bytes);

// Derives the seed of a named component from the root seed:
//   s = root ^ fnv1a64(name); return splitmix64(s)
// Sub-seeds depend only on (root, name), so unrelated config edits never
// shift them.
std::uint64_t derive_seed(std::uint64_t root, std::string_view name);

// xoshiro256** 1.0 (Blackman & Vigna). The four state words are filled by
// successive splitmix64 outputs of the seed.
//
// Derived draws are specified so other implementations can reproduce them:
//   uniform01()      (next() >> 11) * 2^-53, in [0, 1)
//   uniform_index(n) Lemire's multiply-shift with rejection, in [0, n)
//   normal()         Box-Muller on u1 = 1 - uniform01(), u2 = uniform01();
//                    returns r*cos(2 pi u2), caches r*sin(2 pi u2) for the
//                    next call
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();
  double uniform01();
  double uniform(double lo, double hi);
  std::size_t uniform_index(std::size_t n);
  double normal();

  // Fisher-Yates from the back: for i = n-1..1 swap(v[i], v[uniform_index(i+1)]).
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace unsc

#endif  // UNSC_RNG_HPP_
