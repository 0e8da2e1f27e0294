// Copyright 2026 The dewijs Authors
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

// Seedable, splittable random streams and a deterministic worker pool.
// Worker w of W always receives items [n*w/W, n*(w+1)/W) and the stream
// derived from (seed, w), so results are reproducible for fixed (seed, W).

#include <cstdint>
#include <random>
#include <thread>
#include <utility>
#include <vector>

#include "dewijs/error.hpp"

namespace dewijs {

using Engine = std::mt19937_64;

inline Engine make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  return Engine(seq);
}

/// Runs fn(worker, engine, begin, end) on `workers` threads and joins them.
template <class Fn>
void parallel_streams(std::size_t n, int workers, std::uint64_t seed, Fn&& fn) {
  if (workers < 1) throw Error(ErrorCode::InvalidArgument, "workers must be >= 1");
  auto range = [&](int w) {
    const auto lo = static_cast<std::size_t>((static_cast<unsigned __int128>(n) * w) / workers);
    const auto hi = static_cast<std::size_t>((static_cast<unsigned __int128>(n) * (w + 1)) / workers);
    return std::pair{lo, hi};
  };
  if (workers == 1) {
    Engine engine = make_stream(seed, 0);
    fn(0, engine, std::size_t{0}, n);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      Engine engine = make_stream(seed, static_cast<std::uint64_t>(w));
      const auto [lo, hi] = range(w);
      fn(w, engine, lo, hi);
    });
  }
}

}  // namespace dewijs
