// Copyright 2026 The cosalbench authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "cosal/rng.hpp"

using namespace cosal;

TEST_CASE("raw output equals the standard engine seeded with the key", "[rng]") {
    RandomStream s(42);
    std::mt19937_64 reference(42);
    for (int i = 0; i < 100; ++i) REQUIRE(s.next_u64() == reference());
}

TEST_CASE("derive_stream_key separates seeds and indices", "[rng]") {
    std::set<std::uint64_t> keys;
    for (std::uint64_t seed : {0ULL, 1ULL, 99ULL})
        for (std::uint64_t a = 0; a < 4; ++a)
            for (std::uint64_t b = 0; b < 4; ++b) keys.insert(derive_stream_key(seed, a, b));
    REQUIRE(keys.size() == 3u * 4u * 4u);
    REQUIRE(derive_stream_key(7, 1, 2) == derive_stream_key(7, 1, 2));
}

TEST_CASE("uniform01 stays in [0,1) and covers the range", "[rng]") {
    RandomStream s(1);
    double lo = 1.0;
    double hi = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double x = s.uniform01();
        REQUIRE(x >= 0.0);
        REQUIRE(x < 1.0);
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    REQUIRE(lo < 0.01);
    REQUIRE(hi > 0.99);
}

TEST_CASE("uniform_int is unbiased within tolerance", "[rng]") {
    RandomStream s(2);
    const std::uint64_t n = 7;
    std::map<std::uint64_t, int> counts;
    const int draws = 70000;
    for (int i = 0; i < draws; ++i) {
        const std::uint64_t x = s.uniform_int(n);
        REQUIRE(x < n);
        ++counts[x];
    }
    REQUIRE(counts.size() == n);
    for (const auto& [value, count] : counts)
        REQUIRE(std::abs(count / double(draws) - 1.0 / n) < 0.01);
}

TEST_CASE("uniform_range is inclusive of both endpoints", "[rng]") {
    RandomStream s(3);
    bool saw_lo = false;
    bool saw_hi = false;
    for (int i = 0; i < 2000; ++i) {
        const std::int64_t x = s.uniform_range(-2, 3);
        REQUIRE(x >= -2);
        REQUIRE(x <= 3);
        saw_lo |= x == -2;
        saw_hi |= x == 3;
    }
    REQUIRE(saw_lo);
    REQUIRE(saw_hi);
    REQUIRE(s.uniform_range(5, 5) == 5);
}

TEST_CASE("shuffle preserves the multiset and reaches all orders", "[rng]") {
    RandomStream s(4);
    std::map<std::vector<int>, int> orders;
    for (int i = 0; i < 6000; ++i) {
        std::vector<int> v = {1, 2, 3};
        s.shuffle(v);
        std::vector<int> sorted = v;
        std::sort(sorted.begin(), sorted.end());
        REQUIRE(sorted == std::vector<int>{1, 2, 3});
        ++orders[v];
    }
    REQUIRE(orders.size() == 6);
    for (const auto& [order, count] : orders)
        REQUIRE(std::abs(count / 6000.0 - 1.0 / 6.0) < 0.03);
}

TEST_CASE("pick_distinct returns k distinct indices below n", "[rng]") {
    RandomStream s(5);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + s.uniform_int(20);
        const std::size_t k = s.uniform_int(n + 1);
        RandomStream inner(s.next_u64());
        const std::vector<std::size_t> picked = inner.pick_distinct(n, k);
        REQUIRE(picked.size() == k);
        std::set<std::size_t> unique(picked.begin(), picked.end());
        REQUIRE(unique.size() == k);
        for (std::size_t v : picked) REQUIRE(v < n);
    }

    RandomStream full(6);
    std::vector<std::size_t> all = full.pick_distinct(8, 8);
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < 8; ++i) REQUIRE(all[i] == i);
}

TEST_CASE("pick_distinct first element is uniform", "[rng]") {
    RandomStream s(7);
    std::map<std::size_t, int> counts;
    const int draws = 50000;
    for (int i = 0; i < draws; ++i) ++counts[s.pick_distinct(5, 2).front()];
    for (const auto& [value, count] : counts)
        REQUIRE(std::abs(count / double(draws) - 0.2) < 0.01);
}

TEST_CASE("streams with equal keys are identical", "[rng]") {
    RandomStream a = RandomStream::derive(9, 1, 2);
    RandomStream b = RandomStream::derive(9, 1, 2);
    for (int i = 0; i < 50; ++i) REQUIRE(a.next_u64() == b.next_u64());

    RandomStream c = RandomStream::derive(9, 1, 3);
    bool differs = false;
    RandomStream a2 = RandomStream::derive(9, 1, 2);
    for (int i = 0; i < 50; ++i) differs |= a2.next_u64() != c.next_u64();
    REQUIRE(differs);
}
