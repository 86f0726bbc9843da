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

#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace cosal {

/// Neumaier-compensated accumulator. Sequential sums stay accurate enough
/// that the mean of a constant grid rounds back to the constant itself,
/// which strict above-mean comparisons rely on.
class CompensatedSum {
public:
    void add(double x) {
        long double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(static_cast<long double>(x)))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return static_cast<double>(sum_ + comp_); }

    /// Mean over count addends, divided in extended precision so constant
    /// inputs round back exactly.
    double mean(std::size_t count) const {
        if (count == 0) return 0.0;
        return static_cast<double>((sum_ + comp_) / static_cast<long double>(count));
    }

private:
    long double sum_ = 0.0L;
    long double comp_ = 0.0L;
};

inline double compensated_sum(std::span<const double> xs) {
    CompensatedSum s;
    for (double x : xs) s.add(x);
    return s.value();
}

inline double compensated_mean(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    CompensatedSum s;
    for (double x : xs) s.add(x);
    return static_cast<double>((s.value()) / static_cast<long double>(xs.size()));
}

/// Shortest round-trip decimal form, locale independent. Used everywhere a
/// floating value lands in a text artifact so reruns are byte-identical.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string format_double_fixed(double v, int precision) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, precision);
    return std::string(buf, res.ptr);
}

/// FNV-1a over bytes; run directories are named by this hash of the
/// resolved configuration so identical invocations collide on purpose.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

} // namespace cosal
