// Copyright 2026 The KMN-VOS Authors
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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kmn {

struct BenchShape {
  std::size_t t, h, w, d;
  std::string to_string() const;
};

/// Parses "TxHxWxD", e.g. "2x24x24x128".
BenchShape parse_bench_shape(std::string_view text);

struct EquivalenceOptions {
  double tolerance = 1e-6;  // on |a - b| / (1 + |b|)
  // Test hook: added to every fast-path correlation entry before comparison.
  double inject_fast_perturbation = 0.0;
};

struct EquivalenceResult {
  BenchShape shape;
  bool pass = false;
  double max_correlation_dev = 0.0;
  double max_read_dev = 0.0;
};

/// Random keys/values per shape (seeded); compares correlate_fast against
/// correlate_naive, and the STM/KMN reads computed from either map.
std::vector<EquivalenceResult> verify_equivalence(std::span<const BenchShape> shapes, std::uint64_t seed,
                                                  const EquivalenceOptions& opts = {});

struct VariantTiming {
  std::vector<double> samples_ms;
  double median_ms = 0.0;
  double min_ms = 0.0;
};

struct ShapeTiming {
  EquivalenceResult equivalence;
  bool timed = false;  // false when the equivalence gate failed
  VariantTiming naive;
  VariantTiming fast;
  double speedup = 0.0;  // naive median / fast median
};

struct BenchReport {
  std::vector<ShapeTiming> shapes;
  int repetitions = 0;
  unsigned threads = 1;

  std::string to_json() const;
  std::string to_table() const;
  std::string to_csv() const;
};

/// Times both correlation variants (one warm-up run excluded, median of
/// `repetitions`) for shapes that pass the equivalence gate.
BenchReport bench_correlate(std::span<const BenchShape> shapes, int repetitions, std::uint64_t seed,
                            const EquivalenceOptions& opts = {});

}  // namespace kmn
