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

#include <algorithm>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "kmn/bench.hpp"
#include "kmn/error.hpp"

using namespace kmn;

TEST_CASE("bench shape parsing") {
  const BenchShape s = parse_bench_shape("2x24x24x128");
  CHECK(s.t == 2);
  CHECK(s.h == 24);
  CHECK(s.w == 24);
  CHECK(s.d == 128);
  CHECK(s.to_string() == "2x24x24x128");
  CHECK(parse_bench_shape("1X2X3X4").to_string() == "1x2x3x4");
  for (const char* bad : {"", "2x24x24", "2x24x24x128x1", "0x2x2x2", "2x-1x2x2", "ax2x2x2", "2xx2x2", "2x2x2x2 "})
    CHECK_THROWS_AS(parse_bench_shape(bad), Error);
}

TEST_CASE("equivalence passes on the reference shapes") {
  const std::vector<BenchShape> shapes{{1, 2, 2, 2}, {2, 24, 24, 128}};
  const auto res = verify_equivalence(shapes, 11);
  REQUIRE(res.size() == 2);
  for (const auto& r : res) {
    CHECK(r.pass);
    CHECK(r.max_correlation_dev <= 1e-6);
    CHECK(r.max_read_dev <= 1e-6);
  }
  CHECK(res[1].shape.to_string() == "2x24x24x128");
}

TEST_CASE("equivalence reports an injected fault") {
  const std::vector<BenchShape> shapes{{1, 2, 2, 2}, {2, 6, 6, 8}};
  EquivalenceOptions opts;
  opts.inject_fast_perturbation = 1e-3;
  for (const auto& r : verify_equivalence(shapes, 3, opts)) {
    CHECK_FALSE(r.pass);
    CHECK(r.max_correlation_dev > 1e-6);
  }
  // Tolerance is a knob: the same fault passes a loose gate.
  opts.tolerance = 1e-2;
  for (const auto& r : verify_equivalence(shapes, 3, opts)) CHECK(r.pass);
}

TEST_CASE("equivalence is seeded") {
  const std::vector<BenchShape> shapes{{2, 5, 4, 7}};
  EquivalenceOptions opts;
  opts.inject_fast_perturbation = 1e-4;
  const auto a = verify_equivalence(shapes, 9, opts), b = verify_equivalence(shapes, 9, opts);
  CHECK(a[0].max_read_dev == b[0].max_read_dev);
  CHECK(a[0].max_correlation_dev == b[0].max_correlation_dev);
}

TEST_CASE("bench records every repetition") {
  const std::vector<BenchShape> shapes{{1, 2, 2, 2}};
  const BenchReport rep = bench_correlate(shapes, 3, 1);
  REQUIRE(rep.shapes.size() == 1);
  const auto& s = rep.shapes[0];
  CHECK(rep.repetitions == 3);
  CHECK(s.timed);
  for (const auto* v : {&s.naive, &s.fast}) {
    REQUIRE(v->samples_ms.size() == 3);
    auto sorted = v->samples_ms;
    std::sort(sorted.begin(), sorted.end());
    CHECK(v->median_ms == sorted[1]);
    CHECK(v->min_ms == sorted[0]);
  }
  CHECK(s.speedup > 0.0);
}

TEST_CASE("bench median with an even sample count") {
  const std::vector<BenchShape> shapes{{1, 3, 3, 4}};
  const BenchReport rep = bench_correlate(shapes, 4, 2);
  const auto& s = rep.shapes[0];
  auto sorted = s.fast.samples_ms;
  std::sort(sorted.begin(), sorted.end());
  CHECK(s.fast.median_ms == doctest::Approx(0.5 * (sorted[1] + sorted[2])));
}

TEST_CASE("bench refuses timings for shapes failing the gate") {
  const std::vector<BenchShape> shapes{{1, 2, 2, 2}};
  EquivalenceOptions opts;
  opts.inject_fast_perturbation = 1e-3;
  const BenchReport rep = bench_correlate(shapes, 3, 1, opts);
  const auto& s = rep.shapes[0];
  CHECK_FALSE(s.timed);
  CHECK(s.naive.samples_ms.empty());
  CHECK(s.fast.samples_ms.empty());

  const auto j = nlohmann::json::parse(rep.to_json());
  CHECK(j["shapes"][0]["equivalent"] == false);
  CHECK(j["shapes"][0]["fast"].is_null());
  CHECK(j["shapes"][0]["speedup"].is_null());
  CHECK(rep.to_table().find("FAIL") != std::string::npos);
  CHECK(rep.to_csv().find("1,2,2,2,0,") != std::string::npos);
}

TEST_CASE("bench needs three repetitions") {
  const std::vector<BenchShape> shapes{{1, 2, 2, 2}};
  CHECK_THROWS_AS(bench_correlate(shapes, 2, 1), Error);
  CHECK_THROWS_AS(bench_correlate(shapes, 0, 1), Error);
}

TEST_CASE("bench report schema") {
  const std::vector<BenchShape> shapes{{1, 2, 2, 2}, {1, 4, 3, 5}};
  const BenchReport rep = bench_correlate(shapes, 3, 5);
  const auto j = nlohmann::json::parse(rep.to_json());
  CHECK(j["repetitions"] == 3);
  CHECK(j["threads"].get<unsigned>() >= 1);
  REQUIRE(j["shapes"].size() == 2);
  const auto& e = j["shapes"][1];
  CHECK(e["shape"] == nlohmann::json{{"T", 1}, {"H", 4}, {"W", 3}, {"D", 5}});
  CHECK(e["equivalent"] == true);
  for (const char* k : {"max_correlation_dev", "max_read_dev", "speedup"}) CHECK(e[k].is_number());
  for (const char* v : {"naive", "fast"}) {
    CHECK(e[v]["samples_ms"].size() == 3);
    CHECK(e[v]["median_ms"].is_number());
    CHECK(e[v]["min_ms"].is_number());
  }

  std::istringstream csv(rep.to_csv());
  std::string line;
  int rows = 0;
  while (std::getline(csv, line)) {
    CHECK(std::count(line.begin(), line.end(), ',') == 11);
    ++rows;
  }
  CHECK(rows == 3);
  const std::string table = rep.to_table();
  CHECK(table.find("1x4x3x5") != std::string::npos);
  CHECK(table.find("speedup") != std::string::npos);
}
