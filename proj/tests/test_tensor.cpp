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

#include <cmath>

#include "doctest.h"
#include "kmn/error.hpp"
#include "kmn/parallel.hpp"
#include "kmn/tensor.hpp"
#include "oracles.hpp"

using namespace kmn;

namespace {

double rel_dev(double a, double b) { return std::abs(a - b) / (1.0 + std::abs(b)); }

}  // namespace

TEST_CASE("grids validate length and finiteness") {
  CHECK_NOTHROW(Grid3(2, 2, 1, {1, 2, 3, 4}));
  CHECK_THROWS_AS(Grid3(2, 2, 1, {1, 2, 3}), Error);
  CHECK_THROWS_AS(Grid3(1, 1, 1, {NAN}), Error);
  CHECK_THROWS_AS(Grid4(1, 1, 1, 2, {1, INFINITY}), Error);
  CHECK_THROWS_AS(CorrelationMap(1, 1, 2, {1, 2, 3}), Error);

  Grid4 g(2, 3, 4, 5);
  CHECK(g.shape_string() == "(2, 3, 4, 5)");
  g(1, 2, 3, 4) = 7;
  CHECK(g.data()[((1 * 3 + 2) * 4 + 3) * 5 + 4] == 7);
  CHECK(g.cell((1 * 3 + 2) * 4 + 3)[4] == 7);
}

TEST_CASE("correlation map layout") {
  CorrelationMap c(2, 2, 3);
  CHECK(c.memory_cells() == 12);
  CHECK(c.query_cells() == 6);
  CHECK(c.memory_index({1, 1, 2}) == 11);
  CHECK(c.query_index({1, 2}) == 5);
  CHECK(c.query_pos(4) == QueryPos{1, 1});
  c.slice(11)[5] = 3.5;
  CHECK(c({1, 1, 2}, {1, 2}) == 3.5);
  CHECK(c.at(11, 5) == 3.5);
}

TEST_CASE("softmax_scaled examples") {
  const std::vector<double> zeros{0, 0, 0};
  for (double v : softmax_scaled(zeros, 1.0)) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-15));

  const std::vector<double> two{std::log(2.0), 0.0};
  auto s = softmax_scaled(two, 1.0);
  CHECK(std::abs(s[0] - 2.0 / 3) < 1e-15);
  CHECK(std::abs(s[1] - 1.0 / 3) < 1e-15);

  Rng rng(11);
  std::vector<double> x(7);
  for (double& v : x) v = rng.uniform(-3, 3);
  const double scale = 1.0 / std::sqrt(8.0);
  std::vector<double> scaled;
  for (double v : x) scaled.push_back(v * scale);
  const auto want = oracle::plain_softmax(scaled);
  const auto got = softmax_scaled(x, scale);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(got[i] - want[i]) < 1e-12);
}

TEST_CASE("softmax_scaled properties") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(1 + trial % 9);
    for (double& v : x) v = rng.uniform(-50, 50);
    const auto a = softmax_scaled(x, 0.7);
    double sum = 0;
    for (double v : a) {
      CHECK(v >= 0);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
    std::vector<double> shifted = x;
    for (double& v : shifted) v += 123.0;
    const auto b = softmax_scaled(shifted, 0.7);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-12);
  }
  // Saturating scores stay finite.
  const std::vector<double> big{1e6, 0};
  auto s = softmax_scaled(big, 1.0);
  CHECK(s[0] == 1.0);
  CHECK(s[1] == 0.0);
}

TEST_CASE("softmax_scaled errors") {
  CHECK_THROWS_WITH(softmax_scaled(std::vector<double>{}, 1.0), "empty softmax domain");
  CHECK_THROWS_AS(softmax_scaled(std::vector<double>{1.0, NAN}, 1.0), Error);
  CHECK_THROWS_AS(softmax_scaled(std::vector<double>{1.0, INFINITY}, 1.0), Error);
  CHECK_THROWS_AS(softmax_scaled(std::vector<double>{1.0}, 0.0), Error);
  CHECK_THROWS_AS(softmax_scaled(std::vector<double>{1.0}, -1.0), Error);
}

TEST_CASE("argmax2d examples and ties") {
  const std::vector<double> a{1, 2, 3, 0};
  CHECK(argmax2d(a, 2, 2) == QueryPos{1, 0});
  const std::vector<double> b{5, 5, 5, 5};
  CHECK(argmax2d(b, 2, 2) == QueryPos{0, 0});
  const std::vector<double> c{0, 4, 1, 4, 4, 2};
  CHECK(argmax2d(c, 2, 3) == QueryPos{0, 1});

  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(36);
    for (double& v : x) v = std::round(rng.uniform(0, 6));  // plenty of ties
    const std::size_t want = oracle::argmax_scan(x);
    const QueryPos got = argmax2d(x, 6, 6);
    CHECK(got == QueryPos{int(want / 6), int(want % 6)});
    std::vector<double> moved = x;
    for (double& v : moved) v = 2.5 * v + 11.0;
    CHECK(argmax2d(moved, 6, 6) == got);
  }
}

TEST_CASE("argmax2d errors") {
  CHECK_THROWS_AS(argmax2d(std::vector<double>{}, 0, 0), Error);
  CHECK_THROWS_AS(argmax2d(std::vector<double>{1, 2, 3}, 2, 2), Error);
  CHECK_THROWS_AS(argmax2d(std::vector<double>{1, NAN}, 1, 2), Error);
}

TEST_CASE("correlate examples") {
  const Grid4 km(1, 1, 1, 1, {2});
  const Grid3 kq(1, 1, 1, {3});
  CHECK(correlate_naive(km, kq).data()[0] == 6);
  CHECK(correlate_fast(km, kq).data()[0] == 6);

  // One-hot keys at distinct channels: self 1, everything else 0.
  Grid4 onehot(1, 2, 2, 4);
  Grid3 q(2, 2, 4);
  for (std::size_t i = 0; i < 4; ++i) {
    onehot(0, i / 2, i % 2, i) = 1;
    q(i / 2, i % 2, i) = 1;
  }
  const auto c = correlate_naive(onehot, q);
  for (std::size_t p = 0; p < 4; ++p)
    for (std::size_t j = 0; j < 4; ++j) CHECK(c.at(p, j) == (p == j ? 1.0 : 0.0));
}

TEST_CASE("correlate_naive matches per-entry dot products") {
  Rng rng(17);
  const Grid4 km = oracle::random_grid4(rng, 2, 3, 3, 4);
  const Grid3 kq = oracle::random_grid3(rng, 3, 3, 4);
  const auto want = oracle::correlation(km, kq);
  const auto got = correlate_naive(km, kq);
  for (std::size_t p = 0; p < 18; ++p)
    for (std::size_t q = 0; q < 9; ++q) CHECK(std::abs(got.at(p, q) - want[p][q]) < 1e-15);
}

TEST_CASE("correlate_fast equals correlate_naive on random shapes") {
  Rng rng(23);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t T = 1 + trial % 3, H = 1 + (trial * 7) % 8, W = 1 + (trial * 5) % 8, D = 1 + (trial * 3) % 16;
    const Grid4 km = oracle::random_grid4(rng, T, H, W, D);
    const Grid3 kq = oracle::random_grid3(rng, H, W, D);
    const auto a = correlate_fast(km, kq);
    const auto b = correlate_naive(km, kq);
    double worst = 0;
    for (std::size_t i = 0; i < a.data().size(); ++i) worst = std::max(worst, rel_dev(a.data()[i], b.data()[i]));
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("correlate_fast at the benchmark shape, several worker counts") {
  Rng rng(29);
  const Grid4 km = oracle::random_grid4(rng, 2, 24, 24, 128);
  const Grid3 kq = oracle::random_grid3(rng, 24, 24, 128);
  const auto ref = correlate_naive(km, kq);
  for (unsigned n : {1u, 2u, 3u, 8u}) {
    set_thread_count(n);
    const auto fast = correlate_fast(km, kq);
    CHECK(fast.data().size() == ref.data().size());
    bool same = std::equal(fast.data().begin(), fast.data().end(), ref.data().begin());
    CHECK(same);
  }
  set_thread_count(0);
}

TEST_CASE("correlation is bilinear") {
  Rng rng(31);
  const Grid4 km = oracle::random_grid4(rng, 2, 4, 3, 6);
  const Grid3 kq = oracle::random_grid3(rng, 4, 3, 6);
  Grid4 scaled = km;
  for (double& v : scaled.data()) v *= 2.5;
  const auto a = correlate_naive(km, kq);
  const auto b = correlate_naive(scaled, kq);
  for (std::size_t i = 0; i < a.data().size(); ++i) CHECK(std::abs(b.data()[i] - 2.5 * a.data()[i]) < 1e-12);
}

TEST_CASE("correlation with unit keys stays in [-1, 1]") {
  Rng rng(37);
  Grid4 km = oracle::random_grid4(rng, 2, 3, 3, 5);
  Grid3 kq = oracle::random_grid3(rng, 3, 3, 5);
  auto normalise = [](std::span<double> data, std::size_t d) {
    for (std::size_t i = 0; i < data.size(); i += d) {
      double n = 0;
      for (std::size_t k = 0; k < d; ++k) n += data[i + k] * data[i + k];
      for (std::size_t k = 0; k < d; ++k) data[i + k] /= std::sqrt(n);
    }
  };
  normalise(km.data(), 5);
  normalise(kq.data(), 5);
  const CorrelationMap c = correlate_fast(km, kq);
  for (double v : c.data()) {
    CHECK(v <= 1.0 + 1e-12);
    CHECK(v >= -1.0 - 1e-12);
  }
}

TEST_CASE("correlate errors name both shapes") {
  const Grid4 km(1, 2, 2, 3);
  const Grid3 kq(2, 2, 4);
  for (auto fn : {&correlate_naive, &correlate_fast}) {
    try {
      fn(km, kq);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ShapeMismatch);
      const std::string msg = e.what();
      CHECK(msg.find("(1, 2, 2, 3)") != std::string::npos);
      CHECK(msg.find("(2, 2, 4)") != std::string::npos);
    }
  }
  CHECK_THROWS_AS(correlate_naive(Grid4(1, 3, 2, 3), Grid3(2, 3, 3)), Error);
}
