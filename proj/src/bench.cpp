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

#include "kmn/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

#include "kmn/error.hpp"
#include "kmn/kernelized_read.hpp"
#include "kmn/parallel.hpp"
#include "kmn/rng.hpp"
#include "kmn/tensor.hpp"

namespace kmn {
namespace {

struct Instance {
  Grid4 memory_keys;
  Grid3 query_keys;
  Grid4 values;
};

Instance random_instance(const BenchShape& s, std::uint64_t seed) {
  Rng rng(seed);
  auto fill = [&](std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
  };
  Grid4 km(s.t, s.h, s.w, s.d, fill(s.t * s.h * s.w * s.d));
  Grid3 kq(s.h, s.w, s.d, fill(s.h * s.w * s.d));
  std::vector<double> vals(s.t * s.h * s.w * 2);
  for (double& x : vals) x = rng.uniform();
  return {std::move(km), std::move(kq), Grid4(s.t, s.h, s.w, 2, std::move(vals))};
}

double max_rel_dev(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]) / (1.0 + std::abs(b[i])));
  return m;
}

VariantTiming summarize(std::vector<double> samples) {
  VariantTiming t;
  t.samples_ms = samples;
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  t.median_ms = n % 2 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
  t.min_ms = samples.front();
  return t;
}

template <typename F>
VariantTiming time_variant(int reps, F&& f) {
  using clock = std::chrono::steady_clock;
  f();  // warm-up
  std::vector<double> samples;
  for (int i = 0; i < reps; ++i) {
    const auto t0 = clock::now();
    f();
    samples.push_back(std::chrono::duration<double, std::milli>(clock::now() - t0).count());
  }
  return summarize(std::move(samples));
}

nlohmann::json shape_json(const BenchShape& s) { return {{"T", s.t}, {"H", s.h}, {"W", s.w}, {"D", s.d}}; }

}  // namespace

std::string BenchShape::to_string() const {
  return std::to_string(t) + "x" + std::to_string(h) + "x" + std::to_string(w) + "x" + std::to_string(d);
}

BenchShape parse_bench_shape(std::string_view text) {
  std::size_t vals[4];
  std::size_t n = 0;
  std::string token;
  auto flush = [&] {
    if (token.empty() || n >= 4) fail(ErrorCode::InvalidArgument, "bad shape '" + std::string(text) + "'");
    try {
      std::size_t used = 0;
      const long v = std::stol(token, &used);
      if (used != token.size() || v < 1) throw std::invalid_argument(token);
      vals[n++] = static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      fail(ErrorCode::InvalidArgument, "bad shape '" + std::string(text) + "'");
    }
    token.clear();
  };
  for (char c : text) {
    if (c == 'x' || c == 'X')
      flush();
    else
      token += c;
  }
  flush();
  if (n != 4) fail(ErrorCode::InvalidArgument, "shape '" + std::string(text) + "' needs TxHxWxD");
  return {vals[0], vals[1], vals[2], vals[3]};
}

std::vector<EquivalenceResult> verify_equivalence(std::span<const BenchShape> shapes, std::uint64_t seed,
                                                  const EquivalenceOptions& opts) {
  std::vector<EquivalenceResult> out;
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const auto inst = random_instance(shapes[i], mix_seed(seed, i));
    const CorrelationMap naive = correlate_naive(inst.memory_keys, inst.query_keys);
    CorrelationMap fast = correlate_fast(inst.memory_keys, inst.query_keys);
    if (opts.inject_fast_perturbation != 0.0)
      for (double& v : fast.data()) v += opts.inject_fast_perturbation;

    EquivalenceResult r;
    r.shape = shapes[i];
    r.max_correlation_dev = max_rel_dev(fast.data(), naive.data());
    const ReadConfig cfg{KernelSigma(7.0), shapes[i].d};
    const Grid3 kmn_fast = read_kmn(fast, inst.values, cfg), kmn_naive = read_kmn(naive, inst.values, cfg);
    const Grid3 stm_fast = read_stm(fast, inst.values), stm_naive = read_stm(naive, inst.values);
    r.max_read_dev = std::max(max_rel_dev(kmn_fast.data(), kmn_naive.data()),
                              max_rel_dev(stm_fast.data(), stm_naive.data()));
    r.pass = r.max_correlation_dev <= opts.tolerance && r.max_read_dev <= opts.tolerance;
    out.push_back(r);
  }
  return out;
}

BenchReport bench_correlate(std::span<const BenchShape> shapes, int repetitions, std::uint64_t seed,
                            const EquivalenceOptions& opts) {
  if (repetitions < 3) fail(ErrorCode::InvalidArgument, "bench needs at least 3 repetitions");
  BenchReport rep;
  rep.repetitions = repetitions;
  rep.threads = thread_count();
  const auto eq = verify_equivalence(shapes, seed, opts);
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    ShapeTiming st;
    st.equivalence = eq[i];
    if (eq[i].pass) {
      const auto inst = random_instance(shapes[i], mix_seed(seed, i));
      st.naive = time_variant(repetitions, [&] { (void)correlate_naive(inst.memory_keys, inst.query_keys); });
      st.fast = time_variant(repetitions, [&] { (void)correlate_fast(inst.memory_keys, inst.query_keys); });
      st.timed = true;
      st.speedup = st.fast.median_ms > 0.0 ? st.naive.median_ms / st.fast.median_ms : 0.0;
    }
    rep.shapes.push_back(std::move(st));
  }
  return rep;
}

std::string BenchReport::to_json() const {
  nlohmann::json j;
  j["repetitions"] = repetitions;
  j["threads"] = threads;
  j["shapes"] = nlohmann::json::array();
  for (const auto& s : shapes) {
    nlohmann::json e;
    e["shape"] = shape_json(s.equivalence.shape);
    e["equivalent"] = s.equivalence.pass;
    e["max_correlation_dev"] = s.equivalence.max_correlation_dev;
    e["max_read_dev"] = s.equivalence.max_read_dev;
    if (s.timed) {
      for (auto [name, v] : {std::pair{"naive", &s.naive}, std::pair{"fast", &s.fast}})
        e[name] = {{"samples_ms", v->samples_ms}, {"median_ms", v->median_ms}, {"min_ms", v->min_ms}};
      e["speedup"] = s.speedup;
    } else {
      e["naive"] = nullptr;
      e["fast"] = nullptr;
      e["speedup"] = nullptr;
    }
    j["shapes"].push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

std::string BenchReport::to_table() const {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-16s %-6s %12s %12s %12s %12s %9s\n", "shape", "equiv", "naive_med_ms",
                "naive_min_ms", "fast_med_ms", "fast_min_ms", "speedup");
  os << line;
  for (const auto& s : shapes) {
    if (!s.timed) {
      std::snprintf(line, sizeof line, "%-16s %-6s  (not timed: max dev %.3g)\n",
                    s.equivalence.shape.to_string().c_str(), "FAIL",
                    std::max(s.equivalence.max_correlation_dev, s.equivalence.max_read_dev));
    } else {
      std::snprintf(line, sizeof line, "%-16s %-6s %12.3f %12.3f %12.3f %12.3f %9.2f\n",
                    s.equivalence.shape.to_string().c_str(), "ok", s.naive.median_ms, s.naive.min_ms,
                    s.fast.median_ms, s.fast.min_ms, s.speedup);
    }
    os << line;
  }
  return os.str();
}

std::string BenchReport::to_csv() const {
  std::ostringstream os;
  os << "T,H,W,D,equivalent,max_correlation_dev,max_read_dev,naive_median_ms,naive_min_ms,fast_median_ms,"
        "fast_min_ms,speedup\n";
  for (const auto& s : shapes) {
    const auto& sh = s.equivalence.shape;
    os << sh.t << ',' << sh.h << ',' << sh.w << ',' << sh.d << ',' << (s.equivalence.pass ? 1 : 0) << ','
       << s.equivalence.max_correlation_dev << ',' << s.equivalence.max_read_dev << ',';
    if (s.timed)
      os << s.naive.median_ms << ',' << s.naive.min_ms << ',' << s.fast.median_ms << ',' << s.fast.min_ms << ','
         << s.speedup;
    else
      os << ",,,,";
    os << '\n';
  }
  return os.str();
}

}  // namespace kmn
