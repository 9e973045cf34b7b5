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

// Acceptance runner: checks each end-to-end criterion and prints one
// PASS/FAIL line per criterion. Exit status is nonzero if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "kmn/encoder.hpp"
#include "kmn/image.hpp"
#include "kmn/kernelized_read.hpp"
#include "kmn/memory_bank.hpp"
#include "kmn/metrics.hpp"
#include "kmn/propagation.hpp"
#include "kmn/rng.hpp"
#include "kmn/synth_video.hpp"
#include "kmn/tensor.hpp"
#include "oracles.hpp"
#include "scenes.hpp"

#ifndef KMN_CLI_PATH
#define KMN_CLI_PATH "kmn"
#endif

namespace fs = std::filesystem;
using namespace kmn;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("kmn_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t pick(Rng& rng, std::size_t n) { return 1 + static_cast<std::size_t>(rng.uniform() * double(n)); }

struct Instance {
  Grid4 km;
  Grid3 kq;
  Grid4 vm;
};

Instance random_instance(Rng& rng) {
  const std::size_t t = pick(rng, 3), h = pick(rng, 8), w = pick(rng, 8), d = pick(rng, 16);
  const std::size_t v = pick(rng, 3);
  return {oracle::random_grid4(rng, t, h, w, d), oracle::random_grid3(rng, h, w, d),
          oracle::random_grid4(rng, t, h, w, v, 0.0, 1.0)};
}

// Mean J over frames 1.. for object 1, as evaluate_sequence reports it.
double sequence_j(const std::vector<testing::Frame>& frames, ReadMode mode, const fs::path& dir) {
  const auto m = testing::write_sequence(frames, 1, dir / "seq");
  PropagationConfig cfg;
  cfg.mode = mode;
  const fs::path out = dir / std::string(to_string(mode));
  const RunReport rep = run_sequence(m, cfg, out, "{}");
  std::vector<LabelMask> pred, gt;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    pred.push_back(read_pgm(out / rep.mask_paths[t]));
    gt.push_back(frames[t].mask);
  }
  return evaluate_sequence(pred, gt, 1, -1).J_M;
}

// 1. UNIFORM kernel reduces to the unkernelized read on c / sqrt(d).
Outcome reduction_identity() {
  const auto t0 = Clock::now();
  Rng rng(2024);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const auto in = random_instance(rng);
    const CorrelationMap c = correlate_fast(in.km, in.kq);
    const ReadConfig cfg{KernelSigma::uniform(), in.km.depth()};
    const Grid3 kmn = read_kmn(c, in.vm, cfg);
    std::vector<double> scaled(c.data().begin(), c.data().end());
    for (double& v : scaled) v /= std::sqrt(double(in.km.depth()));
    const Grid3 stm = read_stm(CorrelationMap(c.frames(), c.height(), c.width(), std::move(scaled)), in.vm);
    for (std::size_t k = 0; k < kmn.data().size(); ++k) worst = std::max(worst, std::abs(kmn.data()[k] - stm.data()[k]));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-12 && secs < 5.0, fmt("50 instances, max abs dev %.3g (<= 1e-12), %.2f s (< 5 s)", worst, secs)};
}

// 2. Fast correlation vs naive, and the library read vs a triple-loop oracle.
Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  Rng rng(77);
  double corr_dev = 0.0, kmn_dev = 0.0, stm_dev = 0.0;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
  for (int i = 0; i < 100; ++i) {
    const auto in = random_instance(rng);
    const CorrelationMap fast = correlate_fast(in.km, in.kq), naive = correlate_naive(in.km, in.kq);
    for (std::size_t k = 0; k < fast.data().size(); ++k) corr_dev = std::max(corr_dev, rel(fast.data()[k], naive.data()[k]));
    const auto c = oracle::correlation(in.km, in.kq);
    const auto want_kmn = oracle::read_kmn(c, in.vm, 7.0, in.km.depth());
    const auto want_stm = oracle::read_stm(c, in.vm);
    const Grid3 got_kmn = read_kmn(fast, in.vm, ReadConfig{KernelSigma(7.0), in.km.depth()});
    const Grid3 got_stm = read_stm(fast, in.vm);
    const std::size_t v = in.vm.depth();
    for (std::size_t q = 0; q < want_kmn.size(); ++q)
      for (std::size_t k = 0; k < v; ++k) {
        kmn_dev = std::max(kmn_dev, rel(got_kmn.data()[q * v + k], want_kmn[q][k]));
        stm_dev = std::max(stm_dev, rel(got_stm.data()[q * v + k], want_stm[q][k]));
      }
  }
  const double secs = seconds_since(t0);
  const bool ok = corr_dev <= 1e-6 && kmn_dev <= 1e-6 && stm_dev <= 1e-6 && secs < 30.0;
  return {ok, fmt("100 instances, rel dev correlate %.3g, kmn read %.3g, stm read %.3g, %.2f s", corr_dev, kmn_dev,
                  stm_dev, secs)};
}

// 3. Kernel centre, closed form and monotonicity in sigma.
Outcome kernel_correctness() {
  Rng rng(5);
  bool centre_ok = true;
  for (int i = 0; i < 20; ++i) {
    const auto in = random_instance(rng);
    const CorrelationMap c = correlate_fast(in.km, in.kq);
    const ArgmaxField best = memory_to_query_argmax(c);
    const CorrelationMap g = materialize_kernel(best, KernelSigma(7.0));
    const std::size_t hw = c.height() * c.width();
    for (std::size_t p = 0; p < best.size(); ++p) {
      const QueryPos qh = best[p];
      centre_ok = centre_ok && gaussian_weight(qh, qh, KernelSigma(7.0)) == 1.0 &&
                  g.data()[p * hw + std::size_t(qh.y) * c.width() + std::size_t(qh.x)] == 1.0;
    }
  }
  const double g11 = gaussian_weight({4, 6}, {3, 5}, KernelSigma(7.0));
  const double closed_dev = std::abs(g11 - std::exp(-1.0 / 49.0));

  const std::vector<double> sigmas{0.5, 1.0, 2.0, 3.5, 5.0, 7.0, 10.0, 15.0, 25.0};
  bool mono = true;
  int checked = 0;
  for (int dy = -8; dy <= 8; ++dy)
    for (int dx = -8; dx <= 8; ++dx) {
      if (dy == 0 && dx == 0) continue;
      for (std::size_t s = 1; s < sigmas.size(); ++s) {
        const double lo = gaussian_weight({10 + dy, 10 + dx}, {10, 10}, KernelSigma(sigmas[s - 1]));
        const double hi = gaussian_weight({10 + dy, 10 + dx}, {10, 10}, KernelSigma(sigmas[s]));
        mono = mono && hi > lo;
        ++checked;
      }
    }
  return {centre_ok && closed_dev <= 1e-15 && mono,
          fmt("g at centre == 1: %s; |g(1,1) - exp(-1/49)| = %.3g; monotone on %d offset/sigma pairs: %s",
              centre_ok ? "yes" : "no", closed_dev, checked, mono ? "yes" : "no")};
}

// 4. Twin-object sequence: KMN follows the target, STM splits.
Outcome twin_objects() {
  const fs::path dir = scratch("twin");
  const auto frames = testing::twin_frames(testing::TwinScenario{});
  const double jk = sequence_j(frames, ReadMode::Kmn, dir), js = sequence_j(frames, ReadMode::Stm, dir);
  return {jk - js >= 0.2 && jk >= 0.9, fmt("J_M kmn %.4f, stm %.4f, gap %.4f (need gap >= 0.2, kmn >= 0.9)", jk, js,
                                           jk - js)};
}

// 5. Identical frames with a cell-aligned mask are reproduced exactly. The
// gate is the two-frame case, where memory holds only the annotation; longer
// runs feed soft predictions back into memory and are reported alongside.
Outcome static_exactness() {
  const fs::path dir = scratch("static");
  struct Scene {
    const char* name;
    testing::Frame frame;
    int objects;
  };
  const std::vector<Scene> scenes{{"two-object", testing::two_object_scene(), 2},
                                  {"twin", testing::twin_frames(testing::TwinScenario{})[0], 1}};
  bool ok = true;
  std::string detail;
  for (const auto& sc : scenes)
    for (std::size_t n : {std::size_t{2}, std::size_t{8}}) {
      const std::vector<testing::Frame> frames(n, sc.frame);
      const fs::path sub = dir / (std::string(sc.name) + "_" + std::to_string(n));
      const auto m = testing::write_sequence(frames, sc.objects, sub / "seq");
      for (auto mode : {ReadMode::Stm, ReadMode::Kmn}) {
        PropagationConfig cfg;
        cfg.mode = mode;
        const fs::path out = sub / std::string(to_string(mode));
        const RunReport rep = run_sequence(m, cfg, out, "{}");
        std::vector<LabelMask> pred, gt;
        for (std::size_t t = 0; t < n; ++t) {
          pred.push_back(read_pgm(out / rep.mask_paths[t]));
          gt.push_back(sc.frame.mask);
        }
        const auto r = evaluate_sequence(pred, gt, sc.objects, -1);
        const bool exact = r.J_M == 1.0 && r.F_M == 1.0;
        if (n == 2) ok = ok && exact;
        detail += fmt("%s/%zu %s %s; ", sc.name, n, std::string(to_string(mode)).c_str(),
                      exact ? "exact" : fmt("J_M %.3f F_M %.3f", r.J_M, r.F_M).c_str());
      }
    }
  return {ok, detail + "gate: 2-frame runs exact"};
}

// 6. Hide-and-Seek statistics, per-cell semantics, and the occluded twin run.
Outcome hide_and_seek_checks() {
  const HideSeekConfig cfg{24, 0.5};
  std::size_t cells = 0, hidden = 0;
  bool semantics = true;
  for (int i = 0; i < 100; ++i) {
    Rng rng(mix_seed(31, i));
    const Image img = oracle::random_image(rng, 97, 73);  // not a multiple of the grid
    LabelMask mask(97, 73);
    for (auto& l : mask.labels) l = static_cast<std::uint8_t>(1 + rng.uniform() * 3);
    const auto r = hide_and_seek(img, mask, cfg, mix_seed(17, i));
    const auto fill = mean_color(img);
    for (int row = 0; row < cfg.grid_size; ++row)
      for (int col = 0; col < cfg.grid_size; ++col) {
        ++cells;
        const bool h = r.hidden[std::size_t(row) * cfg.grid_size + col];
        if (!h) continue;
        ++hidden;
        const auto b = hide_seek_cell(97, 73, cfg.grid_size, row, col);
        for (std::size_t y = b.y0; y < b.y1; ++y)
          for (std::size_t x = b.x0; x < b.x1; ++x) {
            semantics = semantics && r.mask.at(x, y) == 0;
            for (int ch = 0; ch < 3; ++ch) semantics = semantics && r.image.at(x, y, ch) == fill[ch];
          }
      }
  }
  const double frac = double(hidden) / double(cells);

  const fs::path dir = scratch("twin_occluded");
  auto frames = testing::twin_frames(testing::TwinScenario{});
  const HideSeekConfig occ{24, 0.3};
  for (std::size_t t = 1; t < frames.size(); ++t) {
    auto r = hide_and_seek(frames[t].image, frames[t].mask, occ, mix_seed(99, 2 * t + 1));
    frames[t] = {std::move(r.image), std::move(r.mask)};
  }
  const double jk = sequence_j(frames, ReadMode::Kmn, dir), js = sequence_j(frames, ReadMode::Stm, dir);
  const bool ok = cells >= 57600 && std::abs(frac - 0.5) <= 0.02 && semantics && jk - js >= 0.1;
  return {ok, fmt("%zu cells, hidden fraction %.4f (0.5 +- 0.02), semantics %s; occluded twin J_M kmn %.4f, stm %.4f, "
                  "gap %.4f (need >= 0.1)",
                  cells, frac, semantics ? "hold" : "broken", jk, js, jk - js)};
}

// 7. Metric identities and a hand-computed three-frame report.
Outcome metrics_identities() {
  auto paint = [](LabelMask& m, std::uint8_t l, std::size_t x0, std::size_t y0, std::size_t x1, std::size_t y1) {
    for (std::size_t y = y0; y < y1; ++y)
      for (std::size_t x = x0; x < x1; ++x) m.at(x, y) = l;
  };
  const BinaryMask empty(16, 16);
  BinaryMask a(16, 16), b(16, 16), shifted(16, 16);
  for (std::size_t y = 2; y < 6; ++y)
    for (std::size_t x = 2; x < 6; ++x) {
      a.at(x, y) = 1;
      b.at(x + 8, y + 8) = 1;
      shifted.at(x + 1, y) = 1;
    }
  const bool ids = jaccard(empty, empty) == 1.0 && jaccard(a, b) == 0.0 && boundary_f(a, a, 0) == 1.0 &&
                   boundary_f(shifted, a, 1) == 1.0;

  std::vector<LabelMask> gt(3, LabelMask(8, 4)), pred(3, LabelMask(8, 4));
  paint(pred[0], 2, 0, 0, 8, 4);
  paint(gt[1], 1, 0, 0, 2, 2);
  paint(pred[1], 1, 0, 0, 3, 2);
  paint(gt[1], 2, 5, 1, 8, 4);
  paint(gt[2], 2, 5, 1, 8, 4);
  paint(pred[2], 2, 5, 1, 8, 4);
  pred[2].at(4, 2) = 2;
  const auto r = evaluate_sequence(pred, gt, 2, 0);
  // Object 1: J {2/3, 1}, F {0.8, 1}. Object 2: J {0, 0.9}, F {0, 0.875}.
  const bool table = std::abs(r.J_M - 77.0 / 120.0) < 1e-15 && std::abs(r.F_M - 0.66875) < 1e-15 &&
                     std::abs(r.G_M - 629.0 / 960.0) < 1e-15;
  return {ids && table, fmt("identities %s; hand table J_M %.6f F_M %.6f G_M %.6f (want %.6f %.6f %.6f)",
                            ids ? "hold" : "broken", r.J_M, r.F_M, r.G_M, 77.0 / 120.0, 0.66875, 629.0 / 960.0)};
}

// 8. Memory frame schedule.
Outcome memory_policy() {
  const auto s7 = select_memory_frames(7), s12 = select_memory_frames(12), s1 = select_memory_frames(1);
  const bool ok = s7 == std::vector<int>{0, 5, 6} && s12 == std::vector<int>{0, 5, 10, 11} && s1 == std::vector<int>{0};
  auto str = [](const std::vector<int>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s + "]";
  };
  return {ok, "select(7)=" + str(s7) + " select(12)=" + str(s12) + " select(1)=" + str(s1)};
}

// 9. Two CLI pipelines with different worker caps produce identical bytes.
Outcome cli_determinism() {
  const fs::path dir = scratch("cli");
  testing::TwinScenario s;
  s.width = 768;
  s.distractor_dx = 96;
  const auto f0 = testing::twin_frames(s)[0];
  write_ppm(dir / "image.ppm", f0.image);
  write_pgm(dir / "mask.pgm", f0.mask);

  auto pipeline = [&](const std::string& threads) {
    const fs::path root = dir / ("threads_" + threads);
    const std::string env = "KMN_THREADS=" + threads + " ";
    const std::string cli = std::string("\"") + KMN_CLI_PATH + "\"";
    const std::string q = " > /dev/null";
    const std::string cmds[] = {
        env + cli + " synth --image " + (dir / "image.ppm").string() + " --mask " + (dir / "mask.pgm").string() +
            " --frames 6 --seed 42 --hide-prob 0.2 --out " + (root / "seq").string() + q,
        env + cli + " run --manifest " + (root / "seq" / "manifest.json").string() + " --out " +
            (root / "pred").string() + q,
        env + cli + " eval --pred " + (root / "pred").string() + " --gt " + (root / "seq").string() + " --out " +
            (root / "metrics.json").string() + q,
    };
    for (const auto& c : cmds)
      if (std::system(c.c_str()) != 0) return false;
    return true;
  };
  if (!pipeline("1") || !pipeline("3")) return {false, "a CLI command failed"};

  const fs::path a = dir / "threads_1", b = dir / "threads_3";
  std::size_t compared = 0;
  std::string mismatch;
  for (const char* sub : {"seq", "pred"})
    for (const auto& e : fs::directory_iterator(a / sub)) {
      const fs::path rel = fs::path(sub) / e.path().filename();
      if (rel.filename() == "report.json") continue;
      ++compared;
      if (slurp(a / rel) != slurp(b / rel)) mismatch += rel.string() + " ";
    }
  ++compared;
  if (slurp(a / "metrics.json") != slurp(b / "metrics.json")) mismatch += "metrics.json ";
  // Run reports carry wall-clock timings; everything else must match.
  auto report = [](const fs::path& p) {
    auto j = nlohmann::json::parse(slurp(p));
    j.erase("per_frame_ms");
    return j.dump();
  };
  ++compared;
  if (report(a / "pred" / "report.json") != report(b / "pred" / "report.json")) mismatch += "report.json ";
  const double g = nlohmann::json::parse(slurp(a / "metrics.json"))["G_M"].get<double>();
  return {mismatch.empty() && compared > 14,
          fmt("KMN_THREADS=1 vs 3: %zu files compared, %s (G_M %.4f)", compared,
              mismatch.empty() ? "all identical" : ("differ: " + mismatch).c_str(), g)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"reduction identity", reduction_identity},    {"oracle equivalence", oracle_equivalence},
      {"kernel correctness", kernel_correctness},    {"twin objects", twin_objects},
      {"static exactness", static_exactness},        {"hide-and-seek", hide_and_seek_checks},
      {"metrics identities", metrics_identities},    {"memory policy", memory_policy},
      {"cli determinism", cli_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("[%s] %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
