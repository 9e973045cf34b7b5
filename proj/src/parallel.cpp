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

#include "kmn/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace kmn {
namespace {

unsigned default_threads() {
  if (const char* env = std::getenv("KMN_THREADS")) {
    try {
      long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

std::atomic<unsigned>& configured() {
  static std::atomic<unsigned> n{default_threads()};
  return n;
}

}  // namespace

unsigned thread_count() { return configured().load(std::memory_order_relaxed); }

void set_thread_count(unsigned n) {
  configured().store(n == 0 ? default_threads() : n, std::memory_order_relaxed);
}

}  // namespace kmn
