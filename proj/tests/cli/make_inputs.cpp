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

// Writes the CLI test inputs: image.ppm, mask.pgm and a run config.
#include <filesystem>
#include <fstream>
#include <iostream>

#include "kmn/image.hpp"
#include "scenes.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_inputs DIR\n";
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);
  const auto scene = kmn::testing::two_object_scene();
  kmn::write_ppm(dir / "image.ppm", scene.image);
  kmn::write_pgm(dir / "mask.pgm", scene.mask);
  std::ofstream(dir / "run_config.json") << R"({"mode": "stm", "stride": 3, "note": "from config"})" << '\n';
  std::ofstream(dir / "bad_config.json") << "[1, 2]\n";
  return 0;
}
