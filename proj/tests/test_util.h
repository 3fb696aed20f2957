/* Copyright 2026 The graphscan Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Shared helpers for the graphscan tests.

#ifndef GRAPHSCAN_TESTS_TEST_UTIL_H_
#define GRAPHSCAN_TESTS_TEST_UTIL_H_

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "graphscan/graph.h"

namespace graphscan::testing {

inline std::filesystem::path Fixture(const std::string& relative) {
  return std::filesystem::path(GRAPHSCAN_FIXTURE_DIR) / relative;
}

inline std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline void WriteFile(const std::filesystem::path& path,
                      const std::string& contents) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << contents;
}

// A fresh directory under the system temp dir, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("graphscan-test-" + tag + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Node builder for hand-made graphs.
inline NodeRecord Node(std::string name, std::string op,
                       std::initializer_list<std::string> inputs = {},
                       AttrMap attrs = {}) {
  NodeRecord node;
  node.name = std::move(name);
  node.op_type = std::move(op);
  for (const auto& input : inputs) {
    if (!input.empty() && input[0] == '^') {
      node.control_inputs.push_back(input.substr(1));
    } else {
      node.data_inputs.push_back({input, 0});
    }
  }
  node.attrs = std::move(attrs);
  return node;
}

inline NodeRecord StringConst(std::string name, std::string value) {
  return Node(std::move(name), "Const", {},
              {{"value", TensorStringsAttr{{std::move(value)}}}});
}

}  // namespace graphscan::testing

#endif  // GRAPHSCAN_TESTS_TEST_UTIL_H_
