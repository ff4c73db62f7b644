#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <fstream>
#include <random>
#include <string>
#include <system_error>
#include <vector>

#include <fmt/format.h>
#include <gtest/gtest.h>

#include "zsx/error.hpp"
#include "zsx/vecstore.hpp"

namespace zsx::test {

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            fmt::format("zsx-test-{:016x}", (std::uint64_t{rd()} << 32) ^ rd());
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

  std::filesystem::path write(const std::string& name, const std::string& contents) const {
    const auto p = path_ / name;
    std::ofstream out(p);
    out << contents;
    return p;
  }

 private:
  std::filesystem::path path_;
};

// Code of the zsx::Error thrown by fn; records a failure if nothing is thrown.
inline ErrorCode error_code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected zsx::Error";
  return ErrorCode::kConfig;
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(dim);
  for (double& x : v) x = normal(rng);
  return v;
}

inline std::string table_text(const VectorTable& table) {
  std::string out;
  for (const auto& token : table.tokens()) {
    out += token;
    for (double v : *table.find(token)) out += fmt::format(" {}", v);
    out += '\n';
  }
  return out;
}

}  // namespace zsx::test
