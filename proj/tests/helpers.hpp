#pragma once

#include <string>

#include <doctest.h>

#include "embedfit/embedding.hpp"
#include "embedfit/error.hpp"
#include "embedfit/rng.hpp"

namespace test {

inline embedfit::Vec random_vec(embedfit::Rng& rng, std::size_t d) {
  embedfit::Vec v(d);
  for (double& x : v) x = rng.normal();
  return v;
}

inline embedfit::EmbeddingSet random_set(embedfit::Rng& rng, std::size_t d, std::size_t n,
                                         const std::string& prefix = "e") {
  embedfit::EmbeddingSet s(d);
  for (std::size_t i = 0; i < n; ++i) s.add(prefix + std::to_string(i), random_vec(rng, d));
  return s;
}

// Name of the error code thrown by f, or "none".
template <class F>
std::string error_of(F&& f) {
  try {
    f();
  } catch (const embedfit::Error& e) {
    return std::string(embedfit::to_string(e.code()));
  }
  return "none";
}

}  // namespace test

#define CHECK_ERROR(expr, name) CHECK(test::error_of([&] { (void)(expr); }) == std::string(name))

#include <filesystem>
#include <random>

namespace test {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("embedfit-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace test
