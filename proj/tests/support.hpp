#pragma once

#include <filesystem>
#include <string>

#include <unistd.h>

#include "fairaes/corpus.hpp"
#include "fairaes/random.hpp"

namespace fairaes::test {

inline Essay essay(std::string id, double score, Group group, std::string text = "some words here.") {
  return {std::move(id), std::move(text), score, score, group, Source::Synthetic};
}

// Scores drawn uniformly, optionally snapped to a coarse grid so that band
// boundaries are hit exactly.
inline Corpus random_corpus(Rng& rng, std::size_t n_native, std::size_t n_esl, bool snap = false) {
  Corpus c;
  auto score = [&] {
    const double s = rng.uniform();
    return snap ? static_cast<double>(rng.below(51)) / 50.0 : s;
  };
  for (std::size_t i = 0; i < n_native; ++i) c.push_back(essay("n" + std::to_string(i), score(), Group::Native));
  for (std::size_t i = 0; i < n_esl; ++i) c.push_back(essay("e" + std::to_string(i), score(), Group::ESL));
  return c;
}

inline std::filesystem::path data_path(const std::string& name) { return std::filesystem::path(FAIRAES_TEST_DATA) / name; }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() / ("fairaes-" + tag + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace fairaes::test
