// Copyright 2026 The Spanner Authors.
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

// Scratch registries built from the synthetic lexicon corpus.
#ifndef SPANNER_TESTS_FIXTURES_HPP_
#define SPANNER_TESTS_FIXTURES_HPP_

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "spanner/combiner.hpp"
#include "spanner/model.hpp"
#include "spanner/registry.hpp"
#include "spanner/synthetic.hpp"

namespace fixture {

namespace fs = std::filesystem;

class TempDir {
 public:
  explicit TempDir(const std::string &stem) {
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            (stem + "-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;

  const fs::path &path() const { return path_; }

 private:
  fs::path path_;
};

inline void WriteText(const fs::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string ReadText(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Data {
  spanner::Corpus train, dev, test;
  fs::path train_path, dev_path, test_path, model_path;
};

// Writes train/dev/test corpora and a briefly trained checkpoint into `dir`.
inline Data WriteData(const fs::path &dir, std::size_t test_size = 30,
                      int epochs = 3) {
  const auto options = spanner::LexiconCorpusOptions::Default();
  Data d;
  d.train = spanner::MakeLexiconCorpus(options, 30, 1);
  d.dev = spanner::MakeLexiconCorpus(options, 20, 2);
  d.test = spanner::MakeLexiconCorpus(options, test_size, 3);
  d.train_path = dir / "train.conll";
  d.dev_path = dir / "dev.conll";
  d.test_path = dir / "test.conll";
  d.model_path = dir / "model.json";
  WriteText(d.train_path, spanner::WriteConll(d.train));
  WriteText(d.dev_path, spanner::WriteConll(d.dev));
  WriteText(d.test_path, spanner::WriteConll(d.test));
  spanner::ModelConfig config;
  config.word_dim = 8;
  config.hidden_dim = 8;
  config.length_dim = 4;
  config.epochs = epochs;
  spanner::WriteCheckpointFile(spanner::Train(d.train, d.dev, config),
                               d.model_path.string());
  return d;
}

inline spanner::RegistrySetup Setup(const Data &d, bool with_dev = true) {
  spanner::RegistrySetup setup;
  setup.train_path = d.train_path.string();
  setup.test_path = d.test_path.string();
  if (with_dev) setup.dev_path = d.dev_path.string();
  setup.checkpoint_path = d.model_path.string();
  return setup;
}

// Synthetic system output text for one corpus.
inline std::string SystemText(const spanner::Corpus &gold,
                              const spanner::ErrorModel &errors,
                              std::uint64_t seed) {
  const auto out = spanner::SynthesizeSystem(gold, errors, seed, "tmp");
  return spanner::WriteConll(gold, out.spans);
}

}  // namespace fixture

#endif  // SPANNER_TESTS_FIXTURES_HPP_
