#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "wfpp/corpus_io.hpp"

namespace wfpp {

// Draws ranks 0..vocab_size-1 with P(rank k) proportional to (k+1)^-exponent.
class ZipfSampler {
 public:
  ZipfSampler(std::size_t vocab_size, double exponent);
  std::size_t operator()(std::mt19937_64& rng) const;
  std::size_t size() const noexcept { return cdf_.size(); }

 private:
  std::vector<double> cdf_;
};

// Deterministic, distinct lowercase pseudo-word for a vocabulary rank.
std::string synthetic_word(std::size_t rank);

struct SyntheticCorpusConfig {
  std::size_t captions = 1000;
  std::size_t vocab_size = 10000;
  double exponent = 1.1;
  std::size_t min_tokens = 4;  // caption length drawn uniformly in [min, max]
  std::size_t max_tokens = 20;
  std::uint64_t seed = 1;
  // Adds capitalization, commas and "<PERSON>" placeholders.
  bool decorate = false;
};

std::vector<PairRecord> synthetic_corpus(const SyntheticCorpusConfig& config);

}  // namespace wfpp
