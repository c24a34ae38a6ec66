#include "wfpp/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "wfpp/error.hpp"
#include "wfpp/random.hpp"

namespace wfpp {

ZipfSampler::ZipfSampler(std::size_t vocab_size, double exponent) {
  if (vocab_size == 0) throw Error(ErrorKind::domain, "zipf vocabulary must be non-empty");
  cdf_.resize(vocab_size);
  double acc = 0.0;
  for (std::size_t k = 0; k < vocab_size; ++k) {
    acc += std::pow(static_cast<double>(k + 1), -exponent);
    cdf_[k] = acc;
  }
  for (auto& c : cdf_) c /= acc;
  cdf_.back() = 1.0;
}

std::size_t ZipfSampler::operator()(std::mt19937_64& rng) const {
  const double u = uniform_unit(rng);
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return std::min(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
}

std::string synthetic_word(std::size_t rank) {
  static constexpr const char* kSyllables[] = {"ka", "lo", "mi", "nu", "pe", "ra", "si", "to", "ve", "zu",
                                               "ba", "de", "fi", "go", "hu", "ja", "ke", "li", "mo", "ny"};
  constexpr std::size_t base = std::size(kSyllables);
  std::string word;
  std::size_t x = rank + base;  // at least two syllables
  while (x > 0) {
    word.insert(0, kSyllables[x % base]);
    x /= base;
  }
  return word;
}

std::vector<PairRecord> synthetic_corpus(const SyntheticCorpusConfig& config) {
  if (config.min_tokens == 0 || config.min_tokens > config.max_tokens)
    throw Error(ErrorKind::domain, "synthetic caption length range is invalid");
  ZipfSampler zipf(config.vocab_size, config.exponent);
  std::vector<std::string> vocab(config.vocab_size);
  for (std::size_t k = 0; k < vocab.size(); ++k) vocab[k] = synthetic_word(k);

  std::mt19937_64 rng(config.seed);
  std::vector<PairRecord> records(config.captions);
  const std::size_t span = config.max_tokens - config.min_tokens + 1;
  char image[32];
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& r = records[i];
    r.index = i;
    std::snprintf(image, sizeof image, "img/%08zu.jpg", i);
    r.image_ref = image;
    const std::size_t n = config.min_tokens + static_cast<std::size_t>(uniform_below(rng, span));
    for (std::size_t t = 0; t < n; ++t) {
      if (t > 0) r.caption += ' ';
      r.caption += vocab[zipf(rng)];
      if (config.decorate && t + 1 < n && uniform_below(rng, 10) == 0) r.caption += ',';
    }
    if (config.decorate) {
      if (uniform_below(rng, 2) == 0) r.caption[0] = static_cast<char>(r.caption[0] - 'a' + 'A');
      if (uniform_below(rng, 20) == 0) r.caption += " <PERSON>";
    }
  }
  return records;
}

}  // namespace wfpp
