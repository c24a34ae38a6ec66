#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wfpp/frequency.hpp"
#include "wfpp/scoring.hpp"

namespace wfpp {

inline constexpr std::size_t kDefaultTopK = 300;

struct WordRetention {
  std::string token;
  std::uint64_t count_before = 0;
  std::uint64_t count_after = 0;
  double retention_rate = 0.0;
};

struct RetentionReport {
  // Every before-vocabulary token, by descending count_before then token.
  std::vector<WordRetention> words;
  std::size_t top_k = kDefaultTopK;
};

// Throws ConfigMismatch for differing tokenizer rules and SubsetViolation when
// a token occurs more often after pruning than before.
RetentionReport retention_report(const FrequencyTable& before, const FrequencyTable& after,
                                 std::size_t top_k = kDefaultTopK);

// rank,token,count_before,count_after for the first top_k words.
void write_distribution_csv(const RetentionReport& report, std::ostream& out);

struct VocabBucketReport {
  std::vector<std::uint64_t> thresholds;
  // Number of tokens with more than thresholds[i] occurrences.
  std::vector<std::size_t> counts_before;
  std::vector<std::size_t> counts_after;
};

VocabBucketReport vocab_buckets(const FrequencyTable& before, const FrequencyTable& after,
                                std::vector<std::uint64_t> thresholds = {5, 100});
std::size_t tokens_above(const FrequencyTable& table, std::uint64_t threshold);
void write_vocab_buckets_json(const VocabBucketReport& report, std::ostream& out);

struct Listings {
  std::vector<std::pair<std::string, double>> words;     // (word, P)
  std::vector<std::pair<std::string, double>> captions;  // (caption, S)
};

// k seeded-random vocabulary words with their discard probability and k
// seeded-random scored captions. k is clamped to the population sizes.
Listings sample_listings(const FrequencyTable& table, const ScoringConfig& scoring,
                         std::span<const ScoredRecord> scored, std::size_t k, std::uint64_t seed);
// Positions (into the non-empty scored captions) picked for the caption listing.
std::vector<std::size_t> sample_caption_positions(std::size_t population, std::size_t k, std::uint64_t seed);
void write_word_listing(const Listings& listings, std::ostream& out);
void write_caption_listing(const Listings& listings, std::ostream& out);

// max count / median count over the table's vocabulary.
double max_median_ratio(const FrequencyTable& table);

double spearman_correlation(std::span<const double> x, std::span<const double> y);

}  // namespace wfpp
