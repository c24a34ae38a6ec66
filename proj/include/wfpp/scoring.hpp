#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wfpp/corpus_io.hpp"
#include "wfpp/frequency.hpp"
#include "wfpp/tokenizer.hpp"

namespace wfpp {

inline constexpr double kDefaultThreshold = 1e-7;
inline constexpr double kMinWordProb = 1e-300;

struct ScoringConfig {
  double threshold = kDefaultThreshold;  // t, must lie in (0, 1)
  bool normalize_by_length = true;

  // Throws DomainError unless 0 < threshold < 1.
  void validate() const;
  friend bool operator==(const ScoringConfig&, const ScoringConfig&) = default;
};

/// Per-word discard probability: 1 - sqrt(t / f) when f > t, exactly 1
/// otherwise (including unseen tokens with f = 0).
double word_discard_prob(double frequency, double threshold);

struct TextScore {
  double score = 0.0;
  // Sort key. log(score), computed without the underflow of the linear product.
  double log_score = 0.0;
  std::size_t n = 0;
};

// Joint score from per-word probabilities. With normalization the linear
// score is the unnormalized score divided by n, on the same rounding path.
TextScore combine_word_probs(std::span<const double> word_probs, bool normalize_by_length);

struct ScoredRecord {
  PairRecord record;
  std::vector<std::string> tokens;
  std::vector<double> word_probs;
  double score = 0.0;
  double log_score = 0.0;
  std::size_t n = 0;

  // Captions with no tokens carry no score; they sort as +infinity.
  bool empty_caption() const noexcept { return n == 0; }
};

// Throws EmptyCaption if the caption has no tokens, EmptyTable if the table is empty.
ScoredRecord score_text(std::string_view caption, const FrequencyTable& table, const ScoringConfig& scoring,
                        const TokenizerConfig& tokenizer);

// Never throws EmptyCaption: empty captions get the +infinity sentinel.
ScoredRecord score_record(const PairRecord& record, const FrequencyTable& table, const ScoringConfig& scoring);

// Throws ConfigMismatch if `tokenizer` differs from the table's counting rules.
std::vector<ScoredRecord> score_corpus(std::span<const PairRecord> records, const FrequencyTable& table,
                                       const ScoringConfig& scoring, const TokenizerConfig& tokenizer,
                                       unsigned workers = 1);

// Streaming variant; `sink` receives records in input order.
std::uint64_t score_corpus(ManifestReader& reader, const FrequencyTable& table, const ScoringConfig& scoring,
                           const TokenizerConfig& tokenizer, unsigned workers,
                           const std::function<void(const ScoredRecord&)>& sink);

// ---- score sidecar ---------------------------------------------------------

/// One sidecar row: index<TAB>n<TAB>score<TAB>log_score.
struct ScoreEntry {
  std::uint64_t index = 0;
  std::size_t n = 0;
  double score = 0.0;
  double log_score = 0.0;

  bool empty_caption() const noexcept { return n == 0; }
};

ScoreEntry to_entry(const ScoredRecord& scored);

struct SidecarHeader {
  ScoringConfig scoring;
  TokenizerConfig tokenizer;
  std::string tokenizer_hash;
  std::string corpus_id;
};

// 17 significant digits; "inf" for the empty-caption sentinel.
std::string format_score(double value);
double parse_score(std::string_view text);

class SidecarWriter {
 public:
  SidecarWriter(const std::filesystem::path& path, const SidecarHeader& header);
  void write(const ScoreEntry& entry);
  void close();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

struct Sidecar {
  SidecarHeader header;
  std::vector<ScoreEntry> entries;
};

Sidecar read_sidecar(const std::filesystem::path& path);

}  // namespace wfpp
