#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wfpp/corpus_io.hpp"
#include "wfpp/scoring.hpp"
#include "wfpp/tokenizer.hpp"

namespace wfpp {

enum class Strategy { wfpp, wfpp_second_half, random, length, metadata };

Strategy parse_strategy(std::string_view name);
const char* strategy_name(Strategy strategy);

struct PruneConfig {
  Strategy strategy = Strategy::wfpp;
  double fraction = 0.5;
  std::uint64_t seed = 0;
  ScoringConfig scoring;
  std::vector<std::string> metadata_entries;
  std::size_t per_entry_cap = 1;

  void validate() const;
};

// floor(fraction * n), at least 1 for a non-empty corpus. Throws DomainError
// unless fraction lies in (0, 1].
std::size_t target_size(std::size_t n, double fraction);

/// Kept record indices in increasing (source) order.
struct Selection {
  Strategy strategy = Strategy::wfpp;
  double fraction = 1.0;
  std::uint64_t seed = 0;
  std::size_t corpus_size = 0;
  std::size_t target = 0;
  std::vector<std::uint64_t> kept;

  std::size_t removed() const noexcept { return corpus_size - kept.size(); }
  bool undershoot() const noexcept { return kept.size() < target; }
};

struct ScoreKey {
  std::uint64_t index = 0;
  double log_score = 0.0;  // +inf for empty captions
};

struct LengthKey {
  std::uint64_t index = 0;
  std::size_t n = 0;
};

// Keeps the lowest (log_score, index) records.
Selection prune_wfpp(std::span<const ScoreKey> scores, double fraction);
// Keeps the highest-scoring records; ties still prefer the lower index.
Selection prune_wfpp_second_half(std::span<const ScoreKey> scores, double fraction);
// Uniform sample without replacement over the given record indices.
Selection prune_random(std::span<const std::uint64_t> indices, double fraction, std::uint64_t seed);
Selection prune_random(std::size_t n, double fraction, std::uint64_t seed);
// Keeps the longest captions; ties by lower index.
Selection prune_length(std::span<const LengthKey> lengths, double fraction);

/// Simplified metadata balancing: records whose token sequence contains an
/// entry (as a contiguous token subsequence) are eligible; each entry keeps
/// at most `per_entry_cap` of its matches, sampled uniformly with the seed.
/// The union is trimmed to floor(fraction * N) by a seeded shuffle.
struct MetadataMatcher {
  MetadataMatcher(std::span<const std::string> entries, const TokenizerConfig& tokenizer);

  // Entry positions (into the entry list) whose tokens occur in `tokens`.
  std::vector<std::size_t> match(std::span<const std::string> tokens) const;
  std::size_t entry_count() const noexcept { return entries_.size(); }

 private:
  std::vector<std::vector<std::string>> entries_;
};

class MetadataSelector {
 public:
  MetadataSelector(std::span<const std::string> entries, std::size_t per_entry_cap, const TokenizerConfig& tokenizer);

  void add(const PairRecord& record);
  Selection finish(double fraction, std::uint64_t seed) const;

 private:
  TokenizerConfig tokenizer_;
  MetadataMatcher matcher_;
  std::size_t cap_;
  std::vector<std::vector<std::uint64_t>> matches_;
  std::size_t corpus_size_ = 0;
  std::vector<std::string> tokens_;
};

Selection prune_metadata(std::span<const PairRecord> records, std::span<const std::string> entries,
                         std::size_t per_entry_cap, std::uint64_t seed, const TokenizerConfig& tokenizer = {},
                         double fraction = 1.0);

std::vector<ScoreKey> score_keys(std::span<const ScoredRecord> scored);
std::vector<ScoreKey> score_keys(std::span<const ScoreEntry> entries);
std::vector<LengthKey> length_keys(std::span<const ScoreEntry> entries);

// Emits exactly the kept records in source order. Throws IndexOutOfRange if a
// kept index does not correspond to a record of the stream.
std::vector<PairRecord> apply_selection(std::span<const PairRecord> records, const Selection& selection);
std::uint64_t apply_selection(ManifestReader& reader, const Selection& selection, ManifestWriter& writer);

// Selection file (JSON). Kept indices are stored either as a plain list or as
// [start, length] runs, whichever is shorter.
void write_selection(const Selection& selection, std::ostream& out);
void save_selection(const Selection& selection, const std::filesystem::path& path);
Selection load_selection(const std::filesystem::path& path);

}  // namespace wfpp
