#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "wfpp/corpus_io.hpp"
#include "wfpp/tokenizer.hpp"

namespace wfpp {

struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
};

using TokenCounts = std::unordered_map<std::string, std::uint64_t, StringHash, std::equal_to<>>;

inline constexpr int kTableFormatVersion = 1;

/// Exact corpus-wide token counts c(w) together with the tokenizer rules that
/// produced them. Frequencies f(w) = c(w) / total are derived on demand.
class FrequencyTable {
 public:
  FrequencyTable() = default;
  explicit FrequencyTable(TokenizerConfig config, std::string corpus_id = {});

  void add(std::string_view token, std::uint64_t n = 1);
  // Element-wise sum; throws ConfigMismatch on differing tokenizer rules.
  void merge_from(const FrequencyTable& other);

  std::uint64_t count(std::string_view token) const;
  // c(w)/total, 0 for unseen tokens. Throws EmptyTable when total is 0.
  double frequency(std::string_view token) const;

  std::uint64_t total() const noexcept { return total_; }
  std::size_t vocabulary_size() const noexcept { return counts_.size(); }
  bool degenerate() const noexcept { return total_ == 0; }

  const TokenizerConfig& tokenizer_config() const noexcept { return config_; }
  const std::string& tokenizer_hash() const noexcept { return hash_; }
  const std::string& corpus_id() const noexcept { return corpus_id_; }
  void set_corpus_id(std::string id) { corpus_id_ = std::move(id); }

  const TokenCounts& counts() const noexcept { return counts_; }
  // (token, count) sorted lexicographically by token bytes.
  std::vector<std::pair<std::string, std::uint64_t>> sorted_entries() const;

  friend bool operator==(const FrequencyTable& a, const FrequencyTable& b);

 private:
  TokenizerConfig config_;
  std::string hash_ = config_hash(config_);
  std::string corpus_id_;
  TokenCounts counts_;
  std::uint64_t total_ = 0;
};

FrequencyTable merge(const FrequencyTable& a, const FrequencyTable& b);

// Counts every token occurrence. Work is split over `workers` threads; the
// result does not depend on the worker count.
FrequencyTable count_corpus(std::span<const PairRecord> records, const TokenizerConfig& config,
                            unsigned workers = 1, std::string corpus_id = {});
FrequencyTable count_corpus(ManifestReader& reader, const TokenizerConfig& config,
                            unsigned workers = 1, std::string corpus_id = {});

// Table file: one JSON header line, then token<TAB>count sorted by token.
void write_table(const FrequencyTable& table, std::ostream& out);
void save_table(const FrequencyTable& table, const std::filesystem::path& path);
FrequencyTable read_table(std::istream& in);
FrequencyTable load_table(const std::filesystem::path& path);

}  // namespace wfpp
