#include "wfpp/frequency.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <json.hpp>
#include <ostream>

#include "parallel.hpp"
#include "wfpp/error.hpp"

namespace wfpp {

using nlohmann::json;

FrequencyTable::FrequencyTable(TokenizerConfig config, std::string corpus_id)
    : config_(std::move(config)), hash_(config_hash(config_)), corpus_id_(std::move(corpus_id)) {}

void FrequencyTable::add(std::string_view token, std::uint64_t n) {
  if (n == 0) return;
  auto it = counts_.find(token);
  if (it == counts_.end()) {
    counts_.emplace(std::string(token), n);
  } else {
    it->second += n;
  }
  total_ += n;
}

void FrequencyTable::merge_from(const FrequencyTable& other) {
  if (other.hash_ != hash_)
    throw Error(ErrorKind::config_mismatch, "cannot merge tables built with different tokenizer configs (" +
                                                hash_ + " vs " + other.hash_ + ")");
  for (const auto& [token, n] : other.counts_) add(token, n);
  if (corpus_id_ != other.corpus_id_ && !other.corpus_id_.empty()) {
    if (corpus_id_.empty()) {
      corpus_id_ = other.corpus_id_;
    } else {
      auto [lo, hi] = std::minmax(corpus_id_, other.corpus_id_);
      corpus_id_ = lo + "+" + hi;
    }
  }
}

std::uint64_t FrequencyTable::count(std::string_view token) const {
  auto it = counts_.find(token);
  return it == counts_.end() ? 0 : it->second;
}

double FrequencyTable::frequency(std::string_view token) const {
  if (total_ == 0) throw Error(ErrorKind::empty_table, "frequency lookup on an empty table");
  return static_cast<double>(count(token)) / static_cast<double>(total_);
}

std::vector<std::pair<std::string, std::uint64_t>> FrequencyTable::sorted_entries() const {
  std::vector<std::pair<std::string, std::uint64_t>> entries(counts_.begin(), counts_.end());
  std::sort(entries.begin(), entries.end());
  return entries;
}

bool operator==(const FrequencyTable& a, const FrequencyTable& b) {
  return a.hash_ == b.hash_ && a.total_ == b.total_ && a.corpus_id_ == b.corpus_id_ && a.counts_ == b.counts_;
}

FrequencyTable merge(const FrequencyTable& a, const FrequencyTable& b) {
  FrequencyTable out = a;
  out.merge_from(b);
  return out;
}

namespace {

// Counts a batch into `table` using per-worker maps merged in worker order.
void count_batch(std::span<const PairRecord> batch, const TokenizerConfig& config, unsigned workers,
                 FrequencyTable& table) {
  workers = std::max(1u, workers);
  std::vector<FrequencyTable> partial(workers, FrequencyTable(config));
  detail::parallel_chunks(batch.size(), workers, [&](std::size_t begin, std::size_t end, unsigned w) {
    std::vector<std::string> tokens;
    for (std::size_t i = begin; i < end; ++i) {
      tokens.clear();
      tokenize_into(batch[i].caption, config, tokens);
      for (const auto& t : tokens) partial[w].add(t);
    }
  });
  for (const auto& p : partial) table.merge_from(p);
}

}  // namespace

FrequencyTable count_corpus(std::span<const PairRecord> records, const TokenizerConfig& config,
                            unsigned workers, std::string corpus_id) {
  FrequencyTable table(config, std::move(corpus_id));
  count_batch(records, config, workers, table);
  return table;
}

FrequencyTable count_corpus(ManifestReader& reader, const TokenizerConfig& config, unsigned workers,
                            std::string corpus_id) {
  FrequencyTable table(config, std::move(corpus_id));
  std::vector<PairRecord> batch;
  batch.reserve(detail::kBatchSize);
  PairRecord record;
  for (;;) {
    batch.clear();
    while (batch.size() < detail::kBatchSize && reader.next(record)) batch.push_back(std::move(record));
    if (batch.empty()) break;
    count_batch(batch, config, workers, table);
  }
  return table;
}

void write_table(const FrequencyTable& table, std::ostream& out) {
  json header = {
      {"format", "wfpp-frequency-table"},
      {"format_version", kTableFormatVersion},
      {"corpus_id", table.corpus_id()},
      {"total", table.total()},
      {"vocabulary_size", table.vocabulary_size()},
      {"degenerate", table.degenerate()},
      {"tokenizer", json::parse(tokenizer_config_json(table.tokenizer_config()))},
      {"tokenizer_hash", table.tokenizer_hash()},
  };
  out << header.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
  for (const auto& [token, n] : table.sorted_entries()) out << token << '\t' << n << '\n';
}

void save_table(const FrequencyTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write table " + path.string());
  write_table(table, out);
  out.close();
  if (out.fail()) throw Error(ErrorKind::io, "write failed: " + path.string());
}

FrequencyTable read_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::format, "frequency table: missing header");
  json header = json::parse(line, nullptr, false);
  if (!header.is_object() || header.value("format", "") != "wfpp-frequency-table")
    throw Error(ErrorKind::format, "frequency table: bad header");
  if (header.value("format_version", 0) != kTableFormatVersion)
    throw Error(ErrorKind::format, "frequency table: unsupported format version");

  TokenizerConfig config = tokenizer_config_from_json(header.at("tokenizer").dump());
  FrequencyTable table(config, header.value("corpus_id", ""));
  if (header.value("tokenizer_hash", "") != table.tokenizer_hash())
    throw Error(ErrorKind::format, "frequency table: tokenizer hash does not match its config");

  std::uint64_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    auto tab = line.rfind('\t');
    std::uint64_t n = 0;
    auto count = std::string_view(line).substr(tab == std::string::npos ? 0 : tab + 1);
    auto [ptr, ec] = std::from_chars(count.data(), count.data() + count.size(), n);
    if (tab == std::string::npos || tab == 0 || ec != std::errc() || ptr != count.data() + count.size() || n == 0)
      throw Error(ErrorKind::format, "frequency table: malformed line " + std::to_string(line_no));
    table.add(std::string_view(line).substr(0, tab), n);
  }
  if (table.total() != header.value("total", std::uint64_t{0}))
    throw Error(ErrorKind::format, "frequency table: total does not match the sum of counts");
  return table;
}

FrequencyTable load_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    if (!std::filesystem::exists(path)) throw Error(ErrorKind::file_not_found, "no such file: " + path.string());
    throw Error(ErrorKind::io, "cannot open " + path.string());
  }
  return read_table(in);
}

}  // namespace wfpp
