#include "wfpp/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numeric>
#include <ostream>
#include <random>
#include <unordered_map>

#include "wfpp/error.hpp"
#include "wfpp/random.hpp"

namespace wfpp {

using nlohmann::json;

Strategy parse_strategy(std::string_view name) {
  if (name == "wfpp") return Strategy::wfpp;
  if (name == "wfpp_second_half" || name == "wfpp-second-half") return Strategy::wfpp_second_half;
  if (name == "random") return Strategy::random;
  if (name == "length") return Strategy::length;
  if (name == "metadata") return Strategy::metadata;
  throw Error(ErrorKind::config, "unknown strategy '" + std::string(name) +
                                     "' (expected wfpp, wfpp_second_half, random, length or metadata)");
}

const char* strategy_name(Strategy strategy) {
  switch (strategy) {
    case Strategy::wfpp: return "wfpp";
    case Strategy::wfpp_second_half: return "wfpp_second_half";
    case Strategy::random: return "random";
    case Strategy::length: return "length";
    case Strategy::metadata: return "metadata";
  }
  return "unknown";
}

namespace {

void check_fraction(double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw Error(ErrorKind::domain, "fraction must lie in (0, 1], got " + format_score(fraction));
}

Selection make_selection(Strategy strategy, double fraction, std::size_t n) {
  if (n == 0) throw Error(ErrorKind::empty_corpus, "cannot prune an empty corpus");
  Selection s;
  s.strategy = strategy;
  s.fraction = fraction;
  s.corpus_size = n;
  s.target = target_size(n, fraction);
  return s;
}

template <class Key, class Less>
std::vector<std::uint64_t> keep_first(std::span<const Key> keys, std::size_t k, Less less) {
  std::vector<Key> sorted(keys.begin(), keys.end());
  if (k < sorted.size()) std::nth_element(sorted.begin(), sorted.begin() + k, sorted.end(), less);
  std::vector<std::uint64_t> kept;
  kept.reserve(k);
  for (std::size_t i = 0; i < k; ++i) kept.push_back(sorted[i].index);
  std::sort(kept.begin(), kept.end());
  return kept;
}

}  // namespace

void PruneConfig::validate() const {
  check_fraction(fraction);
  if (strategy == Strategy::wfpp || strategy == Strategy::wfpp_second_half) scoring.validate();
  if (strategy == Strategy::metadata) {
    if (metadata_entries.empty()) throw Error(ErrorKind::empty_entry_list, "metadata strategy needs entries");
    if (per_entry_cap == 0) throw Error(ErrorKind::config, "per-entry cap must be positive");
  }
}

std::size_t target_size(std::size_t n, double fraction) {
  check_fraction(fraction);
  if (n == 0) return 0;
  if (fraction == 1.0) return n;
  auto k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
  return std::clamp<std::size_t>(k, 1, n);
}

Selection prune_wfpp(std::span<const ScoreKey> scores, double fraction) {
  Selection s = make_selection(Strategy::wfpp, fraction, scores.size());
  s.kept = keep_first(scores, s.target, [](const ScoreKey& a, const ScoreKey& b) {
    return a.log_score < b.log_score || (a.log_score == b.log_score && a.index < b.index);
  });
  return s;
}

Selection prune_wfpp_second_half(std::span<const ScoreKey> scores, double fraction) {
  Selection s = make_selection(Strategy::wfpp_second_half, fraction, scores.size());
  s.kept = keep_first(scores, s.target, [](const ScoreKey& a, const ScoreKey& b) {
    return a.log_score > b.log_score || (a.log_score == b.log_score && a.index < b.index);
  });
  return s;
}

Selection prune_random(std::span<const std::uint64_t> indices, double fraction, std::uint64_t seed) {
  Selection s = make_selection(Strategy::random, fraction, indices.size());
  s.seed = seed;
  std::vector<std::uint64_t> pool(indices.begin(), indices.end());
  std::mt19937_64 rng(seed);
  partial_shuffle(std::span<std::uint64_t>(pool), s.target, rng);
  s.kept.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(s.target));
  std::sort(s.kept.begin(), s.kept.end());
  return s;
}

Selection prune_random(std::size_t n, double fraction, std::uint64_t seed) {
  std::vector<std::uint64_t> indices(n);
  std::iota(indices.begin(), indices.end(), std::uint64_t{0});
  return prune_random(indices, fraction, seed);
}

Selection prune_length(std::span<const LengthKey> lengths, double fraction) {
  Selection s = make_selection(Strategy::length, fraction, lengths.size());
  s.kept = keep_first(lengths, s.target, [](const LengthKey& a, const LengthKey& b) {
    return a.n > b.n || (a.n == b.n && a.index < b.index);
  });
  return s;
}

MetadataMatcher::MetadataMatcher(std::span<const std::string> entries, const TokenizerConfig& tokenizer) {
  entries_.reserve(entries.size());
  for (const auto& e : entries) entries_.push_back(tokenize(e, tokenizer));
}

std::vector<std::size_t> MetadataMatcher::match(std::span<const std::string> tokens) const {
  std::vector<std::size_t> hits;
  for (std::size_t e = 0; e < entries_.size(); ++e) {
    const auto& pattern = entries_[e];
    if (pattern.empty() || pattern.size() > tokens.size()) continue;
    auto it = std::search(tokens.begin(), tokens.end(), pattern.begin(), pattern.end());
    if (it != tokens.end()) hits.push_back(e);
  }
  return hits;
}

MetadataSelector::MetadataSelector(std::span<const std::string> entries, std::size_t per_entry_cap,
                                   const TokenizerConfig& tokenizer)
    : tokenizer_(tokenizer), matcher_(entries, tokenizer), cap_(per_entry_cap), matches_(entries.size()) {
  if (entries.empty()) throw Error(ErrorKind::empty_entry_list, "metadata strategy needs at least one entry");
  if (per_entry_cap == 0) throw Error(ErrorKind::config, "per-entry cap must be positive");
}

void MetadataSelector::add(const PairRecord& record) {
  ++corpus_size_;
  tokens_.clear();
  tokenize_into(record.caption, tokenizer_, tokens_);
  for (std::size_t e : matcher_.match(tokens_)) matches_[e].push_back(record.index);
}

Selection MetadataSelector::finish(double fraction, std::uint64_t seed) const {
  Selection s;
  s.strategy = Strategy::metadata;
  s.fraction = fraction;
  s.seed = seed;
  s.corpus_size = corpus_size_;
  s.target = target_size(corpus_size_, fraction);

  std::vector<std::uint64_t> kept;
  for (std::size_t e = 0; e < matches_.size(); ++e) {
    std::vector<std::uint64_t> pool = matches_[e];
    if (pool.size() > cap_) {
      std::mt19937_64 rng(splitmix64(seed ^ splitmix64(e + 1)));
      partial_shuffle(std::span<std::uint64_t>(pool), cap_, rng);
      pool.resize(cap_);
    }
    kept.insert(kept.end(), pool.begin(), pool.end());
  }
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  if (kept.size() > s.target) {
    std::mt19937_64 rng(splitmix64(seed));
    partial_shuffle(std::span<std::uint64_t>(kept), s.target, rng);
    kept.resize(s.target);
    std::sort(kept.begin(), kept.end());
  }
  s.kept = std::move(kept);
  return s;
}

Selection prune_metadata(std::span<const PairRecord> records, std::span<const std::string> entries,
                         std::size_t per_entry_cap, std::uint64_t seed, const TokenizerConfig& tokenizer,
                         double fraction) {
  MetadataSelector selector(entries, per_entry_cap, tokenizer);
  for (const auto& r : records) selector.add(r);
  return selector.finish(fraction, seed);
}

std::vector<ScoreKey> score_keys(std::span<const ScoredRecord> scored) {
  std::vector<ScoreKey> keys;
  keys.reserve(scored.size());
  for (const auto& s : scored) keys.push_back({s.record.index, s.log_score});
  return keys;
}

std::vector<ScoreKey> score_keys(std::span<const ScoreEntry> entries) {
  std::vector<ScoreKey> keys;
  keys.reserve(entries.size());
  for (const auto& e : entries) keys.push_back({e.index, e.log_score});
  return keys;
}

std::vector<LengthKey> length_keys(std::span<const ScoreEntry> entries) {
  std::vector<LengthKey> keys;
  keys.reserve(entries.size());
  for (const auto& e : entries) keys.push_back({e.index, e.n});
  return keys;
}

std::vector<PairRecord> apply_selection(std::span<const PairRecord> records, const Selection& selection) {
  std::vector<PairRecord> out;
  out.reserve(selection.kept.size());
  std::size_t next = 0;
  for (const auto& r : records) {
    if (next == selection.kept.size()) break;
    if (r.index > selection.kept[next])
      throw Error(ErrorKind::index_out_of_range, "kept index " + std::to_string(selection.kept[next]) +
                                                     " has no record");
    if (r.index == selection.kept[next]) {
      out.push_back(r);
      ++next;
    }
  }
  if (next != selection.kept.size())
    throw Error(ErrorKind::index_out_of_range, "kept index " + std::to_string(selection.kept[next]) +
                                                   " is past the end of the corpus");
  return out;
}

std::uint64_t apply_selection(ManifestReader& reader, const Selection& selection, ManifestWriter& writer) {
  std::size_t next = 0;
  PairRecord r;
  while (next < selection.kept.size() && reader.next(r)) {
    if (r.index > selection.kept[next])
      throw Error(ErrorKind::index_out_of_range, "kept index " + std::to_string(selection.kept[next]) +
                                                     " has no record");
    if (r.index == selection.kept[next]) {
      writer.write(r);
      ++next;
    }
  }
  if (next != selection.kept.size())
    throw Error(ErrorKind::index_out_of_range, "kept index " + std::to_string(selection.kept[next]) +
                                                   " is past the end of the corpus");
  return next;
}

void write_selection(const Selection& s, std::ostream& out) {
  json runs = json::array();
  for (std::size_t i = 0; i < s.kept.size();) {
    std::size_t j = i + 1;
    while (j < s.kept.size() && s.kept[j] == s.kept[j - 1] + 1) ++j;
    runs.push_back({s.kept[i], j - i});
    i = j;
  }
  json doc = {
      {"strategy", strategy_name(s.strategy)},
      {"fraction", s.fraction},
      {"seed", s.seed},
      {"corpus_size", s.corpus_size},
      {"target", s.target},
      {"kept_count", s.kept.size()},
      {"removed_count", s.removed()},
      {"undershoot", s.undershoot()},
  };
  if (s.strategy == Strategy::metadata) doc["comparator"] = "simplified metadata balancing";
  if (runs.size() * 2 < s.kept.size()) {
    doc["kept_runs"] = std::move(runs);
  } else {
    doc["kept_indices"] = s.kept;
  }
  out << doc.dump() << '\n';
}

void save_selection(const Selection& selection, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write selection " + path.string());
  write_selection(selection, out);
  out.close();
  if (out.fail()) throw Error(ErrorKind::io, "write failed: " + path.string());
}

Selection load_selection(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::file_not_found, "cannot open " + path.string());
  json doc = json::parse(in, nullptr, false);
  if (!doc.is_object()) throw Error(ErrorKind::format, "selection file is not a JSON object");
  Selection s;
  try {
    s.strategy = parse_strategy(doc.at("strategy").get<std::string>());
    s.fraction = doc.at("fraction").get<double>();
    s.seed = doc.at("seed").get<std::uint64_t>();
    s.corpus_size = doc.at("corpus_size").get<std::size_t>();
    s.target = doc.at("target").get<std::size_t>();
    if (auto it = doc.find("kept_runs"); it != doc.end()) {
      for (const auto& run : *it) {
        auto start = run.at(0).get<std::uint64_t>();
        auto len = run.at(1).get<std::uint64_t>();
        for (std::uint64_t k = 0; k < len; ++k) s.kept.push_back(start + k);
      }
    } else {
      s.kept = doc.at("kept_indices").get<std::vector<std::uint64_t>>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::format, std::string("bad selection file: ") + e.what());
  }
  return s;
}

}  // namespace wfpp
