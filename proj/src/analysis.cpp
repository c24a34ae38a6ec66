#include "wfpp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numeric>
#include <ostream>
#include <random>

#include "wfpp/error.hpp"
#include "wfpp/random.hpp"

namespace wfpp {

using nlohmann::json;

namespace {

void check_same_rules(const FrequencyTable& before, const FrequencyTable& after) {
  if (before.tokenizer_hash() != after.tokenizer_hash())
    throw Error(ErrorKind::config_mismatch, "before/after tables use different tokenizer configs");
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string tsv_field(const std::string& s) { return escape_tsv(s); }

}  // namespace

RetentionReport retention_report(const FrequencyTable& before, const FrequencyTable& after, std::size_t top_k) {
  check_same_rules(before, after);
  for (const auto& [token, n] : after.counts()) {
    if (n > before.count(token))
      throw Error(ErrorKind::subset_violation, "token '" + token + "' occurs more often after pruning");
  }
  RetentionReport report;
  report.top_k = top_k;
  report.words.reserve(before.vocabulary_size());
  for (const auto& [token, n] : before.counts()) {
    const std::uint64_t kept = after.count(token);
    report.words.push_back({token, n, kept, static_cast<double>(kept) / static_cast<double>(n)});
  }
  std::sort(report.words.begin(), report.words.end(), [](const WordRetention& a, const WordRetention& b) {
    return a.count_before > b.count_before || (a.count_before == b.count_before && a.token < b.token);
  });
  return report;
}

void write_distribution_csv(const RetentionReport& report, std::ostream& out) {
  out << "rank,token,count_before,count_after\n";
  const std::size_t rows = std::min(report.top_k, report.words.size());
  for (std::size_t i = 0; i < rows; ++i) {
    const auto& w = report.words[i];
    out << (i + 1) << ',' << csv_field(w.token) << ',' << w.count_before << ',' << w.count_after << '\n';
  }
}

std::size_t tokens_above(const FrequencyTable& table, std::uint64_t threshold) {
  return static_cast<std::size_t>(std::count_if(table.counts().begin(), table.counts().end(),
                                                [&](const auto& kv) { return kv.second > threshold; }));
}

VocabBucketReport vocab_buckets(const FrequencyTable& before, const FrequencyTable& after,
                                std::vector<std::uint64_t> thresholds) {
  check_same_rules(before, after);
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  VocabBucketReport report;
  report.thresholds = std::move(thresholds);
  for (auto t : report.thresholds) {
    report.counts_before.push_back(tokens_above(before, t));
    report.counts_after.push_back(tokens_above(after, t));
  }
  return report;
}

void write_vocab_buckets_json(const VocabBucketReport& report, std::ostream& out) {
  json buckets = json::array();
  for (std::size_t i = 0; i < report.thresholds.size(); ++i) {
    buckets.push_back({{"more_than", report.thresholds[i]},
                       {"before", report.counts_before[i]},
                       {"after", report.counts_after[i]}});
  }
  out << json{{"buckets", std::move(buckets)}}.dump(2) << '\n';
}

std::vector<std::size_t> sample_caption_positions(std::size_t population, std::size_t k, std::uint64_t seed) {
  std::vector<std::size_t> positions(population);
  std::iota(positions.begin(), positions.end(), std::size_t{0});
  std::mt19937_64 rng(splitmix64(seed ^ 0x5bd1e995ULL));
  const std::size_t kc = std::min(k, population);
  partial_shuffle(std::span(positions), kc, rng);
  positions.resize(kc);
  return positions;
}

Listings sample_listings(const FrequencyTable& table, const ScoringConfig& scoring,
                         std::span<const ScoredRecord> scored, std::size_t k, std::uint64_t seed) {
  scoring.validate();
  Listings out;
  if (k == 0) return out;

  auto vocab = table.sorted_entries();
  std::mt19937_64 word_rng(splitmix64(seed));
  const std::size_t kw = std::min(k, vocab.size());
  partial_shuffle(std::span(vocab), kw, word_rng);
  vocab.resize(kw);
  std::sort(vocab.begin(), vocab.end(), [](const auto& a, const auto& b) {
    return a.second > b.second || (a.second == b.second && a.first < b.first);
  });
  for (const auto& [token, n] : vocab)
    out.words.emplace_back(token, word_discard_prob(table.frequency(token), scoring.threshold));

  std::vector<std::size_t> nonempty;
  for (std::size_t i = 0; i < scored.size(); ++i)
    if (!scored[i].empty_caption()) nonempty.push_back(i);
  std::vector<std::size_t> picks;
  for (std::size_t p : sample_caption_positions(nonempty.size(), k, seed)) picks.push_back(nonempty[p]);
  // Highest score first, as a reader scanning for "most discardable" expects.
  std::sort(picks.begin(), picks.end(), [&](std::size_t a, std::size_t b) {
    return scored[a].log_score > scored[b].log_score || (scored[a].log_score == scored[b].log_score && a < b);
  });
  for (std::size_t i : picks) out.captions.emplace_back(scored[i].record.caption, scored[i].score);
  return out;
}

void write_word_listing(const Listings& listings, std::ostream& out) {
  out << "word\tP\n";
  for (const auto& [w, p] : listings.words) out << tsv_field(w) << '\t' << format_score(p) << '\n';
}

void write_caption_listing(const Listings& listings, std::ostream& out) {
  out << "caption\tS\n";
  for (const auto& [c, s] : listings.captions) out << tsv_field(c) << '\t' << format_score(s) << '\n';
}

double max_median_ratio(const FrequencyTable& table) {
  if (table.vocabulary_size() == 0) throw Error(ErrorKind::empty_table, "ratio of an empty table");
  std::vector<std::uint64_t> counts;
  counts.reserve(table.vocabulary_size());
  for (const auto& kv : table.counts()) counts.push_back(kv.second);
  std::sort(counts.begin(), counts.end());
  const std::size_t m = counts.size();
  const double median = m % 2 ? static_cast<double>(counts[m / 2])
                              : 0.5 * (static_cast<double>(counts[m / 2 - 1]) + static_cast<double>(counts[m / 2]));
  return static_cast<double>(counts.back()) / median;
}

namespace {

// Average ranks (1-based), ties share the mean rank.
std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double mean_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = mean_rank;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorKind::domain, "spearman needs two equal-length samples");
  auto rx = ranks(x);
  auto ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0 || syy == 0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace wfpp
