#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "test_util.hpp"
#include "worked_example.hpp"
#include "wfpp/error.hpp"
#include "wfpp/pruning.hpp"
#include "wfpp/synthetic.hpp"

using namespace wfpp;
using Indices = std::vector<std::uint64_t>;

namespace {

std::vector<ScoreKey> keys_from(std::initializer_list<double> scores) {
  std::vector<ScoreKey> keys;
  std::uint64_t i = 0;
  for (double s : scores) keys.push_back({i++, std::log(s)});
  return keys;
}

std::vector<PairRecord> records_of(const std::vector<std::string>& captions) {
  std::vector<PairRecord> out;
  for (std::size_t i = 0; i < captions.size(); ++i) out.push_back({i, "img" + std::to_string(i), captions[i]});
  return out;
}

std::vector<ScoredRecord> scored_synthetic(std::size_t n, std::uint64_t seed) {
  SyntheticCorpusConfig sc;
  sc.captions = n;
  sc.vocab_size = 800;
  sc.seed = seed;
  auto records = synthetic_corpus(sc);
  auto table = count_corpus(records, {});
  return score_corpus(records, table, {1e-4, true}, {});
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::config;
}

}  // namespace

TEST(TargetSize, FloorWithMinimumOne) {
  EXPECT_EQ(target_size(4, 0.5), 2u);
  EXPECT_EQ(target_size(5, 0.5), 2u);
  EXPECT_EQ(target_size(3, 0.1), 1u);
  EXPECT_EQ(target_size(7, 1.0), 7u);
  EXPECT_EQ(target_size(0, 0.5), 0u);
  EXPECT_EQ(kind_of([] { target_size(4, 0.0); }), ErrorKind::domain);
  EXPECT_EQ(kind_of([] { target_size(4, 1.5); }), ErrorKind::domain);
}

TEST(PruneWfpp, KeepsLowestScores) {
  auto s = prune_wfpp(keys_from({0.9, 0.1, 0.5, 0.3}), 0.5);
  EXPECT_EQ(s.kept, (Indices{1, 3}));
  EXPECT_EQ(s.removed(), 2u);
}

TEST(PruneWfpp, FullFractionKeepsEverything) {
  auto keys = keys_from({0.9, 0.1, 0.5, 0.3});
  EXPECT_EQ(prune_wfpp(keys, 1.0).kept, (Indices{0, 1, 2, 3}));
  EXPECT_EQ(prune_wfpp_second_half(keys, 1.0).kept, (Indices{0, 1, 2, 3}));
  EXPECT_EQ(prune_random(4, 1.0, 3).kept, (Indices{0, 1, 2, 3}));
  std::vector<LengthKey> lengths = {{0, 1}, {1, 2}, {2, 3}, {3, 4}};
  EXPECT_EQ(prune_length(lengths, 1.0).kept, (Indices{0, 1, 2, 3}));
}

TEST(PruneWfpp, TiesBreakByLowerIndex) {
  auto s = prune_wfpp(keys_from({0.5, 0.5, 0.5, 0.5}), 0.5);
  EXPECT_EQ(s.kept, (Indices{0, 1}));
  EXPECT_EQ(prune_wfpp_second_half(keys_from({0.5, 0.5, 0.5, 0.5}), 0.5).kept, (Indices{0, 1}));
}

TEST(PruneWfpp, EmptyCaptionsArePrunedFirst) {
  std::vector<ScoreKey> keys = {{0, std::numeric_limits<double>::infinity()}, {1, -1.0}, {2, -2.0}};
  EXPECT_EQ(prune_wfpp(keys, 0.67).kept, (Indices{1, 2}));
  EXPECT_EQ(prune_wfpp_second_half(keys, 0.34).kept, (Indices{0}));
}

TEST(PruneWfpp, EmptyCorpus) {
  EXPECT_EQ(kind_of([] { prune_wfpp({}, 0.5); }), ErrorKind::empty_corpus);
  EXPECT_EQ(kind_of([] { prune_wfpp_second_half({}, 0.5); }), ErrorKind::empty_corpus);
  EXPECT_EQ(kind_of([] { prune_random(0, 0.5, 1); }), ErrorKind::empty_corpus);
  EXPECT_EQ(kind_of([] { prune_length({}, 0.5); }), ErrorKind::empty_corpus);
}

TEST(PruneWfpp, WorkedExampleKeepsRareWordCaption) {
  auto table = wfpp::testing::worked_example_table();
  auto records = records_of({"a picture of barcode", "a picture of dog"});
  auto scored = score_corpus(records, table, {wfpp::testing::kWorkedThreshold, true}, {});
  EXPECT_NEAR(scored[0].score, wfpp::testing::kBarcodeScore, 5e-5);
  EXPECT_NEAR(scored[1].score, wfpp::testing::kDogScore, 5e-5);
  EXPECT_EQ(prune_wfpp(score_keys(scored), 0.5).kept, (Indices{0}));
}

TEST(PruneSecondHalf, KeepsHighestScores) {
  EXPECT_EQ(prune_wfpp_second_half(keys_from({0.9, 0.1, 0.5, 0.3}), 0.5).kept, (Indices{0, 2}));
}

TEST(PruneSecondHalf, HalvesPartitionTheCorpus) {
  auto scored = scored_synthetic(400, 3);
  auto keys = score_keys(scored);
  auto first = prune_wfpp(keys, 0.5).kept;
  auto second = prune_wfpp_second_half(keys, 0.5).kept;
  Indices all;
  std::set_union(first.begin(), first.end(), second.begin(), second.end(), std::back_inserter(all));
  Indices both;
  std::set_intersection(first.begin(), first.end(), second.begin(), second.end(), std::back_inserter(both));
  EXPECT_EQ(all.size(), 400u);
  EXPECT_TRUE(both.empty());
}

// Unnormalized scores only: with the 1/n factor caption length can outweigh
// word frequency, and the ordering does not always hold.
TEST(PruneSecondHalf, KeepsMoreFrequentTokens) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SyntheticCorpusConfig sc;
    sc.captions = 600;
    sc.vocab_size = 1000;
    sc.seed = seed;
    auto records = synthetic_corpus(sc);
    auto table = count_corpus(records, {});
    auto scored = score_corpus(records, table, {1e-7, false}, {});
    auto keys = score_keys(scored);
    auto mean_freq = [&](const Indices& kept) {
      double sum = 0;
      std::size_t n = 0;
      for (auto i : kept)
        for (const auto& tok : scored[i].tokens) {
          sum += table.frequency(tok);
          ++n;
        }
      return sum / static_cast<double>(n);
    };
    EXPECT_GE(mean_freq(prune_wfpp_second_half(keys, 0.5).kept), mean_freq(prune_wfpp(keys, 0.5).kept)) << seed;
  }
}

TEST(PruneRandom, SeedDeterminism) {
  auto a = prune_random(4, 0.5, 42);
  auto b = prune_random(4, 0.5, 42);
  EXPECT_EQ(a.kept, b.kept);
  EXPECT_EQ(a.kept.size(), 2u);
  EXPECT_NE(prune_random(1000, 0.5, 1).kept, prune_random(1000, 0.5, 2).kept);
}

TEST(PruneRandom, SamplesOnlyGivenIndices) {
  Indices population = {3, 7, 9, 12, 20};
  auto s = prune_random(population, 0.6, 5);
  ASSERT_EQ(s.kept.size(), 3u);
  for (auto i : s.kept) EXPECT_TRUE(std::count(population.begin(), population.end(), i));
  EXPECT_TRUE(std::is_sorted(s.kept.begin(), s.kept.end()));
}

TEST(PruneRandom, InclusionIsUniform) {
  // Monte Carlo over 100 seeds, N = 10000, fraction 0.5. Inclusion rate of
  // every block of 500 consecutive indices stays within 50% +- 2%.
  const std::size_t n = 10000;
  std::vector<int> hits(n, 0);
  for (std::uint64_t seed = 0; seed < 100; ++seed)
    for (auto i : prune_random(n, 0.5, seed).kept) ++hits[i];
  double overall = 0;
  for (std::size_t b = 0; b < n; b += 500) {
    double rate = 0;
    for (std::size_t i = b; i < b + 500; ++i) rate += hits[i];
    rate /= 500.0 * 100.0;
    EXPECT_NEAR(rate, 0.5, 0.02) << "block " << b;
    overall += rate;
  }
  EXPECT_NEAR(overall / 20.0, 0.5, 1e-12);
  int never = static_cast<int>(std::count(hits.begin(), hits.end(), 0));
  EXPECT_EQ(never, 0);
}

TEST(PruneLength, KeepsLongest) {
  std::vector<LengthKey> lengths = {{0, 3}, {1, 10}, {2, 5}, {3, 7}};
  EXPECT_EQ(prune_length(lengths, 0.5).kept, (Indices{1, 3}));
}

TEST(PruneLength, TiesKeepLowerIndices) {
  std::vector<LengthKey> lengths = {{0, 4}, {1, 4}, {2, 4}, {3, 4}};
  EXPECT_EQ(prune_length(lengths, 0.5).kept, (Indices{0, 1}));
}

TEST(PruneLength, KeptAreLongerOnAverage) {
  auto scored = scored_synthetic(500, 8);
  std::vector<LengthKey> lengths;
  for (const auto& s : scored) lengths.push_back({s.record.index, s.n});
  auto kept = prune_length(lengths, 0.5).kept;
  std::set<std::uint64_t> keep(kept.begin(), kept.end());
  double kept_sum = 0, removed_sum = 0;
  for (const auto& l : lengths) (keep.count(l.index) ? kept_sum : removed_sum) += static_cast<double>(l.n);
  EXPECT_GE(kept_sum / static_cast<double>(kept.size()), removed_sum / static_cast<double>(lengths.size() - kept.size()));
}

TEST(PruneMetadata, CapLimitsMatchesPerEntry) {
  auto records = records_of({"a dog", "a dog", "a cat"});
  std::vector<std::string> entries = {"dog"};
  auto s = prune_metadata(records, entries, 1, 7);
  ASSERT_EQ(s.kept.size(), 1u);
  EXPECT_LT(s.kept[0], 2u);
  EXPECT_TRUE(s.undershoot());
  EXPECT_EQ(s.strategy, Strategy::metadata);
}

TEST(PruneMetadata, NoMatchesKeepNothing) {
  auto records = records_of({"a dog", "a cat"});
  std::vector<std::string> entries = {"zebra"};
  EXPECT_TRUE(prune_metadata(records, entries, 5, 1).kept.empty());
}

TEST(PruneMetadata, EmptyEntryListIsAnError) {
  auto records = records_of({"a dog"});
  EXPECT_EQ(kind_of([&] { prune_metadata(records, {}, 1, 1); }), ErrorKind::empty_entry_list);
}

TEST(PruneMetadata, MultiWordEntriesMatchContiguousTokens) {
  auto records = records_of({"New York skyline", "york new", "a new york-style pizza"});
  std::vector<std::string> entries = {"New York"};
  EXPECT_EQ(prune_metadata(records, entries, 10, 1).kept, (Indices{0, 2}));
}

TEST(PruneMetadata, RecordMatchedByTwoEntriesIsKeptOnce) {
  auto records = records_of({"dog and cat", "cat"});
  std::vector<std::string> entries = {"dog", "cat"};
  EXPECT_EQ(prune_metadata(records, entries, 5, 1).kept, (Indices{0, 1}));
}

TEST(PruneMetadata, KeptCountMatchesCapOracle) {
  SyntheticCorpusConfig sc;
  sc.captions = 2000;
  sc.vocab_size = 400;
  auto records = synthetic_corpus(sc);
  std::vector<std::string> entries;
  for (std::size_t r : {0, 3, 50, 200, 399}) entries.push_back(synthetic_word(r));
  const std::size_t cap = 40;
  auto s = prune_metadata(records, entries, cap, 11);
  std::set<std::uint64_t> kept(s.kept.begin(), s.kept.end());
  for (const auto& e : entries) {
    std::size_t matches = 0, kept_matches = 0;
    for (const auto& r : records) {
      auto toks = wfpp::testing::BruteForce::split(r.caption);
      if (std::find(toks.begin(), toks.end(), e) == toks.end()) continue;
      ++matches;
      kept_matches += kept.count(r.index);
    }
    // Records may also be kept via another entry, so kept_matches can exceed cap
    // only through overlap; with m <= cap every match is kept.
    if (matches <= cap) {
      EXPECT_EQ(kept_matches, matches) << e;
    } else {
      EXPECT_GE(kept_matches, cap) << e;
    }
  }
  EXPECT_EQ(s.kept, prune_metadata(records, entries, cap, 11).kept);
}

TEST(PruneMetadata, PerEntryKeptEqualsCapWithoutOverlap) {
  // Disjoint entries: each record contains exactly one entry word.
  std::vector<std::string> captions;
  for (int i = 0; i < 30; ++i) captions.push_back("alpha x" + std::to_string(i));
  for (int i = 0; i < 4; ++i) captions.push_back("beta y" + std::to_string(i));
  auto records = records_of(captions);
  std::vector<std::string> entries = {"alpha", "beta"};
  auto s = prune_metadata(records, entries, 10, 3);
  auto alpha = std::count_if(s.kept.begin(), s.kept.end(), [](auto i) { return i < 30; });
  auto beta = std::count_if(s.kept.begin(), s.kept.end(), [](auto i) { return i >= 30; });
  EXPECT_EQ(alpha, 10);
  EXPECT_EQ(beta, 4);
}

TEST(PruneMetadata, TrimsToFractionBudget) {
  std::vector<std::string> captions(100, "dog");
  auto records = records_of(captions);
  std::vector<std::string> entries = {"dog"};
  auto s = prune_metadata(records, entries, 80, 3, {}, 0.5);
  EXPECT_EQ(s.kept.size(), 50u);
  EXPECT_FALSE(s.undershoot());
}

TEST(ApplySelection, EmitsKeptRecordsInOrder) {
  auto records = records_of({"a", "b", "c", "d"});
  Selection s;
  s.kept = {1, 3};
  auto out = apply_selection(records, s);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0], records[1]);
  EXPECT_EQ(out[1], records[3]);
  s.kept = {0, 1, 2, 3};
  EXPECT_EQ(apply_selection(records, s), records);
}

TEST(ApplySelection, OutOfRangeIndex) {
  auto records = records_of({"a", "b"});
  Selection s;
  s.kept = {1, 5};
  EXPECT_EQ(kind_of([&] { apply_selection(records, s); }), ErrorKind::index_out_of_range);
}

TEST(ApplySelection, EndToEndThroughManifests) {
  wfpp::testing::TempDir dir;
  auto scored = scored_synthetic(300, 4);
  std::vector<PairRecord> records;
  for (const auto& s : scored) records.push_back(s.record);
  write_manifest(records, dir / "m.jsonl", ManifestFormat::jsonl);
  auto selection = prune_wfpp(score_keys(scored), 0.3);
  {
    ManifestReader reader(dir / "m.jsonl", ManifestFormat::jsonl);
    ManifestWriter writer(dir / "p.tsv", ManifestFormat::tsv);
    EXPECT_EQ(apply_selection(reader, selection, writer), 90u);
    writer.close();
  }
  auto pruned = read_manifest(dir / "p.tsv", ManifestFormat::tsv);
  ASSERT_EQ(pruned.size(), 90u);
  for (std::size_t i = 0; i < pruned.size(); ++i) {
    EXPECT_EQ(pruned[i].caption, records[selection.kept[i]].caption);
    EXPECT_EQ(pruned[i].image_ref, records[selection.kept[i]].image_ref);
  }
}

TEST(SelectionFile, RoundTripsListsAndRuns) {
  wfpp::testing::TempDir dir;
  Selection contiguous;
  contiguous.strategy = Strategy::wfpp;
  contiguous.fraction = 0.5;
  contiguous.corpus_size = 200;
  contiguous.target = 100;
  for (std::uint64_t i = 0; i < 100; ++i) contiguous.kept.push_back(i);
  save_selection(contiguous, dir / "a.json");
  auto text = wfpp::testing::read_file(dir / "a.json");
  EXPECT_NE(text.find("\"kept_runs\":[[0,100]]"), std::string::npos);
  EXPECT_EQ(load_selection(dir / "a.json").kept, contiguous.kept);

  Selection scattered = prune_random(50, 0.5, 9);
  save_selection(scattered, dir / "b.json");
  EXPECT_NE(wfpp::testing::read_file(dir / "b.json").find("kept_indices"), std::string::npos);
  auto loaded = load_selection(dir / "b.json");
  EXPECT_EQ(loaded.kept, scattered.kept);
  EXPECT_EQ(loaded.strategy, Strategy::random);
  EXPECT_EQ(loaded.seed, 9u);
}

// ---- properties ---------------------------------------------------------------

TEST(PruningProperty, DominanceAndNesting) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto scored = scored_synthetic(150 + seed * 7, seed);
    auto keys = score_keys(scored);
    auto key_less = [](const ScoreKey& a, const ScoreKey& b) {
      return a.log_score < b.log_score || (a.log_score == b.log_score && a.index < b.index);
    };
    Indices previous;
    for (double fraction : {0.5, 0.6, 0.7, 0.8, 0.9}) {
      auto kept = prune_wfpp(keys, fraction).kept;
      EXPECT_EQ(kept.size(), target_size(keys.size(), fraction));
      EXPECT_TRUE(std::includes(kept.begin(), kept.end(), previous.begin(), previous.end()));
      std::set<std::uint64_t> in(kept.begin(), kept.end());
      ScoreKey worst_kept{0, -std::numeric_limits<double>::infinity()};
      ScoreKey best_removed{std::numeric_limits<std::uint64_t>::max(), std::numeric_limits<double>::infinity()};
      for (const auto& k : keys) {
        if (in.count(k.index)) {
          if (key_less(worst_kept, k)) worst_kept = k;
        } else if (key_less(k, best_removed)) {
          best_removed = k;
        }
      }
      EXPECT_TRUE(key_less(worst_kept, best_removed));
      previous = kept;
    }
  }
}

TEST(PruningProperty, ExactCardinality) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = 1 + rng() % 300;
    double fraction = (1 + rng() % 1000) / 1000.0;
    std::vector<ScoreKey> keys;
    std::vector<LengthKey> lengths;
    for (std::size_t i = 0; i < n; ++i) {
      keys.push_back({i, -static_cast<double>(rng() % 50)});
      lengths.push_back({i, static_cast<std::size_t>(rng() % 30)});
    }
    const auto want = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(fraction * n)));
    EXPECT_EQ(prune_wfpp(keys, fraction).kept.size(), fraction == 1.0 ? n : want);
    EXPECT_EQ(prune_wfpp_second_half(keys, fraction).kept.size(), fraction == 1.0 ? n : want);
    EXPECT_EQ(prune_random(n, fraction, trial).kept.size(), fraction == 1.0 ? n : want);
    EXPECT_EQ(prune_length(lengths, fraction).kept.size(), fraction == 1.0 ? n : want);
  }
}

TEST(PruningProperty, SelectionIgnoresImageRefs) {
  SyntheticCorpusConfig sc;
  sc.captions = 300;
  auto records = synthetic_corpus(sc);
  auto other = records;
  for (auto& r : other) r.image_ref = "elsewhere/" + std::to_string(r.index * 7919 % 1000);
  auto table = count_corpus(records, {});
  auto a = score_keys(score_corpus(records, table, {}, {}));
  auto b = score_keys(score_corpus(other, table, {}, {}));
  EXPECT_EQ(prune_wfpp(a, 0.5).kept, prune_wfpp(b, 0.5).kept);
  std::vector<std::string> entries = {synthetic_word(1)};
  EXPECT_EQ(prune_metadata(records, entries, 20, 5).kept, prune_metadata(other, entries, 20, 5).kept);
}
