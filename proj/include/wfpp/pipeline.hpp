#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wfpp/analysis.hpp"
#include "wfpp/corpus_io.hpp"
#include "wfpp/pruning.hpp"
#include "wfpp/scoring.hpp"
#include "wfpp/tokenizer.hpp"

namespace wfpp {

namespace fs = std::filesystem;

/// Machine-readable per-stage summary, printed to stdout as one JSON line.
struct StageSummary {
  std::string stage;
  std::uint64_t input_records = 0;
  std::uint64_t output_records = 0;
  double wall_seconds = 0.0;
};

std::string summary_json(const StageSummary& summary);

struct CountOptions {
  fs::path input;
  ManifestFormat format = ManifestFormat::jsonl;
  fs::path output;
  unsigned workers = 1;
  TokenizerConfig tokenizer;
  std::string corpus_id;  // defaults to the input file stem
  std::optional<fs::path> skip_report;
};

struct ScoreOptions {
  fs::path input;
  ManifestFormat format = ManifestFormat::jsonl;
  fs::path freq;
  ScoringConfig scoring;
  fs::path output;
  unsigned workers = 1;
};

struct PruneOptions {
  fs::path input;
  ManifestFormat format = ManifestFormat::jsonl;
  std::optional<fs::path> scores;  // required by wfpp, wfpp_second_half and length
  PruneConfig prune;
  fs::path output;
  ManifestFormat output_format = ManifestFormat::jsonl;
  std::optional<fs::path> emit_selection;
  // Metadata matching rules; defaults to the sidecar's tokenizer, else defaults.
  std::optional<TokenizerConfig> tokenizer;
};

struct AnalyzeOptions {
  fs::path before;
  fs::path after;
  std::size_t top_k = kDefaultTopK;
  std::vector<std::uint64_t> buckets = {5, 100};
  fs::path out_dir;
  // Manifest scored against `before` for caption_listing.tsv.
  std::optional<fs::path> input;
  ManifestFormat format = ManifestFormat::jsonl;
  ScoringConfig scoring;
  std::size_t listing_k = 20;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

StageSummary run_count(const CountOptions& options);
StageSummary run_score(const ScoreOptions& options);
StageSummary run_prune(const PruneOptions& options);
StageSummary run_analyze(const AnalyzeOptions& options);

// One entry per non-empty line; lines starting with '#' are comments.
std::vector<std::string> load_entries(const fs::path& path);

struct PipelineConfig {
  fs::path input;
  ManifestFormat format = ManifestFormat::jsonl;
  fs::path out_dir = "wfpp_out";
  unsigned workers = 1;
  TokenizerConfig tokenizer;
  ScoringConfig scoring;
  Strategy strategy = Strategy::wfpp;
  double fraction = 0.5;
  std::uint64_t seed = 0;
  std::optional<fs::path> entries;
  std::size_t cap = 1;
  std::size_t top_k = kDefaultTopK;
  std::vector<std::uint64_t> buckets = {5, 100};
  std::size_t listing_k = 20;

  // Throws ConfigError with an actionable message.
  void validate() const;
};

struct PipelinePaths {
  fs::path freq;
  fs::path skip_report;
  fs::path scores;
  fs::path pruned;
  fs::path selection;
  fs::path freq_pruned;
  fs::path reports;
};

PipelinePaths pipeline_paths(const PipelineConfig& config);

// Applies one `key = value` setting; throws ConfigError for unknown keys or bad values.
void apply_setting(PipelineConfig& config, std::string_view key, std::string_view value);
PipelineConfig parse_pipeline_config(std::istream& in);
PipelineConfig load_pipeline_config(const fs::path& path);
void write_pipeline_config(const PipelineConfig& config, std::ostream& out);

// count -> score -> prune -> count(pruned) -> analyze. Writes every artifact
// under config.out_dir; `on_stage` sees each summary as it completes.
std::vector<StageSummary> run_pipeline(const PipelineConfig& config,
                                       const std::function<void(const StageSummary&)>& on_stage = {});

}  // namespace wfpp
