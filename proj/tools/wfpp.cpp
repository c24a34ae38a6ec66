// wfpp: word-frequency-based image-text pair pruning.
//
//   wfpp count   --input M.jsonl --format jsonl --output freq.tsv [--workers N]
//   wfpp score   --input M.jsonl --freq freq.tsv --t 1e-7 [--no-length-norm] --output scores.tsv
//   wfpp prune   --input M.jsonl --scores scores.tsv --strategy wfpp --fraction 0.5 --output pruned.jsonl
//   wfpp analyze --before freq.tsv --after freq_pruned.tsv --top-k 300 --buckets 5,100 --out-dir reports/
//   wfpp run     --config pipeline.cfg [--dump-config used.cfg]
//   wfpp synth   --captions 1000 --output fixture.jsonl

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "wfpp/error.hpp"
#include "wfpp/pipeline.hpp"
#include "wfpp/synthetic.hpp"

namespace {

using namespace wfpp;

void report(const StageSummary& s) {
  std::cerr << "wfpp: " << s.stage << ": " << s.input_records << " in, " << s.output_records << " out, "
            << s.wall_seconds << "s\n";
  std::cout << summary_json(s) << std::endl;
}

struct TokenizerFlags {
  bool no_lowercase = false;
  bool no_split_punctuation = false;
  std::optional<std::size_t> max_tokens;
  std::vector<std::string> atoms;

  void add_to(CLI::App* cmd) {
    cmd->add_flag("--no-lowercase", no_lowercase, "Keep letter case");
    cmd->add_flag("--no-split-punctuation", no_split_punctuation, "Keep punctuation attached to words");
    cmd->add_option("--max-tokens", max_tokens, "Truncate captions to this many tokens")->check(CLI::PositiveNumber);
    cmd->add_option("--placeholder-atom", atoms, "Literal kept as one token, e.g. <PERSON> (repeatable)");
  }

  TokenizerConfig config() const {
    TokenizerConfig c;
    c.lowercase = !no_lowercase;
    c.split_punctuation = !no_split_punctuation;
    c.max_tokens = max_tokens;
    c.placeholder_atoms = atoms;
    return c;
  }
};

std::vector<std::uint64_t> parse_buckets(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoull(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorKind::config, "--buckets expects comma-separated integers, got '" + text + "'");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Word-frequency-based image-text pair pruning"};
  app.require_subcommand(1);

  std::string input, format = "jsonl", output;
  unsigned workers = 1;

  // count
  auto* count = app.add_subcommand("count", "Build the corpus word-frequency table");
  TokenizerFlags count_tok;
  std::string corpus_id, skip_report;
  count->add_option("--input", input, "Input manifest")->required();
  count->add_option("--format", format, "jsonl or tsv");
  count->add_option("--output", output, "Frequency table path")->required();
  count->add_option("--workers", workers)->check(CLI::PositiveNumber);
  count->add_option("--corpus-id", corpus_id, "Label stored in the table header (default: input stem)");
  count->add_option("--skip-report", skip_report, "Write malformed-line report (JSON)");
  count_tok.add_to(count);

  // score
  auto* score = app.add_subcommand("score", "Score every caption against a frequency table");
  std::string freq;
  double threshold = kDefaultThreshold;
  bool no_length_norm = false;
  score->add_option("--input", input)->required();
  score->add_option("--format", format);
  score->add_option("--freq", freq, "Frequency table from `count`")->required();
  score->add_option("--t", threshold, "Discard threshold t");
  score->add_flag("--no-length-norm", no_length_norm, "Score by the plain product, without 1/n");
  score->add_option("--output", output, "Score sidecar path")->required();
  score->add_option("--workers", workers)->check(CLI::PositiveNumber);

  // prune
  auto* prune = app.add_subcommand("prune", "Select a subset of the corpus");
  std::string scores, strategy = "wfpp", entries, emit_selection, output_format;
  double fraction = 0.5;
  std::uint64_t seed = 0;
  std::size_t cap = 1;
  prune->add_option("--input", input)->required();
  prune->add_option("--format", format);
  prune->add_option("--scores", scores, "Score sidecar from `score`");
  prune->add_option("--strategy", strategy, "wfpp, wfpp_second_half, random, length or metadata");
  prune->add_option("--fraction", fraction, "Retention fraction in (0, 1]");
  prune->add_option("--output", output, "Pruned manifest")->required();
  prune->add_option("--output-format", output_format, "Defaults to --format");
  prune->add_option("--seed", seed);
  prune->add_option("--entries", entries, "Metadata entries, one per line");
  prune->add_option("--cap", cap, "Per-entry cap for the metadata strategy");
  prune->add_option("--emit-selection", emit_selection, "Write the selection as JSON");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Before/after distribution reports");
  std::string before, after, buckets = "5,100", out_dir, listing_input;
  std::size_t top_k = kDefaultTopK, listing_k = 20;
  analyze->add_option("--before", before, "Frequency table of the full corpus")->required();
  analyze->add_option("--after", after, "Frequency table of the pruned corpus")->required();
  analyze->add_option("--top-k", top_k);
  analyze->add_option("--buckets", buckets, "Occurrence thresholds, comma separated");
  analyze->add_option("--out-dir", out_dir)->required();
  analyze->add_option("--input", listing_input, "Manifest sampled for caption_listing.tsv");
  analyze->add_option("--format", format);
  analyze->add_option("--t", threshold);
  analyze->add_option("--listing-k", listing_k, "Rows in the word and caption listings");
  analyze->add_option("--seed", seed);
  analyze->add_option("--workers", workers)->check(CLI::PositiveNumber);

  // run
  auto* run = app.add_subcommand("run", "Run count, score, prune and analyze from one config");
  std::string config_path, dump_config;
  std::vector<std::string> settings;
  run->add_option("--config", config_path, "key = value config file");
  run->add_option("--dump-config", dump_config, "Write the effective config here");
  run->add_option("--set", settings, "Override a config key: --set fraction=0.7 (repeatable)");
  // Common keys also exist as flags; they override the file.
  std::map<std::string, std::string> run_flags;
  for (const char* key : {"input", "format", "out_dir", "workers", "t", "strategy", "fraction", "seed", "entries",
                          "cap", "top_k", "buckets", "listing_k"}) {
    std::string flag = std::string("--") + key;
    std::replace(flag.begin() + 2, flag.end(), '_', '-');
    run->add_option_function<std::string>(flag, [&run_flags, key](const std::string& v) { run_flags[key] = v; },
                                           std::string("Config key ") + key);
  }
  bool run_no_length_norm = false;
  run->add_flag("--no-length-norm", run_no_length_norm);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic Zipfian manifest");
  SyntheticCorpusConfig synth_config;
  synth->add_option("--captions", synth_config.captions);
  synth->add_option("--vocab", synth_config.vocab_size);
  synth->add_option("--exponent", synth_config.exponent);
  synth->add_option("--min-tokens", synth_config.min_tokens);
  synth->add_option("--max-tokens", synth_config.max_tokens);
  synth->add_option("--seed", synth_config.seed);
  synth->add_flag("--decorate", synth_config.decorate, "Add capitals, commas and <PERSON> placeholders");
  synth->add_option("--output", output)->required();
  synth->add_option("--format", format);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*count) {
      CountOptions o;
      o.input = input;
      o.format = parse_format(format);
      o.output = output;
      o.workers = workers;
      o.tokenizer = count_tok.config();
      o.corpus_id = corpus_id;
      if (!skip_report.empty()) o.skip_report = skip_report;
      report(run_count(o));
    } else if (*score) {
      ScoreOptions o;
      o.input = input;
      o.format = parse_format(format);
      o.freq = freq;
      o.scoring = {threshold, !no_length_norm};
      o.output = output;
      o.workers = workers;
      try {
        o.scoring.validate();
      } catch (const Error& e) {
        throw Error(ErrorKind::config, std::string("--t: ") + e.what());
      }
      report(run_score(o));
    } else if (*prune) {
      PruneOptions o;
      o.input = input;
      o.format = parse_format(format);
      if (!scores.empty()) o.scores = scores;
      o.prune.strategy = parse_strategy(strategy);
      o.prune.fraction = fraction;
      o.prune.seed = seed;
      o.prune.per_entry_cap = cap;
      if (!entries.empty()) o.prune.metadata_entries = load_entries(entries);
      o.output = output;
      o.output_format = output_format.empty() ? o.format : parse_format(output_format);
      if (!emit_selection.empty()) o.emit_selection = emit_selection;
      if (!(fraction > 0.0 && fraction <= 1.0))
        throw Error(ErrorKind::config, "--fraction must lie in (0, 1], got " + format_score(fraction));
      if (o.prune.strategy == Strategy::metadata && entries.empty())
        throw Error(ErrorKind::config, "--strategy metadata needs --entries FILE");
      report(run_prune(o));
    } else if (*analyze) {
      AnalyzeOptions o;
      o.before = before;
      o.after = after;
      o.top_k = top_k;
      o.buckets = parse_buckets(buckets);
      o.out_dir = out_dir;
      if (!listing_input.empty()) o.input = listing_input;
      o.format = parse_format(format);
      o.scoring.threshold = threshold;
      o.listing_k = listing_k;
      o.seed = seed;
      o.workers = workers;
      if (!(threshold > 0.0 && threshold < 1.0))
        throw Error(ErrorKind::config, "--t must lie in (0, 1), got " + format_score(threshold));
      report(run_analyze(o));
    } else if (*run) {
      PipelineConfig config = config_path.empty() ? PipelineConfig{} : load_pipeline_config(config_path);
      for (const auto& [key, value] : run_flags) apply_setting(config, key, value);
      if (run_no_length_norm) config.scoring.normalize_by_length = false;
      for (const auto& s : settings) {
        auto eq = s.find('=');
        if (eq == std::string::npos) throw Error(ErrorKind::config, "--set expects key=value, got '" + s + "'");
        apply_setting(config, s.substr(0, eq), s.substr(eq + 1));
      }
      config.validate();
      if (!dump_config.empty()) {
        std::ofstream out(dump_config, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::io, "cannot write " + dump_config);
        write_pipeline_config(config, out);
      }
      run_pipeline(config, report);
    } else if (*synth) {
      auto records = synthetic_corpus(synth_config);
      std::filesystem::path path = output;
      if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
      auto n = write_manifest(records, path, parse_format(format));
      report({"synth", 0, n, 0.0});
    }
  } catch (const Error& e) {
    std::cerr << "wfpp: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "wfpp: IoError: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "wfpp: internal error: " << e.what() << '\n';
    return 4;
  }
  return 0;
}
