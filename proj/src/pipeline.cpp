#include "wfpp/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <chrono>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <unordered_set>

#include "wfpp/error.hpp"
#include "wfpp/frequency.hpp"

namespace wfpp {

using nlohmann::json;

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  return out;
}

void finish_output(std::ofstream& out, const fs::path& path) {
  out.close();
  if (out.fail()) throw Error(ErrorKind::io, "write failed: " + path.string());
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

}  // namespace

std::string summary_json(const StageSummary& s) {
  json doc = {{"stage", s.stage},
              {"input_records", s.input_records},
              {"output_records", s.output_records},
              {"wall_seconds", s.wall_seconds}};
  return doc.dump();
}

StageSummary run_count(const CountOptions& options) {
  Stopwatch clock;
  ManifestReader reader(options.input, options.format);
  std::string corpus_id = options.corpus_id.empty() ? options.input.stem().string() : options.corpus_id;
  FrequencyTable table = count_corpus(reader, options.tokenizer, options.workers, std::move(corpus_id));
  ensure_parent(options.output);
  save_table(table, options.output);
  if (options.skip_report) {
    ensure_parent(*options.skip_report);
    write_skip_report(reader.skip_report(), *options.skip_report);
  }
  return {"count", reader.skip_report().total_lines, reader.records_read(), clock.seconds()};
}

StageSummary run_score(const ScoreOptions& options) {
  Stopwatch clock;
  options.scoring.validate();
  FrequencyTable table = load_table(options.freq);
  ManifestReader reader(options.input, options.format);
  ensure_parent(options.output);
  SidecarWriter writer(options.output, {options.scoring, table.tokenizer_config(), table.tokenizer_hash(),
                                        table.corpus_id()});
  std::uint64_t rows = score_corpus(reader, table, options.scoring, table.tokenizer_config(), options.workers,
                                    [&](const ScoredRecord& s) { writer.write(to_entry(s)); });
  writer.close();
  return {"score", reader.skip_report().total_lines, rows, clock.seconds()};
}

StageSummary run_prune(const PruneOptions& options) {
  Stopwatch clock;
  const PruneConfig& config = options.prune;
  config.validate();

  std::optional<Sidecar> sidecar;
  if (options.scores) sidecar = read_sidecar(*options.scores);

  Selection selection;
  switch (config.strategy) {
    case Strategy::wfpp:
    case Strategy::wfpp_second_half:
    case Strategy::length: {
      if (!sidecar)
        throw Error(ErrorKind::config, std::string("strategy ") + strategy_name(config.strategy) +
                                           " needs a score sidecar (--scores)");
      if (config.strategy == Strategy::length) {
        selection = prune_length(length_keys(sidecar->entries), config.fraction);
      } else {
        auto keys = score_keys(sidecar->entries);
        selection = config.strategy == Strategy::wfpp ? prune_wfpp(keys, config.fraction)
                                                      : prune_wfpp_second_half(keys, config.fraction);
      }
      break;
    }
    case Strategy::random: {
      std::vector<std::uint64_t> indices;
      if (sidecar) {
        for (const auto& e : sidecar->entries) indices.push_back(e.index);
      } else {
        ManifestReader reader(options.input, options.format);
        PairRecord r;
        while (reader.next(r)) indices.push_back(r.index);
      }
      selection = prune_random(indices, config.fraction, config.seed);
      break;
    }
    case Strategy::metadata: {
      TokenizerConfig tokenizer = options.tokenizer ? *options.tokenizer
                                  : sidecar         ? sidecar->header.tokenizer
                                                    : TokenizerConfig{};
      MetadataSelector selector(config.metadata_entries, config.per_entry_cap, tokenizer);
      ManifestReader reader(options.input, options.format);
      PairRecord r;
      while (reader.next(r)) selector.add(r);
      selection = selector.finish(config.fraction, config.seed);
      break;
    }
  }
  selection.seed = config.seed;

  ManifestReader reader(options.input, options.format);
  ensure_parent(options.output);
  ManifestWriter writer(options.output, options.output_format);
  apply_selection(reader, selection, writer);
  writer.close();
  if (options.emit_selection) {
    ensure_parent(*options.emit_selection);
    save_selection(selection, *options.emit_selection);
  }
  return {"prune", selection.corpus_size, writer.count(), clock.seconds()};
}

StageSummary run_analyze(const AnalyzeOptions& options) {
  Stopwatch clock;
  options.scoring.validate();
  FrequencyTable before = load_table(options.before);
  FrequencyTable after = load_table(options.after);
  fs::create_directories(options.out_dir);

  RetentionReport retention = retention_report(before, after, options.top_k);
  {
    auto path = options.out_dir / "distribution.csv";
    auto out = open_output(path);
    write_distribution_csv(retention, out);
    finish_output(out, path);
  }
  {
    auto path = options.out_dir / "vocab_buckets.json";
    auto out = open_output(path);
    write_vocab_buckets_json(vocab_buckets(before, after, options.buckets), out);
    finish_output(out, path);
  }

  // Caption listing: pick positions among non-empty captions, then score only those.
  std::vector<ScoredRecord> chosen;
  if (options.input) {
    std::vector<std::uint64_t> nonempty;
    {
      ManifestReader reader(*options.input, options.format);
      PairRecord r;
      std::vector<std::string> tokens;
      while (reader.next(r)) {
        tokens.clear();
        if (tokenize_into(r.caption, before.tokenizer_config(), tokens) > 0) nonempty.push_back(r.index);
      }
    }
    std::vector<std::uint64_t> wanted;
    for (std::size_t p : sample_caption_positions(nonempty.size(), options.listing_k, options.seed))
      wanted.push_back(nonempty[p]);
    std::sort(wanted.begin(), wanted.end());
    if (!wanted.empty()) {
      ManifestReader reader(*options.input, options.format);
      PairRecord r;
      std::size_t next = 0;
      while (next < wanted.size() && reader.next(r)) {
        if (r.index == wanted[next]) {
          chosen.push_back(score_record(r, before, options.scoring));
          ++next;
        }
      }
    }
  }
  Listings listings = sample_listings(before, options.scoring, chosen, options.listing_k, options.seed);
  {
    auto path = options.out_dir / "word_listing.tsv";
    auto out = open_output(path);
    write_word_listing(listings, out);
    finish_output(out, path);
  }
  {
    auto path = options.out_dir / "caption_listing.tsv";
    auto out = open_output(path);
    write_caption_listing(listings, out);
    finish_output(out, path);
  }
  return {"analyze", before.vocabulary_size(), after.vocabulary_size(), clock.seconds()};
}

std::vector<std::string> load_entries(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    if (!fs::exists(path)) throw Error(ErrorKind::file_not_found, "no such file: " + path.string());
    throw Error(ErrorKind::io, "cannot open " + path.string());
  }
  std::vector<std::string> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    entries.push_back(line);
  }
  return entries;
}

// ---- pipeline config ---------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  throw Error(ErrorKind::config, "config key '" + std::string(key) + "': bad value '" + std::string(value) +
                                     "', expected " + std::string(expected));
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v, "true or false");
}

std::uint64_t parse_uint(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v, "a non-negative integer");
  return out;
}

double parse_real(std::string_view key, std::string_view v) {
  try {
    return parse_score(v);
  } catch (const Error&) {
    bad_value(key, v, "a real number");
  }
}

std::vector<std::string> split_list(std::string_view v) {
  std::vector<std::string> out;
  while (!v.empty()) {
    auto comma = v.find(',');
    auto item = trim(v.substr(0, comma));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  return out;
}

// Shortest decimal form that parses back to the same double.
std::string format_real(double v) {
  char buf[40];
  for (int digits = 6; digits <= 17; ++digits) {
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace

void apply_setting(PipelineConfig& c, std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "input") {
    c.input = std::string(value);
  } else if (key == "format") {
    c.format = parse_format(value);
  } else if (key == "out_dir") {
    c.out_dir = std::string(value);
  } else if (key == "workers") {
    c.workers = static_cast<unsigned>(parse_uint(key, value));
  } else if (key == "lowercase") {
    c.tokenizer.lowercase = parse_bool(key, value);
  } else if (key == "split_punctuation") {
    c.tokenizer.split_punctuation = parse_bool(key, value);
  } else if (key == "max_tokens") {
    if (value == "none" || value.empty()) {
      c.tokenizer.max_tokens.reset();
    } else {
      c.tokenizer.max_tokens = parse_uint(key, value);
    }
  } else if (key == "placeholder_atoms") {
    c.tokenizer.placeholder_atoms = split_list(value);
  } else if (key == "t") {
    c.scoring.threshold = parse_real(key, value);
  } else if (key == "length_norm") {
    c.scoring.normalize_by_length = parse_bool(key, value);
  } else if (key == "strategy") {
    c.strategy = parse_strategy(value);
  } else if (key == "fraction") {
    c.fraction = parse_real(key, value);
  } else if (key == "seed") {
    c.seed = parse_uint(key, value);
  } else if (key == "entries") {
    if (value.empty()) {
      c.entries.reset();
    } else {
      c.entries = std::string(value);
    }
  } else if (key == "cap") {
    c.cap = parse_uint(key, value);
  } else if (key == "top_k") {
    c.top_k = parse_uint(key, value);
  } else if (key == "buckets") {
    c.buckets.clear();
    for (const auto& b : split_list(value)) c.buckets.push_back(parse_uint(key, b));
  } else if (key == "listing_k") {
    c.listing_k = parse_uint(key, value);
  } else {
    throw Error(ErrorKind::config, "unknown config key '" + std::string(key) + "'");
  }
}

PipelineConfig parse_pipeline_config(std::istream& in) {
  PipelineConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto body = trim(line);
    if (body.empty() || body[0] == '#') continue;
    auto eq = body.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorKind::config, "config line " + std::to_string(line_no) + ": expected 'key = value'");
    apply_setting(config, trim(body.substr(0, eq)), body.substr(eq + 1));
  }
  return config;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::config, "cannot read config file " + path.string());
  return parse_pipeline_config(in);
}

void write_pipeline_config(const PipelineConfig& c, std::ostream& out) {
  auto join = [](const auto& items) {
    std::ostringstream s;
    for (std::size_t i = 0; i < items.size(); ++i) s << (i ? "," : "") << items[i];
    return s.str();
  };
  out << "# wfpp pipeline config\n"
      << "input = " << c.input.string() << '\n'
      << "format = " << format_name(c.format) << '\n'
      << "out_dir = " << c.out_dir.string() << '\n'
      << "workers = " << c.workers << '\n'
      << "lowercase = " << (c.tokenizer.lowercase ? "true" : "false") << '\n'
      << "split_punctuation = " << (c.tokenizer.split_punctuation ? "true" : "false") << '\n'
      << "max_tokens = " << (c.tokenizer.max_tokens ? std::to_string(*c.tokenizer.max_tokens) : "none") << '\n'
      << "placeholder_atoms = " << join(c.tokenizer.placeholder_atoms) << '\n'
      << "t = " << format_real(c.scoring.threshold) << '\n'
      << "length_norm = " << (c.scoring.normalize_by_length ? "true" : "false") << '\n'
      << "strategy = " << strategy_name(c.strategy) << '\n'
      << "fraction = " << format_real(c.fraction) << '\n'
      << "seed = " << c.seed << '\n'
      << "entries = " << (c.entries ? c.entries->string() : "") << '\n'
      << "cap = " << c.cap << '\n'
      << "top_k = " << c.top_k << '\n'
      << "buckets = " << join(c.buckets) << '\n'
      << "listing_k = " << c.listing_k << '\n';
}

void PipelineConfig::validate() const {
  if (input.empty()) throw Error(ErrorKind::config, "no input manifest given (set 'input' or --input)");
  if (out_dir.empty()) throw Error(ErrorKind::config, "no output directory given (set 'out_dir' or --out-dir)");
  if (workers == 0) throw Error(ErrorKind::config, "workers must be at least 1");
  if (!(scoring.threshold > 0.0 && scoring.threshold < 1.0))
    throw Error(ErrorKind::config, "t must lie strictly between 0 and 1 (default 1e-7), got " +
                                       format_score(scoring.threshold));
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw Error(ErrorKind::config, "fraction must lie in (0, 1], e.g. 0.5 keeps half the corpus; got " +
                                       format_score(fraction));
  if (strategy == Strategy::metadata && !entries)
    throw Error(ErrorKind::config, "strategy metadata needs an entries file (set 'entries' or --entries)");
  if (cap == 0) throw Error(ErrorKind::config, "cap must be at least 1");

  auto key = [](const fs::path& p) { return fs::weakly_canonical(fs::absolute(p)).string(); };
  auto paths = pipeline_paths(*this);
  std::unordered_set<std::string> outputs = {key(paths.freq),   key(paths.skip_report), key(paths.scores),
                                             key(paths.pruned), key(paths.selection),   key(paths.freq_pruned)};
  if (outputs.count(key(input))) throw Error(ErrorKind::config, "input manifest collides with an output path");
  if (entries && outputs.count(key(*entries)))
    throw Error(ErrorKind::config, "entries file collides with an output path");
}

PipelinePaths pipeline_paths(const PipelineConfig& c) {
  PipelinePaths p;
  p.freq = c.out_dir / "freq.tsv";
  p.skip_report = c.out_dir / "skip_report.json";
  p.scores = c.out_dir / "scores.tsv";
  p.pruned = c.out_dir / (std::string("pruned.") + format_name(c.format));
  p.selection = c.out_dir / "selection.json";
  p.freq_pruned = c.out_dir / "freq_pruned.tsv";
  p.reports = c.out_dir / "reports";
  return p;
}

std::vector<StageSummary> run_pipeline(const PipelineConfig& config,
                                       const std::function<void(const StageSummary&)>& on_stage) {
  config.validate();
  const PipelinePaths paths = pipeline_paths(config);
  fs::create_directories(config.out_dir);
  std::vector<StageSummary> summaries;
  auto record = [&](StageSummary s) {
    if (on_stage) on_stage(s);
    summaries.push_back(std::move(s));
  };

  CountOptions count;
  count.input = config.input;
  count.format = config.format;
  count.output = paths.freq;
  count.workers = config.workers;
  count.tokenizer = config.tokenizer;
  count.skip_report = paths.skip_report;
  record(run_count(count));

  ScoreOptions score;
  score.input = config.input;
  score.format = config.format;
  score.freq = paths.freq;
  score.scoring = config.scoring;
  score.output = paths.scores;
  score.workers = config.workers;
  record(run_score(score));

  PruneOptions prune;
  prune.input = config.input;
  prune.format = config.format;
  prune.scores = paths.scores;
  prune.prune.strategy = config.strategy;
  prune.prune.fraction = config.fraction;
  prune.prune.seed = config.seed;
  prune.prune.scoring = config.scoring;
  prune.prune.per_entry_cap = config.cap;
  if (config.entries) prune.prune.metadata_entries = load_entries(*config.entries);
  prune.output = paths.pruned;
  prune.output_format = config.format;
  prune.emit_selection = paths.selection;
  record(run_prune(prune));

  CountOptions recount = count;
  recount.input = paths.pruned;
  recount.output = paths.freq_pruned;
  recount.skip_report.reset();
  StageSummary s = run_count(recount);
  s.stage = "count_pruned";
  record(std::move(s));

  AnalyzeOptions analyze;
  analyze.before = paths.freq;
  analyze.after = paths.freq_pruned;
  analyze.top_k = config.top_k;
  analyze.buckets = config.buckets;
  analyze.out_dir = paths.reports;
  analyze.input = config.input;
  analyze.format = config.format;
  analyze.scoring = config.scoring;
  analyze.listing_k = config.listing_k;
  analyze.seed = config.seed;
  analyze.workers = config.workers;
  record(run_analyze(analyze));
  return summaries;
}

}  // namespace wfpp
