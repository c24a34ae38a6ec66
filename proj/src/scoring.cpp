#include "wfpp/scoring.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <json.hpp>
#include <limits>

#include "parallel.hpp"
#include "wfpp/error.hpp"

namespace wfpp {

using nlohmann::json;

void ScoringConfig::validate() const {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw Error(ErrorKind::domain, "threshold t must lie in (0, 1), got " + format_score(threshold));
}

double word_discard_prob(double frequency, double threshold) {
  if (!(frequency >= 0.0 && frequency <= 1.0))
    throw Error(ErrorKind::domain, "frequency must lie in [0, 1], got " + format_score(frequency));
  if (!(threshold > 0.0 && threshold < 1.0))
    throw Error(ErrorKind::domain, "threshold t must lie in (0, 1), got " + format_score(threshold));
  if (frequency > threshold) return 1.0 - std::sqrt(threshold / frequency);
  return 1.0;
}

TextScore combine_word_probs(std::span<const double> word_probs, bool normalize_by_length) {
  TextScore out;
  out.n = word_probs.size();
  if (out.n == 0) {
    out.score = out.log_score = std::numeric_limits<double>::infinity();
    return out;
  }
  double log_sum = 0.0;
  for (double p : word_probs) log_sum += std::log(std::max(p, kMinWordProb));
  const double product = std::exp(log_sum);
  if (normalize_by_length) {
    const auto n = static_cast<double>(out.n);
    out.score = product / n;
    out.log_score = log_sum - std::log(n);
  } else {
    out.score = product;
    out.log_score = log_sum;
  }
  return out;
}

namespace {

void fill_scores(ScoredRecord& out, const FrequencyTable& table, const ScoringConfig& scoring) {
  out.word_probs.clear();
  out.word_probs.reserve(out.tokens.size());
  const auto total = static_cast<double>(table.total());
  for (const auto& token : out.tokens) {
    const double f = static_cast<double>(table.count(token)) / total;
    out.word_probs.push_back(word_discard_prob(f, scoring.threshold));
  }
  TextScore s = combine_word_probs(out.word_probs, scoring.normalize_by_length);
  out.score = s.score;
  out.log_score = s.log_score;
  out.n = s.n;
}

void check_tokenizer(const FrequencyTable& table, const TokenizerConfig& tokenizer) {
  if (config_hash(tokenizer) != table.tokenizer_hash())
    throw Error(ErrorKind::config_mismatch,
                "tokenizer config differs from the one the frequency table was counted with");
}

}  // namespace

ScoredRecord score_record(const PairRecord& record, const FrequencyTable& table, const ScoringConfig& scoring) {
  if (table.degenerate()) throw Error(ErrorKind::empty_table, "cannot score against an empty frequency table");
  ScoredRecord out;
  out.record = record;
  out.tokens = tokenize(record.caption, table.tokenizer_config());
  fill_scores(out, table, scoring);
  return out;
}

ScoredRecord score_text(std::string_view caption, const FrequencyTable& table, const ScoringConfig& scoring,
                        const TokenizerConfig& tokenizer) {
  scoring.validate();
  check_tokenizer(table, tokenizer);
  PairRecord record;
  record.caption = std::string(caption);
  ScoredRecord out = score_record(record, table, scoring);
  if (out.empty_caption()) throw Error(ErrorKind::empty_caption, "caption has no tokens");
  return out;
}

std::vector<ScoredRecord> score_corpus(std::span<const PairRecord> records, const FrequencyTable& table,
                                       const ScoringConfig& scoring, const TokenizerConfig& tokenizer,
                                       unsigned workers) {
  scoring.validate();
  check_tokenizer(table, tokenizer);
  if (table.degenerate()) throw Error(ErrorKind::empty_table, "cannot score against an empty frequency table");
  std::vector<ScoredRecord> out(records.size());
  detail::parallel_chunks(records.size(), workers, [&](std::size_t begin, std::size_t end, unsigned) {
    for (std::size_t i = begin; i < end; ++i) out[i] = score_record(records[i], table, scoring);
  });
  return out;
}

std::uint64_t score_corpus(ManifestReader& reader, const FrequencyTable& table, const ScoringConfig& scoring,
                           const TokenizerConfig& tokenizer, unsigned workers,
                           const std::function<void(const ScoredRecord&)>& sink) {
  scoring.validate();
  check_tokenizer(table, tokenizer);
  if (table.degenerate()) throw Error(ErrorKind::empty_table, "cannot score against an empty frequency table");
  std::vector<PairRecord> batch;
  batch.reserve(detail::kBatchSize);
  std::uint64_t scored = 0;
  PairRecord record;
  for (;;) {
    batch.clear();
    while (batch.size() < detail::kBatchSize && reader.next(record)) batch.push_back(std::move(record));
    if (batch.empty()) break;
    for (const auto& s : score_corpus(batch, table, scoring, tokenizer, workers)) sink(s);
    scored += batch.size();
  }
  return scored;
}

ScoreEntry to_entry(const ScoredRecord& scored) {
  return {scored.record.index, scored.n, scored.score, scored.log_score};
}

std::string format_score(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

double parse_score(std::string_view text) {
  std::string s(text);
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || std::isnan(v))
    throw Error(ErrorKind::format, "bad score value '" + s + "'");
  return v;
}

namespace {

json header_json(const SidecarHeader& header) {
  return {
      {"format", "wfpp-score-sidecar"},
      {"format_version", 1},
      {"columns", {"index", "n", "score", "log_score"}},
      {"scoring", {{"t", header.scoring.threshold}, {"normalize_by_length", header.scoring.normalize_by_length}}},
      {"tokenizer", json::parse(tokenizer_config_json(header.tokenizer))},
      {"tokenizer_hash", header.tokenizer_hash},
      {"corpus_id", header.corpus_id},
  };
}

}  // namespace

SidecarWriter::SidecarWriter(const std::filesystem::path& path, const SidecarHeader& header)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw Error(ErrorKind::io, "cannot write sidecar " + path.string());
  out_ << header_json(header).dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
}

void SidecarWriter::write(const ScoreEntry& e) {
  out_ << e.index << '\t' << e.n << '\t' << format_score(e.score) << '\t' << format_score(e.log_score) << '\n';
  if (!out_) throw Error(ErrorKind::io, "write failed: " + path_.string());
}

void SidecarWriter::close() {
  out_.close();
  if (out_.fail()) throw Error(ErrorKind::io, "close failed: " + path_.string());
}

Sidecar read_sidecar(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    if (!std::filesystem::exists(path)) throw Error(ErrorKind::file_not_found, "no such file: " + path.string());
    throw Error(ErrorKind::io, "cannot open " + path.string());
  }
  Sidecar sidecar;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::format, "score sidecar: missing header");
  json header = json::parse(line, nullptr, false);
  if (!header.is_object() || header.value("format", "") != "wfpp-score-sidecar")
    throw Error(ErrorKind::format, "score sidecar: bad header");
  try {
    sidecar.header.scoring.threshold = header.at("scoring").at("t").get<double>();
    sidecar.header.scoring.normalize_by_length = header.at("scoring").at("normalize_by_length").get<bool>();
    sidecar.header.tokenizer = tokenizer_config_from_json(header.at("tokenizer").dump());
    sidecar.header.tokenizer_hash = header.at("tokenizer_hash").get<std::string>();
    sidecar.header.corpus_id = header.value("corpus_id", "");
  } catch (const json::exception& e) {
    throw Error(ErrorKind::format, std::string("score sidecar: bad header: ") + e.what());
  }

  std::uint64_t line_no = 1;
  std::uint64_t previous = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view rest = line;
    std::string_view fields[4];
    int k = 0;
    for (; k < 4; ++k) {
      auto tab = rest.find('\t');
      fields[k] = rest.substr(0, tab);
      if (tab == std::string_view::npos) {
        rest = {};
        ++k;
        break;
      }
      rest.remove_prefix(tab + 1);
    }
    if (k != 4 || !rest.empty())
      throw Error(ErrorKind::format, "score sidecar: expected 4 columns on line " + std::to_string(line_no));
    ScoreEntry e;
    try {
      e.index = std::stoull(std::string(fields[0]));
      e.n = std::stoull(std::string(fields[1]));
    } catch (const std::exception&) {
      throw Error(ErrorKind::format, "score sidecar: bad integer on line " + std::to_string(line_no));
    }
    e.score = parse_score(fields[2]);
    e.log_score = parse_score(fields[3]);
    if (!sidecar.entries.empty() && e.index <= previous)
      throw Error(ErrorKind::format, "score sidecar: indices not increasing at line " + std::to_string(line_no));
    previous = e.index;
    sidecar.entries.push_back(e);
  }
  return sidecar;
}

}  // namespace wfpp
