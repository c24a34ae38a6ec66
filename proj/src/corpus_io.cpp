#include "wfpp/corpus_io.hpp"

#include <json.hpp>

#include <ostream>

#include "wfpp/error.hpp"

namespace wfpp {

using nlohmann::json;

ManifestFormat parse_format(std::string_view name) {
  if (name == "jsonl") return ManifestFormat::jsonl;
  if (name == "tsv") return ManifestFormat::tsv;
  throw Error(ErrorKind::config, "unknown manifest format '" + std::string(name) +
                                     "' (expected jsonl or tsv)");
}

const char* format_name(ManifestFormat format) {
  return format == ManifestFormat::jsonl ? "jsonl" : "tsv";
}

void write_skip_report(const SkipReport& report, std::ostream& out) {
  json skipped = json::array();
  for (const auto& s : report.skipped) skipped.push_back({{"line", s.line}, {"reason", s.reason}});
  json doc = {{"skipped", std::move(skipped)}, {"total_lines", report.total_lines}};
  out << doc.dump(2) << '\n';
}

void write_skip_report(const SkipReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write skip report " + path.string());
  write_skip_report(report, out);
  if (!out) throw Error(ErrorKind::io, "write failed: " + path.string());
}

std::string escape_tsv(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\\': out += "\\\\"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape_tsv(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c != '\\' || i + 1 == text.size()) {
      out += c;
      continue;
    }
    char e = text[++i];
    switch (e) {
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      case '\\': out += '\\'; break;
      default:
        // unknown escape: keep both characters
        out += '\\';
        out += e;
    }
  }
  return out;
}

std::optional<PairRecord> parse_manifest_line(std::string_view line, ManifestFormat format,
                                              std::uint64_t index, std::string& reason) {
  PairRecord record;
  record.index = index;
  if (format == ManifestFormat::tsv) {
    auto tab = line.find('\t');
    if (tab == std::string_view::npos) {
      reason = "missing tab separator";
      return std::nullopt;
    }
    if (line.find('\t', tab + 1) != std::string_view::npos) {
      reason = "more than two tab-separated fields";
      return std::nullopt;
    }
    record.image_ref = unescape_tsv(line.substr(0, tab));
    record.caption = unescape_tsv(line.substr(tab + 1));
    return record;
  }

  json doc = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) {
    reason = "invalid JSON";
    return std::nullopt;
  }
  if (!doc.is_object()) {
    reason = "JSON value is not an object";
    return std::nullopt;
  }
  auto text = doc.find("text");
  if (text == doc.end() || !text->is_string()) {
    reason = "missing or non-string \"text\" field";
    return std::nullopt;
  }
  auto image = doc.find("image");
  if (image != doc.end()) {
    if (!image->is_string()) {
      reason = "non-string \"image\" field";
      return std::nullopt;
    }
    record.image_ref = image->get<std::string>();
  }
  record.caption = text->get<std::string>();
  return record;
}

std::string format_manifest_line(const PairRecord& record, ManifestFormat format) {
  if (format == ManifestFormat::tsv) return escape_tsv(record.image_ref) + '\t' + escape_tsv(record.caption);
  json doc = {{"image", record.image_ref}, {"text", record.caption}};
  return doc.dump(-1, ' ', false, json::error_handler_t::replace);
}

ManifestReader::ManifestReader(const std::filesystem::path& path, ManifestFormat format)
    : in_(path, std::ios::binary), format_(format) {
  if (!in_) {
    if (!std::filesystem::exists(path)) throw Error(ErrorKind::file_not_found, "no such file: " + path.string());
    throw Error(ErrorKind::io, "cannot open " + path.string());
  }
}

bool ManifestReader::next(PairRecord& record) {
  std::string reason;
  while (std::getline(in_, line_)) {
    std::uint64_t index = report_.total_lines++;
    auto parsed = parse_manifest_line(line_, format_, index, reason);
    if (parsed) {
      record = std::move(*parsed);
      ++records_;
      return true;
    }
    report_.skipped.push_back({index + 1, reason});
  }
  if (in_.bad()) throw Error(ErrorKind::io, "read error");
  return false;
}

ManifestWriter::ManifestWriter(const std::filesystem::path& path, ManifestFormat format)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc), format_(format) {
  if (!out_) throw Error(ErrorKind::io, "cannot open for writing: " + path.string());
}

void ManifestWriter::write(const PairRecord& record) {
  out_ << format_manifest_line(record, format_) << '\n';
  if (!out_) throw Error(ErrorKind::io, "write failed: " + path_.string());
  ++count_;
}

void ManifestWriter::close() {
  out_.close();
  if (out_.fail()) throw Error(ErrorKind::io, "close failed: " + path_.string());
}

std::vector<PairRecord> read_manifest(const std::filesystem::path& path, ManifestFormat format,
                                      SkipReport* report) {
  ManifestReader reader(path, format);
  std::vector<PairRecord> records;
  PairRecord record;
  while (reader.next(record)) records.push_back(std::move(record));
  if (report) *report = reader.skip_report();
  return records;
}

std::uint64_t write_manifest(std::span<const PairRecord> records,
                             const std::filesystem::path& path, ManifestFormat format) {
  ManifestWriter writer(path, format);
  for (const auto& r : records) writer.write(r);
  writer.close();
  return writer.count();
}

}  // namespace wfpp
