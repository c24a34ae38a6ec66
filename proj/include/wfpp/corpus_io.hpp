#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wfpp {

/// One image-text pair. `index` is the 0-based line position in the source
/// manifest; malformed lines still consume an index.
struct PairRecord {
  std::uint64_t index = 0;
  std::string image_ref;
  std::string caption;

  friend bool operator==(const PairRecord&, const PairRecord&) = default;
};

enum class ManifestFormat { jsonl, tsv };

ManifestFormat parse_format(std::string_view name);
const char* format_name(ManifestFormat format);

struct SkippedLine {
  std::uint64_t line = 0;  // 1-based
  std::string reason;
};

struct SkipReport {
  std::vector<SkippedLine> skipped;
  std::uint64_t total_lines = 0;
};

void write_skip_report(const SkipReport& report, std::ostream& out);
void write_skip_report(const SkipReport& report, const std::filesystem::path& path);

// TSV caption escaping: tab, newline, carriage return and backslash.
std::string escape_tsv(std::string_view text);
std::string unescape_tsv(std::string_view text);

// Parses one manifest line. On failure returns nullopt and stores the reason.
std::optional<PairRecord> parse_manifest_line(std::string_view line, ManifestFormat format,
                                              std::uint64_t index, std::string& reason);

std::string format_manifest_line(const PairRecord& record, ManifestFormat format);

/// Single-pass streaming reader. Holds one line in memory at a time.
class ManifestReader {
 public:
  ManifestReader(const std::filesystem::path& path, ManifestFormat format);

  // Advances to the next well-formed record, recording malformed lines.
  bool next(PairRecord& record);

  const SkipReport& skip_report() const noexcept { return report_; }
  std::uint64_t records_read() const noexcept { return records_; }
  ManifestFormat format() const noexcept { return format_; }

 private:
  std::ifstream in_;
  ManifestFormat format_;
  std::string line_;
  SkipReport report_;
  std::uint64_t records_ = 0;
};

class ManifestWriter {
 public:
  ManifestWriter(const std::filesystem::path& path, ManifestFormat format);

  void write(const PairRecord& record);
  std::uint64_t count() const noexcept { return count_; }
  void close();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  ManifestFormat format_;
  std::uint64_t count_ = 0;
};

std::vector<PairRecord> read_manifest(const std::filesystem::path& path, ManifestFormat format,
                                      SkipReport* report = nullptr);

std::uint64_t write_manifest(std::span<const PairRecord> records,
                             const std::filesystem::path& path, ManifestFormat format);

}  // namespace wfpp
