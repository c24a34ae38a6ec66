#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wfpp {

struct TokenizerConfig {
  bool lowercase = true;
  bool split_punctuation = true;
  std::optional<std::size_t> max_tokens;
  // Literal strings emitted as a single token, e.g. "<PERSON>".
  std::vector<std::string> placeholder_atoms;

  friend bool operator==(const TokenizerConfig&, const TokenizerConfig&) = default;
};

// Canonical JSON form, stored in frequency table and sidecar headers.
std::string tokenizer_config_json(const TokenizerConfig& config);
TokenizerConfig tokenizer_config_from_json(std::string_view text);

// 16 hex digits, FNV-1a over the canonical JSON form.
std::string config_hash(const TokenizerConfig& config);

/// Splits a caption into word tokens.
///
/// Word characters are Unicode letters, digits and combining marks; an
/// apostrophe between two word characters stays inside the word ("don't").
/// Letter/digit runs are never split ("1920x1080" is one token). Whitespace
/// and control characters separate tokens. Any other code point is
/// punctuation and, with `split_punctuation`, becomes a token of its own.
/// Invalid UTF-8 bytes are replaced by U+FFFD and treated as punctuation.
std::vector<std::string> tokenize(std::string_view caption, const TokenizerConfig& config = {});

// Appends tokens to `out` without clearing it; returns the number appended.
std::size_t tokenize_into(std::string_view caption, const TokenizerConfig& config,
                          std::vector<std::string>& out);

}  // namespace wfpp
