#include "wfpp/tokenizer.hpp"

#include <unicode/uchar.h>

#include <algorithm>
#include <cstdio>
#include <json.hpp>

#include "wfpp/error.hpp"

namespace wfpp {

using nlohmann::json;

std::string tokenizer_config_json(const TokenizerConfig& config) {
  json doc = {
      {"lowercase", config.lowercase},
      {"split_punctuation", config.split_punctuation},
      {"max_tokens", config.max_tokens ? json(*config.max_tokens) : json(nullptr)},
      {"placeholder_atoms", config.placeholder_atoms},
  };
  return doc.dump();
}

TokenizerConfig tokenizer_config_from_json(std::string_view text) {
  json doc = json::parse(text, nullptr, false);
  if (!doc.is_object()) throw Error(ErrorKind::format, "tokenizer config is not a JSON object");
  TokenizerConfig config;
  try {
    config.lowercase = doc.at("lowercase").get<bool>();
    config.split_punctuation = doc.at("split_punctuation").get<bool>();
    if (auto it = doc.find("max_tokens"); it != doc.end() && !it->is_null())
      config.max_tokens = it->get<std::size_t>();
    if (auto it = doc.find("placeholder_atoms"); it != doc.end())
      config.placeholder_atoms = it->get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::format, std::string("bad tokenizer config: ") + e.what());
  }
  return config;
}

std::string config_hash(const TokenizerConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : tokenizer_config_json(config)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

constexpr char32_t kReplacement = 0xFFFD;

enum class CharClass { separator, word, apostrophe, punct };

// Decodes one code point starting at `i`, advancing `i`. Malformed input
// yields U+FFFD and consumes a single byte.
char32_t decode_utf8(std::string_view s, std::size_t& i) {
  auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++i;
    return kReplacement;
  }
  if (i + len > s.size()) {
    ++i;
    return kReplacement;
  }
  for (int k = 1; k < len; ++k) {
    auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) {
      ++i;
      return kReplacement;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    ++i;
    return kReplacement;
  }
  i += len;
  return cp;
}

void encode_utf8(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

CharClass classify(char32_t cp) {
  if (cp < 0x80) {
    if (cp <= 0x20 || cp == 0x7F) return CharClass::separator;
    if ((cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z'))
      return CharClass::word;
    if (cp == '\'') return CharClass::apostrophe;
    return CharClass::punct;
  }
  auto c = static_cast<UChar32>(cp);
  if (cp == 0x2019) return CharClass::apostrophe;
  if (u_isUWhiteSpace(c) || u_iscntrl(c)) return CharClass::separator;
  auto mask = U_GET_GC_MASK(c);
  if (mask & U_GC_CF_MASK) return CharClass::separator;
  if (u_isalnum(c) || (mask & U_GC_M_MASK)) return CharClass::word;
  return CharClass::punct;
}

char32_t to_lower(char32_t cp) {
  if (cp < 0x80) return (cp >= 'A' && cp <= 'Z') ? cp + 32 : cp;
  return static_cast<char32_t>(u_tolower(static_cast<UChar32>(cp)));
}

std::u32string decode_all(std::string_view s, bool lowercase) {
  std::u32string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    char32_t cp = decode_utf8(s, i);
    out += lowercase ? to_lower(cp) : cp;
  }
  return out;
}

}  // namespace

std::size_t tokenize_into(std::string_view caption, const TokenizerConfig& config,
                          std::vector<std::string>& out) {
  const std::size_t start = out.size();
  const std::size_t limit = config.max_tokens.value_or(static_cast<std::size_t>(-1));
  if (limit == 0) return 0;

  std::vector<std::u32string> atoms;
  atoms.reserve(config.placeholder_atoms.size());
  for (const auto& a : config.placeholder_atoms) {
    if (!a.empty()) atoms.push_back(decode_all(a, config.lowercase));
  }
  std::sort(atoms.begin(), atoms.end(),
            [](const auto& x, const auto& y) { return x.size() > y.size(); });

  const std::u32string text = decode_all(caption, config.lowercase);
  std::string word;

  auto emitted = [&] { return out.size() - start; };
  auto flush = [&] {
    if (!word.empty() && emitted() < limit) out.push_back(std::move(word));
    word.clear();
  };

  for (std::size_t i = 0; i < text.size() && emitted() < limit;) {
    if (!atoms.empty()) {
      auto hit = std::find_if(atoms.begin(), atoms.end(), [&](const std::u32string& a) {
        return text.compare(i, a.size(), a) == 0;
      });
      if (hit != atoms.end()) {
        flush();
        if (emitted() < limit) {
          std::string token;
          for (char32_t cp : *hit) encode_utf8(cp, token);
          out.push_back(std::move(token));
        }
        i += hit->size();
        continue;
      }
    }

    const char32_t cp = text[i];
    CharClass cls = classify(cp);
    if (cls == CharClass::apostrophe) {
      bool internal = !word.empty() && i + 1 < text.size() && classify(text[i + 1]) == CharClass::word;
      cls = internal ? CharClass::word : CharClass::punct;
    }
    switch (cls) {
      case CharClass::separator:
        flush();
        break;
      case CharClass::word:
        encode_utf8(cp, word);
        break;
      default:
        if (config.split_punctuation) {
          flush();
          if (emitted() < limit) {
            std::string token;
            encode_utf8(cp, token);
            out.push_back(std::move(token));
          }
        } else {
          encode_utf8(cp, word);
        }
    }
    ++i;
  }
  flush();
  return emitted();
}

std::vector<std::string> tokenize(std::string_view caption, const TokenizerConfig& config) {
  std::vector<std::string> tokens;
  tokenize_into(caption, config, tokens);
  return tokens;
}

}  // namespace wfpp
