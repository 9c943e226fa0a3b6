#ifndef TYPICLASS_TEXT_HPP
#define TYPICLASS_TEXT_HPP

#include <cstdint>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

namespace typiclass {

inline constexpr std::string_view kUrlToken = "URL";
inline constexpr std::string_view kMentionToken = "MENTION";
inline constexpr std::string_view kNumberToken = "NUMBER";

namespace utf8 {

struct Decoded {
  char32_t code_point;
  std::size_t length;
};

/// Decode one code point at the front of s. Malformed sequences decode as a
/// single byte so that every input makes progress.
inline Decoded decode(std::string_view s) {
  const auto b0 = static_cast<unsigned char>(s[0]);
  auto cont = [&](std::size_t i) {
    return i < s.size() && (static_cast<unsigned char>(s[i]) & 0xC0) == 0x80;
  };
  if (b0 < 0x80) return {b0, 1};
  if ((b0 & 0xE0) == 0xC0 && cont(1)) {
    char32_t cp = ((b0 & 0x1Fu) << 6) | (static_cast<unsigned char>(s[1]) & 0x3Fu);
    if (cp >= 0x80) return {cp, 2};
  } else if ((b0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
    char32_t cp = ((b0 & 0x0Fu) << 12) | ((static_cast<unsigned char>(s[1]) & 0x3Fu) << 6) |
                  (static_cast<unsigned char>(s[2]) & 0x3Fu);
    if (cp >= 0x800) return {cp, 3};
  } else if ((b0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
    char32_t cp = ((b0 & 0x07u) << 18) | ((static_cast<unsigned char>(s[1]) & 0x3Fu) << 12) |
                  ((static_cast<unsigned char>(s[2]) & 0x3Fu) << 6) | (static_cast<unsigned char>(s[3]) & 0x3Fu);
    if (cp >= 0x10000 && cp <= 0x10FFFF) return {cp, 4};
  }
  return {b0, 1};
}

/// Unicode White_Space property.
constexpr bool is_space(char32_t c) {
  return (c >= 0x09 && c <= 0x0D) || c == 0x20 || c == 0x85 || c == 0xA0 || c == 0x1680 ||
         (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 || c == 0x202F || c == 0x205F ||
         c == 0x3000;
}

/// ASCII punctuation plus the common Latin-1, general, CJK and fullwidth
/// punctuation blocks.
constexpr bool is_punct(char32_t c) {
  if (c < 0x80)
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
           (c >= 0x7B && c <= 0x7E);
  return c == 0xA1 || c == 0xA7 || c == 0xAB || c == 0xB6 || c == 0xB7 || c == 0xBB || c == 0xBF ||
         (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E) || (c >= 0x3001 && c <= 0x3003) ||
         (c >= 0x3008 && c <= 0x3011) || (c >= 0x3014 && c <= 0x301F) || (c >= 0xFF01 && c <= 0xFF0F) ||
         (c >= 0xFF1A && c <= 0xFF20) || (c >= 0xFF3B && c <= 0xFF40) || (c >= 0xFF5B && c <= 0xFF65);
}

}  // namespace utf8

/// Replace every run of unicode whitespace with one ASCII space and trim.
inline std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (std::size_t i = 0; i < s.size();) {
    const auto d = utf8::decode(s.substr(i));
    if (utf8::is_space(d.code_point)) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.append(s.substr(i, d.length));
    }
    i += d.length;
  }
  return out;
}

/// Editable pattern lists for the substitutions whose exact format is a
/// local convention. Patterns are ECMAScript regexes; each is matched only
/// where it is not embedded in a longer run of digits.
struct NormalizeRules {
  std::vector<std::string> timestamp_patterns = {
      // 2016-08-19, 2016/08/19 12:30, 2016-08-19T12:30:05+09:00
      R"(\d{4}[-/.]\d{1,2}[-/.]\d{1,2}(?:[T ]\d{1,2}:\d{2}(?::\d{2}(?:\.\d+)?)?(?:Z|[+-]\d{2}:?\d{2})?)?)",
      // 12:30, 9:05:59, 11:30 PM
      R"(\d{1,2}:\d{2}(?::\d{2})?(?: ?[AaPp][Mm]\b)?)",
  };
  std::vector<std::string> phone_patterns = {
      R"(\+\d{1,3}[ -]?\d{1,4}[ -]\d{3,4}[ -]\d{4})",  // +82 10 1234 5678
      R"(\(0\d{1,2}\) ?\d{3,4}-\d{4})",                // (02) 123-4567
      R"(0\d{1,2}[ -]?\d{3,4}-\d{4})",                 // 010-1234-5678, 02-123-4567
      R"(\d{3}-\d{3}-\d{4})",                          // 555-123-4567
      R"(1[5-8]\d{2}-\d{4})",                          // 1577-0199
  };
};

/// Compiled normalizer. Stateless after construction and safe to share
/// across threads.
class Normalizer {
 public:
  explicit Normalizer(const NormalizeRules& rules = {})
      : rt_(R"(^(?:RT:?(?: |$))+)"),
        url_(R"((?:https?://|www\.)[^ ]+)", std::regex::icase),
        mention_(R"((^|[^A-Za-z0-9_])@[A-Za-z0-9_]+)") {
    for (const auto& p : rules.phone_patterns) phones_.emplace_back(bounded(p));
    for (const auto& p : rules.timestamp_patterns) timestamps_.emplace_back(bounded(p));
  }

  /// Drop leading RT markers and timestamps, then substitute URL, MENTION
  /// and NUMBER sentinels and collapse whitespace. Applied to a fixpoint,
  /// which makes the result idempotent.
  std::string operator()(std::string_view raw) const {
    std::string current = collapse_whitespace(raw);
    for (int round = 0; round < 16; ++round) {
      std::string next = apply_once(current);
      if (next == current) break;
      current = std::move(next);
    }
    return current;
  }

 private:
  static std::string bounded(const std::string& pattern) { return "(^|[^0-9])(?:" + pattern + ")(?![0-9])"; }

  std::string apply_once(const std::string& in) const {
    std::string s = std::regex_replace(in, rt_, "");
    s = std::regex_replace(s, url_, std::string(kUrlToken));
    s = std::regex_replace(s, mention_, "$1" + std::string(kMentionToken));
    for (const auto& re : phones_) s = std::regex_replace(s, re, "$1" + std::string(kNumberToken));
    for (const auto& re : timestamps_) s = std::regex_replace(s, re, "$1");
    return collapse_whitespace(s);
  }

  std::regex rt_;
  std::regex url_;
  std::regex mention_;
  std::vector<std::regex> phones_;
  std::vector<std::regex> timestamps_;
};

/// Normalize with the default rule set.
inline std::string normalize_text(std::string_view raw) {
  static const Normalizer normalizer;
  return normalizer(raw);
}

/// Split on unicode whitespace and strip punctuation from both token edges.
/// Case is preserved; tokens that are all punctuation vanish.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    // Skip whitespace.
    while (i < text.size()) {
      const auto d = utf8::decode(text.substr(i));
      if (!utf8::is_space(d.code_point)) break;
      i += d.length;
    }
    // Collect one whitespace-delimited word, tracking the last non-punct end.
    std::size_t begin = std::string_view::npos;
    std::size_t end = 0;
    while (i < text.size()) {
      const auto d = utf8::decode(text.substr(i));
      if (utf8::is_space(d.code_point)) break;
      if (!utf8::is_punct(d.code_point)) {
        if (begin == std::string_view::npos) begin = i;
        end = i + d.length;
      }
      i += d.length;
    }
    if (begin != std::string_view::npos) tokens.emplace_back(text.substr(begin, end - begin));
  }
  return tokens;
}

}  // namespace typiclass

#endif  // TYPICLASS_TEXT_HPP
