#include "star/text_clean.hpp"

namespace star {

namespace {

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' ||
         c == '\v';
}

bool is_word_char(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '_';
}

bool has_prefix(const std::string& s, size_t pos, const char* prefix) {
  size_t len = 0;
  while (prefix[len]) ++len;
  return s.compare(pos, len, prefix) == 0;
}

// Length of the URL starting at pos, or 0. Word-boundary check is the
// caller's job.
size_t url_length(const std::string& s, size_t pos) {
  size_t scheme = 0;
  if (has_prefix(s, pos, "https://"))
    scheme = 8;
  else if (has_prefix(s, pos, "http://"))
    scheme = 7;
  else if (has_prefix(s, pos, "www."))
    scheme = 4;
  if (scheme == 0) return 0;
  size_t end = pos + scheme;
  while (end < s.size() && !is_space((unsigned char)s[end])) ++end;
  if (end == pos + scheme) return 0;  // bare scheme, leave it alone
  return end - pos;
}

size_t mention_length(const std::string& s, size_t pos) {
  if (s[pos] != '@') return 0;
  size_t end = pos + 1;
  while (end < s.size() && is_word_char((unsigned char)s[end])) ++end;
  if (end == pos + 1) return 0;  // lone '@'
  return end - pos;
}

}  // namespace

std::string clean_text(const std::string& raw, const CleaningRules& rules) {
  std::string out;
  out.reserve(raw.size());
  bool at_boundary = true;  // start of string or previous char not word-like
  size_t i = 0;
  while (i < raw.size()) {
    unsigned char c = (unsigned char)raw[i];
    if (at_boundary) {
      if (rules.replace_urls) {
        if (size_t len = url_length(raw, i)) {
          out += rules.url_token;
          i += len;
          at_boundary = false;
          continue;
        }
      }
      if (rules.replace_mentions) {
        if (size_t len = mention_length(raw, i)) {
          out += rules.mention_token;
          i += len;
          at_boundary = false;
          continue;
        }
      }
    }
    out.push_back(char(c));
    at_boundary = !is_word_char(c);
    ++i;
  }
  return out;
}

}  // namespace star
