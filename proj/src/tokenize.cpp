#include "star/tokenize.hpp"

namespace star {

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '_' || c >= 0x80;
}

bool is_separator(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\r';
}

}  // namespace

Tokenizer::Tokenizer() : specials_{"<h>", "<u>"} {}

Tokenizer::Tokenizer(std::vector<std::string> specials)
    : specials_(std::move(specials)) {}

TokenSeq Tokenizer::tokenize(const std::string& text) const {
  TokenSeq out;
  size_t i = 0;
  const size_t n = text.size();
  auto starts_special = [&](const std::string& t, size_t pos) -> size_t {
    for (const auto& s : specials_) {
      if (!s.empty() && t.compare(pos, s.size(), s) == 0) return s.size();
    }
    return 0;
  };
  while (i < n) {
    if (size_t len = starts_special(text, i)) {
      out.push_back(text.substr(i, len));
      i += len;
      continue;
    }

    unsigned char c = (unsigned char)text[i];
    if (is_separator(c)) {
      ++i;
    } else if (c == '\n') {
      out.emplace_back("\n");
      ++i;
    } else if (is_word_byte(c)) {
      size_t start = i;
      while (i < n && is_word_byte((unsigned char)text[i]) &&
             starts_special(text, i) == 0) {
        ++i;
      }
      out.push_back(text.substr(start, i - start));
    } else {
      out.push_back(text.substr(i, 1));
      ++i;
    }
  }
  return out;
}

std::string Tokenizer::detokenize(const TokenSeq& tokens) {
  std::string s;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) s.push_back(' ');
    s += tokens[i];
  }
  return s;
}

}  // namespace star
