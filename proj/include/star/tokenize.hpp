#pragma once

#include <string>
#include <vector>

namespace star {

using TokenSeq = std::vector<std::string>;

// Model-free whitespace-plus-punctuation splitter. Rules:
//   - runs of word bytes (ASCII alphanumerics, '_', and any byte >= 0x80)
//     form one token, so UTF-8 text stays intact;
//   - every other printable byte is a single-character token;
//   - '\n' is a token of its own (packing separators are made of these);
//   - space, tab and '\r' separate tokens and are dropped;
//   - special marker tokens (default "<h>", "<u>") are kept atomic.
class Tokenizer {
 public:
  Tokenizer();
  explicit Tokenizer(std::vector<std::string> specials);

  TokenSeq tokenize(const std::string& text) const;

  // Joins tokens with single spaces. Inverse of tokenize up to whitespace:
  // tokenize(detokenize(t)) == t for any tokenizer output t.
  static std::string detokenize(const TokenSeq& tokens);

 private:
  std::vector<std::string> specials_;
};

}  // namespace star
