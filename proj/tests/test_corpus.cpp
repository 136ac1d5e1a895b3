#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "star/corpus.hpp"
#include "star/error.hpp"
#include "star/hash.hpp"
#include "star/rng.hpp"
#include "star/text_clean.hpp"
#include "star/tokenize.hpp"

using namespace star;

namespace {

TokenSeq filler(size_t n, const std::string& stem = "w") {
  TokenSeq t;
  t.reserve(n);
  for (size_t i = 0; i < n; ++i) t.push_back(stem + std::to_string(i));
  return t;
}

std::string untokenized(size_t n) {
  std::string s;
  for (size_t i = 0; i < n; ++i) {
    if (i) s += ' ';
    s += "w" + std::to_string(i);
  }
  return s;
}

}  // namespace

TEST_CASE("tokenizer: words, punctuation, newlines") {
  Tokenizer tok;
  CHECK(tok.tokenize("hello world") == TokenSeq{"hello", "world"});
  CHECK(tok.tokenize("a,b") == TokenSeq{"a", ",", "b"});
  CHECK(tok.tokenize("one\ntwo") == TokenSeq{"one", "\n", "two"});
  CHECK(tok.tokenize("a\n\n\nb") == TokenSeq{"a", "\n", "\n", "\n", "b"});
  CHECK(tok.tokenize("  spaced\tout  ") == TokenSeq{"spaced", "out"});
  CHECK(tok.tokenize("") == TokenSeq{});
  CHECK(tok.tokenize("don't") == TokenSeq{"don", "'", "t"});
  CHECK(tok.tokenize("under_score") == TokenSeq{"under_score"});
}

TEST_CASE("tokenizer: special tokens stay atomic") {
  Tokenizer tok;
  CHECK(tok.tokenize("<h>") == TokenSeq{"<h>"});
  CHECK(tok.tokenize("see <h> ok") == TokenSeq{"see", "<h>", "ok"});
  CHECK(tok.tokenize("<u>hello") == TokenSeq{"<u>", "hello"});
  CHECK(tok.tokenize("x<h>y") == TokenSeq{"x", "<h>", "y"});
  // Without the special registered, the same bytes split into punctuation.
  Tokenizer bare(std::vector<std::string>{});
  CHECK(bare.tokenize("<h>") == TokenSeq{"<", "h", ">"});
}

TEST_CASE("tokenizer: utf-8 bytes stay inside one token") {
  Tokenizer tok;
  CHECK(tok.tokenize("caf\xc3\xa9 au lait") ==
        TokenSeq{"caf\xc3\xa9", "au", "lait"});
}

TEST_CASE("tokenizer: tokenize(detokenize(t)) round-trips") {
  Tokenizer tok;
  Rng rng(11);
  const std::vector<std::string> pool = {"alpha", "beta", ",",  ".",  "<h>",
                                         "<u>",   "x",    "42", "\n", "gamma"};
  for (int trial = 0; trial < 200; ++trial) {
    TokenSeq t;
    size_t len = 1 + rng.below(12);
    for (size_t i = 0; i < len; ++i) t.push_back(pool[rng.below(pool.size())]);
    CHECK(tok.tokenize(Tokenizer::detokenize(t)) == t);
  }
}

TEST_CASE("clean_text: url and mention replacement") {
  CleaningRules rules;
  CHECK(clean_text("see https://a.io/x ok", rules) == "see <h> ok");
  CHECK(clean_text("@alice hello", rules) == "<u> hello");
  CHECK(clean_text("plain text", rules) == "plain text");
  CHECK(clean_text("go to www.example.com now", rules) == "go to <h> now");
  CHECK(clean_text("http://x.y", rules) == "<h>");
  // '@' mid-word is not a mention; an email survives.
  CHECK(clean_text("mail a@b.com today", rules) == "mail a@b.com today");
  CHECK(clean_text("cc @bob_42!", rules) == "cc <u>!");
}

TEST_CASE("clean_text: idempotent") {
  CleaningRules rules;
  const std::vector<std::string> samples = {
      "see https://a.io/x ok and @alice too",
      "www.a.b www.c.d",
      "@@double @x",
      "no matches at all",
  };
  for (const auto& s : samples) {
    std::string once = clean_text(s, rules);
    CHECK(clean_text(once, rules) == once);
  }
}

TEST_CASE("clean_text: rules can be disabled") {
  CleaningRules rules;
  rules.replace_urls = false;
  CHECK(clean_text("https://a.io @bob", rules) == "https://a.io <u>");
  rules.replace_urls = true;
  rules.replace_mentions = false;
  CHECK(clean_text("https://a.io @bob", rules) == "<h> @bob");
}

TEST_CASE("pack_short_texts: greedy arithmetic") {
  const TokenSeq sep = {"\n", "\n", "\n"};
  // 200 + 3 + 200 = 403 fits into one 512-token sequence.
  auto packed = pack_short_texts({filler(200, "a"), filler(200, "b")}, 512, sep);
  REQUIRE(packed.size() == 1);
  CHECK(packed[0].size() == 403);

  // Already at capacity: unchanged.
  packed = pack_short_texts({filler(512)}, 512, sep);
  REQUIRE(packed.size() == 1);
  CHECK(packed[0].size() == 512);

  // 400 + 3 + 300 = 703 > 512, so two outputs.
  packed = pack_short_texts({filler(400, "a"), filler(300, "b")}, 512, sep);
  REQUIRE(packed.size() == 2);
  CHECK(packed[0].size() == 400);
  CHECK(packed[1].size() == 300);

  CHECK_THROWS_AS(pack_short_texts({filler(513)}, 512, sep), Error);
}

TEST_CASE("pack_short_texts: concatenation preserves input order") {
  const TokenSeq sep = {"\n", "\n", "\n"};
  std::vector<TokenSeq> texts = {filler(3, "a"), filler(5, "b"), filler(2, "c"),
                                 filler(9, "d")};
  auto packed = pack_short_texts(texts, 10, sep);
  TokenSeq flat_in, flat_out;
  for (const auto& t : texts) flat_in.insert(flat_in.end(), t.begin(), t.end());
  for (const auto& p : packed)
    for (const auto& tok : p)
      if (tok != "\n") flat_out.push_back(tok);
  CHECK(flat_out == flat_in);
}

TEST_CASE("chunk_document: window and tail rules") {
  auto chunks = chunk_document(filler(1024), 512, 32);
  REQUIRE(chunks.size() == 2);
  CHECK(chunks[0].size() == 512);
  CHECK(chunks[1].size() == 512);

  // 700 = 512 + 188 tail; 188 >= 32 keeps it.
  chunks = chunk_document(filler(700), 512, 32);
  REQUIRE(chunks.size() == 2);
  CHECK(chunks[1].size() == 188);

  // Same input, min_tail 256: the 188 tail drops.
  chunks = chunk_document(filler(700), 512, 256);
  REQUIRE(chunks.size() == 1);
  CHECK(chunks[0].size() == 512);

  CHECK(chunk_document({}, 512, 32).empty());
  CHECK(chunk_document(filler(10), 512, 32).empty());  // below min_tail
}

TEST_CASE("chunk_document: kept chunks form a contiguous prefix") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    size_t n = rng.below(2000);
    size_t max_len = 1 + rng.below(200);
    size_t min_tail = 1 + rng.below(max_len);
    auto input = filler(n);
    auto chunks = chunk_document(input, max_len, min_tail);
    TokenSeq flat;
    for (const auto& c : chunks) {
      CHECK(c.size() <= max_len);
      flat.insert(flat.end(), c.begin(), c.end());
    }
    REQUIRE(flat.size() <= input.size());
    CHECK(std::equal(flat.begin(), flat.end(), input.begin()));
  }
}

namespace {

AuthorRecord make_author(const std::string& id, const std::string& dataset,
                         size_t chunk_count) {
  AuthorRecord a;
  a.author_id = id;
  a.dataset_id = dataset;
  for (size_t i = 0; i < chunk_count; ++i) {
    a.chunks.push_back(Chunk{id, 0, int(i), filler(40)});
  }
  return a;
}

}  // namespace

TEST_CASE("is_excluded_author_id") {
  CHECK(is_excluded_author_id("anonymous"));
  CHECK(is_excluded_author_id("Anonymous"));
  CHECK(is_excluded_author_id("UNKNOWN"));
  CHECK(is_excluded_author_id("various"));
  CHECK(is_excluded_author_id("smith; jones"));
  CHECK_FALSE(is_excluded_author_id("alice"));
  CHECK_FALSE(is_excluded_author_id("anon"));
}

TEST_CASE("filter_authors: inclusive min_docs boundary") {
  CorpusIndex corpus;
  corpus.authors = {make_author("a", "d1", 16), make_author("b", "d1", 3),
                    make_author("c", "d1", 20), make_author("anonymous", "d1", 50)};
  auto out = filter_authors(corpus, 16, true);
  REQUIRE(out.authors.size() == 2);
  CHECK(out.authors[0].author_id == "a");  // 16 chunks kept at min_docs 16
  CHECK(out.authors[1].author_id == "c");

  // Anonymous survives when the flag is off.
  auto keep_anon = filter_authors(corpus, 16, false);
  CHECK(keep_anon.authors.size() == 3);

  // Idempotent.
  auto twice = filter_authors(out, 16, true);
  CHECK(twice.authors.size() == out.authors.size());

  CHECK_THROWS_AS(filter_authors(corpus, 21, true), ConfigError);
}

TEST_CASE("balance_datasets: share equation") {
  // 100 vs 300 authors, equal target shares: per-author weights 3:1.
  CorpusIndex corpus;
  for (int i = 0; i < 100; ++i)
    corpus.authors.push_back(make_author("s" + std::to_string(i), "small", 16));
  for (int i = 0; i < 300; ++i)
    corpus.authors.push_back(make_author("b" + std::to_string(i), "big", 16));
  auto out = balance_datasets(corpus, {{"small", 0.5}, {"big", 0.5}});

  double w_small = 0, w_big = 0;
  for (const auto& a : out.authors) {
    if (a.dataset_id == "small") w_small = a.sample_weight;
    else w_big = a.sample_weight;
  }
  CHECK(w_small == doctest::Approx(3.0 * w_big).epsilon(1e-12));

  // Grouped weights reproduce the target shares.
  std::map<std::string, double> group;
  double total = 0;
  for (const auto& a : out.authors) {
    group[a.dataset_id] += a.sample_weight;
    total += a.sample_weight;
  }
  CHECK(group["small"] / total == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(group["big"] / total == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("balance_datasets: normalization and errors") {
  CorpusIndex corpus;
  corpus.authors = {make_author("a", "d1", 16), make_author("b", "d1", 16)};
  // Unnormalized shares are accepted and scaled.
  auto out = balance_datasets(corpus, {{"d1", 4.0}});
  CHECK(out.dataset_shares.at("d1") == doctest::Approx(1.0));
  CHECK(out.authors[0].sample_weight == doctest::Approx(0.5));

  CHECK_THROWS_AS(balance_datasets(corpus, {{"d1", 1.0}, {"ghost", 1.0}}),
                  ConfigError);
  CHECK_THROWS_AS(balance_datasets(corpus, {{"d1", -1.0}}), ConfigError);
  CorpusIndex unshared = corpus;
  CHECK_THROWS_AS(balance_datasets(unshared, {{"other", 1.0}}), ConfigError);
}

namespace {

std::vector<RawDocument> synthetic_docs() {
  std::vector<RawDocument> docs;
  for (int a = 0; a < 4; ++a) {
    std::string author = "author" + std::to_string(a);
    for (int d = 0; d < 20; ++d) {
      docs.push_back({author, "ds", untokenized(80)});
    }
  }
  return docs;
}

}  // namespace

TEST_CASE("build_corpus: pipeline and canonical order") {
  IngestOptions options;
  options.max_len = 64;
  options.min_docs = 10;
  options.min_tail = 8;
  auto docs = synthetic_docs();
  // Author order is canonical. Within-author document order is positional,
  // so this check uses identical per-author documents.
  auto reversed = docs;
  std::reverse(reversed.begin(), reversed.end());

  auto c1 = build_corpus(docs, options);
  auto c2 = build_corpus(reversed, options);
  CHECK(c1.content_hash() == c2.content_hash());
  REQUIRE(c1.authors.size() == 4);
  for (size_t i = 1; i < c1.authors.size(); ++i) {
    CHECK(c1.authors[i - 1].author_id < c1.authors[i].author_id);
  }
  // 80 tokens at max_len 64: one 64-window plus a 16 tail.
  CHECK(c1.authors[0].chunks.size() == 40);
}

TEST_CASE("build_corpus: packing and edge dropping per dataset") {
  IngestOptions options;
  options.max_len = 64;
  options.min_docs = 1;
  options.min_tail = 4;
  options.pack_datasets = {"tweets"};
  options.drop_edge_datasets = {"books"};
  options.shares = {{"tweets", 0.5}, {"books", 0.5}};

  std::vector<RawDocument> docs;
  // 20 tweets of 10 tokens each; 10+3 separator packs 5 per 64-token chunk.
  for (int i = 0; i < 20; ++i) docs.push_back({"tw", "tweets", untokenized(10)});
  docs.push_back({"bk", "books", untokenized(64 * 5)});

  auto corpus = build_corpus(docs, options);
  REQUIRE(corpus.authors.size() == 2);
  const auto& books = corpus.authors[0];
  const auto& tweets = corpus.authors[1];
  REQUIRE(books.author_id == "bk");
  REQUIRE(tweets.author_id == "tw");

  // 5 exact windows minus first and last.
  CHECK(books.chunks.size() == 3);
  // Packing: 5 tweets fill 10*5+3*4 = 62 <= 64; 20 tweets -> 4 documents.
  CHECK(tweets.chunks.size() == 4);
  for (const auto& ch : tweets.chunks) CHECK(ch.tokens.size() == 62);
}

TEST_CASE("build_corpus: cleaning applied before tokenization") {
  IngestOptions options;
  options.max_len = 16;
  options.min_docs = 1;
  options.min_tail = 1;
  std::vector<RawDocument> docs = {
      {"a", "ds", "word https://spam.example/aaaaaaaa word"},
      {"b", "ds", "other text here"},
  };
  auto corpus = build_corpus(docs, options);
  const auto& chunk = corpus.authors[0].chunks[0];
  CHECK(chunk.tokens == TokenSeq{"word", "<h>", "word"});
}

TEST_CASE("corpus serialization: round-trip preserves the content hash") {
  IngestOptions options;
  options.max_len = 64;
  options.min_docs = 10;
  options.min_tail = 8;
  auto corpus = build_corpus(synthetic_docs(), options);

  std::string blob = corpus_to_string(corpus);
  auto loaded = corpus_from_string(blob);
  CHECK(loaded.content_hash() == corpus.content_hash());
  CHECK(loaded.authors.size() == corpus.authors.size());
  CHECK(loaded.dataset_shares == corpus.dataset_shares);
  CHECK(loaded.authors[2].chunks[5].tokens == corpus.authors[2].chunks[5].tokens);
  CHECK(loaded.authors[2].sample_weight ==
        doctest::Approx(corpus.authors[2].sample_weight).epsilon(1e-15));

  // Flipping one payload byte must be caught by the hash check.
  std::string corrupted = blob;
  size_t pos = corrupted.find("\"w3\"");
  REQUIRE(pos != std::string::npos);
  corrupted[pos + 2] = '9';
  CHECK_THROWS_AS(corpus_from_string(corrupted), IntegrityError);
  CHECK_THROWS_AS(corpus_from_string("not json"), IntegrityError);
  CHECK_THROWS_AS(corpus_from_string("{\"format\":\"other\"}"), IntegrityError);
}

TEST_CASE("corpus file io") {
  IngestOptions options;
  options.max_len = 64;
  options.min_docs = 10;
  options.min_tail = 8;
  auto corpus = build_corpus(synthetic_docs(), options);
  const std::string path = "test_corpus_roundtrip.json";
  save_corpus(corpus, path);
  auto loaded = load_corpus(path);
  CHECK(loaded.content_hash() == corpus.content_hash());
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_corpus("no_such_file.json"), Error);
}

TEST_CASE("rng: determinism and split independence") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  // split is pure: derived streams ignore parent consumption.
  Rng parent1(7), parent2(7);
  (void)parent1.next_u64();
  Rng c1 = parent1.split(3), c2 = parent2.split(3);
  CHECK(c1.next_u64() == c2.next_u64());
  // Distinct stream ids give distinct streams.
  CHECK(Rng(7).split(1).next_u64() != Rng(7).split(2).next_u64());
}

TEST_CASE("rng: below stays in range, unit_real in [0,1)") {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    CHECK(rng.below(17) < 17);
    double u = rng.unit_real();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("rng: sample_without_replacement") {
  Rng rng(9);
  auto sample = rng.sample_without_replacement(10, 10);
  std::set<size_t> seen(sample.begin(), sample.end());
  CHECK(seen.size() == 10);
  sample = rng.sample_without_replacement(100, 7);
  CHECK(sample.size() == 7);
  CHECK(std::set<size_t>(sample.begin(), sample.end()).size() == 7);
  CHECK_THROWS_AS(rng.sample_without_replacement(3, 4), Error);
}

TEST_CASE("rng: weighted sampling follows the weight law") {
  // Weights 3:1 over two items; frequency of item 0 should be near 0.75.
  // Binomial std over 10000 draws is ~0.0043; +-5 sigma bounds.
  Rng rng(123);
  std::vector<double> weights = {3.0, 1.0};
  int hits = 0;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) {
    auto pick = rng.weighted_sample_without_replacement(weights, 1);
    if (pick[0] == 0) ++hits;
  }
  double freq = double(hits) / trials;
  CHECK(freq > 0.75 - 5 * 0.0043);
  CHECK(freq < 0.75 + 5 * 0.0043);

  // Drawing all items returns a permutation.
  const std::vector<double> w3 = {1.0, 2.0, 3.0};
  auto all = rng.weighted_sample_without_replacement(w3, 3);
  CHECK(std::set<size_t>(all.begin(), all.end()) ==
        std::set<size_t>{0, 1, 2});
  const std::vector<double> bad = {1.0, -1.0};
  CHECK_THROWS_AS(rng.weighted_sample_without_replacement(bad, 1), Error);
}

TEST_CASE("sha256: known vector") {
  // FIPS 180-2 test vector for "abc".
  CHECK(to_hex(sha256(std::string("abc"))) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(to_hex(sha256(std::string(""))) ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("fnv1a64: reference values") {
  // Published FNV-1a 64-bit results for short strings.
  CHECK(fnv1a64("", 0) == 14695981039346656037ull);
  CHECK(fnv1a64("a", 1) == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("foobar", 6) == 0x85944171f73967e8ull);
}
