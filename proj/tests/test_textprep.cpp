#include <gtest/gtest.h>

#include <algorithm>

#include "namerace/rng.hpp"
#include "namerace/textprep.hpp"

using namespace namerace;

using Tokens = std::vector<std::string>;

TEST(Normalize, TitleCasesLastName) {
  EXPECT_EQ(normalize({"SMITH", std::nullopt, ""}, NameMode::last_name).text, "Smith");
  EXPECT_EQ(normalize({"smith", "john", ""}, NameMode::last_name).text, "Smith");
}

TEST(Normalize, FullNamePutsLastBeforeFirst) {
  const auto n = normalize({"smith", "john", ""}, NameMode::full_name);
  EXPECT_EQ(n.text, "Smith John");
  EXPECT_FALSE(n.degraded);
  EXPECT_EQ(normalize({"de la cruz", "ana", ""}, NameMode::full_name).text, "De La Cruz Ana");
}

TEST(Normalize, MissingFirstNameDegradesToLastName) {
  const auto n = normalize({"smith", std::nullopt, ""}, NameMode::full_name);
  EXPECT_EQ(n.text, "Smith");
  EXPECT_TRUE(n.degraded);
  EXPECT_TRUE(normalize({"smith", "  ", ""}, NameMode::full_name).degraded);
}

TEST(Normalize, CollapsesWhitespaceAndIsIdempotent) {
  EXPECT_EQ(title_case("  mc   DONALD\t"), "Mc Donald");
  Rng rng(3);
  const std::string alphabet = "aBcD eF\tgh";
  for (int i = 0; i < 300; ++i) {
    std::string s;
    for (std::uint64_t k = 0, n = rng.uniform_index(12); k < n; ++k) s.push_back(alphabet[rng.uniform_index(alphabet.size())]);
    const auto once = title_case(s);
    EXPECT_EQ(title_case(once), once);
    const NameRecord r{s, s, ""};
    const auto full = normalize(r, NameMode::full_name).text;
    EXPECT_EQ(title_case(full), full);
  }
}

TEST(BicharTokenize, SplitsIntoOverlappingPairs) {
  EXPECT_EQ(bichar_tokenize("Smith"), (Tokens{"Sm", "mi", "it", "th"}));
  EXPECT_EQ(bichar_tokenize("O"), (Tokens{"O"}));
  EXPECT_EQ(bichar_tokenize("Lee Kim"), (Tokens{"Le", "ee", "e ", " K", "Ki", "im"}));
  EXPECT_EQ(bichar_tokenize("Jo"), (Tokens{"Jo"}));
  EXPECT_THROW(bichar_tokenize(""), InvalidArgument);
}

TEST(BicharTokenize, WorksOnUtf8CodePoints) {
  EXPECT_EQ(bichar_tokenize("Jos\xC3\xA9"), (Tokens{"Jo", "os", "s\xC3\xA9"}));
}

TEST(BicharTokenize, LengthAndReconstructionProperty) {
  Rng rng(8);
  for (int i = 0; i < 500; ++i) {
    std::string s;
    const auto n = 2 + rng.uniform_index(30);
    for (std::uint64_t k = 0; k < n; ++k) s.push_back(static_cast<char>(' ' + rng.uniform_index(95)));
    const auto toks = bichar_tokenize(s);
    ASSERT_EQ(toks.size(), s.size() - 1);
    std::string rebuilt;
    for (const auto& t : toks) rebuilt.push_back(t[0]);
    rebuilt.push_back(toks.back()[1]);
    EXPECT_EQ(rebuilt, s);
  }
}

// ---------------------------------------------------------------------------

namespace {

PrepConfig prune(int min_count, double max_doc) {
  PrepConfig c;
  c.min_count = min_count;
  c.max_doc_fraction = max_doc;
  return c;
}

/// 100 sequences: `target` appears once in each of the first `docs` sequences;
/// every sequence also carries a unique filler token.
std::vector<Tokens> doc_frequency_corpus(int docs) {
  std::vector<Tokens> corpus;
  for (int i = 0; i < 100; ++i) {
    Tokens seq{"f" + std::to_string(i)};
    if (i < docs) seq.push_back("zz");
    corpus.push_back(seq);
  }
  corpus.push_back({"keep", "keep", "keep"});  // guarantees a non-empty vocabulary
  return corpus;
}

}  // namespace

TEST(BuildVocabulary, HandCountedCorpus) {
  const std::vector<Tokens> corpus{{"ab", "bc"}, {"ab", "bc"}, {"ab", "cd"}, {"ab"}};
  const auto v = build_vocabulary(corpus, prune(3, 1.0));
  EXPECT_EQ(v.tokens(), (Tokens{"ab"}));
  EXPECT_EQ(v.index_of("ab"), 2);
  EXPECT_EQ(v.index_of("bc"), Vocabulary::oov_index);
  EXPECT_EQ(v.size(), 3u);
}

TEST(BuildVocabulary, CountThreshold) {
  const std::vector<Tokens> two{{"aa", "x1"}, {"aa", "x2"}, {"k", "k", "k"}};
  EXPECT_FALSE(build_vocabulary(two, prune(3, 1.0)).contains("aa"));
  const std::vector<Tokens> three{{"aa"}, {"aa"}, {"aa"}, {"k", "k", "k"}};
  EXPECT_TRUE(build_vocabulary(three, prune(3, 1.0)).contains("aa"));
}

TEST(BuildVocabulary, DocumentFrequencyThreshold) {
  // 101 sequences in total; choose doc counts on either side of 30%.
  auto corpus31 = doc_frequency_corpus(31);
  EXPECT_FALSE(build_vocabulary(corpus31, prune(3, 0.30)).contains("zz"));
  auto corpus30 = doc_frequency_corpus(30);
  corpus30.pop_back();  // exactly 100 sequences: 30/100 = 0.30
  corpus30.back().insert(corpus30.back().end(), {"keep", "keep", "keep"});
  EXPECT_TRUE(build_vocabulary(corpus30, prune(3, 0.30)).contains("zz"));
}

TEST(BuildVocabulary, DocumentFrequencyCountsSequencesNotOccurrences) {
  // "rr" occurs 40 times but only in 4 of 20 sequences (20%).
  std::vector<Tokens> corpus;
  for (int i = 0; i < 20; ++i) corpus.push_back({"u" + std::to_string(i)});
  for (int i = 0; i < 4; ++i) corpus[i].insert(corpus[i].end(), 10, "rr");
  EXPECT_TRUE(build_vocabulary(corpus, prune(3, 0.30)).contains("rr"));
}

TEST(BuildVocabulary, OrderedByCountThenBytes) {
  const std::vector<Tokens> corpus{{"bb", "aa", "cc"}, {"bb", "aa", "cc"}, {"cc", "dd"}, {"dd"}};
  const auto v = build_vocabulary(corpus, prune(1, 1.0));
  EXPECT_EQ(v.tokens(), (Tokens{"cc", "aa", "bb", "dd"}));
}

TEST(BuildVocabulary, InsensitiveToCorpusOrder) {
  Rng rng(4);
  std::vector<Tokens> corpus;
  for (int i = 0; i < 200; ++i) {
    Tokens seq;
    for (std::uint64_t k = 0, n = 1 + rng.uniform_index(6); k < n; ++k) {
      seq.push_back(std::string(1, static_cast<char>('a' + rng.uniform_index(5))) +
                    static_cast<char>('a' + rng.uniform_index(5)));
    }
    corpus.push_back(seq);
  }
  const auto reference = build_vocabulary(corpus, prune(3, 0.3));
  for (int trial = 0; trial < 5; ++trial) {
    rng.shuffle(std::span<Tokens>(corpus));
    EXPECT_EQ(build_vocabulary(corpus, prune(3, 0.3)), reference);
  }
}

TEST(BuildVocabulary, Errors) {
  EXPECT_THROW(build_vocabulary(std::vector<Tokens>{}, prune(3, 0.3)), InvalidArgument);
  EXPECT_THROW(build_vocabulary(std::vector<Tokens>{{"a"}}, prune(3, 0.3)), InvalidArgument);
  EXPECT_THROW(build_vocabulary(std::vector<Tokens>{{"a"}}, prune(0, 0.3)), InvalidArgument);
  EXPECT_THROW(Vocabulary(Tokens{"a", "a"}), InvalidArgument);
}

// ---------------------------------------------------------------------------

TEST(Encode, PrePadsKnownTokens) {
  // Positions chosen so Sm->5, mi->9, it->7, th->3.
  const Vocabulary v(Tokens{"q0", "th", "q2", "Sm", "q4", "it", "q6", "mi"});
  const auto e = encode(Tokens{"Sm", "mi", "it", "th"}, v, 6);
  EXPECT_EQ(e.indices, (std::vector<std::int32_t>{0, 0, 5, 9, 7, 3}));
  EXPECT_EQ(e.true_length, 4);
}

TEST(Encode, UnknownTokenMapsToOov) {
  const Vocabulary v(Tokens{"ab"});
  EXPECT_EQ(encode(Tokens{"xx"}, v, 3).indices, (std::vector<std::int32_t>{0, 0, 1}));
}

TEST(Encode, KeepsTrailingWindowOnOverflow) {
  std::string name;
  for (int i = 0; i < 31; ++i) name.push_back(static_cast<char>('a' + i % 26));
  const auto toks = bichar_tokenize(name);
  ASSERT_EQ(toks.size(), 30u);
  Tokens distinct(toks.begin(), toks.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  const Vocabulary v(distinct);
  const auto e = encode(toks, v, 25);
  EXPECT_EQ(e.true_length, 25);
  for (int i = 0; i < 25; ++i) EXPECT_EQ(e.indices[i], v.index_of(toks[i + 5]));
  EXPECT_EQ(std::count(e.indices.begin(), e.indices.end(), 0), 0);
}

TEST(Encode, ShapeAndRangeProperty) {
  Rng rng(12);
  const Vocabulary v(Tokens{"aa", "ab", "ba", "bb"});
  for (int i = 0; i < 300; ++i) {
    Tokens toks;
    for (std::uint64_t k = 0, n = rng.uniform_index(40); k < n; ++k) {
      toks.push_back(std::string(1, static_cast<char>('a' + rng.uniform_index(3))) +
                     static_cast<char>('a' + rng.uniform_index(3)));
    }
    const int window = 1 + static_cast<int>(rng.uniform_index(30));
    const auto e = encode(toks, v, window);
    ASSERT_EQ(e.indices.size(), static_cast<std::size_t>(window));
    EXPECT_EQ(e.true_length, std::min<int>(toks.size(), window));
    for (int p = 0; p < window; ++p) {
      EXPECT_LT(e.indices[p], static_cast<std::int32_t>(v.size()));
      if (p < window - e.true_length) EXPECT_EQ(e.indices[p], Vocabulary::pad_index);
      else EXPECT_NE(e.indices[p], Vocabulary::pad_index);
    }
  }
  EXPECT_THROW(encode(Tokens{"aa"}, v, 0), InvalidArgument);
}

TEST(PrepConfig, ModeDefaults) {
  EXPECT_EQ(PrepConfig::defaults_for(NameMode::last_name).window, 20);
  EXPECT_EQ(PrepConfig::defaults_for(NameMode::full_name).window, 25);
  const auto c = PrepConfig::defaults_for(NameMode::full_name);
  EXPECT_EQ(c.min_count, 3);
  EXPECT_DOUBLE_EQ(c.max_doc_fraction, 0.30);
  EXPECT_THROW(parse_name_mode("middle"), InvalidArgument);
}
