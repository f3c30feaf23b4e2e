#pragma once

// Name normalization, bi-char tokenization, frequency-pruned vocabulary and
// fixed-window encoding.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "namerace/corpus.hpp"
#include "namerace/error.hpp"
#include "namerace/strings.hpp"

namespace namerace {

enum class NameMode { last_name, full_name };

inline std::string_view to_string(NameMode mode) { return mode == NameMode::last_name ? "last" : "full"; }

inline NameMode parse_name_mode(std::string_view s) {
  if (s == "last") return NameMode::last_name;
  if (s == "full") return NameMode::full_name;
  throw InvalidArgument("unknown name mode '" + std::string(s) + "' (expected last or full)");
}

struct PrepConfig {
  NameMode mode = NameMode::last_name;
  int window = 20;
  int min_count = 3;
  double max_doc_fraction = 0.30;

  /// Window 20 for last-name models, 25 for full-name models.
  static PrepConfig defaults_for(NameMode mode) {
    PrepConfig cfg;
    cfg.mode = mode;
    cfg.window = mode == NameMode::last_name ? 20 : 25;
    return cfg;
  }

  void validate() const {
    if (window < 1) throw InvalidArgument("window must be >= 1");
    if (min_count < 1) throw InvalidArgument("min_count must be >= 1");
    if (!(max_doc_fraction > 0.0 && max_doc_fraction <= 1.0)) {
      throw InvalidArgument("max_doc_fraction must be in (0,1]");
    }
  }

  friend bool operator==(const PrepConfig&, const PrepConfig&) = default;
};

// Encoding keeps the trailing window and pads on the left. Stored in model
// containers so a model records how its inputs were shaped.
inline constexpr std::string_view kPaddingSide = "pre";
inline constexpr std::string_view kTruncationSide = "pre";

// ---------------------------------------------------------------------------
// Normalization

/// ASCII title case; words are re-joined with single spaces.
inline std::string title_case(std::string_view text) {
  std::string out;
  for (auto word : str::words(text)) {
    if (!out.empty()) out.push_back(' ');
    bool first = true;
    for (char c : word) {
      out.push_back(first ? str::ascii_upper(c) : str::ascii_lower(c));
      first = false;
    }
  }
  return out;
}

struct NormalizedName {
  std::string text;
  bool degraded = false;  // full-name mode, but the record had no first name
};

/// Last-name mode: "Last". Full-name mode: "Last First".
inline NormalizedName normalize(const NameRecord& record, NameMode mode) {
  NormalizedName out{title_case(record.last_name), false};
  if (mode == NameMode::full_name) {
    const std::string first = record.first_name ? title_case(*record.first_name) : std::string();
    if (first.empty()) {
      out.degraded = true;
    } else if (out.text.empty()) {
      out.text = first;
    } else {
      out.text += ' ';
      out.text += first;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tokenization

/// Overlapping two-character windows over the UTF-8 code points of `name`.
/// A one-character name yields that character as its only token.
inline std::vector<std::string> bichar_tokenize(std::string_view name) {
  if (name.empty()) throw InvalidArgument("cannot tokenize an empty name");
  const auto chars = str::utf8_chars(name);
  std::vector<std::string> tokens;
  if (chars.size() == 1) {
    tokens.emplace_back(chars.front());
    return tokens;
  }
  tokens.reserve(chars.size() - 1);
  for (std::size_t i = 0; i + 1 < chars.size(); ++i) {
    std::string tok(chars[i]);
    tok.append(chars[i + 1]);
    tokens.push_back(std::move(tok));
  }
  return tokens;
}

// ---------------------------------------------------------------------------
// Vocabulary

class Vocabulary {
 public:
  static constexpr std::int32_t pad_index = 0;
  static constexpr std::int32_t oov_index = 1;
  static constexpr std::int32_t first_token_index = 2;

  Vocabulary() = default;

  /// Token i receives index i + 2. Tokens must be distinct.
  explicit Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    index_.reserve(tokens_.size());
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (!index_.emplace(tokens_[i], static_cast<std::int32_t>(i) + first_token_index).second) {
        throw InvalidArgument("duplicate vocabulary token '" + tokens_[i] + "'");
      }
    }
  }

  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  /// Number of embedding rows: pad + OOV + tokens.
  std::size_t size() const noexcept { return tokens_.size() + first_token_index; }

  std::int32_t index_of(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? oov_index : it->second;
  }

  bool contains(const std::string& token) const { return index_.contains(token); }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t> index_;
};

struct TokenStats {
  std::size_t count = 0;      // total occurrences
  std::size_t documents = 0;  // sequences containing the token
};

inline std::unordered_map<std::string, TokenStats> token_statistics(std::span<const std::vector<std::string>> corpus) {
  std::unordered_map<std::string, TokenStats> stats;
  std::unordered_set<std::string_view> seen;
  for (const auto& seq : corpus) {
    seen.clear();
    for (const auto& tok : seq) {
      auto& s = stats[tok];
      ++s.count;
      if (seen.insert(tok).second) ++s.documents;
    }
  }
  return stats;
}

/// Keeps a token iff count >= min_count and its document frequency is at most
/// max_doc_fraction. Survivors are ordered by descending count, ties bytewise.
inline Vocabulary build_vocabulary(std::span<const std::vector<std::string>> corpus, const PrepConfig& config) {
  config.validate();
  if (corpus.empty()) throw InvalidArgument("cannot build a vocabulary from an empty corpus");
  const auto stats = token_statistics(corpus);
  const auto n_docs = static_cast<double>(corpus.size());

  std::vector<std::pair<std::string, std::size_t>> kept;
  for (const auto& [tok, s] : stats) {
    const double doc_fraction = static_cast<double>(s.documents) / n_docs;
    // 1e-12 absorbs representation error so a fraction equal to the limit is kept.
    if (s.count >= static_cast<std::size_t>(config.min_count) && doc_fraction <= config.max_doc_fraction + 1e-12) {
      kept.emplace_back(tok, s.count);
    }
  }
  if (kept.empty()) throw InvalidArgument("vocabulary is empty after frequency pruning");
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<std::string> tokens;
  tokens.reserve(kept.size());
  for (auto& [tok, _] : kept) tokens.push_back(std::move(tok));
  return Vocabulary(std::move(tokens));
}

/// Two-column "token<TAB>index" listing for inspection.
inline void write_vocabulary_tsv(std::ostream& out, const Vocabulary& vocab) {
  out << "<pad>\t" << Vocabulary::pad_index << "\n<oov>\t" << Vocabulary::oov_index << '\n';
  for (std::size_t i = 0; i < vocab.tokens().size(); ++i) {
    out << vocab.tokens()[i] << '\t' << (i + Vocabulary::first_token_index) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Encoding

struct EncodedSequence {
  std::vector<std::int32_t> indices;  // length == window
  int true_length = 0;

  friend bool operator==(const EncodedSequence&, const EncodedSequence&) = default;
};

/// Maps tokens to indices (unknown -> OOV), keeps the last `window` entries and
/// left-pads with the pad index.
inline EncodedSequence encode(std::span<const std::string> tokens, const Vocabulary& vocab, int window) {
  if (window < 1) throw InvalidArgument("window must be >= 1");
  const auto w = static_cast<std::size_t>(window);
  const std::size_t kept = std::min(tokens.size(), w);
  EncodedSequence out;
  out.indices.assign(w, Vocabulary::pad_index);
  out.true_length = static_cast<int>(kept);
  const std::size_t skip = tokens.size() - kept;
  for (std::size_t i = 0; i < kept; ++i) out.indices[w - kept + i] = vocab.index_of(tokens[skip + i]);
  return out;
}

/// normalize -> tokenize for one record. Returns an empty list when the name is empty.
inline std::vector<std::string> record_tokens(const NameRecord& record, NameMode mode, bool* degraded = nullptr) {
  const auto norm = normalize(record, mode);
  if (degraded) *degraded = norm.degraded;
  if (norm.text.empty()) return {};
  return bichar_tokenize(norm.text);
}

}  // namespace namerace
