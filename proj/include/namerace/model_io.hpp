#pragma once

// Single-file model container.
//
//   offset  size  field
//   0       4     magic "NMC1"
//   4       4     format version, u32 little-endian
//   8       8     header length N, u64 little-endian
//   16      N     UTF-8 JSON header: prep config, model config, labels,
//                 vocabulary and the ordered tensor table (name, shape)
//   16+N    ...   tensor payloads in header order, f32 little-endian, row-major
//   end-4   4     CRC-32 (zlib polynomial) of every preceding byte, u32 LE
//
// Weights are trained in f64 and stored as f32; reloaded values are the
// nearest f32 of the originals.

#include <zlib.h>

#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "namerace/corpus.hpp"
#include "namerace/error.hpp"
#include "namerace/lstm.hpp"
#include "namerace/textprep.hpp"

namespace namerace {

inline constexpr std::string_view kContainerMagic = "NMC1";
inline constexpr std::uint32_t kContainerVersion = 1;

struct TrainedModel {
  PrepConfig prep;
  nn::ModelConfig model;
  LabelSet labels;
  Vocabulary vocab;
  nn::ModelParams params;

  /// Throws InvalidArgument when the parts disagree with each other.
  void check_consistency() const {
    prep.validate();
    model.validate();
    if (static_cast<std::size_t>(model.vocab_size) != vocab.size()) {
      throw InvalidArgument("model vocab_size " + std::to_string(model.vocab_size) + " != vocabulary size " +
                            std::to_string(vocab.size()));
    }
    if (static_cast<std::size_t>(model.n_classes) != labels.size()) {
      throw InvalidArgument("model n_classes does not match the label set");
    }
    if (model.window != prep.window) throw InvalidArgument("model window does not match prep window");
    if (!params.matches(model)) throw InvalidArgument("parameter shapes do not match the model config");
  }
};

inline std::uint32_t crc32_of(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  constexpr std::size_t kChunk = 1u << 30;
  for (std::size_t off = 0; off < bytes.size(); off += kChunk) {
    const auto len = static_cast<uInt>(std::min(kChunk, bytes.size() - off));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + off), len);
  }
  return static_cast<std::uint32_t>(crc);
}

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
inline std::uint32_t get_u32(std::string_view in, std::size_t off) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[off + i])) << (8 * i);
  return v;
}
inline std::uint64_t get_u64(std::string_view in, std::size_t off) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[off + i])) << (8 * i);
  return v;
}

template <typename T>
std::vector<std::int64_t> tensor_shape(const nn::TensorView<T>& v) {
  if (v.is_vector) return {static_cast<std::int64_t>(v.values.size())};
  return {static_cast<std::int64_t>(v.rows), static_cast<std::int64_t>(v.cols)};
}

}  // namespace detail

inline std::string serialize(const TrainedModel& m) {
  m.check_consistency();
  nlohmann::json header;
  header["format_version"] = kContainerVersion;
  header["prep"] = {{"mode", std::string(to_string(m.prep.mode))},
                    {"window", m.prep.window},
                    {"min_count", m.prep.min_count},
                    {"max_doc_fraction", m.prep.max_doc_fraction},
                    {"padding", std::string(kPaddingSide)},
                    {"truncation", std::string(kTruncationSide)}};
  header["model"] = {{"vocab_size", m.model.vocab_size},
                     {"embed_dim", m.model.embed_dim},
                     {"hidden_dim", m.model.hidden_dim},
                     {"n_classes", m.model.n_classes},
                     {"dropout", m.model.dropout},
                     {"recurrent_dropout", m.model.recurrent_dropout},
                     {"window", m.model.window}};
  header["labels"] = m.labels.labels();
  header["vocabulary"] = {{"pad_index", Vocabulary::pad_index},
                          {"oov_index", Vocabulary::oov_index},
                          {"tokens", m.vocab.tokens()}};
  nlohmann::json tensors = nlohmann::json::array();
  for (const auto& v : m.params.views()) {
    tensors.push_back({{"name", std::string(v.name)}, {"shape", detail::tensor_shape(v)}});
  }
  header["tensors"] = tensors;
  const std::string header_text = header.dump();

  std::string out(kContainerMagic);
  detail::put_u32(out, kContainerVersion);
  detail::put_u64(out, header_text.size());
  out += header_text;
  for (const auto& v : m.params.views()) {
    for (double x : v.values) {
      const auto f = static_cast<float>(x);
      detail::put_u32(out, std::bit_cast<std::uint32_t>(f));
    }
  }
  detail::put_u32(out, crc32_of(out));
  return out;
}

inline TrainedModel deserialize(std::string_view bytes, const std::string& source = "<memory>") {
  auto fail = [&source](const std::string& what) { return FormatError(source + ": " + what); };
  constexpr std::size_t kFixed = 4 + 4 + 8;
  if (bytes.size() < kFixed + 4) throw fail("truncated container (" + std::to_string(bytes.size()) + " bytes)");
  if (bytes.substr(0, 4) != kContainerMagic) throw fail("bad magic bytes, not a model container");
  const std::uint32_t version = detail::get_u32(bytes, 4);
  if (version != kContainerVersion) {
    throw fail("unsupported container version " + std::to_string(version) + " (this build reads version " +
               std::to_string(kContainerVersion) + ")");
  }
  const std::uint64_t header_len = detail::get_u64(bytes, 8);
  if (header_len > bytes.size() - kFixed - 4) throw fail("truncated container: header extends past end of file");
  const std::uint32_t stored_crc = detail::get_u32(bytes, bytes.size() - 4);
  if (crc32_of(bytes.substr(0, bytes.size() - 4)) != stored_crc) throw fail("checksum mismatch");

  TrainedModel m;
  try {
    const auto header = nlohmann::json::parse(bytes.substr(kFixed, header_len));
    const auto& prep = header.at("prep");
    m.prep.mode = parse_name_mode(prep.at("mode").get<std::string>());
    m.prep.window = prep.at("window").get<int>();
    m.prep.min_count = prep.at("min_count").get<int>();
    m.prep.max_doc_fraction = prep.at("max_doc_fraction").get<double>();
    if (prep.at("padding").get<std::string>() != kPaddingSide ||
        prep.at("truncation").get<std::string>() != kTruncationSide) {
      throw fail("unsupported padding/truncation side");
    }
    const auto& mc = header.at("model");
    m.model.vocab_size = mc.at("vocab_size").get<int>();
    m.model.embed_dim = mc.at("embed_dim").get<int>();
    m.model.hidden_dim = mc.at("hidden_dim").get<int>();
    m.model.n_classes = mc.at("n_classes").get<int>();
    m.model.dropout = mc.at("dropout").get<double>();
    m.model.recurrent_dropout = mc.at("recurrent_dropout").get<double>();
    m.model.window = mc.at("window").get<int>();
    m.labels = LabelSet(header.at("labels").get<std::vector<std::string>>());
    const auto& voc = header.at("vocabulary");
    if (voc.at("pad_index").get<int>() != Vocabulary::pad_index ||
        voc.at("oov_index").get<int>() != Vocabulary::oov_index) {
      throw fail("unexpected reserved vocabulary indices");
    }
    m.vocab = Vocabulary(voc.at("tokens").get<std::vector<std::string>>());
    m.model.validate();
    m.prep.validate();
    m.params = nn::ModelParams::zeros(m.model);

    const auto& tensors = header.at("tensors");
    auto views = m.params.views();
    if (tensors.size() != views.size()) throw fail("expected " + std::to_string(views.size()) + " tensors");
    std::size_t offset = kFixed + header_len;
    std::size_t payload = 0;
    for (const auto& v : views) payload += v.values.size() * 4;
    if (bytes.size() - 4 - offset != payload) {
      throw fail("payload is " + std::to_string(bytes.size() - 4 - offset) + " bytes, header implies " +
                 std::to_string(payload));
    }
    for (std::size_t k = 0; k < views.size(); ++k) {
      const auto name = tensors[k].at("name").get<std::string>();
      const auto shape = tensors[k].at("shape").get<std::vector<std::int64_t>>();
      if (name != views[k].name || shape != detail::tensor_shape(views[k])) {
        throw fail("tensor " + std::to_string(k) + " ('" + name + "') has an inconsistent name or shape");
      }
      for (double& x : views[k].values) {
        x = static_cast<double>(std::bit_cast<float>(detail::get_u32(bytes, offset)));
        offset += 4;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw fail(std::string("malformed header: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw fail(std::string("invalid header: ") + e.what());
  }
  try {
    m.check_consistency();
  } catch (const InvalidArgument& e) {
    throw fail(e.what());
  }
  return m;
}

/// Writes to "<path>.tmp" then renames over `path`.
inline void save_model(const TrainedModel& m, const std::string& path) {
  const std::string bytes = serialize(m);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError(path + ": cannot open for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError(path + ": write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw DataError(path + ": cannot move temporary file into place");
  }
}

inline TrainedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path + ": cannot open model file");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes, path);
}

}  // namespace namerace
