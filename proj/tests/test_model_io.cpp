#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "namerace/model_io.hpp"
#include "namerace/pipeline.hpp"

using namespace namerace;

namespace {

TrainedModel small_model(std::uint64_t seed = 1) {
  TrainedModel m;
  m.prep = PrepConfig::defaults_for(NameMode::last_name);
  m.prep.window = 6;
  m.labels = LabelSet({"asian", "hispanic", "nh white"});
  m.vocab = Vocabulary({"Sm", "mi", "it", "th", "Ga", "ar"});
  m.model = nn::ModelConfig{8, 4, 5, 3, 0.2, 0.2, 6};
  m.params = nn::init_params(m.model, seed);
  // Non-trivial biases so every tensor carries information.
  m.params.output_bias << 0.1, -0.2, 0.3;
  return m;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("namerace_io_" + name)).string();
}

std::string patch_u32(std::string bytes, std::size_t off, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) bytes[off + i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  return bytes;
}

std::string recrc(std::string bytes) {
  bytes.resize(bytes.size() - 4);
  return patch_u32(bytes + "0000", bytes.size(), crc32_of(bytes));
}

void expect_format_error(const std::string& bytes, const std::string& fragment) {
  try {
    deserialize(bytes, "m.bin");
    FAIL() << "expected FormatError containing '" << fragment << "'";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("m.bin"), std::string::npos);
  }
}

}  // namespace

TEST(Crc32, KnownCheckValue) { EXPECT_EQ(crc32_of("123456789"), 0xCBF43926u); }

TEST(Container, RoundTripRestoresFloat32Values) {
  const auto m = small_model();
  const auto back = deserialize(serialize(m));
  EXPECT_EQ(back.prep, m.prep);
  EXPECT_EQ(back.model, m.model);
  EXPECT_EQ(back.labels.labels(), m.labels.labels());
  EXPECT_EQ(back.vocab, m.vocab);
  const auto a = m.params.views();
  const auto b = back.params.views();
  for (std::size_t k = 0; k < nn::ModelParams::kTensorCount; ++k) {
    for (std::size_t i = 0; i < a[k].values.size(); ++i) {
      EXPECT_EQ(b[k].values[i], static_cast<double>(static_cast<float>(a[k].values[i])));
    }
  }
  EXPECT_EQ(serialize(back), serialize(m));
}

TEST(Container, LayoutStartsWithMagicAndVersion) {
  const auto bytes = serialize(small_model());
  EXPECT_EQ(bytes.substr(0, 4), "NMC1");
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 1);
  EXPECT_EQ(bytes[5], 0);
  EXPECT_EQ(crc32_of(std::string_view(bytes).substr(0, bytes.size() - 4)), detail::get_u32(bytes, bytes.size() - 4));
}

TEST(Container, SavesAreByteIdentical) {
  const auto m = small_model();
  const auto p1 = temp_path("a.nmc"), p2 = temp_path("b.nmc");
  save_model(m, p1);
  save_model(m, p2);
  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  const std::string s1((std::istreambuf_iterator<char>(f1)), {}), s2((std::istreambuf_iterator<char>(f2)), {});
  EXPECT_EQ(s1, s2);
  EXPECT_FALSE(std::filesystem::exists(p1 + ".tmp"));
  EXPECT_EQ(load_model(p1).vocab, m.vocab);
}

TEST(Container, AnyFlippedByteIsDetected) {
  const auto bytes = serialize(small_model());
  for (std::size_t i = 0; i < bytes.size(); i += 7) {
    auto bad = bytes;
    bad[i] = static_cast<char>(bad[i] ^ 0x5A);
    EXPECT_THROW(deserialize(bad), FormatError) << "offset " << i;
  }
  auto bad = bytes;
  bad[bytes.size() - 10] ^= 1;
  expect_format_error(bad, "checksum mismatch");
}

TEST(Container, TruncationBadMagicAndVersion) {
  const auto bytes = serialize(small_model());
  expect_format_error(bytes.substr(0, 10), "truncated");
  expect_format_error(bytes.substr(0, bytes.size() - 1), "checksum");
  auto magic = bytes;
  magic[0] = 'X';
  expect_format_error(magic, "bad magic");
  const auto v2 = recrc(patch_u32(bytes, 4, 2));
  expect_format_error(v2, "unsupported container version 2");
  expect_format_error(v2, "reads version 1");
}

TEST(Container, InconsistentHeaderWithValidChecksum) {
  const auto bytes = serialize(small_model());
  const auto header_len = detail::get_u64(bytes, 8);
  std::string header = bytes.substr(16, header_len);
  const auto pos = header.find("\"hidden_dim\":5");
  ASSERT_NE(pos, std::string::npos);
  header.replace(pos, 14, "\"hidden_dim\":6");
  const std::string tampered = recrc(bytes.substr(0, 16) + header + bytes.substr(16 + header_len));
  expect_format_error(tampered, "bytes, header implies");

  std::string garbled = bytes;
  garbled[16] = '[';
  expect_format_error(recrc(garbled), "malformed header");
}

TEST(Container, PredictionsSurviveReload) {
  const auto m = small_model(5);
  const auto path = temp_path("pred.nmc");
  save_model(m, path);
  const auto back = load_model(path);
  const std::vector<NameRecord> names{{"smith", std::nullopt, ""}, {"garcia", std::nullopt, ""},
                                      {"qqq", std::nullopt, ""}};
  const auto a = predict_records(m, names);
  const auto b = predict_records(back, names);
  EXPECT_LT((a.probs - b.probs).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Container, MissingOrUnwritablePaths) {
  EXPECT_THROW(load_model("/nonexistent/dir/model.nmc"), DataError);
  EXPECT_THROW(save_model(small_model(), "/nonexistent/dir/model.nmc"), DataError);
}

TEST(Container, RefusesInconsistentModel) {
  auto m = small_model();
  m.model.vocab_size = 9;
  EXPECT_THROW(serialize(m), InvalidArgument);
}
