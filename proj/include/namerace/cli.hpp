#pragma once

// Batch command-line front end:
//   prepare | train | evaluate | predict | aggregate
// Exit codes: 0 success, 1 usage error, 2 data or validation error.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "namerace/apply.hpp"
#include "namerace/corpus.hpp"
#include "namerace/error.hpp"
#include "namerace/eval.hpp"
#include "namerace/model_io.hpp"
#include "namerace/pipeline.hpp"
#include "namerace/textprep.hpp"
#include "namerace/train.hpp"

namespace namerace::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Written next to every run's outputs as JSON.
struct RunManifest {
  std::string subcommand;
  nlohmann::json config = nlohmann::json::object();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::uint64_t seed = nn::kDefaultSeed;
  double duration_seconds = 0.0;

  void write(const std::string& path) const {
    nlohmann::json j;
    j["subcommand"] = subcommand;
    j["config"] = config;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["seed"] = seed;
    j["duration_seconds"] = duration_seconds;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(path + ": cannot write manifest");
    out << j.dump(2) << '\n';
  }
};

namespace detail {

struct Options {
  // prep
  std::string mode = "last";
  int window = 0;  // 0: 20 for last-name mode, 25 for full-name mode
  int min_count = 3;
  double max_doc_frac = 0.30;
  // architecture
  int embed_dim = 32;
  int hidden_dim = 128;
  double dropout = 0.2;
  double recurrent_dropout = 0.2;
  // training
  int epochs = 15;
  int batch_size = 32;
  double learning_rate = 0.001;
  double clip_norm = 0.0;
  std::uint64_t seed = nn::kDefaultSeed;
  double test_fraction = 0.2;
  int threads = 1;
  // columns
  std::string last_col = "last_name";
  std::string first_col = "first_name";
  std::string label_col = "label";
  std::string amount_col = "amount";
  std::string year_col = "year";
  // census
  std::string surname_col = "surname";
  std::string count_col = "count";
  std::vector<std::string> census_columns;
  std::size_t n_samples = 100000;
  // paths and switches
  std::string input;
  std::string census;
  std::string data_dir;
  std::string out_dir;
  std::string model;
  std::string output;
  std::string report;
  std::string report_csv;
  std::string loss_history;
  std::size_t sample = 0;
  bool dedup = false;
  bool soft = false;
  bool quiet = false;

  PrepConfig prep() const {
    auto cfg = PrepConfig::defaults_for(parse_name_mode(mode));
    if (window > 0) cfg.window = window;
    cfg.min_count = min_count;
    cfg.max_doc_fraction = max_doc_frac;
    cfg.validate();
    return cfg;
  }
  ArchitectureConfig arch() const { return {embed_dim, hidden_dim, dropout, recurrent_dropout}; }
  nn::TrainConfig train() const {
    nn::TrainConfig t;
    t.epochs = epochs;
    t.batch_size = batch_size;
    t.adam.alpha = learning_rate;
    t.seed = seed;
    t.clip_norm = clip_norm;
    t.validate();
    return t;
  }
  LabeledSchema labeled_schema() const { return {last_col, first_col, label_col}; }
};

inline void add_prep_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--mode", o.mode, "Name mode")->check(CLI::IsMember({"last", "full"}))->capture_default_str();
  cmd->add_option("--window", o.window, "Encoded sequence length (default 20 last / 25 full)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--min-count", o.min_count, "Drop bi-chars seen fewer times")->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--max-doc-frac", o.max_doc_frac, "Drop bi-chars in more than this fraction of names")
      ->check(CLI::Range(0.0, 1.0))->capture_default_str();
}

inline void add_model_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--embed-dim", o.embed_dim)->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--hidden-dim", o.hidden_dim)->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--dropout", o.dropout)->check(CLI::Range(0.0, 0.999))->capture_default_str();
  cmd->add_option("--recurrent-dropout", o.recurrent_dropout)->check(CLI::Range(0.0, 0.999))->capture_default_str();
  cmd->add_option("--epochs", o.epochs)->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--batch-size", o.batch_size)->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--learning-rate", o.learning_rate)->check(CLI::NonNegativeNumber)->capture_default_str();
  cmd->add_option("--clip-norm", o.clip_norm, "Global gradient-norm clip, 0 disables")
      ->check(CLI::NonNegativeNumber)->capture_default_str();
}

inline void add_seed_flag(CLI::App* cmd, Options& o) { cmd->add_option("--seed", o.seed)->capture_default_str(); }

inline void add_threads_flag(CLI::App* cmd, Options& o) {
  cmd->add_option("--threads", o.threads, "Worker threads for inference")->check(CLI::PositiveNumber)
      ->capture_default_str();
}

inline void add_name_columns(CLI::App* cmd, Options& o) {
  cmd->add_option("--last-col", o.last_col)->capture_default_str();
  cmd->add_option("--first-col", o.first_col, "Empty string if the file has no first-name column")
      ->capture_default_str();
}

inline nlohmann::json prep_json(const PrepConfig& p) {
  return {{"mode", std::string(to_string(p.mode))},
          {"window", p.window},
          {"min_count", p.min_count},
          {"max_doc_fraction", p.max_doc_fraction},
          {"padding", std::string(kPaddingSide)},
          {"truncation", std::string(kTruncationSide)}};
}

inline nlohmann::json model_json(const nn::ModelConfig& m) {
  return {{"vocab_size", m.vocab_size}, {"embed_dim", m.embed_dim},   {"hidden_dim", m.hidden_dim},
          {"n_classes", m.n_classes},   {"dropout", m.dropout},       {"recurrent_dropout", m.recurrent_dropout},
          {"window", m.window}};
}

inline nlohmann::json train_json(const nn::TrainConfig& t) {
  return {{"epochs", t.epochs},          {"batch_size", t.batch_size}, {"adam_alpha", t.adam.alpha},
          {"adam_beta1", t.adam.beta1},  {"adam_beta2", t.adam.beta2}, {"adam_epsilon", t.adam.epsilon},
          {"clip_norm", t.clip_norm},    {"seed", t.seed}};
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path + ": cannot open for writing");
  return out;
}

inline void write_encoded_csv(const std::string& path, const EncodedCorpus& enc, int window) {
  auto out = open_out(path);
  std::vector<std::string> header{"label_index", "true_length"};
  for (int t = 0; t < window; ++t) header.push_back("t" + std::to_string(t));
  csv::write_row(out, header);
  for (std::size_t i = 0; i < enc.sequences.size(); ++i) {
    std::vector<std::string> row{std::to_string(enc.labels[i]), std::to_string(enc.sequences[i].true_length)};
    for (auto idx : enc.sequences[i].indices) row.push_back(std::to_string(idx));
    csv::write_row(out, row);
  }
}

inline EncodedCorpus read_encoded_csv(const std::string& path, int window, std::size_t n_classes,
                                      std::size_t vocab_size) {
  const auto table = csv::read(path);
  if (table.header.size() != static_cast<std::size_t>(window) + 2) {
    throw DataError(path + ":1: expected " + std::to_string(window + 2) + " columns");
  }
  EncodedCorpus enc;
  for (const auto& row : table.rows) {
    const std::string where = path + ":" + std::to_string(row.line);
    auto as_int = [&where](const std::string& s) {
      try {
        std::size_t used = 0;
        const long v = std::stol(s, &used);
        if (used == s.size()) return v;
      } catch (const std::exception&) {
      }
      throw DataError(where + ": not an integer: '" + s + "'");
    };
    const long label = as_int(row.fields[0]);
    if (label < 0 || static_cast<std::size_t>(label) >= n_classes) throw DataError(where + ": label index out of range");
    EncodedSequence seq;
    seq.true_length = static_cast<int>(as_int(row.fields[1]));
    for (int t = 0; t < window; ++t) {
      const long idx = as_int(row.fields[static_cast<std::size_t>(t) + 2]);
      if (idx < 0 || static_cast<std::size_t>(idx) >= vocab_size) throw DataError(where + ": token index out of range");
      seq.indices.push_back(static_cast<std::int32_t>(idx));
    }
    enc.sequences.push_back(std::move(seq));
    enc.labels.push_back(static_cast<int>(label));
  }
  return enc;
}

// ---------------------------------------------------------------------------

inline void cmd_prepare(const Options& o, RunManifest& manifest, std::ostream& log) {
  if (o.input.empty() == o.census.empty()) throw InvalidArgument("prepare: give exactly one of --input or --census");
  const PrepConfig prep = o.prep();
  std::vector<NameRecord> records;
  nlohmann::json stats;
  if (!o.input.empty()) {
    auto loaded = load_labeled_csv(o.input, o.labeled_schema(), o.dedup);
    stats["dropped_rows"] = loaded.dropped;
    stats["duplicates_removed"] = loaded.duplicates;
    records = std::move(loaded.records);
    manifest.inputs.push_back(o.input);
  } else {
    CensusSchema schema{o.surname_col, o.count_col, {}};
    auto columns = o.census_columns;
    if (columns.empty()) columns = {"pctapi=api", "pctblack=black", "pcthispanic=hispanic", "pctwhite=white"};
    for (const auto& spec : columns) {
      const auto eq = spec.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
        throw InvalidArgument("--census-column expects COLUMN=LABEL, got '" + spec + "'");
      }
      schema.percent_columns.emplace_back(spec.substr(0, eq), spec.substr(eq + 1));
    }
    const auto rows = load_census_csv(o.census, schema);
    auto expanded = expand_census_aggregate(rows, o.n_samples, o.seed);
    stats["census_rows"] = rows.size();
    stats["census_draws"] = o.n_samples;
    stats["census_dropped_draws"] = expanded.dropped;
    records = std::move(expanded.records);
    manifest.inputs.push_back(o.census);
    manifest.config["census_columns"] = columns;
    manifest.config["n_samples"] = o.n_samples;
  }
  if (o.sample > 0) records = sample_records(records, o.sample, Rng(o.seed).derive(11).seed());
  const auto split = split_train_test(records, o.test_fraction, Rng(o.seed).derive(12).seed());
  const auto labels = LabelSet::from_records(split.train);
  const auto vocab = fit_vocabulary(split.train, prep);

  std::vector<NameRecord> test_known;
  for (const auto& r : split.test) {
    if (labels.contains(r.label)) test_known.push_back(r);
  }
  const auto train_enc = encode_records(split.train, prep, vocab, &labels);
  const auto test_enc = encode_records(test_known, prep, vocab, &labels);

  namespace fs = std::filesystem;
  fs::create_directories(o.out_dir);
  const auto path = [&o](const char* name) { return (fs::path(o.out_dir) / name).string(); };
  write_labeled_csv(path("train.csv"), split.train);
  write_labeled_csv(path("test.csv"), split.test);
  write_encoded_csv(path("train_encoded.csv"), train_enc, prep.window);
  write_encoded_csv(path("test_encoded.csv"), test_enc, prep.window);
  {
    auto out = open_out(path("vocab.tsv"));
    write_vocabulary_tsv(out, vocab);
  }
  nlohmann::json dataset;
  dataset["prep"] = prep_json(prep);
  dataset["labels"] = labels.labels();
  dataset["vocabulary"] = vocab.tokens();
  dataset["train_records"] = split.train.size();
  dataset["test_records"] = split.test.size();
  dataset["stats"] = stats;
  {
    auto out = open_out(path("dataset.json"));
    out << dataset.dump(2) << '\n';
  }
  for (const char* name : {"train.csv", "test.csv", "train_encoded.csv", "test_encoded.csv", "vocab.tsv", "dataset.json"}) {
    manifest.outputs.push_back(path(name));
  }
  manifest.config["prep"] = prep_json(prep);
  manifest.config["test_fraction"] = o.test_fraction;
  manifest.config["sample"] = o.sample;
  manifest.config["dedup"] = o.dedup;
  log << "prepared " << split.train.size() << " train / " << split.test.size() << " test records, vocabulary "
      << vocab.tokens().size() << " bi-chars, " << labels.size() << " labels\n";
}

inline void cmd_train(const Options& o, RunManifest& manifest, std::ostream& log) {
  if (o.input.empty() == o.data_dir.empty()) throw InvalidArgument("train: give exactly one of --data-dir or --input");
  const auto tconfig = o.train();
  const auto arch = o.arch();
  auto on_epoch = [&](int epoch, double loss) {
    if (!o.quiet) log << "epoch " << epoch << " loss " << namerace::detail::exact(loss) << '\n';
  };

  TrainedModel model;
  std::vector<double> history;
  if (!o.data_dir.empty()) {
    namespace fs = std::filesystem;
    const auto meta_path = (fs::path(o.data_dir) / "dataset.json").string();
    nlohmann::json meta;
    try {
      meta = nlohmann::json::parse(csv::read_file(meta_path));
      const auto& p = meta.at("prep");
      model.prep.mode = parse_name_mode(p.at("mode").get<std::string>());
      model.prep.window = p.at("window").get<int>();
      model.prep.min_count = p.at("min_count").get<int>();
      model.prep.max_doc_fraction = p.at("max_doc_fraction").get<double>();
      model.labels = LabelSet(meta.at("labels").get<std::vector<std::string>>());
      model.vocab = Vocabulary(meta.at("vocabulary").get<std::vector<std::string>>());
    } catch (const nlohmann::json::exception& e) {
      throw DataError(meta_path + ": " + e.what());
    }
    const auto train_path = (fs::path(o.data_dir) / "train_encoded.csv").string();
    const auto enc = read_encoded_csv(train_path, model.prep.window, model.labels.size(), model.vocab.size());
    model.model = nn::ModelConfig{static_cast<int>(model.vocab.size()), arch.embed_dim, arch.hidden_dim,
                                  static_cast<int>(model.labels.size()), arch.dropout, arch.recurrent_dropout,
                                  model.prep.window};
    auto trained = nn::train(enc.sequences, enc.labels, model.model, tconfig, on_epoch);
    model.params = std::move(trained.params);
    history = std::move(trained.epoch_loss);
    manifest.inputs = {meta_path, train_path};
  } else {
    const auto loaded = load_labeled_csv(o.input, o.labeled_schema(), o.dedup);
    auto fitted = fit(loaded.records, o.prep(), arch, tconfig, on_epoch);
    model = std::move(fitted.model);
    history = std::move(fitted.epoch_loss);
    manifest.inputs = {o.input};
  }
  save_model(model, o.model);
  const std::string loss_path = o.loss_history.empty() ? o.model + ".loss.csv" : o.loss_history;
  {
    auto out = open_out(loss_path);
    csv::write_row(out, {"epoch", "mean_loss"});
    for (std::size_t e = 0; e < history.size(); ++e) csv::write_row(out, {std::to_string(e + 1), namerace::detail::exact(history[e])});
  }
  manifest.outputs = {o.model, loss_path};
  manifest.config["prep"] = prep_json(model.prep);
  manifest.config["model"] = model_json(model.model);
  manifest.config["train"] = train_json(tconfig);
}

inline void cmd_evaluate(const Options& o, RunManifest& manifest, std::ostream& log) {
  const auto model = load_model(o.model);
  const auto loaded = load_labeled_csv(o.input, o.labeled_schema());
  const auto ev = evaluate(model, loaded.records, o.threads);
  const std::string text = render_text(ev.report);
  {
    auto out = open_out(o.report);
    out << text;
  }
  const std::string csv_path = o.report_csv.empty() ? o.report + ".csv" : o.report_csv;
  {
    auto out = open_out(csv_path);
    write_report_csv(out, ev.report);
  }
  if (!o.quiet) log << text;
  manifest.inputs = {o.model, o.input};
  manifest.outputs = {o.report, csv_path};
  manifest.config["prep"] = prep_json(model.prep);
  manifest.config["skipped_records"] = ev.skipped;
  manifest.config["threads"] = o.threads;
}

inline void cmd_predict(const Options& o, RunManifest& manifest, std::ostream& log) {
  const auto model = load_model(o.model);
  const auto table = csv::read(o.input);
  const std::size_t last_col = table.require_column(o.last_col);
  std::optional<std::size_t> first_col;
  if (!o.first_col.empty()) first_col = table.require_column(o.first_col);
  std::vector<NameRecord> names;
  for (const auto& row : table.rows) {
    NameRecord r{std::string(str::trim(row.fields[last_col])), std::nullopt, {}};
    if (first_col) {
      const auto f = str::trim(row.fields[*first_col]);
      if (!f.empty()) r.first_name = std::string(f);
    }
    names.push_back(std::move(r));
  }
  const auto pred = predict_records(model, names, o.threads);
  std::vector<int> row_of(names.size(), -1);
  for (std::size_t i = 0; i < pred.source.size(); ++i) row_of[pred.source[i]] = static_cast<int>(i);

  auto out = open_out(o.output);
  std::vector<std::string> header{"last_name", "first_name", "label"};
  for (const auto& l : model.labels.labels()) header.push_back("p_" + l);
  csv::write_row(out, header);
  for (std::size_t i = 0; i < names.size(); ++i) {
    std::vector<std::string> row{names[i].last_name, names[i].first_name.value_or(""), ""};
    if (row_of[i] >= 0) {
      const auto r = static_cast<Eigen::Index>(row_of[i]);
      row[2] = model.labels.label(static_cast<std::size_t>(pred.predicted[static_cast<std::size_t>(row_of[i])]));
      for (Eigen::Index c = 0; c < pred.probs.cols(); ++c) row.push_back(namerace::detail::exact(pred.probs(r, c)));
    } else {
      row.resize(header.size());
    }
    csv::write_row(out, row);
  }
  manifest.inputs = {o.model, o.input};
  manifest.outputs = {o.output};
  manifest.config["skipped_records"] = pred.skipped;
  manifest.config["threads"] = o.threads;
  if (!o.quiet) log << "predicted " << pred.source.size() << " records, skipped " << pred.skipped << '\n';
}

inline void cmd_aggregate(const Options& o, RunManifest& manifest, std::ostream& log) {
  const auto model = load_model(o.model);
  const ContributionSchema schema{o.last_col, o.first_col, o.amount_col, o.year_col};
  const auto records = load_contributions_csv(o.input, schema);
  const auto imputed = impute(records, model, o.threads);
  const auto groups = shares_by_year(records, imputed, o.soft ? ShareMode::soft : ShareMode::hard);
  {
    auto out = open_out(o.output);
    write_share_table_csv(out, groups);
  }
  manifest.inputs = {o.model, o.input};
  manifest.outputs = {o.output};
  manifest.config["share_mode"] = o.soft ? "soft" : "hard";
  manifest.config["skipped_records"] = imputed.skipped;
  manifest.config["threads"] = o.threads;
  if (!o.quiet) {
    for (const auto& [year, t] : groups) {
      for (std::size_t c = 0; c < t.labels.size(); ++c) {
        log << year << ' ' << t.labels.label(c) << ' ' << namerace::detail::fixed2(100.0 * t.shares[c]) << "%\n";
      }
    }
  }
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  using detail::Options;
  Options o;
  CLI::App app{"Name to race/ethnicity classification toolkit"};
  app.require_subcommand(1);
  app.fallthrough(false);

  auto* prepare = app.add_subcommand("prepare", "Load and split labeled names, fit the vocabulary, encode");
  prepare->add_option("--input", o.input, "Labeled CSV");
  prepare->add_option("--census", o.census, "Census surname-aggregate CSV (expanded to records)");
  prepare->add_option("--census-column", o.census_columns, "Percentage column mapping COLUMN=LABEL (repeatable)");
  prepare->add_option("--surname-col", o.surname_col)->capture_default_str();
  prepare->add_option("--count-col", o.count_col)->capture_default_str();
  prepare->add_option("--n-samples", o.n_samples, "Census draws")->check(CLI::PositiveNumber)->capture_default_str();
  prepare->add_option("--sample", o.sample, "Uniformly subsample this many records first (0 keeps all)");
  prepare->add_option("--label-col", o.label_col)->capture_default_str();
  prepare->add_option("--test-fraction", o.test_fraction)->check(CLI::Range(0.0, 1.0))->capture_default_str();
  prepare->add_flag("--dedup", o.dedup, "Drop duplicate (last, first, label) rows");
  prepare->add_option("--out-dir", o.out_dir)->required();
  detail::add_prep_flags(prepare, o);
  detail::add_name_columns(prepare, o);
  detail::add_seed_flag(prepare, o);

  auto* train = app.add_subcommand("train", "Train a model and write a model container");
  train->add_option("--data-dir", o.data_dir, "Output directory of `prepare`");
  train->add_option("--input", o.input, "Labeled CSV (vocabulary fitted on it)");
  train->add_option("--model", o.model, "Model container to write")->required();
  train->add_option("--loss-history", o.loss_history, "Per-epoch loss CSV (default <model>.loss.csv)");
  train->add_option("--label-col", o.label_col)->capture_default_str();
  train->add_flag("--dedup", o.dedup);
  train->add_flag("--quiet", o.quiet, "No per-epoch loss lines");
  detail::add_prep_flags(train, o);
  detail::add_model_flags(train, o);
  detail::add_name_columns(train, o);
  detail::add_seed_flag(train, o);

  auto* evaluate = app.add_subcommand("evaluate", "Classification report on a labeled CSV");
  evaluate->add_option("--model", o.model)->required();
  evaluate->add_option("--input", o.input, "Labeled CSV")->required();
  evaluate->add_option("--report", o.report, "Text report path")->required();
  evaluate->add_option("--report-csv", o.report_csv, "Delimited report path (default <report>.csv)");
  evaluate->add_option("--label-col", o.label_col)->capture_default_str();
  evaluate->add_flag("--quiet", o.quiet);
  detail::add_name_columns(evaluate, o);
  detail::add_threads_flag(evaluate, o);
  detail::add_seed_flag(evaluate, o);

  auto* predict = app.add_subcommand("predict", "Per-record label and class probabilities");
  predict->add_option("--model", o.model)->required();
  predict->add_option("--input", o.input, "CSV with name columns")->required();
  predict->add_option("--output", o.output)->required();
  predict->add_flag("--quiet", o.quiet);
  detail::add_name_columns(predict, o);
  detail::add_threads_flag(predict, o);
  detail::add_seed_flag(predict, o);

  auto* aggregate = app.add_subcommand("aggregate", "Share of total amount by imputed label");
  aggregate->add_option("--model", o.model)->required();
  aggregate->add_option("--input", o.input, "Contribution CSV")->required();
  aggregate->add_option("--output", o.output)->required();
  aggregate->add_option("--amount-col", o.amount_col)->capture_default_str();
  aggregate->add_option("--year-col", o.year_col)->capture_default_str();
  aggregate->add_flag("--soft", o.soft, "Split each amount by class probability instead of argmax");
  aggregate->add_flag("--quiet", o.quiet);
  detail::add_name_columns(aggregate, o);
  detail::add_threads_flag(aggregate, o);
  detail::add_seed_flag(aggregate, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  RunManifest manifest;
  manifest.seed = o.seed;
  const auto start = std::chrono::steady_clock::now();
  std::string manifest_path;
  try {
    if (prepare->parsed()) {
      manifest.subcommand = "prepare";
      detail::cmd_prepare(o, manifest, err);
      manifest_path = (std::filesystem::path(o.out_dir) / "manifest.json").string();
    } else if (train->parsed()) {
      manifest.subcommand = "train";
      detail::cmd_train(o, manifest, err);
      manifest_path = o.model + ".manifest.json";
    } else if (evaluate->parsed()) {
      manifest.subcommand = "evaluate";
      detail::cmd_evaluate(o, manifest, out);
      manifest_path = o.report + ".manifest.json";
    } else if (predict->parsed()) {
      manifest.subcommand = "predict";
      detail::cmd_predict(o, manifest, err);
      manifest_path = o.output + ".manifest.json";
    } else if (aggregate->parsed()) {
      manifest.subcommand = "aggregate";
      detail::cmd_aggregate(o, manifest, out);
      manifest_path = o.output + ".manifest.json";
    }
    manifest.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    manifest.write(manifest_path);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace namerace::cli
