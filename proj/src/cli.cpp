// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wstlid Authors

#include "wst/cli.hpp"

#include "wst/eval.hpp"
#include "wst/features.hpp"
#include "wst/filterbank.hpp"
#include "wst/io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <omp.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace wst::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Exception carrying an exit code up to run().
struct Failure {
  int code;
  std::string message;
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string two_decimals(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// Values from --config fill every option not given on the command line.
class ConfigBinder {
 public:
  explicit ConfigBinder(CLI::App* app) : app_(app) {
    app_->add_option("--config", path_, "JSON file whose keys mirror the flags");
  }

  template <class T>
  void bind(const std::string& key, const std::string& flag, T& target) {
    setters_[key] = [this, flag, &target](const json& v) {
      if (app_->count(flag) == 0) target = v.get<T>();
    };
  }

  void apply(std::ostream& err) {
    if (path_.empty()) return;
    const json j = read_json(path_);
    if (!j.is_object()) throw FormatError(path_, 0, "config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      auto it = setters_.find(key);
      if (it == setters_.end()) {
        err << "warning: " << path_ << ": ignoring unknown key '" << key << "'\n";
        continue;
      }
      try {
        it->second(value);
      } catch (const json::exception& e) {
        throw FormatError(path_, 0, "bad value for '" + key + "': " + e.what());
      }
    }
  }

 private:
  CLI::App* app_;
  std::string path_;
  std::map<std::string, std::function<void(const json&)>> setters_;
};

struct Labels {
  std::map<std::string, std::string> by_utterance;
};

Labels read_labels(const fs::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw Failure{kMalformed, e.what()};
  }
  Labels labels;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line[0] != '#') {
      const auto tab = line.find('\t');
      if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size() ||
          line.find('\t', tab + 1) != std::string::npos) {
        throw FormatError(path.string(), pos, "expected 'utterance<TAB>language'");
      }
      labels.by_utterance[line.substr(0, tab)] = line.substr(tab + 1);
    }
    pos = end + 1;
  }
  return labels;
}

// "<utterance>.<chunk>.scf" -> "<utterance>"
std::string utterance_of(const fs::path& p) {
  const std::string stem = p.stem().string();
  const auto dot = stem.rfind('.');
  return dot == std::string::npos ? stem : stem.substr(0, dot);
}

std::vector<fs::path> list_files(const fs::path& dir, const std::string& ext, bool* ok = nullptr) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    if (ok != nullptr) *ok = false;
    return {};
  }
  std::vector<fs::path> out;
  for (fs::directory_iterator it(dir, ec), end; !ec && it != end; it.increment(ec)) {
    if (!it->is_regular_file()) continue;
    if (ext.empty() || lower(it->path().extension().string()) == ext) out.push_back(it->path());
  }
  if (ec) {
    if (ok != nullptr) *ok = false;
    return {};
  }
  std::sort(out.begin(), out.end());
  if (ok != nullptr) *ok = true;
  return out;
}

struct ScoreFile {
  TrialScores scores;
  json system = json::object();
  std::string path;
};

ScoreFile load_scores(const std::string& path) {
  ScoreFile sf;
  sf.path = path;
  json j;
  try {
    j = read_json(path);
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw Failure{kMalformed, e.what()};
  }
  try {
    sf.scores = scores_from_json(j);
    if (j.contains("system") && j.at("system").is_object()) sf.system = j.at("system");
  } catch (const std::exception& e) {
    throw FormatError(path, 0, std::string("invalid score file: ") + e.what());
  }
  return sf;
}

void write_json(const fs::path& path, const json& j) {
  try {
    write_file(path, j.dump(2) + "\n");
  } catch (const std::exception& e) {
    throw Failure{kMalformed, e.what()};
  }
}

// ---------------------------------------------------------------- extract

struct ExtractArgs {
  std::string input;
  std::string output;
  std::string feature = "wst";
  int T = 256;
  int Q1 = 2;
  int Q2 = 1;
  int m = 2;
  int qf = 0;
  bool no_s0 = false;
  double vad_threshold_db = -35.0;
  double chunk_s = 3.0;
  int jobs = 1;
  std::string dump_filterbank;
};

PipelineConfig pipeline_from(const ExtractArgs& a) {
  PipelineConfig cfg;
  if (a.feature == "mfcc") cfg.kind = FeatureKind::mfcc;
  else if (a.feature == "wst") cfg.kind = FeatureKind::wst;
  else throw std::invalid_argument("--feature must be 'wst' or 'mfcc'");
  cfg.vad.threshold_db = a.vad_threshold_db;
  cfg.chunk_s = a.chunk_s;
  cfg.scattering.T = a.T;
  cfg.scattering.Q1 = a.Q1;
  cfg.scattering.Q2 = a.Q2;
  cfg.scattering.m = a.m;
  cfg.scattering.include_s0 = !a.no_s0;
  if (a.qf != 0) cfg.scattering.freq_scattering = FreqScatteringConfig{a.qf, 1};
  cfg.validate();
  return cfg;
}

int cmd_extract(const ExtractArgs& a, std::ostream& out, std::ostream& err) {
  PipelineConfig cfg;
  try {
    cfg = pipeline_from(a);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  bool ok = false;
  const auto all = list_files(a.input, "", &ok);
  if (!ok) {
    err << "error: cannot read input directory " << a.input << "\n";
    return kMalformed;
  }
  std::error_code ec;
  fs::create_directories(a.output, ec);
  if (ec || !fs::is_directory(a.output)) {
    err << "error: cannot create output directory " << a.output << "\n";
    return kMalformed;
  }

  std::vector<fs::path> wavs;
  for (const auto& p : all) {
    if (lower(p.extension().string()) == ".wav") wavs.push_back(p);
    else err << "warning: skipping non-WAV file " << p.string() << "\n";
  }

  const FeatureExtractor extractor(cfg);
  const json config_echo = pipeline_config_to_json(cfg);

  if (!a.dump_filterbank.empty() && cfg.kind == FeatureKind::wst) {
    const auto chunk_len = static_cast<std::size_t>(cfg.chunk_s * kDefaultSampleRate);
    const auto banks = make_banks(cfg.scattering, chunk_len);
    json layers = json::array();
    for (const auto& b : banks) layers.push_back(filterbank_to_json(b, kDefaultSampleRate));
    write_json(a.dump_filterbank, {{"layers", layers}});
  }

  enum class Status { ok, silent, unsupported, failed };
  struct Result {
    Status status = Status::failed;
    std::size_t chunks = 0;
    std::string message;
  };
  std::vector<Result> results(wavs.size());
  const int jobs = a.jobs > 0 ? a.jobs : omp_get_max_threads();
  const auto count = static_cast<long>(wavs.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
  for (long i = 0; i < count; ++i) {
    auto& r = results[static_cast<std::size_t>(i)];
    const auto& path = wavs[static_cast<std::size_t>(i)];
    try {
      const AudioBuffer x = read_wav(path);
      const auto chunks = extractor.extract(x);
      const std::string utt = path.stem().string();
      for (std::size_t c = 0; c < chunks.size(); ++c) {
        const json extra{{"utterance", utt}, {"chunk", c}, {"config", config_echo}};
        write_feature_file(fs::path(a.output) / (utt + "." + std::to_string(c) + ".scf"), chunks[c], extra);
      }
      r.chunks = chunks.size();
      r.status = chunks.empty() ? Status::silent : Status::ok;
    } catch (const UnsupportedAudio& e) {
      r.status = Status::unsupported;
      r.message = e.what();
    } catch (const std::exception& e) {
      r.status = Status::failed;
      r.message = e.what();
    }
  }

  std::size_t processed = 0;
  std::size_t chunks = 0;
  std::size_t silent = 0;
  std::size_t skipped = all.size() - wavs.size();
  for (const auto& r : results) {
    switch (r.status) {
      case Status::ok: ++processed; chunks += r.chunks; break;
      case Status::silent: ++processed; ++silent; break;
      case Status::unsupported: ++skipped; err << "warning: skipping " << r.message << "\n"; break;
      case Status::failed: ++skipped; err << "warning: skipping " << r.message << "\n"; break;
    }
  }
  if (processed == 0) {
    err << "error: no processable 16-bit mono 8 kHz WAV files in " << a.input << "\n";
    return kNothingToDo;
  }
  out << "files: " << processed << "  chunks: " << chunks << "  silent: " << silent
      << "  skipped: " << skipped << "\n";
  return kOk;
}

// ------------------------------------------------------------------ train

struct TrainArgs {
  std::string features;
  std::string labels;
  std::string output;
  int epochs = 300;
  double learning_rate = 0.5;
  double l2 = 1e-4;
  std::uint64_t seed = 0;
};

struct Chunk {
  std::string id;
  std::string utterance;
  RealVector pooled;
  json config;
};

std::vector<Chunk> load_chunks(const std::string& dir) {
  bool ok = false;
  const auto files = list_files(dir, ".scf", &ok);
  if (!ok) throw Failure{kMalformed, "cannot read feature directory " + dir};
  std::vector<Chunk> chunks;
  for (const auto& f : files) {
    FeatureFile ff;
    try {
      ff = read_feature_file(f);
    } catch (const FormatError&) {
      throw;
    } catch (const std::exception& e) {
      throw Failure{kMalformed, e.what()};
    }
    if (ff.features.frames() == 0) throw FormatError(f.string(), 8, "feature file has no frames");
    Chunk c;
    c.id = f.stem().string();
    c.utterance = utterance_of(f);
    c.pooled = pool_statistics(ff.features.data);
    c.config = ff.metadata.value("config", json::object());
    if (!chunks.empty() && chunks.front().pooled.size() != c.pooled.size()) {
      throw FormatError(f.string(), 12, "feature width differs from " + chunks.front().id);
    }
    chunks.push_back(std::move(c));
  }
  if (chunks.empty()) throw Failure{kNothingToDo, "no .scf feature files in " + dir};
  return chunks;
}

json system_summary(const json& config) {
  json s = json::object();
  if (config.contains("scattering")) {
    s["T"] = config["scattering"].value("T", 0);
    s["Q"] = config["scattering"].value("Q1", 0);
  }
  if (config.contains("feature")) s["feature"] = config["feature"];
  return s;
}

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  const Labels labels = read_labels(a.labels);
  const auto chunks = load_chunks(a.features);
  std::set<std::string> langs;
  std::vector<const Chunk*> used;
  for (const auto& c : chunks) {
    auto it = labels.by_utterance.find(c.utterance);
    if (it == labels.by_utterance.end()) {
      err << "warning: no label for " << c.id << ", skipped\n";
      continue;
    }
    langs.insert(it->second);
    used.push_back(&c);
  }
  if (used.empty()) {
    err << "error: no labelled feature files\n";
    return kNothingToDo;
  }
  const std::vector<std::string> names(langs.begin(), langs.end());
  if (names.size() < 2) {
    err << "error: training needs at least two languages\n";
    return kNothingToDo;
  }
  Matrix X(static_cast<Eigen::Index>(used.size()), static_cast<Eigen::Index>(used[0]->pooled.size()));
  std::vector<int> y;
  for (std::size_t i = 0; i < used.size(); ++i) {
    for (std::size_t d = 0; d < used[i]->pooled.size(); ++d) {
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = used[i]->pooled[d];
    }
    const auto& lang = labels.by_utterance.at(used[i]->utterance);
    y.push_back(static_cast<int>(std::find(names.begin(), names.end(), lang) - names.begin()));
  }
  TrainingOptions opt;
  opt.epochs = a.epochs;
  opt.learning_rate = a.learning_rate;
  opt.l2 = a.l2;
  opt.seed = a.seed;
  const LinearClassifier model = train_linear_classifier(X, y, static_cast<int>(names.size()), opt);
  json j = classifier_to_json(model);
  j["language_names"] = names;
  j["feature_config"] = used[0]->config;
  j["seed"] = a.seed;
  write_json(a.output, j);
  out << "trained on " << used.size() << " chunks, " << names.size() << " languages, "
      << X.cols() << " dims; loss " << model.initial_loss << " -> " << model.final_loss << "\n";
  return kOk;
}

// ------------------------------------------------------------------ score

struct ScoreArgs {
  std::string model;
  std::string features;
  std::string labels;
  std::string output;
};

int cmd_score(const ScoreArgs& a, std::ostream& out, std::ostream& err) {
  const json mj = read_json(a.model);
  LinearClassifier model;
  std::vector<std::string> names;
  json feature_config;
  try {
    model = classifier_from_json(mj);
    names = mj.at("language_names").get<std::vector<std::string>>();
    feature_config = mj.value("feature_config", json::object());
    if (names.size() != static_cast<std::size_t>(model.languages())) {
      throw std::invalid_argument("language_names does not match the weight rows");
    }
  } catch (const std::exception& e) {
    throw FormatError(a.model, 0, std::string("invalid model: ") + e.what());
  }
  const auto chunks = load_chunks(a.features);
  if (static_cast<Eigen::Index>(chunks[0].pooled.size()) != model.dimension()) {
    throw Failure{kMalformed, "feature width " + std::to_string(chunks[0].pooled.size()) +
                                  " does not match model dimension " + std::to_string(model.dimension())};
  }
  Labels labels;
  if (!a.labels.empty()) labels = read_labels(a.labels);

  TrialScores scores;
  scores.language_names = names;
  std::vector<const Chunk*> used;
  for (const auto& c : chunks) {
    if (!a.labels.empty()) {
      auto it = labels.by_utterance.find(c.utterance);
      if (it == labels.by_utterance.end()) {
        err << "warning: no label for " << c.id << ", skipped\n";
        continue;
      }
      auto pos = std::find(names.begin(), names.end(), it->second);
      if (pos == names.end()) {
        err << "warning: language '" << it->second << "' of " << c.id << " unknown to the model, skipped\n";
        continue;
      }
      scores.labels.push_back(static_cast<int>(pos - names.begin()));
    }
    used.push_back(&c);
  }
  if (used.empty()) {
    err << "error: nothing to score\n";
    return kNothingToDo;
  }
  scores.logits.resize(static_cast<Eigen::Index>(used.size()), model.languages());
  for (std::size_t i = 0; i < used.size(); ++i) {
    scores.utterance_ids.push_back(used[i]->id);
    scores.logits.row(static_cast<Eigen::Index>(i)) = classify(model, used[i]->pooled).transpose();
  }
  json j = scores_to_json(scores);
  j["system"] = system_summary(feature_config);
  write_json(a.output, j);
  out << "scored " << used.size() << " trials\n";
  return kOk;
}

// ------------------------------------------------------------------- eval

json metric_report(const TrialScores& s) {
  json per = json::object();
  for (std::size_t l = 0; l < s.languages(); ++l) {
    RealVector tgt;
    RealVector non;
    for (std::size_t n = 0; n < s.trials(); ++n) {
      (s.labels[n] == static_cast<int>(l) ? tgt : non)
          .push_back(s.logits(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(l)));
    }
    const std::string name = l < s.language_names.size() ? s.language_names[l] : std::to_string(l);
    per[name] = (tgt.empty() || non.empty()) ? json(nullptr) : json(compute_eer(tgt, non));
  }
  const double eer = compute_eer(s);
  const double cavg = compute_cavg(s);
  return {{"eer", eer},
          {"cavg", cavg},
          {"eer_percent", 100.0 * eer},
          {"cavg_x100", 100.0 * cavg},
          {"trials", s.trials()},
          {"languages", s.languages()},
          {"per_language_eer", per}};
}

std::string metric_line(const json& report) {
  return "EER: " + two_decimals(report["eer_percent"].get<double>()) +
         "  Cavg: " + two_decimals(report["cavg_x100"].get<double>());
}

json labelled_report(const TrialScores& s, const std::string& path) {
  if (!s.has_labels()) throw Failure{kMalformed, path + ": trials carry no labels"};
  try {
    return metric_report(s);
  } catch (const std::invalid_argument& e) {
    throw Failure{kMalformed, path + ": " + e.what()};
  }
}

struct EvalArgs {
  std::string scores;
  std::string report;
};

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream&) {
  const ScoreFile sf = load_scores(a.scores);
  const json report = labelled_report(sf.scores, a.scores);
  out << metric_line(report) << "\n";
  if (!a.report.empty()) write_json(a.report, report);
  return kOk;
}

// ------------------------------------------------------------------- fuse

struct FuseArgs {
  std::vector<std::string> val;
  std::vector<std::string> test;
  std::string output;
  std::string report;
  std::string model_out;
  double l2 = 1e-3;
  std::size_t top_k = 0;
};

int cmd_fuse(const FuseArgs& a, std::ostream& out, std::ostream& err) {
  if (a.val.size() != a.test.size()) {
    err << "error: --val and --test need the same number of score files\n";
    return kUsage;
  }
  std::vector<ScoreFile> val;
  std::vector<ScoreFile> test;
  for (const auto& p : a.val) val.push_back(load_scores(p));
  for (const auto& p : a.test) test.push_back(load_scores(p));

  auto check = [&](const std::vector<ScoreFile>& set, const char* what) {
    std::vector<TrialScores> s;
    for (const auto& f : set) s.push_back(f.scores);
    for (std::size_t i = 0; i < set.size(); ++i) {
      if (set[i].scores.language_names != set[0].scores.language_names) {
        throw Failure{kMisaligned, std::string(what) + " score files disagree on languages: " + set[i].path};
      }
    }
    try {
      check_aligned(s);
    } catch (const std::invalid_argument& e) {
      throw Failure{kMisaligned, std::string(what) + " score files are misaligned: " + e.what()};
    }
  };
  check(val, "validation");
  check(test, "test");
  if (val[0].scores.language_names != test[0].scores.language_names) {
    throw Failure{kMisaligned, "validation and test score files disagree on languages"};
  }
  if (!val[0].scores.has_labels()) throw Failure{kMalformed, a.val[0] + ": validation trials carry no labels"};

  std::vector<SystemSummary> summary;
  for (const auto& f : val) {
    summary.push_back({compute_eer(f.scores), f.system.value("T", 0), f.system.value("Q", 0)});
  }
  const std::size_t k = a.top_k == 0 ? val.size() : std::min(a.top_k, val.size());
  const auto chosen = select_top_k(summary, k);
  std::vector<TrialScores> val_sel;
  std::vector<TrialScores> test_sel;
  for (auto i : chosen) {
    val_sel.push_back(val[i].scores);
    test_sel.push_back(test[i].scores);
  }
  FusionOptions opt;
  opt.l2 = a.l2;
  const FusionModel model = train_fusion(val_sel, opt);
  const TrialScores fused = apply_fusion(model, test_sel);
  write_json(a.output, scores_to_json(fused));
  if (!a.model_out.empty()) write_json(a.model_out, fusion_to_json(model));

  json report{{"systems", json::array()}, {"model", fusion_to_json(model)}};
  for (auto i : chosen) report["systems"].push_back({{"val", a.val[i]}, {"test", a.test[i]}, {"val_eer", summary[i].eer}});
  out << "fused " << chosen.size() << " of " << val.size() << " systems\n";
  if (fused.has_labels()) {
    report["test"] = labelled_report(fused, a.output);
    out << metric_line(report["test"]) << "\n";
  }
  if (!a.report.empty()) write_json(a.report, report);
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Wavelet scattering features and language identification experiments", "wstlid"};
  app.require_subcommand(1);

  ExtractArgs ea;
  auto* extract = app.add_subcommand("extract", "Extract per-chunk features from a WAV directory");
  extract->add_option("--input", ea.input, "Directory of 16-bit PCM mono 8 kHz WAV files")->required();
  extract->add_option("--output", ea.output, "Output directory for .scf files")->required();
  extract->add_option("--feature", ea.feature, "wst or mfcc")->capture_default_str();
  extract->add_option("--T", ea.T, "Averaging span in samples")->capture_default_str();
  extract->add_option("--Q1", ea.Q1, "Wavelets per octave, layer 1")->capture_default_str();
  extract->add_option("--Q2", ea.Q2, "Wavelets per octave, layer 2")->capture_default_str();
  extract->add_option("--m", ea.m, "Scattering order")->capture_default_str();
  extract->add_option("--qf", ea.qf, "Frequency-scattering Q (0 disables)")->capture_default_str();
  extract->add_flag("--no-s0", ea.no_s0, "Drop the order-0 channel");
  extract->add_option("--vad-threshold-db", ea.vad_threshold_db, "VAD threshold below peak (dB)")
      ->capture_default_str();
  extract->add_option("--chunk-s", ea.chunk_s, "Chunk length in seconds")->capture_default_str();
  extract->add_option("--jobs", ea.jobs, "Worker threads (0 = all cores)")->capture_default_str();
  extract->add_option("--dump-filterbank", ea.dump_filterbank, "Write the filterbank description as JSON");
  ConfigBinder extract_cfg(extract);
  extract_cfg.bind("input", "--input", ea.input);
  extract_cfg.bind("output", "--output", ea.output);
  extract_cfg.bind("feature", "--feature", ea.feature);
  extract_cfg.bind("T", "--T", ea.T);
  extract_cfg.bind("Q1", "--Q1", ea.Q1);
  extract_cfg.bind("Q2", "--Q2", ea.Q2);
  extract_cfg.bind("m", "--m", ea.m);
  extract_cfg.bind("qf", "--qf", ea.qf);
  extract_cfg.bind("no_s0", "--no-s0", ea.no_s0);
  extract_cfg.bind("vad_threshold_db", "--vad-threshold-db", ea.vad_threshold_db);
  extract_cfg.bind("chunk_s", "--chunk-s", ea.chunk_s);
  extract_cfg.bind("jobs", "--jobs", ea.jobs);

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train the linear classifier on pooled chunk features");
  train->add_option("--features", ta.features, "Directory of .scf files")->required();
  train->add_option("--labels", ta.labels, "TSV: utterance<TAB>language")->required();
  train->add_option("--output", ta.output, "Model JSON")->required();
  train->add_option("--epochs", ta.epochs)->capture_default_str();
  train->add_option("--learning-rate", ta.learning_rate)->capture_default_str();
  train->add_option("--l2", ta.l2)->capture_default_str();
  train->add_option("--seed", ta.seed)->capture_default_str();
  ConfigBinder train_cfg(train);
  train_cfg.bind("epochs", "--epochs", ta.epochs);
  train_cfg.bind("learning_rate", "--learning-rate", ta.learning_rate);
  train_cfg.bind("l2", "--l2", ta.l2);
  train_cfg.bind("seed", "--seed", ta.seed);

  ScoreArgs sa;
  auto* score = app.add_subcommand("score", "Score chunk features with a trained model");
  score->add_option("--model", sa.model)->required();
  score->add_option("--features", sa.features)->required();
  score->add_option("--labels", sa.labels, "Optional TSV with true languages");
  score->add_option("--output", sa.output)->required();

  EvalArgs va;
  auto* eval = app.add_subcommand("eval", "Print EER (%) and Cavg x 100 of a score file");
  eval->add_option("--scores", va.scores)->required();
  eval->add_option("--report", va.report, "Write a JSON report");

  FuseArgs fa;
  auto* fuse = app.add_subcommand("fuse", "Logistic-regression score fusion");
  fuse->add_option("--val", fa.val, "Validation score files, one per system")->required();
  fuse->add_option("--test", fa.test, "Test score files, same system order")->required();
  fuse->add_option("--output", fa.output, "Fused test scores")->required();
  fuse->add_option("--report", fa.report);
  fuse->add_option("--model-out", fa.model_out, "Write the fusion model");
  fuse->add_option("--l2", fa.l2)->capture_default_str();
  fuse->add_option("--top-k", fa.top_k, "Fuse only the k systems with lowest validation EER");
  ConfigBinder fuse_cfg(fuse);
  fuse_cfg.bind("l2", "--l2", fa.l2);
  fuse_cfg.bind("top_k", "--top-k", fa.top_k);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*extract) {
      extract_cfg.apply(err);
      return cmd_extract(ea, out, err);
    }
    if (*train) {
      train_cfg.apply(err);
      return cmd_train(ta, out, err);
    }
    if (*score) return cmd_score(sa, out, err);
    if (*eval) return cmd_eval(va, out, err);
    if (*fuse) {
      fuse_cfg.apply(err);
      return cmd_fuse(fa, out, err);
    }
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kMalformed;
  } catch (const Failure& f) {
    err << "error: " << f.message << "\n";
    return f.code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kMalformed;
  }
  return kUsage;
}

}  // namespace wst::cli
