// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wstlid Authors

#include "wst/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>

namespace wst {

using nlohmann::json;

FormatError::FormatError(std::string file, std::uint64_t offset, const std::string& message)
    : std::runtime_error(file + ": " + message + " (byte offset " + std::to_string(offset) + ")"),
      file_(std::move(file)),
      offset_(offset) {}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

namespace {

class Reader {
 public:
  Reader(std::string_view bytes, const std::string& name) : bytes_(bytes), name_(name) {}

  std::size_t pos() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n) {
      throw FormatError(name_, pos_, std::string("truncated ") + what);
    }
  }
  std::string_view take(std::size_t n, const char* what) {
    need(n, what);
    auto v = bytes_.substr(pos_, n);
    pos_ += n;
    return v;
  }
  std::uint32_t u32(const char* what) {
    auto v = take(4, what);
    std::uint32_t r = 0;
    for (int i = 3; i >= 0; --i) r = (r << 8) | static_cast<unsigned char>(v[static_cast<std::size_t>(i)]);
    return r;
  }
  std::uint16_t u16(const char* what) {
    auto v = take(2, what);
    return static_cast<std::uint16_t>(static_cast<unsigned char>(v[0]) |
                                      (static_cast<unsigned char>(v[1]) << 8));
  }
  void skip(std::size_t n, const char* what) { take(n, what); }
  [[noreturn]] void fail(const std::string& message, std::size_t at) const {
    throw FormatError(name_, at, message);
  }

 private:
  std::string_view bytes_;
  const std::string& name_;
  std::size_t pos_ = 0;
};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFFu));
  out.push_back(static_cast<char>(v >> 8));
}

}  // namespace

AudioBuffer decode_wav(std::string_view bytes, const std::string& name) {
  Reader r(bytes, name);
  if (r.take(4, "RIFF header") != "RIFF") r.fail("missing RIFF magic", 0);
  r.u32("RIFF size");
  if (r.take(4, "WAVE tag") != "WAVE") r.fail("missing WAVE tag", 8);

  bool have_fmt = false;
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t rate = 0;
  std::uint16_t bits = 0;
  while (r.remaining() > 0) {
    const std::size_t chunk_at = r.pos();
    const std::string id(r.take(4, "chunk id"));
    const std::uint32_t size = r.u32("chunk size");
    if (id == "fmt ") {
      if (size < 16) r.fail("fmt chunk shorter than 16 bytes", chunk_at);
      r.need(size, "fmt chunk");
      format = r.u16("format tag");
      channels = r.u16("channel count");
      rate = r.u32("sample rate");
      r.u32("byte rate");
      r.u16("block align");
      bits = r.u16("bits per sample");
      if (size > 16) {
        std::uint16_t sub_format = 0;
        const std::size_t extra = size - 16;
        if (format == 0xFFFE && extra >= 10) {
          r.u16("extension size");
          r.u16("valid bits");
          r.u32("channel mask");
          sub_format = r.u16("sub-format");
          r.skip(extra - 10, "fmt extension");
          format = sub_format;
        } else {
          r.skip(extra, "fmt extension");
        }
      }
      if (size % 2 == 1 && r.remaining() > 0) r.skip(1, "pad byte");
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) r.fail("data chunk before fmt chunk", chunk_at);
      if (format != 1 || bits != 16) {
        throw UnsupportedAudio(name + ": only 16-bit PCM is supported (format " +
                               std::to_string(format) + ", " + std::to_string(bits) + " bits)");
      }
      if (channels != 1) {
        throw UnsupportedAudio(name + ": only mono is supported (" + std::to_string(channels) +
                               " channels)");
      }
      if (rate != static_cast<std::uint32_t>(kDefaultSampleRate)) {
        throw UnsupportedAudio(name + ": sample rate " + std::to_string(rate) +
                               " Hz, expected 8000 Hz");
      }
      if (size % 2 != 0) r.fail("odd data chunk size for 16-bit samples", chunk_at + 4);
      r.need(size, "sample data");
      RealVector samples(size / 2);
      for (auto& s : samples) {
        s = static_cast<double>(static_cast<std::int16_t>(r.u16("sample"))) / 32768.0;
      }
      return AudioBuffer(std::move(samples), kDefaultSampleRate);
    } else {
      r.skip(size, "chunk body");
      if (size % 2 == 1 && r.remaining() > 0) r.skip(1, "pad byte");
    }
  }
  r.fail("no data chunk", r.pos());
}

AudioBuffer read_wav(const std::filesystem::path& path) {
  return decode_wav(read_file(path), path.string());
}

std::string encode_wav(const AudioBuffer& x) {
  std::string out;
  const auto data_bytes = static_cast<std::uint32_t>(2 * x.size());
  out.append("RIFF");
  put_u32(out, 36 + data_bytes);
  out.append("WAVEfmt ");
  put_u32(out, 16);
  put_u16(out, 1);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(x.sample_rate_hz()));
  put_u32(out, static_cast<std::uint32_t>(x.sample_rate_hz()) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out.append("data");
  put_u32(out, data_bytes);
  for (double s : x.samples()) {
    const double v = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
  }
  return out;
}

void write_wav(const std::filesystem::path& path, const AudioBuffer& x) {
  write_file(path, encode_wav(x));
}

json channel_to_json(const ChannelInfo& c) {
  json j{{"kind", to_string(c.kind)}};
  switch (c.kind) {
    case ChannelKind::order0: break;
    case ChannelKind::order1: j["lambda1"] = c.lambda1; j["geometric"] = c.geometric; break;
    case ChannelKind::order2:
      j["lambda1"] = c.lambda1;
      j["lambda2"] = c.lambda2;
      j["geometric"] = c.geometric;
      break;
    case ChannelKind::freq_lowpass: break;
    case ChannelKind::freq_bandpass: j["mu"] = c.mu; j["geometric"] = c.geometric; break;
    case ChannelKind::cepstral: j["index"] = c.index; break;
  }
  return j;
}

ChannelInfo channel_from_json(const json& j) {
  ChannelInfo c;
  const std::string kind = j.at("kind").get<std::string>();
  bool known = false;
  for (auto k : {ChannelKind::order0, ChannelKind::order1, ChannelKind::order2,
                 ChannelKind::freq_lowpass, ChannelKind::freq_bandpass, ChannelKind::cepstral}) {
    if (kind == to_string(k)) {
      c.kind = k;
      known = true;
    }
  }
  if (!known) throw std::invalid_argument("unknown channel kind '" + kind + "'");
  c.lambda1 = j.value("lambda1", 0.0);
  c.lambda2 = j.value("lambda2", 0.0);
  c.mu = j.value("mu", 0.0);
  c.geometric = j.value("geometric", true);
  c.index = j.value("index", 0);
  return c;
}

std::string encode_feature_file(const FeatureMatrix& f, const json& extra) {
  if (static_cast<std::size_t>(f.width()) != f.channels.size()) {
    throw std::invalid_argument("encode_feature_file: channel map does not match width");
  }
  json meta = extra.is_object() ? extra : json::object();
  meta["normalized"] = f.normalized;
  meta["channels"] = json::array();
  for (const auto& c : f.channels) meta["channels"].push_back(channel_to_json(c));
  const std::string meta_text = meta.dump();

  std::string out;
  out.reserve(28 + static_cast<std::size_t>(f.data.size()) * 4 + meta_text.size());
  out.append("SCF1");
  put_u32(out, kFeatureFileVersion);
  put_u32(out, static_cast<std::uint32_t>(f.frames()));
  put_u32(out, static_cast<std::uint32_t>(f.width()));
  put_u32(out, static_cast<std::uint32_t>(f.hop_samples));
  put_u32(out, static_cast<std::uint32_t>(f.sample_rate_hz));
  for (Eigen::Index r = 0; r < f.frames(); ++r) {
    for (Eigen::Index c = 0; c < f.width(); ++c) {
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(f.data(r, c))));
    }
  }
  put_u32(out, static_cast<std::uint32_t>(meta_text.size()));
  out.append(meta_text);
  return out;
}

FeatureFile decode_feature_file(std::string_view bytes, const std::string& name) {
  Reader r(bytes, name);
  if (r.take(4, "magic") != "SCF1") r.fail("bad magic, expected SCF1", 0);
  const std::uint32_t version = r.u32("version");
  if (version != kFeatureFileVersion) r.fail("unsupported version " + std::to_string(version), 4);
  const std::uint32_t rows = r.u32("row count");
  const std::uint32_t cols = r.u32("column count");
  const std::uint32_t hop = r.u32("hop");
  const std::uint32_t rate = r.u32("sample rate");
  const std::uint64_t payload = static_cast<std::uint64_t>(rows) * cols * 4;
  if (payload > r.remaining()) {
    r.fail("truncated payload: need " + std::to_string(payload) + " bytes, have " +
               std::to_string(r.remaining()),
           r.pos() + r.remaining());
  }
  FeatureFile ff;
  ff.features.data.resize(rows, cols);
  for (std::uint32_t i = 0; i < rows; ++i) {
    for (std::uint32_t c = 0; c < cols; ++c) {
      ff.features.data(i, c) = static_cast<double>(std::bit_cast<float>(r.u32("payload")));
    }
  }
  const std::size_t meta_at = r.pos();
  const std::uint32_t meta_len = r.u32("metadata length");
  if (meta_len != r.remaining()) {
    r.fail("metadata length " + std::to_string(meta_len) + " does not match the " +
               std::to_string(r.remaining()) + " remaining bytes",
           meta_at);
  }
  const std::size_t json_at = r.pos();
  const auto text = r.take(meta_len, "metadata");
  try {
    ff.metadata = json::parse(text);
  } catch (const json::parse_error& e) {
    r.fail(std::string("metadata is not valid JSON: ") + e.what(), json_at + (e.byte > 0 ? e.byte - 1 : 0));
  }
  try {
    if (ff.metadata.contains("channels")) {
      for (const auto& c : ff.metadata.at("channels")) ff.features.channels.push_back(channel_from_json(c));
    }
    ff.features.normalized = ff.metadata.value("normalized", false);
  } catch (const std::exception& e) {
    r.fail(std::string("bad channel map: ") + e.what(), json_at);
  }
  if (!ff.features.channels.empty() && ff.features.channels.size() != cols) {
    r.fail("channel map has " + std::to_string(ff.features.channels.size()) + " entries for " +
               std::to_string(cols) + " columns",
           json_at);
  }
  ff.features.hop_samples = static_cast<int>(hop);
  ff.features.sample_rate_hz = static_cast<int>(rate);
  return ff;
}

void write_feature_file(const std::filesystem::path& path, const FeatureMatrix& features,
                        const json& extra) {
  write_file(path, encode_feature_file(features, extra));
}

FeatureFile read_feature_file(const std::filesystem::path& path) {
  return decode_feature_file(read_file(path), path.string());
}

namespace {

json matrix_rows(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    rows.push_back(std::vector<double>(m.row(r).data(), m.row(r).data() + m.cols()));
  }
  return rows;
}

Matrix matrix_from_rows(const json& rows, Eigen::Index cols_hint = -1) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::Index cols = n > 0 ? static_cast<Eigen::Index>(rows[0].size()) : std::max<Eigen::Index>(cols_hint, 0);
  Matrix m(n, cols);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto row = rows[static_cast<std::size_t>(r)].get<std::vector<double>>();
    if (static_cast<Eigen::Index>(row.size()) != cols) throw std::invalid_argument("ragged matrix rows");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

Eigen::VectorXd vector_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> vector_to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

json scores_to_json(const TrialScores& s) {
  json trials = json::array();
  for (std::size_t n = 0; n < s.trials(); ++n) {
    const auto row = s.logits.row(static_cast<Eigen::Index>(n));
    json t{{"id", n < s.utterance_ids.size() ? s.utterance_ids[n] : std::to_string(n)},
           {"logits", std::vector<double>(row.data(), row.data() + row.size())}};
    if (s.has_labels()) t["label"] = s.language_names.empty() ? json(s.labels[n]) : json(s.language_names[static_cast<std::size_t>(s.labels[n])]);
    trials.push_back(std::move(t));
  }
  return {{"language_names", s.language_names}, {"trials", trials}};
}

TrialScores scores_from_json(const json& j) {
  TrialScores s;
  s.language_names = j.at("language_names").get<std::vector<std::string>>();
  const auto& trials = j.at("trials");
  const auto L = static_cast<Eigen::Index>(s.language_names.size());
  s.logits.resize(static_cast<Eigen::Index>(trials.size()), L);
  bool any_label = false;
  bool all_label = true;
  for (std::size_t n = 0; n < trials.size(); ++n) {
    const auto& t = trials[n];
    s.utterance_ids.push_back(t.at("id").get<std::string>());
    const auto logits = t.at("logits").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(logits.size()) != L) {
      throw std::invalid_argument("trial " + s.utterance_ids.back() + " has " +
                                  std::to_string(logits.size()) + " logits for " +
                                  std::to_string(L) + " languages");
    }
    for (Eigen::Index l = 0; l < L; ++l) s.logits(static_cast<Eigen::Index>(n), l) = logits[static_cast<std::size_t>(l)];
    if (t.contains("label") && !t.at("label").is_null()) {
      any_label = true;
      const auto& lab = t.at("label");
      int idx = -1;
      if (lab.is_string()) {
        const auto it = std::find(s.language_names.begin(), s.language_names.end(), lab.get<std::string>());
        if (it == s.language_names.end()) throw std::invalid_argument("unknown label " + lab.get<std::string>());
        idx = static_cast<int>(it - s.language_names.begin());
      } else {
        idx = lab.get<int>();
      }
      s.labels.push_back(idx);
    } else {
      all_label = false;
    }
  }
  if (any_label && !all_label) throw std::invalid_argument("labels present on only some trials");
  s.validate();
  return s;
}

json fusion_to_json(const FusionModel& m) {
  return {{"weights", m.weights}, {"bias", vector_to_std(m.bias)}, {"l2_penalty", m.l2_penalty}};
}

FusionModel fusion_from_json(const json& j) {
  FusionModel m;
  m.weights = j.at("weights").get<std::vector<double>>();
  m.bias = vector_from_json(j.at("bias"));
  m.l2_penalty = j.value("l2_penalty", 1e-3);
  for (double w : m.weights) {
    if (!std::isfinite(w)) throw std::invalid_argument("non-finite fusion weight");
  }
  return m;
}

json classifier_to_json(const LinearClassifier& m) {
  return {{"weights", matrix_rows(m.weights)},
          {"bias", vector_to_std(m.bias)},
          {"epochs", m.epochs},
          {"learning_rate", m.learning_rate},
          {"initial_loss", m.initial_loss},
          {"final_loss", m.final_loss}};
}

LinearClassifier classifier_from_json(const json& j) {
  LinearClassifier m;
  m.weights = matrix_from_rows(j.at("weights"));
  m.bias = vector_from_json(j.at("bias"));
  if (m.bias.size() != m.weights.rows()) throw std::invalid_argument("bias length does not match weights");
  if (!m.weights.allFinite() || !m.bias.allFinite()) throw std::invalid_argument("non-finite model");
  m.epochs = j.value("epochs", 0);
  m.learning_rate = j.value("learning_rate", 0.0);
  m.initial_loss = j.value("initial_loss", 0.0);
  m.final_loss = j.value("final_loss", 0.0);
  return m;
}

json scattering_config_to_json(const ScatteringConfig& c) {
  json j{{"T", c.T},           {"Q1", c.Q1},
         {"Q2", c.Q2},         {"m", c.m},
         {"log_eps", c.log_eps}, {"oversampling", c.oversampling},
         {"include_s0", c.include_s0}, {"qf", c.freq_scattering ? c.freq_scattering->Qf : 0}};
  return j;
}

json pipeline_config_to_json(const PipelineConfig& c) {
  json j{{"feature", c.kind == FeatureKind::mfcc ? "mfcc" : "wst"},
         {"vad_threshold_db", c.vad.threshold_db},
         {"chunk_s", c.chunk_s},
         {"cms", c.apply_cms}};
  if (c.kind == FeatureKind::wst) {
    j["scattering"] = scattering_config_to_json(c.scattering);
  } else {
    j["mfcc"] = {{"n_coeffs", c.mfcc.n_coeffs}, {"n_mels", c.mfcc.n_mels}};
  }
  return j;
}

json read_json(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string(), e.byte > 0 ? e.byte - 1 : 0, std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace wst
