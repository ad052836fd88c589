// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wstlid Authors

#pragma once

#include "wst/eval.hpp"
#include "wst/features.hpp"
#include "wst/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace wst {

/// Structurally invalid file; carries the file name and the byte offset at
/// which decoding stopped.
class FormatError : public std::runtime_error {
 public:
  FormatError(std::string file, std::uint64_t offset, const std::string& message);

  const std::string& file() const noexcept { return file_; }
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::string file_;
  std::uint64_t offset_;
};

/// Well-formed WAV that is not 16-bit PCM mono at 8 kHz.
class UnsupportedAudio : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

AudioBuffer decode_wav(std::string_view bytes, const std::string& name);
AudioBuffer read_wav(const std::filesystem::path& path);
/// 16-bit PCM mono; samples are clipped to [-1, 1).
std::string encode_wav(const AudioBuffer& x);
void write_wav(const std::filesystem::path& path, const AudioBuffer& x);

inline constexpr std::uint32_t kFeatureFileVersion = 1;

struct FeatureFile {
  FeatureMatrix features;
  nlohmann::json metadata;  ///< holds "channels", "normalized" and caller fields
};

/// "SCF1", version, rows, cols, hop, rate (u32 LE), float32 LE payload,
/// metadata length (u32 LE), metadata JSON.
std::string encode_feature_file(const FeatureMatrix& features, const nlohmann::json& extra = {});
FeatureFile decode_feature_file(std::string_view bytes, const std::string& name);
void write_feature_file(const std::filesystem::path& path, const FeatureMatrix& features,
                        const nlohmann::json& extra = {});
FeatureFile read_feature_file(const std::filesystem::path& path);

nlohmann::json channel_to_json(const ChannelInfo& c);
ChannelInfo channel_from_json(const nlohmann::json& j);

nlohmann::json scores_to_json(const TrialScores& scores);
TrialScores scores_from_json(const nlohmann::json& j);

nlohmann::json fusion_to_json(const FusionModel& model);
FusionModel fusion_from_json(const nlohmann::json& j);

nlohmann::json classifier_to_json(const LinearClassifier& model);
LinearClassifier classifier_from_json(const nlohmann::json& j);

nlohmann::json scattering_config_to_json(const ScatteringConfig& c);
nlohmann::json pipeline_config_to_json(const PipelineConfig& c);

/// Parses a JSON file; syntax errors become FormatError with the byte offset.
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace wst
