#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "srmd/pipeline.hpp"

namespace srmd::io {

/// Shortest decimal that reads back to the same double.
std::string format_double(double v);

/// Two numeric columns (time, value). A non-numeric first line is treated as
/// a header. T is the largest time; all times must lie in [0, T].
SignalSamples read_signal_csv(const std::filesystem::path& path);
SignalSamples parse_signal_csv(const std::string& text);
void write_signal_csv(const std::filesystem::path& path, const SignalSamples& signal);

/// RIFF/WAVE with PCM 16/24-bit or IEEE float 32-bit samples. Channels are
/// averaged. t_i = i / rate and T = frames / rate.
SignalSamples read_wav(const std::filesystem::path& path);
/// Mono 16-bit PCM; values are clamped to [-1, 1].
void write_wav_pcm16(const std::filesystem::path& path, const Eigen::VectorXd& values,
                     int sample_rate);

/// Flat "key = value" text. Lines starting with '#' are comments; "auto"
/// leaves a data-dependent field unset. Unknown keys are rejected.
SrmdConfig parse_config(const std::string& text, SrmdConfig base = {});
SrmdConfig read_config(const std::filesystem::path& path, SrmdConfig base = {});
/// Every key, in a form parse_config reads back to the same config.
std::string format_config(const SrmdConfig& cfg);
/// Applies one key/value pair; throws on unknown keys or malformed values.
void set_config_value(SrmdConfig& cfg, const std::string& key, const std::string& value);
const std::vector<std::string>& config_keys();

/// Dictionary as "tau,omega,psi" rows preceded by "# key=value" lines
/// recording delta, seed, domain and omega_max.
void write_dictionary_csv(const std::filesystem::path& path, const Dictionary& dict);
Dictionary read_dictionary_csv(const std::filesystem::path& path);

struct ExportOptions {
  bool modes = true;
  bool spectrogram = true;
  bool diagnostics = true;
  bool dictionary = true;
  std::optional<double> top_fraction;
  bool solver_trace = false;
};

/// Writes reconstruction.csv, mode_<k>.csv, support.csv (tau, omega,
/// |coeff|, label), labels.csv (tau, omega, coeff, label), dictionary.csv,
/// diagnostics.txt and config.txt into dir (created if missing).
void write_decomposition(const std::filesystem::path& dir, const DecompositionResult& result,
                         const SrmdConfig& cfg, const ExportOptions& options = {});

/// reconstruction.csv, coefficients.csv, dictionary.csv, diagnostics.txt and
/// config.txt for a representation-only run.
void write_representation(const std::filesystem::path& dir, const Representation& rep,
                          const SrmdConfig& cfg, const ExportOptions& options = {});

/// Key-value diagnostics text.
std::string format_diagnostics(const DecompositionResult& result);

}  // namespace srmd::io
