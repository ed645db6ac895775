#include "srmd/io.hpp"

#include "srmd/error.hpp"

#include <algorithm>
#include <charconv>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

namespace srmd::io {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void input_error(const std::string& what) { throw Error(ErrorKind::Input, what); }

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::optional<double> to_double(const std::string& text) {
  const std::string s = trim(text);
  if (s.empty()) return std::nullopt;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE) return std::nullopt;
  return v;
}

double require_double(const std::string& key, const std::string& value) {
  const auto v = to_double(value);
  if (!v || !std::isfinite(*v)) invalid_argument("'" + key + "' expects a number, got '" + value + "'");
  return *v;
}

long long require_integer(const std::string& key, const std::string& value) {
  const std::string s = trim(value);
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
    invalid_argument("'" + key + "' expects an integer, got '" + value + "'");
  }
  return v;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) input_error("cannot write " + path.string());
  return out;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) input_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (const char ch : line) {
    if (ch == ',' || ch == ';' || ch == '\t') {
      fields.push_back(current);
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  fields.push_back(current);
  return fields;
}

template <class T>
std::string opt_to_string(const std::optional<T>& v) {
  if (!v) return "auto";
  if constexpr (std::is_floating_point_v<T>) {
    return format_double(*v);
  } else {
    return std::to_string(*v);
  }
}

std::uint32_t read_u32(const std::string& b, std::size_t at) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(b[at])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 3])) << 24;
}

std::uint16_t read_u16(const std::string& b, std::size_t at) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                    static_cast<unsigned char>(b[at + 1]) << 8);
}

void put_u32(std::string& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u16(std::string& b, std::uint16_t v) {
  b.push_back(static_cast<char>(v & 0xFF));
  b.push_back(static_cast<char>(v >> 8));
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

SignalSamples parse_signal_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<double> times;
  std::vector<double> values;
  int line_no = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto fields = split_fields(t);
    const bool header_candidate = first_content;
    first_content = false;
    if (fields.size() < 2) {
      if (header_candidate) continue;
      input_error("line " + std::to_string(line_no) + ": expected two columns");
    }
    const auto time = to_double(fields[0]);
    const auto value = to_double(fields[1]);
    if (!time || !value) {
      if (header_candidate) continue;
      input_error("line " + std::to_string(line_no) + ": non-numeric field");
    }
    if (!std::isfinite(*time) || !std::isfinite(*value)) {
      input_error("line " + std::to_string(line_no) + ": NaN or infinite entry");
    }
    times.push_back(*time);
    values.push_back(*value);
  }
  if (times.empty()) input_error("no samples");

  SignalSamples s;
  s.times = Eigen::Map<Eigen::VectorXd>(times.data(), std::ssize(times));
  s.values = Eigen::Map<Eigen::VectorXd>(values.data(), std::ssize(values));
  s.duration = s.times.maxCoeff();
  if (s.times.minCoeff() < 0.0) input_error("sample times must be non-negative");
  try {
    validate(s);
  } catch (const Error& e) {
    input_error(e.what());
  }
  return s;
}

SignalSamples read_signal_csv(const fs::path& path) { return parse_signal_csv(read_text(path)); }

void write_signal_csv(const fs::path& path, const SignalSamples& signal) {
  auto out = open_out(path);
  out << "time,value\n";
  for (Eigen::Index i = 0; i < signal.size(); ++i) {
    out << format_double(signal.times[i]) << ',' << format_double(signal.values[i]) << '\n';
  }
}

SignalSamples read_wav(const fs::path& path) {
  const std::string b = read_text(path);
  if (b.size() < 12 || b.compare(0, 4, "RIFF") != 0 || b.compare(8, 4, "WAVE") != 0) {
    input_error(path.string() + ": not a RIFF/WAVE file");
  }
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t rate = 0;
  std::uint16_t bits = 0;
  std::size_t data_at = 0;
  std::size_t data_len = 0;
  for (std::size_t at = 12; at + 8 <= b.size();) {
    const std::string id = b.substr(at, 4);
    const std::size_t len = read_u32(b, at + 4);
    const std::size_t body = at + 8;
    if (body + len > b.size() && id != "data") input_error(path.string() + ": truncated chunk");
    if (id == "fmt ") {
      if (len < 16) input_error(path.string() + ": short fmt chunk");
      format = read_u16(b, body);
      channels = read_u16(b, body + 2);
      rate = read_u32(b, body + 4);
      bits = read_u16(b, body + 14);
      if (format == 0xFFFE && len >= 26) format = read_u16(b, body + 24);
    } else if (id == "data") {
      data_at = body;
      data_len = std::min(len, b.size() - body);
    }
    at = body + len + (len & 1);
  }
  if (channels == 0 || rate == 0) input_error(path.string() + ": missing fmt chunk");
  if (data_at == 0) input_error(path.string() + ": missing data chunk");
  const bool pcm = format == 1 && (bits == 16 || bits == 24);
  const bool flt = format == 3 && bits == 32;
  if (!pcm && !flt) {
    input_error(path.string() + ": unsupported encoding (format " + std::to_string(format) +
                ", " + std::to_string(bits) + " bits)");
  }

  const std::size_t width = bits / 8;
  const std::size_t frames = data_len / (width * channels);
  if (frames == 0) input_error("no samples");
  SignalSamples s;
  s.times.resize(static_cast<Eigen::Index>(frames));
  s.values.resize(static_cast<Eigen::Index>(frames));
  for (std::size_t f = 0; f < frames; ++f) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t at = data_at + (f * channels + c) * width;
      double v = 0.0;
      if (flt) {
        const std::uint32_t raw = read_u32(b, at);
        float x;
        std::memcpy(&x, &raw, sizeof x);
        v = x;
      } else if (bits == 16) {
        v = static_cast<std::int16_t>(read_u16(b, at)) / 32768.0;
      } else {
        std::int32_t x = static_cast<unsigned char>(b[at]) |
                         static_cast<unsigned char>(b[at + 1]) << 8 |
                         static_cast<unsigned char>(b[at + 2]) << 16;
        if (x & 0x800000) x -= 0x1000000;
        v = x / 8388608.0;
      }
      acc += v;
    }
    s.times[static_cast<Eigen::Index>(f)] = static_cast<double>(f) / rate;
    s.values[static_cast<Eigen::Index>(f)] = acc / channels;
  }
  s.duration = static_cast<double>(frames) / rate;
  if (!s.values.allFinite()) input_error(path.string() + ": non-finite sample");
  return s;
}

void write_wav_pcm16(const fs::path& path, const Eigen::VectorXd& values, int sample_rate) {
  std::string b = "RIFF";
  const auto data_len = static_cast<std::uint32_t>(values.size() * 2);
  put_u32(b, 36 + data_len);
  b += "WAVEfmt ";
  put_u32(b, 16);
  put_u16(b, 1);
  put_u16(b, 1);
  put_u32(b, static_cast<std::uint32_t>(sample_rate));
  put_u32(b, static_cast<std::uint32_t>(sample_rate * 2));
  put_u16(b, 2);
  put_u16(b, 16);
  b += "data";
  put_u32(b, data_len);
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double v = std::clamp(values[i], -1.0, 1.0);
    put_u16(b, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::lround(v * 32767.0))));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) input_error("cannot write " + path.string());
  out.write(b.data(), static_cast<std::streamsize>(b.size()));
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "n_features", "omega_max",  "delta",     "r",         "frqscale",        "eps",
      "min_samples", "threshold", "seed",      "formulation", "lambda",        "tau_ball",
      "max_iters",  "max_outer",  "tol",       "inner_tol", "extension",       "target_modes",
      "split_frequency"};
  return keys;
}

void set_config_value(SrmdConfig& cfg, const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  const bool is_auto = value == "auto" || value.empty();
  const auto opt_double = [&](std::optional<double>& field) {
    if (is_auto) {
      field.reset();
    } else {
      field = require_double(key, value);
    }
  };
  if (key == "n_features") {
    if (is_auto) {
      cfg.n_features.reset();
    } else {
      cfg.n_features = require_integer(key, value);
    }
  } else if (key == "omega_max") {
    opt_double(cfg.omega_max);
  } else if (key == "delta") {
    cfg.delta = require_double(key, value);
  } else if (key == "r") {
    cfg.r = require_double(key, value);
  } else if (key == "frqscale") {
    opt_double(cfg.frqscale);
  } else if (key == "eps") {
    opt_double(cfg.eps);
  } else if (key == "min_samples") {
    cfg.min_samples = static_cast<int>(require_integer(key, value));
  } else if (key == "threshold") {
    cfg.threshold = require_double(key, value);
  } else if (key == "seed") {
    const std::string s = trim(value);
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || s[0] == '-') {
      invalid_argument("'seed' expects a non-negative integer, got '" + value + "'");
    }
    cfg.seed = v;
  } else if (key == "formulation") {
    cfg.solver.formulation = parse_formulation(value);
  } else if (key == "lambda") {
    opt_double(cfg.solver.lambda);
  } else if (key == "tau_ball") {
    opt_double(cfg.solver.tau_ball);
  } else if (key == "max_iters") {
    cfg.solver.max_iters = static_cast<int>(require_integer(key, value));
  } else if (key == "max_outer") {
    cfg.solver.max_outer = static_cast<int>(require_integer(key, value));
  } else if (key == "tol") {
    cfg.solver.tol = require_double(key, value);
  } else if (key == "inner_tol") {
    cfg.solver.inner_tol = require_double(key, value);
  } else if (key == "extension") {
    cfg.extension = parse_extension(value);
  } else if (key == "target_modes") {
    if (is_auto || value == "none") {
      cfg.target_modes.reset();
    } else {
      cfg.target_modes = static_cast<int>(require_integer(key, value));
    }
  } else if (key == "split_frequency") {
    if (value == "none") {
      cfg.split_frequency.reset();
    } else {
      opt_double(cfg.split_frequency);
    }
  } else {
    invalid_argument("unknown config key '" + key + "'");
  }
}

SrmdConfig parse_config(const std::string& text, SrmdConfig base) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
    }
    set_config_value(base, trim(t.substr(0, eq)), t.substr(eq + 1));
  }
  return base;
}

SrmdConfig read_config(const fs::path& path, SrmdConfig base) {
  return parse_config(read_text(path), std::move(base));
}

std::string format_config(const SrmdConfig& cfg) {
  std::ostringstream out;
  out << "n_features = " << opt_to_string(cfg.n_features) << '\n';
  out << "omega_max = " << opt_to_string(cfg.omega_max) << '\n';
  out << "delta = " << format_double(cfg.delta) << '\n';
  out << "r = " << format_double(cfg.r) << '\n';
  out << "frqscale = " << opt_to_string(cfg.frqscale) << '\n';
  out << "eps = " << opt_to_string(cfg.eps) << '\n';
  out << "min_samples = " << cfg.min_samples << '\n';
  out << "threshold = " << format_double(cfg.threshold) << '\n';
  out << "seed = " << cfg.seed << '\n';
  out << "formulation = " << to_string(cfg.solver.formulation) << '\n';
  out << "lambda = " << opt_to_string(cfg.solver.lambda) << '\n';
  out << "tau_ball = " << opt_to_string(cfg.solver.tau_ball) << '\n';
  out << "max_iters = " << cfg.solver.max_iters << '\n';
  out << "max_outer = " << cfg.solver.max_outer << '\n';
  out << "tol = " << format_double(cfg.solver.tol) << '\n';
  out << "inner_tol = " << format_double(cfg.solver.inner_tol) << '\n';
  out << "extension = " << to_string(cfg.extension) << '\n';
  out << "target_modes = " << (cfg.target_modes ? std::to_string(*cfg.target_modes) : "none")
      << '\n';
  out << "split_frequency = "
      << (cfg.split_frequency ? format_double(*cfg.split_frequency) : "none") << '\n';
  return out.str();
}

void write_dictionary_csv(const fs::path& path, const Dictionary& dict) {
  auto out = open_out(path);
  out << "# delta=" << format_double(dict.delta) << '\n';
  out << "# seed=" << dict.seed << '\n';
  out << "# domain_lo=" << format_double(dict.domain.lo) << '\n';
  out << "# domain_hi=" << format_double(dict.domain.hi) << '\n';
  out << "# omega_max=" << format_double(dict.omega_max) << '\n';
  out << "tau,omega,psi\n";
  for (const auto& a : dict.atoms) {
    out << format_double(a.tau) << ',' << format_double(a.omega) << ',' << format_double(a.psi)
        << '\n';
  }
}

Dictionary read_dictionary_csv(const fs::path& path) {
  std::istringstream in(read_text(path));
  Dictionary dict;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      const auto eq = t.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = trim(t.substr(1, eq - 1));
      const std::string value = trim(t.substr(eq + 1));
      if (key == "delta") dict.delta = require_double(key, value);
      if (key == "seed") dict.seed = std::strtoull(value.c_str(), nullptr, 10);
      if (key == "domain_lo") dict.domain.lo = require_double(key, value);
      if (key == "domain_hi") dict.domain.hi = require_double(key, value);
      if (key == "omega_max") dict.omega_max = require_double(key, value);
      continue;
    }
    const auto fields = split_fields(t);
    if (fields.size() != 3) input_error(path.string() + ": expected tau,omega,psi rows");
    const auto tau = to_double(fields[0]);
    const auto omega = to_double(fields[1]);
    const auto psi = to_double(fields[2]);
    if (!tau || !omega || !psi) {
      if (fields[0] == "tau") continue;
      input_error(path.string() + ": non-numeric atom");
    }
    dict.atoms.push_back({*tau, *omega, *psi});
  }
  validate(dict);
  return dict;
}

std::string format_diagnostics(const DecompositionResult& result) {
  const auto& d = result.diagnostics;
  std::ostringstream out;
  out << "converged = " << (d.converged ? "true" : "false") << '\n';
  out << "sigma = " << format_double(d.sigma) << '\n';
  out << "residual_norm = " << format_double(d.residual_norm) << '\n';
  out << "data_norm = " << format_double(d.data_norm) << '\n';
  out << "relative_residual = "
      << format_double(d.data_norm > 0 ? d.residual_norm / d.data_norm : 0.0) << '\n';
  out << "support_size = " << d.support_size << '\n';
  out << "n_features = " << result.representation.dictionary.size() << '\n';
  out << "iterations = " << d.iterations << '\n';
  out << "outer_iterations = " << d.outer_iterations << '\n';
  out << "raw_clusters = " << d.raw_clusters << '\n';
  out << "relabelled_noise = " << d.relabelled_noise << '\n';
  out << "modes = " << result.modes.size() << '\n';
  for (std::size_t k = 0; k < result.modes.size(); ++k) {
    out << "mode_" << k << "_atoms = " << result.modes[k].atom_indices.size() << '\n';
    out << "mode_" << k << "_l2_norm = " << format_double(result.modes[k].l2_norm) << '\n';
    out << "mode_" << k << "_median_frequency = " << format_double(result.median_frequency(k))
        << '\n';
  }
  return out.str();
}

namespace {

void write_common(const fs::path& dir, const Representation& rep, const SrmdConfig& cfg,
                  const ExportOptions& options) {
  write_signal_csv(dir / "reconstruction.csv", rep.reconstruction);
  if (options.dictionary) write_dictionary_csv(dir / "dictionary.csv", rep.dictionary);
  auto config = open_out(dir / "config.txt");
  config << format_config(cfg);
  if (options.solver_trace) {
    auto out = open_out(dir / "solver_trace.csv");
    out << "iteration,residual_norm,l1_norm,tau_ball,gap\n";
    for (const auto& rec : rep.coeffs.trace) {
      out << rec.iteration << ',' << format_double(rec.residual_norm) << ','
          << format_double(rec.l1_norm) << ',' << format_double(rec.tau_ball) << ','
          << format_double(rec.gap) << '\n';
    }
  }
}

}  // namespace

void write_decomposition(const fs::path& dir, const DecompositionResult& result,
                         const SrmdConfig& cfg, const ExportOptions& options) {
  fs::create_directories(dir);
  write_common(dir, result.representation, cfg, options);
  // the mode-sum identity holds for this reconstruction (support atoms only)
  write_signal_csv(dir / "reconstruction.csv", result.reconstruction);

  if (options.modes) {
    for (std::size_t k = 0; k < result.modes.size(); ++k) {
      write_signal_csv(dir / ("mode_" + std::to_string(k) + ".csv"), result.modes[k].samples);
    }
  }

  if (options.spectrogram) {
    auto support = open_out(dir / "support.csv");
    support << "tau,omega,abs_coeff,label\n";
    auto labels = open_out(dir / "labels.csv");
    labels << "tau,omega,coeff,label,raw_label\n";
    for (std::size_t i = 0; i < result.support.size(); ++i) {
      const auto& a = result.support[i];
      support << format_double(a.tau) << ',' << format_double(a.omega) << ','
              << format_double(std::abs(a.coeff)) << ',' << result.labels[i] << '\n';
      labels << format_double(a.tau) << ',' << format_double(a.omega) << ','
             << format_double(a.coeff) << ',' << result.labels[i] << ',' << result.raw_labels[i]
             << '\n';
    }
  }
  if (options.top_fraction) {
    auto out = open_out(dir / "top_fraction.csv");
    out << "tau,omega,abs_coeff,atom_index\n";
    for (const auto& a : top_fraction_support(result, *options.top_fraction)) {
      out << format_double(a.tau) << ',' << format_double(a.omega) << ','
          << format_double(std::abs(a.coeff)) << ',' << a.atom_index << '\n';
    }
  }
  if (options.diagnostics) {
    auto out = open_out(dir / "diagnostics.txt");
    out << format_diagnostics(result);
  }
}

void write_representation(const fs::path& dir, const Representation& rep,
                          const SrmdConfig& cfg, const ExportOptions& options) {
  fs::create_directories(dir);
  write_common(dir, rep, cfg, options);
  auto coeffs = open_out(dir / "coefficients.csv");
  coeffs << "atom_index,tau,omega,coeff\n";
  for (Eigen::Index j = 0; j < rep.coeffs.values.size(); ++j) {
    if (rep.coeffs.values[j] == 0.0) continue;
    const auto& a = rep.dictionary.atoms[static_cast<std::size_t>(j)];
    coeffs << j << ',' << format_double(a.tau) << ',' << format_double(a.omega) << ','
           << format_double(rep.coeffs.values[j]) << '\n';
  }
  if (options.diagnostics) {
    auto out = open_out(dir / "diagnostics.txt");
    const double y_norm = rep.training.values.norm();
    out << "converged = " << (rep.coeffs.converged ? "true" : "false") << '\n';
    out << "sigma = " << format_double(rep.sigma) << '\n';
    out << "residual_norm = " << format_double(rep.coeffs.residual_norm) << '\n';
    out << "data_norm = " << format_double(y_norm) << '\n';
    out << "relative_residual = "
        << format_double(y_norm > 0 ? rep.coeffs.residual_norm / y_norm : 0.0) << '\n';
    out << "support_size = " << rep.coeffs.nonzeros() << '\n';
    out << "n_features = " << rep.dictionary.size() << '\n';
    out << "iterations = " << rep.coeffs.iterations << '\n';
    out << "outer_iterations = " << rep.coeffs.outer_iterations << '\n';
  }
}

}  // namespace srmd::io
