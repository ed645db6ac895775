#include <doctest.h>

#include "srmd/error.hpp"
#include "srmd/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace srmd;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "srmd_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void put(std::string& b, std::uint32_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

// format 1 = PCM, 3 = float, 0xFFFE = extensible wrapping `sub`
void write_wav(const fs::path& p, std::uint16_t format, std::uint16_t sub, int channels,
               int rate, int bits, const std::string& data) {
  std::string fmt;
  put(fmt, format, 2);
  put(fmt, static_cast<std::uint32_t>(channels), 2);
  put(fmt, static_cast<std::uint32_t>(rate), 4);
  put(fmt, static_cast<std::uint32_t>(rate * channels * bits / 8), 4);
  put(fmt, static_cast<std::uint32_t>(channels * bits / 8), 2);
  put(fmt, static_cast<std::uint32_t>(bits), 2);
  if (format == 0xFFFE) {
    put(fmt, 22, 2);
    put(fmt, static_cast<std::uint32_t>(bits), 2);
    put(fmt, 0, 4);
    put(fmt, sub, 2);
    fmt += std::string("\x00\x00\x00\x00\x10\x00\x80\x00\x00\xAA\x00\x38\x9B\x71", 14);
  }
  std::string body = "WAVE";
  body += "fmt ";
  put(body, static_cast<std::uint32_t>(fmt.size()), 4);
  body += fmt;
  body += "data";
  put(body, static_cast<std::uint32_t>(data.size()), 4);
  body += data;
  std::string file = "RIFF";
  put(file, static_cast<std::uint32_t>(body.size()), 4);
  file += body;
  std::ofstream(p, std::ios::binary) << file;
}

}  // namespace

TEST_CASE("double formatting round-trips") {
  for (double v : {0.0, 1.0, -2.5, 0.1, 1.0 / 3.0, 6.02214076e23, 5e-324, -1e-300}) {
    CHECK(std::strtod(io::format_double(v).c_str(), nullptr) == v);
  }
  CHECK(io::format_double(0.5) == "0.5");
}

TEST_CASE("signal csv parsing") {
  const SignalSamples s = io::parse_signal_csv("0,1\n1,2");
  CHECK(s.size() == 2);
  CHECK(s.duration == 1.0);
  CHECK(s.values[1] == 2.0);

  const SignalSamples h = io::parse_signal_csv("time,value\n# comment\n\n0;1\n0.5\t3\n2 , 4\n");
  CHECK(h.size() == 3);
  CHECK(h.duration == 2.0);
  CHECK(h.times[1] == 0.5);
  CHECK(h.values[2] == 4.0);

  auto kind_of = [](const std::string& text) {
    try {
      io::parse_signal_csv(text);
    } catch (const Error& e) {
      return static_cast<int>(e.kind());
    }
    return -1;
  };
  const int input = static_cast<int>(ErrorKind::Input);
  CHECK(kind_of("") == input);
  CHECK(kind_of("t,y\n") == input);
  CHECK(kind_of("0,1\n0,2\n") == input);
  CHECK(kind_of("0,1\n1,nan\n") == input);
  CHECK(kind_of("0,1\n1\n") == input);
  CHECK(kind_of("0,1\n1,abc\n") == input);
  CHECK(kind_of("-1,1\n1,2\n") == input);

  try {
    io::parse_signal_csv("");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("no samples") != std::string::npos);
  }
}

TEST_CASE("signal csv round trip is bit exact") {
  SignalSamples s;
  s.times = Eigen::VectorXd::LinSpaced(57, 0.0, 1.3);
  s.values = s.times.array().sin() / 3.0;
  s.duration = 1.3;
  const fs::path p = scratch("round.csv");
  io::write_signal_csv(p, s);
  const SignalSamples back = io::read_signal_csv(p);
  CHECK(back.times == s.times);
  CHECK(back.values == s.values);
  CHECK(back.duration == s.duration);
  CHECK_THROWS_AS(io::read_signal_csv(scratch("missing.csv")), Error);
}

TEST_CASE("wav pcm16 round trip") {
  Eigen::VectorXd v(5);
  v << 0.0, 0.5, -0.5, 1.0, 2.0;
  const fs::path p = scratch("tone.wav");
  io::write_wav_pcm16(p, v, 8000);
  const SignalSamples s = io::read_wav(p);
  REQUIRE(s.size() == 5);
  CHECK(s.times[1] == 1.0 / 8000.0);
  CHECK(s.duration == 5.0 / 8000.0);
  CHECK(s.values[1] == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(s.values[4] == doctest::Approx(1.0).epsilon(1e-4));  // clamped
}

TEST_CASE("wav float, 24-bit, stereo and extensible") {
  std::string f32;
  for (float x : {0.25f, -0.75f, 0.5f}) {
    std::uint32_t bits;
    std::memcpy(&bits, &x, 4);
    put(f32, bits, 4);
  }
  write_wav(scratch("f32.wav"), 3, 0, 1, 100, 32, f32);
  const SignalSamples f = io::read_wav(scratch("f32.wav"));
  REQUIRE(f.size() == 3);
  CHECK(f.values[1] == -0.75);

  std::string s24;
  put(s24, 0x400000, 3);  // +0.5
  put(s24, 0xC00000, 3);  // -0.5
  write_wav(scratch("s24.wav"), 1, 0, 1, 100, 24, s24);
  const SignalSamples p24 = io::read_wav(scratch("s24.wav"));
  CHECK(p24.values[0] == doctest::Approx(0.5));
  CHECK(p24.values[1] == doctest::Approx(-0.5));

  std::string st;
  put(st, 0x4000, 2);  // left 0.5
  put(st, 0x0000, 2);  // right 0
  write_wav(scratch("stereo.wav"), 1, 0, 2, 100, 16, st);
  const SignalSamples stereo = io::read_wav(scratch("stereo.wav"));
  REQUIRE(stereo.size() == 1);
  CHECK(stereo.values[0] == doctest::Approx(0.25).epsilon(1e-3));

  write_wav(scratch("ext.wav"), 0xFFFE, 3, 1, 100, 32, f32);
  CHECK(io::read_wav(scratch("ext.wav")).values[2] == 0.5);

  write_wav(scratch("alaw.wav"), 6, 0, 1, 100, 8, "abc");
  CHECK_THROWS_AS(io::read_wav(scratch("alaw.wav")), Error);
  std::ofstream(scratch("junk.wav"), std::ios::binary) << "not a wave file at all";
  CHECK_THROWS_AS(io::read_wav(scratch("junk.wav")), Error);
  write_wav(scratch("empty.wav"), 1, 0, 1, 100, 16, "");
  CHECK_THROWS_AS(io::read_wav(scratch("empty.wav")), Error);
}

TEST_CASE("config text round trip") {
  SrmdConfig cfg;
  cfg.n_features = 1234;
  cfg.omega_max = 42.5;
  cfg.delta = 0.3;
  cfg.r = 0.1;
  cfg.eps = 0.7;
  cfg.min_samples = 6;
  cfg.threshold = 1e-3;
  cfg.seed = 99;
  cfg.solver.formulation = Formulation::Penalized;
  cfg.solver.lambda = 0.01;
  cfg.solver.max_iters = 321;
  cfg.solver.tol = 1e-5;
  cfg.extension = Extension::EvenPeriodic;
  cfg.target_modes = 3;
  cfg.split_frequency = 480.0;

  const std::string text = io::format_config(cfg);
  const SrmdConfig back = io::parse_config(text);
  CHECK(io::format_config(back) == text);
  CHECK(*back.n_features == 1234);
  CHECK(!back.frqscale);
  CHECK(*back.split_frequency == 480.0);
  CHECK(back.solver.formulation == Formulation::Penalized);
  CHECK(*back.solver.lambda == 0.01);

  CHECK(io::format_config(io::parse_config(io::format_config(SrmdConfig{}))) ==
        io::format_config(SrmdConfig{}));
  for (const auto& key : io::config_keys()) {
    CHECK(text.find(key + " = ") != std::string::npos);
  }

  SrmdConfig c;
  io::set_config_value(c, "omega_max", "auto");
  CHECK(!c.omega_max);
  io::set_config_value(c, "target_modes", "none");
  CHECK(!c.target_modes);
  CHECK_THROWS_AS(io::set_config_value(c, "colour", "1"), Error);
  CHECK_THROWS_AS(io::set_config_value(c, "delta", "wide"), Error);
  CHECK_THROWS_AS(io::set_config_value(c, "min_samples", "2.5"), Error);
  CHECK_THROWS_AS(io::parse_config("delta 0.2\n"), Error);
  CHECK(io::parse_config("# note\n\ndelta = 0.25\n").delta == 0.25);
}

TEST_CASE("dictionary csv round trip") {
  const Dictionary d = make_dictionary(25, {-1.0, 2.0}, 77.0, 0.4, 123);
  const fs::path p = scratch("dict.csv");
  io::write_dictionary_csv(p, d);
  const Dictionary back = io::read_dictionary_csv(p);
  CHECK(back.atoms == d.atoms);
  CHECK(back.delta == d.delta);
  CHECK(back.domain == d.domain);
  CHECK(back.omega_max == d.omega_max);
  CHECK(back.seed == d.seed);
}

TEST_CASE("decomposition export") {
  SignalSamples s;
  s.times = Eigen::VectorXd::LinSpaced(100, 0.0, 1.0);
  s.values = (2.0 * std::numbers::pi * 3.0 * s.times.array()).sin();
  s.duration = 1.0;
  SrmdConfig cfg;
  cfg.n_features = 600;
  cfg.eps = 10.0;
  cfg.solver.record_trace = true;
  const DecompositionResult r = decompose(s, cfg);

  const fs::path dir = scratch("export");
  fs::remove_all(dir);
  io::ExportOptions opt;
  opt.top_fraction = 0.1;
  opt.solver_trace = true;
  io::write_decomposition(dir, r, cfg, opt);
  for (const char* f : {"reconstruction.csv", "mode_0.csv", "support.csv", "labels.csv",
                        "dictionary.csv", "diagnostics.txt", "config.txt", "top_fraction.csv",
                        "solver_trace.csv"}) {
    CHECK_MESSAGE(fs::exists(dir / f), f);
  }
  const SignalSamples rec = io::read_signal_csv(dir / "reconstruction.csv");
  CHECK(rec.values == r.reconstruction.values);
  CHECK(io::read_config(dir / "config.txt").n_features == cfg.n_features);
  const std::string diag = slurp(dir / "diagnostics.txt");
  CHECK(diag.find("modes = 1") != std::string::npos);
  CHECK(diag.find("mode_0_median_frequency") != std::string::npos);
  CHECK(diag == io::format_diagnostics(r));

  // one header line plus one row per support atom
  const std::string support = slurp(dir / "support.csv");
  CHECK(std::count(support.begin(), support.end(), '\n') ==
        static_cast<long>(r.support.size()) + 1);

  const fs::path rdir = scratch("represent");
  fs::remove_all(rdir);
  io::write_representation(rdir, r.representation, cfg);
  CHECK(fs::exists(rdir / "coefficients.csv"));
  CHECK(fs::exists(rdir / "reconstruction.csv"));
}
