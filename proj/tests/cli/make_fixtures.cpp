// Writes the CLI test inputs: a two-tone WAV, an empty CSV and a small CSV.
#include "srmd/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixtures <dir>\n";
    return 1;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);

  const int rate = 2048;
  Eigen::VectorXd wav(rate);
  for (int i = 0; i < rate; ++i) {
    const double t = static_cast<double>(i) / rate;
    wav[i] = 0.5 * std::sin(2 * std::numbers::pi * 20.0 * t) +
             0.3 * std::sin(2 * std::numbers::pi * 90.0 * t);
  }
  srmd::io::write_wav_pcm16(dir / "two_tones.wav", wav, rate);

  std::ofstream(dir / "empty.csv") << "";

  srmd::SignalSamples s;
  s.times = Eigen::VectorXd::LinSpaced(120, 0.0, 1.0);
  s.values = (2 * std::numbers::pi * 5.0 * s.times.array()).sin();
  s.duration = 1.0;
  srmd::io::write_signal_csv(dir / "sine.csv", s);
  return 0;
}
