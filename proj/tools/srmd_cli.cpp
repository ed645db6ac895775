// srmd: sparse random mode decomposition from the command line.

#include <CLI11.hpp>

#include "srmd/error.hpp"
#include "srmd/io.hpp"
#include "srmd/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace srmd;

namespace {

constexpr int kExitNotConverged = 2;
constexpr int kExitInput = 3;
constexpr int kExitDegenerate = 4;

const std::map<std::string, std::string> kConfigHelp = {
    {"n_features", "number of random features N before extension (default 10 m)"},
    {"omega_max", "largest feature frequency in Hz (default m / 2T)"},
    {"delta", "Gaussian window width in seconds"},
    {"r", "relative residual level; sigma = r ||y||"},
    {"frqscale", "frequency multiplier before clustering (default T / omega_max)"},
    {"eps", "DBSCAN radius in scaled units (default 0.2 T)"},
    {"min_samples", "DBSCAN core-point count, self included"},
    {"threshold", "support keeps |c| > threshold"},
    {"seed", "seed for the dictionary and random downsampling"},
    {"formulation", "residual-constrained | penalized | l1-ball"},
    {"lambda", "penalty weight for the penalized formulation"},
    {"tau_ball", "l1 radius for the l1-ball formulation"},
    {"max_iters", "solver iteration limit"},
    {"max_outer", "root-finding iteration limit (residual-constrained)"},
    {"tol", "solver tolerance"},
    {"inner_tol", "subproblem tolerance floor"},
    {"extension", "none | even-periodic"},
    {"target_modes", "merge down to this many modes (or none)"},
    {"split_frequency", "split modes at this frequency in Hz instead of DBSCAN"},
};

std::string flag_name(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

/// Options shared by decompose and represent.
struct RunOptions {
  std::string input;
  std::string benchmark;
  std::optional<double> noise_ratio;
  Eigen::Index downsample = 0;
  Eigen::Index random_downsample = 0;
  bool normalize = false;
  std::string config_file;
  bool print_config = false;
  std::string out = "srmd_out";
  std::optional<double> top_fraction;
  bool trace = false;
  bool no_modes = false;
  std::vector<std::pair<std::string, CLI::Option*>> overrides;
  std::map<std::string, std::string> values;
};

void add_run_options(CLI::App* sub, RunOptions& o, bool decompose) {
  auto* source = sub->add_option_group("source");
  source->add_option("-i,--input", o.input, "CSV (time,value) or WAV file")
      ->check(CLI::ExistingFile);
  source->add_option("-b,--benchmark", o.benchmark,
                     "synthetic benchmark: discontinuous | intersecting | overlapping | "
                     "three-sinusoids");
  source->require_option(1);
  sub->add_option("--noise-ratio", o.noise_ratio,
                  "overlapping benchmark noise ratio (also sets r)");
  sub->add_option("--downsample", o.downsample, "keep every k-th sample")
      ->check(CLI::PositiveNumber);
  sub->add_option("--random-downsample", o.random_downsample,
                  "keep a random 1/k subset of the samples")
      ->check(CLI::PositiveNumber);
  sub->add_flag("--normalize-max", o.normalize, "divide the signal by max |y|");
  sub->add_option("-c,--config", o.config_file, "key = value config file")
      ->check(CLI::ExistingFile);
  sub->add_flag("--print-config", o.print_config, "print the effective config and exit");
  sub->add_option("-o,--out", o.out, "output directory")->capture_default_str();
  sub->add_flag("--trace", o.trace, "also write solver_trace.csv");
  if (decompose) {
    sub->add_option("--top-fraction", o.top_fraction,
                    "also write the top fraction of |coeff| to top_fraction.csv")
        ->check(CLI::Range(0.0, 1.0));
    sub->add_flag("--no-modes", o.no_modes, "skip the per-mode CSVs");
  }
  for (const auto& key : io::config_keys()) {
    if (!decompose && (key == "eps" || key == "min_samples" || key == "frqscale" ||
                       key == "target_modes" || key == "split_frequency" ||
                       key == "threshold")) {
      continue;
    }
    auto* opt = sub->add_option(flag_name(key), o.values[key], kConfigHelp.at(key));
    o.overrides.emplace_back(key, opt);
  }
}

std::uint64_t requested_seed(const RunOptions& o) {
  for (const auto& [key, opt] : o.overrides) {
    if (key == "seed" && opt->count() > 0) {
      SrmdConfig probe;
      io::set_config_value(probe, "seed", o.values.at("seed"));
      return probe.seed;
    }
  }
  return kDefaultSeed;
}

SignalSamples load_input(const std::string& path) {
  std::string ext = fs::path(path).extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
  return ext == ".wav" ? io::read_wav(path) : io::read_signal_csv(path);
}

struct Prepared {
  SignalSamples samples;
  SrmdConfig config;
  std::optional<Benchmark> truth;
};

Prepared prepare(const RunOptions& o) {
  Prepared p;
  const std::uint64_t seed = requested_seed(o);
  if (!o.benchmark.empty()) {
    const BenchmarkCase bc = benchmark_case(parse_benchmark_id(o.benchmark), seed, o.noise_ratio);
    p.truth = generate_benchmark(bc.id, bc.m, bc.noise);
    p.samples = p.truth->composite;
    p.config = bc.config;
  } else {
    p.samples = load_input(o.input);
  }
  if (!o.config_file.empty()) p.config = io::read_config(o.config_file, p.config);
  for (const auto& [key, opt] : o.overrides) {
    if (opt->count() > 0) io::set_config_value(p.config, key, o.values.at(key));
  }

  if (o.downsample > 1) p.samples = uniform_downsample(p.samples, o.downsample);
  if (o.random_downsample > 1) {
    p.samples = random_downsample(p.samples, o.random_downsample, p.config.seed);
  }
  if (o.normalize) p.samples = normalize_max(p.samples);
  if (p.truth && (o.downsample > 1 || o.random_downsample > 1 || o.normalize)) {
    p.truth.reset();  // ground truth no longer matches the grid
  }
  return p;
}

int run_decompose(const RunOptions& o) {
  Prepared p = prepare(o);
  if (o.print_config) {
    std::cout << io::format_config(p.config);
    return 0;
  }
  const DecompositionResult result = decompose(p.samples, p.config);

  io::ExportOptions ex;
  ex.modes = !o.no_modes;
  ex.top_fraction = o.top_fraction;
  ex.solver_trace = o.trace;
  io::write_decomposition(o.out, result, p.config, ex);

  std::cout << io::format_diagnostics(result);
  if (p.truth) {
    const Pairing pairing = pair_modes(result.modes, p.truth->modes);
    std::cout << "reconstruction_error_vs_clean = "
              << io::format_double(relative_l2_error(result.representation.reconstruction,
                                                     p.truth->clean))
              << '\n';
    for (std::size_t k = 0; k < pairing.errors.size(); ++k) {
      std::cout << "true_mode_" << k << "_error = " << io::format_double(pairing.errors[k])
                << '\n';
    }
  }
  std::cout << "output = " << o.out << '\n';
  if (!result.diagnostics.converged) {
    std::cerr << "srmd: solver did not converge within the iteration limits\n";
    return kExitNotConverged;
  }
  return 0;
}

int run_represent(const RunOptions& o) {
  Prepared p = prepare(o);
  if (o.print_config) {
    std::cout << io::format_config(p.config);
    return 0;
  }
  const Representation rep = represent(p.samples, p.config);
  io::ExportOptions ex;
  ex.solver_trace = o.trace;
  io::write_representation(o.out, rep, p.config, ex);

  const double y_norm = rep.training.values.norm();
  std::cout << "converged = " << (rep.coeffs.converged ? "true" : "false") << '\n'
            << "sigma = " << io::format_double(rep.sigma) << '\n'
            << "residual_norm = " << io::format_double(rep.coeffs.residual_norm) << '\n'
            << "relative_residual = "
            << io::format_double(y_norm > 0 ? rep.coeffs.residual_norm / y_norm : 0.0) << '\n'
            << "support_size = " << rep.coeffs.nonzeros() << '\n'
            << "output = " << o.out << '\n';
  if (!rep.coeffs.converged) {
    std::cerr << "srmd: solver did not converge within the iteration limits\n";
    return kExitNotConverged;
  }
  return 0;
}

struct GenerateOptions {
  std::string benchmark;
  std::uint64_t seed = kDefaultSeed;
  std::optional<double> noise_ratio;
  std::optional<Eigen::Index> m;
  std::string out;
  bool clean = false;
  bool modes = false;
};

int run_generate(const GenerateOptions& o) {
  const BenchmarkCase bc = benchmark_case(parse_benchmark_id(o.benchmark), o.seed, o.noise_ratio);
  const Benchmark b = generate_benchmark(bc.id, o.m.value_or(bc.m), bc.noise);
  io::write_signal_csv(o.out, o.clean ? b.clean : b.composite);
  if (o.modes) {
    const fs::path base(o.out);
    for (std::size_t k = 0; k < b.modes.size(); ++k) {
      const fs::path path = base.parent_path() / (base.stem().string() + "_mode_" +
                                                  std::to_string(k) + ".csv");
      io::write_signal_csv(path, b.modes[k]);
    }
  }
  std::cout << "wrote " << b.composite.size() << " samples to " << o.out << '\n';
  return 0;
}

struct BenchOptions {
  std::string suite = "all";
  std::uint64_t seed = kDefaultSeed;
  std::vector<double> noise_ratios = {0.05, 0.15, 0.25};
  std::string out = "srmd_bench";
};

int run_bench(const BenchOptions& o) {
  std::vector<BenchmarkId> ids;
  if (o.suite == "all") {
    ids = all_benchmarks();
  } else {
    ids.push_back(parse_benchmark_id(o.suite));
  }
  std::vector<BenchmarkCase> cases;
  for (const BenchmarkId id : ids) {
    if (id == BenchmarkId::Overlapping) {
      for (const double ratio : o.noise_ratios) cases.push_back(benchmark_case(id, o.seed, ratio));
    } else {
      cases.push_back(benchmark_case(id, o.seed));
    }
  }

  fs::create_directories(o.out);
  const fs::path csv_path = fs::path(o.out) / "bench.csv";
  std::ofstream csv(csv_path);
  if (!csv) throw Error(ErrorKind::Input, "cannot write " + csv_path.string());
  csv << "benchmark,noise_ratio,m,n_features,support,raw_clusters,modes,converged,"
         "residual_over_sigma,reconstruction_error,mode,paired_error,median_frequency\n";

  std::printf("%-16s %6s %5s %7s %7s %4s %5s %4s %10s %9s  %s\n", "benchmark", "r", "m", "N",
              "support", "raw", "modes", "conv", "res/sigma", "rec.err", "mode errors (median Hz)");
  bool all_converged = true;
  for (const BenchmarkCase& bc : cases) {
    const auto start = std::chrono::steady_clock::now();
    const BenchmarkReport rep = run_benchmark(bc);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const auto& d = rep.result.diagnostics;
    const double ratio = bc.noise.kind == NoiseKind::GaussianRelative ? bc.noise.level : 0.0;
    all_converged = all_converged && d.converged;

    std::ostringstream modes_text;
    for (std::size_t k = 0; k < rep.pairing.errors.size(); ++k) {
      const auto& assigned = rep.pairing.assignment[k];
      const double freq = assigned ? rep.result.median_frequency(*assigned) : 0.0;
      char buf[64];
      std::snprintf(buf, sizeof buf, "%s%.4f (%.2f)", k ? ", " : "", rep.pairing.errors[k], freq);
      modes_text << buf;
      csv << to_string(bc.id) << ',' << ratio << ',' << bc.m << ','
          << rep.result.representation.dictionary.size() << ',' << d.support_size << ','
          << d.raw_clusters << ',' << rep.result.modes.size() << ','
          << (d.converged ? 1 : 0) << ',' << io::format_double(rep.residual_ratio) << ','
          << io::format_double(rep.reconstruction_error) << ',' << k << ','
          << io::format_double(rep.pairing.errors[k]) << ',' << io::format_double(freq) << '\n';
    }
    std::printf("%-16s %6.2f %5ld %7ld %7ld %4d %5zu %4s %10.6f %9.4f  %s  [%.1fs]\n",
                std::string(to_string(bc.id)).c_str(), ratio, static_cast<long>(bc.m),
                static_cast<long>(rep.result.representation.dictionary.size()),
                static_cast<long>(d.support_size), d.raw_clusters, rep.result.modes.size(),
                d.converged ? "yes" : "no", rep.residual_ratio, rep.reconstruction_error,
                modes_text.str().c_str(), secs);
    std::fflush(stdout);
  }
  std::cout << "metrics written to " << csv_path.string() << '\n';
  return all_converged ? 0 : kExitNotConverged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse random mode decomposition of time series"};
  app.require_subcommand(1);

  RunOptions dec;
  auto* dec_cmd = app.add_subcommand("decompose", "represent, cluster and split into modes");
  add_run_options(dec_cmd, dec, true);

  RunOptions rep;
  auto* rep_cmd = app.add_subcommand("represent", "sparse random-feature fit only");
  add_run_options(rep_cmd, rep, false);

  GenerateOptions gen;
  auto* gen_cmd = app.add_subcommand("generate", "write a synthetic benchmark signal to CSV");
  gen_cmd->add_option("-b,--benchmark", gen.benchmark, "benchmark name")->required();
  gen_cmd->add_option("--seed", gen.seed, "noise seed")->capture_default_str();
  gen_cmd->add_option("--noise-ratio", gen.noise_ratio, "overlapping benchmark noise ratio");
  gen_cmd->add_option("-m,--samples", gen.m, "number of samples (default: benchmark size)")
      ->check(CLI::Range(2, 100000000));
  gen_cmd->add_option("-o,--out", gen.out, "output CSV")->required();
  gen_cmd->add_flag("--clean", gen.clean, "write the noiseless signal");
  gen_cmd->add_flag("--modes", gen.modes, "also write <out>_mode_<k>.csv for each true mode");

  BenchOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "reproduce the synthetic benchmark suite");
  bench_cmd->add_option("-s,--suite", bench.suite, "all or one benchmark name")
      ->capture_default_str();
  bench_cmd->add_option("--seed", bench.seed, "dictionary and noise seed")->capture_default_str();
  bench_cmd->add_option("--noise-ratios", bench.noise_ratios, "overlapping benchmark ratios")
      ->delimiter(',')
      ->capture_default_str();
  bench_cmd->add_option("-o,--out", bench.out, "directory for bench.csv")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*dec_cmd) return run_decompose(dec);
    if (*rep_cmd) return run_represent(rep);
    if (*gen_cmd) return run_generate(gen);
    if (*bench_cmd) return run_bench(bench);
  } catch (const Error& e) {
    std::cerr << "srmd: " << e.what() << '\n';
    switch (e.kind()) {
      case ErrorKind::Degenerate: return kExitDegenerate;
      case ErrorKind::NotConverged: return kExitNotConverged;
      case ErrorKind::Input:
      case ErrorKind::InvalidArgument: return kExitInput;
    }
  } catch (const fs::filesystem_error& e) {
    std::cerr << "srmd: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "srmd: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
