#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "srmd/clustering.hpp"
#include "srmd/error.hpp"
#include "srmd/io.hpp"
#include "srmd/pipeline.hpp"
#include "srmd/signal.hpp"
#include "srmd/solver.hpp"

#include <optional>

namespace py = pybind11;
using namespace srmd;

namespace {

SignalSamples make_samples(const Eigen::VectorXd& times, const Eigen::VectorXd& values,
                           std::optional<double> duration) {
  SignalSamples s;
  s.times = times;
  s.values = values;
  s.duration = duration ? *duration : (times.size() ? times.maxCoeff() : 0.0);
  validate(s);
  return s;
}

py::dict samples_dict(const SignalSamples& s) {
  py::dict d;
  d["times"] = s.times;
  d["values"] = s.values;
  d["duration"] = s.duration;
  return d;
}

// (n, 4) array of tau, omega, coeff, atom index
Eigen::MatrixXd support_array(const std::vector<SupportAtom>& support) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(support.size()), 4);
  for (std::size_t i = 0; i < support.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out(r, 0) = support[i].tau;
    out(r, 1) = support[i].omega;
    out(r, 2) = support[i].coeff;
    out(r, 3) = static_cast<double>(support[i].atom_index);
  }
  return out;
}

py::dict solver_dict(const SparseCoefficients& c) {
  py::dict d;
  d["coefficients"] = c.values;
  d["residual_norm"] = c.residual_norm;
  d["l1_norm"] = c.l1_norm;
  d["iterations"] = c.iterations;
  d["outer_iterations"] = c.outer_iterations;
  d["converged"] = c.converged;
  return d;
}

py::dict diagnostics_dict(const Diagnostics& d) {
  py::dict out;
  out["sigma"] = d.sigma;
  out["residual_norm"] = d.residual_norm;
  out["data_norm"] = d.data_norm;
  out["support_size"] = d.support_size;
  out["iterations"] = d.iterations;
  out["outer_iterations"] = d.outer_iterations;
  out["converged"] = d.converged;
  out["raw_clusters"] = d.raw_clusters;
  out["relabelled_noise"] = d.relabelled_noise;
  return out;
}

SolveSpec solve_spec(double tol, int max_iters) {
  SolveSpec s;
  s.tol = tol;
  s.max_iters = max_iters;
  return s;
}

}  // namespace

PYBIND11_MODULE(_srmd, m) {
  m.doc() = "Sparse random mode decomposition";

  static py::exception<Error> srmd_error(m, "SrmdError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      switch (e.kind()) {
        case ErrorKind::InvalidArgument:
        case ErrorKind::Input:
          PyErr_SetString(PyExc_ValueError, e.what());
          return;
        default:
          srmd_error(e.what());
      }
    }
  });

  py::class_<SrmdConfig>(m, "Config")
      .def(py::init<>())
      .def_readwrite("n_features", &SrmdConfig::n_features)
      .def_readwrite("omega_max", &SrmdConfig::omega_max)
      .def_readwrite("delta", &SrmdConfig::delta)
      .def_readwrite("r", &SrmdConfig::r)
      .def_readwrite("frqscale", &SrmdConfig::frqscale)
      .def_readwrite("eps", &SrmdConfig::eps)
      .def_readwrite("min_samples", &SrmdConfig::min_samples)
      .def_readwrite("threshold", &SrmdConfig::threshold)
      .def_readwrite("seed", &SrmdConfig::seed)
      .def_readwrite("target_modes", &SrmdConfig::target_modes)
      .def_readwrite("split_frequency", &SrmdConfig::split_frequency)
      .def_property(
          "extension", [](const SrmdConfig& c) { return std::string(to_string(c.extension)); },
          [](SrmdConfig& c, const std::string& v) { c.extension = parse_extension(v); })
      .def_property(
          "tol", [](const SrmdConfig& c) { return c.solver.tol; },
          [](SrmdConfig& c, double v) { c.solver.tol = v; })
      .def_property(
          "max_iters", [](const SrmdConfig& c) { return c.solver.max_iters; },
          [](SrmdConfig& c, int v) { c.solver.max_iters = v; })
      .def("set", &io::set_config_value, py::arg("key"), py::arg("value"),
           "Set a field from its text form, as in a config file.")
      .def("to_text", &io::format_config)
      .def_static("from_text", [](const std::string& text) { return io::parse_config(text); })
      .def("__repr__", [](const SrmdConfig& c) { return "<srmd.Config\n" + io::format_config(c) + ">"; });

  py::class_<DecompositionResult>(m, "Decomposition")
      .def_property_readonly("times",
                             [](const DecompositionResult& r) { return r.reconstruction.times; })
      .def_property_readonly("reconstruction",
                             [](const DecompositionResult& r) { return r.reconstruction.values; })
      .def_property_readonly("modes",
                             [](const DecompositionResult& r) {
                               std::vector<Eigen::VectorXd> out;
                               for (const auto& mode : r.modes) out.push_back(mode.samples.values);
                               return out;
                             })
      .def_property_readonly("mode_atoms",
                             [](const DecompositionResult& r) {
                               std::vector<std::vector<Eigen::Index>> out;
                               for (const auto& mode : r.modes) out.push_back(mode.atom_indices);
                               return out;
                             })
      .def_property_readonly("support",
                             [](const DecompositionResult& r) { return support_array(r.support); },
                             "(n, 4) array: tau, omega, coeff, atom index")
      .def_readonly("labels", &DecompositionResult::labels)
      .def_readonly("raw_labels", &DecompositionResult::raw_labels)
      .def_property_readonly("coefficients",
                             [](const DecompositionResult& r) {
                               return r.representation.coeffs.values;
                             })
      .def_property_readonly("median_frequencies",
                             [](const DecompositionResult& r) {
                               std::vector<double> out;
                               for (std::size_t k = 0; k < r.modes.size(); ++k) {
                                 out.push_back(r.median_frequency(k));
                               }
                               return out;
                             })
      .def_property_readonly("diagnostics",
                             [](const DecompositionResult& r) {
                               return diagnostics_dict(r.diagnostics);
                             })
      .def("evaluate_mode", &DecompositionResult::evaluate_mode, py::arg("k"), py::arg("times"))
      .def("top_fraction",
           [](const DecompositionResult& r, double fraction) {
             return support_array(top_fraction_support(r, fraction));
           },
           py::arg("fraction"))
      .def("save",
           [](const DecompositionResult& r, const std::string& dir, const SrmdConfig& cfg) {
             io::write_decomposition(dir, r, cfg);
           },
           py::arg("directory"), py::arg("config") = SrmdConfig{});

  m.def(
      "decompose",
      [](const Eigen::VectorXd& times, const Eigen::VectorXd& values,
         std::optional<double> duration, const SrmdConfig& cfg) {
        const SignalSamples s = make_samples(times, values, duration);
        py::gil_scoped_release release;
        return decompose(s, cfg);
      },
      py::arg("times"), py::arg("values"), py::arg("duration") = py::none(),
      py::arg("config") = SrmdConfig{},
      "Represent the samples with sparse random features and split them into modes.");

  m.def(
      "represent",
      [](const Eigen::VectorXd& times, const Eigen::VectorXd& values,
         std::optional<double> duration, const SrmdConfig& cfg) {
        const SignalSamples s = make_samples(times, values, duration);
        Representation rep;
        {
          py::gil_scoped_release release;
          rep = represent(s, cfg);
        }
        py::dict d = solver_dict(rep.coeffs);
        d["reconstruction"] = rep.reconstruction.values;
        d["sigma"] = rep.sigma;
        Eigen::MatrixXd atoms(rep.dictionary.size(), 3);
        for (Eigen::Index j = 0; j < rep.dictionary.size(); ++j) {
          const auto& a = rep.dictionary.atoms[static_cast<std::size_t>(j)];
          atoms.row(j) << a.tau, a.omega, a.psi;
        }
        d["atoms"] = atoms;
        d["delta"] = rep.dictionary.delta;
        return d;
      },
      py::arg("times"), py::arg("values"), py::arg("duration") = py::none(),
      py::arg("config") = SrmdConfig{});

  m.def(
      "solve_bpdn",
      [](const Eigen::MatrixXd& a, const Eigen::VectorXd& y, double sigma, double tol,
         int max_iters) { return solver_dict(solve_bpdn(a, y, sigma, solve_spec(tol, max_iters))); },
      py::arg("a"), py::arg("y"), py::arg("sigma"), py::arg("tol") = 1e-4,
      py::arg("max_iters") = 10000, "min ||c||_1 subject to ||Ac - y|| <= sigma");
  m.def(
      "solve_lasso",
      [](const Eigen::MatrixXd& a, const Eigen::VectorXd& y, double lambda, double tol,
         int max_iters) {
        return solver_dict(solve_lasso_penalized(a, y, lambda, solve_spec(tol, max_iters)));
      },
      py::arg("a"), py::arg("y"), py::arg("lam"), py::arg("tol") = 1e-4,
      py::arg("max_iters") = 10000, "min lam ||c||_1 + ||Ac - y||^2 / (2m)");
  m.def(
      "solve_l1_ball",
      [](const Eigen::MatrixXd& a, const Eigen::VectorXd& y, double tau, double tol,
         int max_iters) {
        return solver_dict(solve_l1_ball(a, y, tau, solve_spec(tol, max_iters)));
      },
      py::arg("a"), py::arg("y"), py::arg("tau"), py::arg("tol") = 1e-4,
      py::arg("max_iters") = 10000, "min ||Ac - y|| subject to ||c||_1 <= tau");

  m.def(
      "dbscan",
      [](const Eigen::Ref<const Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>>& pts,
         double eps, int min_samples) {
        std::vector<Point2> points;
        for (Eigen::Index i = 0; i < pts.rows(); ++i) points.push_back({pts(i, 0), pts(i, 1)});
        const ClusterLabeling l = dbscan(points, eps, min_samples);
        return py::make_tuple(l.labels, l.core);
      },
      py::arg("points"), py::arg("eps"), py::arg("min_samples"),
      "Returns (labels, core); -1 marks noise.");

  m.def("benchmarks", [] {
    std::vector<std::string> out;
    for (BenchmarkId id : all_benchmarks()) out.emplace_back(to_string(id));
    return out;
  });

  m.def(
      "generate_benchmark",
      [](const std::string& name, std::uint64_t seed, std::optional<double> noise_ratio,
         std::optional<Eigen::Index> m_samples) {
        BenchmarkCase bc = benchmark_case(parse_benchmark_id(name), seed, noise_ratio);
        const Benchmark b = generate_benchmark(bc.id, m_samples.value_or(bc.m), bc.noise);
        py::dict d = samples_dict(b.composite);
        d["clean"] = b.clean.values;
        std::vector<Eigen::VectorXd> modes;
        for (const auto& mode : b.modes) modes.push_back(mode.values);
        d["modes"] = modes;
        return d;
      },
      py::arg("name"), py::arg("seed") = kDefaultSeed, py::arg("noise_ratio") = py::none(),
      py::arg("m") = py::none());

  m.def("benchmark_config",
        [](const std::string& name, std::uint64_t seed, std::optional<double> noise_ratio) {
          return benchmark_case(parse_benchmark_id(name), seed, noise_ratio).config;
        },
        py::arg("name"), py::arg("seed") = kDefaultSeed, py::arg("noise_ratio") = py::none());

  m.def(
      "run_benchmark",
      [](const std::string& name, std::uint64_t seed, std::optional<double> noise_ratio) {
        const BenchmarkCase bc = benchmark_case(parse_benchmark_id(name), seed, noise_ratio);
        BenchmarkReport rep;
        {
          py::gil_scoped_release release;
          rep = run_benchmark(bc);
        }
        py::dict d;
        d["reconstruction_error"] = rep.reconstruction_error;
        d["residual_ratio"] = rep.residual_ratio;
        d["mode_errors"] = rep.pairing.errors;
        d["result"] = std::move(rep.result);
        return d;
      },
      py::arg("name"), py::arg("seed") = kDefaultSeed, py::arg("noise_ratio") = py::none());

  m.def("read_signal", [](const std::string& path) {
    const bool wav = path.size() >= 4 && (path.ends_with(".wav") || path.ends_with(".WAV"));
    return samples_dict(wav ? io::read_wav(path) : io::read_signal_csv(path));
  });

  m.attr("DEFAULT_SEED") = kDefaultSeed;
}
