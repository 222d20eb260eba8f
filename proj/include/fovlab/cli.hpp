#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fovlab/airy.hpp"
#include "fovlab/ensembles.hpp"
#include "fovlab/error.hpp"
#include "fovlab/fov.hpp"
#include "fovlab/harness.hpp"
#include "fovlab/io.hpp"
#include "fovlab/parallel.hpp"

namespace fovlab::cli {

enum ExitCode : int { ok = 0, numerical_failure = 1, validation_failure = 2 };

/// Matrix source shared by radius, boundary and curve.
struct MatrixSource {
  std::string matrix_path;
  std::string ensemble;
  std::size_t n = 0;
  std::optional<double> gamma;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  void add_to(CLI::App* app, bool with_path) {
    if (with_path) app->add_option("--matrix", matrix_path, "Matrix JSON file {\"n\", \"entries\": [[re, im], ...]}");
    app->add_option("--ensemble", ensemble,
                    "Ensemble: ginibre_complex, gue, elliptic, strict_upper_triangular, bernoulli_phase");
    app->add_option("--n", n, "Matrix dimension for --ensemble");
    app->add_option("--gamma", gamma, "Elliptic parameter in (0, 1]");
    app->add_option("--seed", seed, "Random seed")->capture_default_str();
    app->add_option("--stream", stream, "Stream id (trial index)")->capture_default_str();
  }

  EnsembleSpec spec() const {
    require(!ensemble.empty(), "--ensemble is required");
    require(n >= 1, "--n must be a positive integer");
    EnsembleSpec s{parse_family(ensemble), n, gamma};
    s.validate();
    return s;
  }

  ComplexMatrix load() const {
    if (!matrix_path.empty()) {
      require(ensemble.empty(), "give either --matrix or --ensemble, not both");
      return read_matrix(matrix_path);
    }
    require(!ensemble.empty(), "one of --matrix or --ensemble is required");
    RngStream rng(seed, stream);
    return sample(spec(), rng);
  }
};

inline void validate_tol(double tol, const char* name) {
  require(std::isfinite(tol) && tol > 0.0 && tol < 1.0, std::string(name) + " must lie in (0, 1)");
}

inline void validate_positive(std::size_t v, const char* name) {
  require(v >= 1, std::string(name) + " must be a positive integer");
}

inline int digits_for(double tol) {
  return std::max(1, static_cast<int>(std::ceil(-std::log10(tol))));
}

inline std::string fixed_digits(double v, int d) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", d, v);
  return buf;
}

/// Parses argv and dispatches. Output goes to `out`, diagnostics to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"fovlab: certified numerical ranges and random-matrix experiments"};
  app.name("fovlab");
  app.set_help_flag();
  app.set_help_all_flag("-h,--help", "Print help for every subcommand and flag, then exit");
  app.require_subcommand(1);
  app.fallthrough();

  std::size_t threads = default_threads();
  std::string format;
  app.add_option("--threads", threads, "Worker threads; results do not depend on it")
      ->capture_default_str();
  app.add_option("--format", format, "Stdout summary format")->check(CLI::IsMember({"json", "csv"}));

  // sample
  auto* sub_sample = app.add_subcommand("sample", "Draw one matrix from an ensemble and write matrix JSON");
  MatrixSource sample_src;
  std::string sample_out;
  sample_src.add_to(sub_sample, false);
  sub_sample->add_option("--out", sample_out, "Output matrix JSON path (stdout if omitted)");

  // radius
  auto* sub_radius = app.add_subcommand("radius", "Certified r_plus and r_minus of a matrix");
  MatrixSource radius_src;
  double radius_tol = 1e-6, radius_coarse = 1e-2;
  std::string radius_out;
  radius_src.add_to(sub_radius, true);
  sub_radius->add_option("--tol", radius_tol, "Certificate width")->capture_default_str();
  sub_radius->add_option("--coarse-tol", radius_coarse, "Initial grid resolution")->capture_default_str();
  sub_radius->add_option("--out", radius_out, "Write the JSON summary here");

  // boundary
  auto* sub_boundary = app.add_subcommand("boundary", "Support samples of the numerical range boundary");
  MatrixSource boundary_src;
  double boundary_tol = 1e-6, boundary_coarse = 1e-2;
  std::string boundary_out;
  boundary_src.add_to(sub_boundary, true);
  sub_boundary->add_option("--tol", boundary_tol, "Certificate width")->capture_default_str();
  sub_boundary->add_option("--coarse-tol", boundary_coarse, "Initial grid resolution")->capture_default_str();
  sub_boundary->add_option("--out", boundary_out, "Output directory (boundary.csv, boundary.json)")->required();

  // curve
  auto* sub_curve = app.add_subcommand("curve", "sqrt(2) lambda_1(H(theta)) on a uniform theta grid");
  MatrixSource curve_src;
  std::size_t curve_grid = 256;
  std::string curve_out;
  curve_src.add_to(sub_curve, true);
  sub_curve->add_option("--grid", curve_grid, "Number of theta points")->capture_default_str();
  sub_curve->add_option("--out", curve_out, "Output directory (curve.csv)")->required();

  // corr
  auto* sub_corr = app.add_subcommand("corr", "Correlation of lambda_1 across the N^{-1/6} transition");
  std::string corr_ensemble = "ginibre_complex";
  std::optional<double> corr_gamma;
  std::vector<std::size_t> corr_n = {128, 256};
  std::vector<double> corr_deltas;
  std::size_t corr_trials = 400, corr_points = 9;
  double corr_theta0 = 0.0;
  std::uint64_t corr_seed = 0;
  std::string corr_out;
  sub_corr->add_option("--ensemble", corr_ensemble, "Ensemble family")->capture_default_str();
  sub_corr->add_option("--gamma", corr_gamma, "Elliptic parameter");
  sub_corr->add_option("--n", corr_n, "Comma-separated dimensions")->delimiter(',')->capture_default_str();
  sub_corr->add_option("--deltas", corr_deltas, "Also report pair correlations at these raw separations")
      ->delimiter(',');
  sub_corr->add_option("--trials", corr_trials, "Trials per N")->capture_default_str();
  sub_corr->add_option("--points", corr_points, "Scaled separations in [0.03, 3]")->capture_default_str();
  sub_corr->add_option("--theta0", corr_theta0, "Base angle")->capture_default_str();
  sub_corr->add_option("--seed", corr_seed, "Random seed")->capture_default_str();
  sub_corr->add_option("--out", corr_out, "Output directory (corr.csv, report.json)")->required();

  // tails
  auto* sub_tails = app.add_subcommand("tails", "Small-deviation tail probabilities of lambda_1");
  std::size_t tails_n = 256, tails_trials = 20000;
  std::string tails_side = "both";
  std::vector<double> tails_right = {1.5, 2.0, 2.5}, tails_left = {2.0, 2.5, 3.0};
  double tails_theta0 = 0.0;
  std::uint64_t tails_seed = 0;
  std::string tails_out;
  sub_tails->add_option("--n", tails_n, "Dimension")->capture_default_str();
  sub_tails->add_option("--trials", tails_trials, "Trials")->capture_default_str();
  sub_tails->add_option("--side", tails_side, "right, left or both")
      ->check(CLI::IsMember({"right", "left", "both"}))
      ->capture_default_str();
  sub_tails->add_option("--x-right", tails_right, "Right-tail x grid")->delimiter(',')->capture_default_str();
  sub_tails->add_option("--x-left", tails_left, "Left-tail x grid")->delimiter(',')->capture_default_str();
  sub_tails->add_option("--theta0", tails_theta0, "Angle")->capture_default_str();
  sub_tails->add_option("--seed", tails_seed, "Random seed")->capture_default_str();
  sub_tails->add_option("--out", tails_out, "Output directory (tails_<side>.csv, report.json)")->required();

  // scaling
  auto* sub_scaling = app.add_subcommand("scaling", "Mean r_plus, r_minus of Ginibre matrices versus N");
  std::vector<std::size_t> scaling_n = {64, 128, 256};
  std::size_t scaling_trials = 200;
  std::uint64_t scaling_seed = 0;
  double scaling_tol = 1e-4;
  std::string scaling_out;
  sub_scaling->add_option("--n", scaling_n, "Comma-separated dimensions")->delimiter(',')->capture_default_str();
  sub_scaling->add_option("--trials", scaling_trials, "Trials per N")->capture_default_str();
  sub_scaling->add_option("--seed", scaling_seed, "Random seed")->capture_default_str();
  sub_scaling->add_option("--tol", scaling_tol, "Certificate width per matrix")->capture_default_str();
  sub_scaling->add_option("--out", scaling_out, "Output directory (report.json, trials.csv)")->required();

  // elliptic
  auto* sub_elliptic = app.add_subcommand("elliptic", "Fluctuations of r_plus / r_minus for the elliptic ensemble");
  std::size_t ell_n = 256, ell_trials = 1000, ell_ref_n = 512, ell_ref_trials = 2000;
  double ell_gamma = 0.4;
  std::string ell_side = "both";
  std::uint64_t ell_seed = 0;
  std::string ell_out;
  sub_elliptic->add_option("--n", ell_n, "Dimension")->capture_default_str();
  sub_elliptic->add_option("--gamma", ell_gamma, "Elliptic parameter")->capture_default_str();
  sub_elliptic->add_option("--trials", ell_trials, "Trials")->capture_default_str();
  sub_elliptic->add_option("--side", ell_side, "plus, minus or both")
      ->check(CLI::IsMember({"plus", "minus", "both"}))
      ->capture_default_str();
  sub_elliptic->add_option("--ref-n", ell_ref_n, "GUE dimension of the reference sample")->capture_default_str();
  sub_elliptic->add_option("--ref-trials", ell_ref_trials, "Reference draws (paired into halves)")
      ->capture_default_str();
  sub_elliptic->add_option("--seed", ell_seed, "Random seed")->capture_default_str();
  sub_elliptic->add_option("--out", ell_out, "Output directory")->required();

  // figure
  auto* sub_figure = app.add_subcommand("figure", "Spectrum, certified boundary and reference curve as CSV + SVG");
  MatrixSource fig_src;
  double fig_tol = 1e-4;
  std::string fig_out;
  fig_src.add_to(sub_figure, false);
  sub_figure->add_option("--tol", fig_tol, "Certificate width")->capture_default_str();
  sub_figure->add_option("--out", fig_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::CallForHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return validation_failure;
  }

  try {
    validate_positive(threads, "--threads");
    auto print_summary = [&](const json& summary, const std::vector<std::string>& header,
                             const std::vector<double>& values) {
      if (format == "json") {
        out << to_json_text(summary);
      } else if (format == "csv") {
        CsvWriter w(header);
        w.row(values);
        out << w.str();
      }
    };

    if (*sub_sample) {
      const auto b = [&] {
        RngStream rng(sample_src.seed, sample_src.stream);
        return sample(sample_src.spec(), rng);
      }();
      if (sample_out.empty())
        out << to_json_text(matrix_to_json(b));
      else
        write_matrix(sample_out, b);
    } else if (*sub_radius) {
      validate_tol(radius_tol, "--tol");
      validate_tol(radius_coarse, "--coarse-tol");
      const auto b = radius_src.load();
      SweepOptions opt;
      opt.tol = radius_tol;
      opt.coarse_tol = radius_coarse;
      const auto rb = range_boundary(b, opt);
      const auto inner = inner_radius_from(rb);
      json s = boundary_summary(rb);
      s["r_plus_value"] = rb.r_plus();
      s["r_minus_bounds"] = json::array({inner.lower, inner.upper});
      if (!radius_out.empty()) write_text(radius_out, to_json_text(s));
      if (format.empty()) {
        const int d = digits_for(radius_tol);
        out << "r_plus=" << fixed_digits(rb.r_plus(), d) << " r_minus=" << fixed_digits(rb.r_minus_value, d)
            << (rb.certified ? "" : " (uncertified)") << "\n";
      }
      print_summary(s, {"r_plus", "r_plus_lower", "r_plus_upper", "min_h", "r_minus", "certified"},
                    {rb.r_plus(), rb.inner_r_plus, rb.outer_r_plus, rb.min_h, rb.r_minus_value,
                     rb.certified ? 1.0 : 0.0});
      if (!rb.certified) return numerical_failure;
    } else if (*sub_boundary) {
      validate_tol(boundary_tol, "--tol");
      validate_tol(boundary_coarse, "--coarse-tol");
      const auto b = boundary_src.load();
      SweepOptions opt;
      opt.tol = boundary_tol;
      opt.coarse_tol = boundary_coarse;
      const auto rb = range_boundary(b, opt);
      const std::filesystem::path dir(boundary_out);
      std::filesystem::create_directories(dir);
      write_text(dir / "boundary.csv", boundary_csv(rb));
      write_text(dir / "boundary.json", to_json_text(boundary_summary(rb)));
      if (format.empty())
        out << "samples=" << rb.samples.size() << " r_plus=[" << format_double(rb.inner_r_plus) << ", "
            << format_double(rb.outer_r_plus) << "] certified=" << (rb.certified ? "true" : "false") << "\n";
      print_summary(boundary_summary(rb), {"r_plus_lower", "r_plus_upper", "r_minus", "samples", "certified"},
                    {rb.inner_r_plus, rb.outer_r_plus, rb.r_minus_value, double(rb.samples.size()),
                     rb.certified ? 1.0 : 0.0});
      if (!rb.certified) return numerical_failure;
    } else if (*sub_curve) {
      validate_positive(curve_grid, "--grid");
      const auto b = curve_src.load();
      const auto thetas = uniform_thetas(curve_grid);
      const auto c = lambda1_curve(b, thetas);
      CsvWriter w({"theta", "value", "residual"});
      for (std::size_t k = 0; k < thetas.size(); ++k) w.row({c.thetas[k], c.values[k], c.residuals[k]});
      const std::filesystem::path dir(curve_out);
      write_text(dir / "curve.csv", w.str());
      double mx = c.values.empty() ? 0.0 : c.values[0];
      for (double v : c.values) mx = std::max(mx, v);
      json s{{"n", c.n}, {"grid", curve_grid}, {"max_value", mx}, {"lipschitz_ok", c.lipschitz_ok()}};
      write_text(dir / "curve.json", to_json_text(s));
      if (format.empty()) out << "max=" << format_double(mx) << " lipschitz_ok=" << (c.lipschitz_ok() ? "true" : "false") << "\n";
      print_summary(s, {"n", "grid", "max_value"}, {double(c.n), double(curve_grid), mx});
    } else if (*sub_corr) {
      validate_positive(corr_trials, "--trials");
      require(corr_points >= 2, "--points must be at least 2");
      for (auto n : corr_n) validate_positive(n, "--n");
      EnsembleSpec spec{parse_family(corr_ensemble), corr_n.front(), corr_gamma};
      spec.validate();
      const auto ts = transition_scan(spec, corr_theta0, corr_n, corr_trials, corr_seed, threads, corr_points);
      CsvWriter w({"n", "scaled_delta", "delta", "corr", "sync_median"});
      for (const auto& r : ts.rows) w.row({double(r.n), r.scaled_delta, r.delta, r.correlation, r.sync_median});
      const std::filesystem::path dir(corr_out);
      std::filesystem::create_directories(dir);
      write_text(dir / "corr.csv", w.str());
      json per_n = json::array();
      for (std::size_t k = 0; k < ts.n_list.size(); ++k)
        per_n.push_back(json{{"n", ts.n_list[k]}, {"spearman", ts.spearman[k]}});
      ExperimentReport rep;
      rep.config = json{{"experiment", "transition_scan"}, {"ensemble", corr_ensemble}, {"n", corr_n},
                        {"trials", corr_trials}, {"seed", corr_seed}, {"theta0", corr_theta0},
                        {"points", corr_points}};
      if (corr_gamma) rep.config["gamma"] = *corr_gamma;
      rep.summary = json{{"per_n", per_n}};
      if (!corr_deltas.empty()) {
        const auto pc = pair_correlation(spec, corr_theta0, corr_deltas, corr_trials, corr_seed, threads);
        CsvWriter p({"n", "delta", "corr", "sync_median"});
        json pj = json::array();
        for (std::size_t k = 0; k < pc.deltas.size(); ++k) {
          p.row({double(pc.n), pc.deltas[k], pc.correlation[k], pc.sync_median[k]});
          pj.push_back(json{{"delta", pc.deltas[k]}, {"corr", pc.correlation[k]}, {"sync_median", pc.sync_median[k]}});
        }
        rep.extra_files["pair.csv"] = p.str();
        rep.config["deltas"] = corr_deltas;
        rep.summary["pair"] = pj;
      }
      rep.write(dir);
      if (format == "json") out << to_json_text(rep.summary);
      else if (format == "csv") out << w.str();
      else out << "wrote " << (dir / "corr.csv").string() << "\n";
    } else if (*sub_tails) {
      validate_positive(tails_trials, "--trials");
      require(tails_n >= 2, "--n must be at least 2");
      std::vector<TailSide> sides;
      if (tails_side != "left") sides.push_back(TailSide::right);
      if (tails_side != "right") sides.push_back(TailSide::left);
      std::vector<TailConfig> cfgs;
      for (auto side : sides) {
        TailConfig c;
        c.side = side;
        c.x_grid = side == TailSide::right ? tails_right : tails_left;
        c.n = tails_n;
        c.trials = tails_trials;
        c.theta0 = tails_theta0;
        c.validate();
        cfgs.push_back(c);
      }
      const auto samples = edge_samples(Family::ginibre_complex, tails_n, tails_theta0, tails_trials, tails_seed, threads);
      ExperimentReport rep;
      rep.config = json{{"experiment", "tail_estimate"}, {"n", tails_n}, {"trials", tails_trials},
                        {"seed", tails_seed}, {"theta0", tails_theta0}, {"side", tails_side}};
      rep.trial_header = {"trial", "scaled_lambda1"};
      for (std::size_t t = 0; t < samples.size(); ++t) rep.trial_rows.push_back({double(t), samples[t]});
      std::string combined;
      for (const auto& c : cfgs) {
        const auto te = tail_from_samples(c, samples);
        CsvWriter w({"x", "p_hat", "ci_lo", "ci_hi", "ratio", "count", "in_window"});
        json pts = json::array();
        for (const auto& p : te.points) {
          w.row({p.x, p.p_hat, p.ci_lo, p.ci_hi, p.ratio, double(p.count), p.in_window ? 1.0 : 0.0});
          pts.push_back(json{{"x", p.x}, {"p_hat", p.p_hat}, {"ci", json::array({p.ci_lo, p.ci_hi})},
                             {"ratio", p.ratio}, {"count", p.count}, {"zero_count", p.zero_count},
                             {"in_window", p.in_window}});
        }
        const std::string name(tail_side_name(c.side));
        rep.extra_files["tails_" + name + ".csv"] = w.str();
        rep.summary[name] = pts;
        combined += w.str();
      }
      rep.write(tails_out);
      if (format == "json") out << to_json_text(rep.summary);
      else if (format == "csv") out << combined;
      else out << "wrote " << tails_out << "\n";
    } else if (*sub_scaling) {
      validate_tol(scaling_tol, "--tol");
      auto sweep = experiment_sweep(scaling_tol);
      const auto rs = radii_scaling(scaling_n, scaling_trials, scaling_seed, threads, sweep);
      rs.report.write(scaling_out);
      if (format == "json") {
        out << to_json_text(rs.report.summary);
      } else {
        CsvWriter w({"n", "r_plus_mean", "r_minus_mean", "S_plus", "S_minus"});
        for (const auto& r : rs.rows) w.row({double(r.n), r.r_plus_mean, r.r_minus_mean, r.s_plus, r.s_minus});
        out << w.str();
      }
    } else if (*sub_elliptic) {
      require(ell_ref_trials >= 2, "--ref-trials must be at least 2");
      std::vector<EllipticSide> sides;
      if (ell_side != "minus") sides.push_back(EllipticSide::plus);
      if (ell_side != "plus") sides.push_back(EllipticSide::minus);
      for (auto s : sides) check_elliptic_window(ell_n, ell_gamma, s);
      require(ell_trials >= 500, "--trials must be at least 500");
      const auto ref = tw2_reference(ell_ref_n, ell_ref_trials, ell_seed ^ 0x5245465FULL, threads);
      const std::filesystem::path dir(ell_out);
      json summary = json::object();
      for (auto s : sides) {
        const auto ef = elliptic_fluctuation(ell_n, ell_gamma, ell_trials, ell_seed, s, ref, threads);
        const std::string name = s == EllipticSide::plus ? "plus" : "minus";
        ef.report.write(dir / name);
        summary[name] = ef.report.summary;
      }
      CsvWriter rw({"sample"});
      for (double v : ref.samples) rw.row({v});
      write_text(dir / "tw2_reference.csv", rw.str());
      write_text(dir / "report.json", to_json_text(json{{"config", json{{"n", ell_n}, {"gamma", ell_gamma},
                                                                         {"trials", ell_trials}, {"seed", ell_seed},
                                                                         {"side", ell_side}, {"ref_n", ell_ref_n},
                                                                         {"ref_trials", ell_ref_trials}}},
                                                       {"summary", summary}}));
      if (format == "json") out << to_json_text(summary);
      else
        for (auto it = summary.begin(); it != summary.end(); ++it)
          out << it.key() << ": ks=" << format_double(it.value()["ks"].get<double>()) << "\n";
    } else if (*sub_figure) {
      validate_tol(fig_tol, "--tol");
      auto sweep = experiment_sweep(fig_tol);
      sweep.coarse_tol = 0.05;
      const auto f = figure_data(fig_src.spec(), fig_src.seed, sweep);
      f.report.write(fig_out);
      if (format == "json") out << to_json_text(f.report.summary);
      else
        out << "membership_ok=" << (f.membership_ok ? "true" : "false")
            << " outer_r_plus=" << format_double(f.boundary.outer_r_plus) << "\n";
      if (!f.membership_ok) return numerical_failure;
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return validation_failure;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return validation_failure;
  } catch (const ConvergenceError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return numerical_failure;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << "\n";
    return numerical_failure;
  }
  return ok;
}

}  // namespace fovlab::cli
