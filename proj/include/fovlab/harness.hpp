#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fovlab/airy.hpp"
#include "fovlab/eigen_general.hpp"
#include "fovlab/ensembles.hpp"
#include "fovlab/error.hpp"
#include "fovlab/fov.hpp"
#include "fovlab/io.hpp"
#include "fovlab/parallel.hpp"
#include "fovlab/rng.hpp"
#include "fovlab/stats.hpp"

namespace fovlab {

/// Config echo, summary and per-trial table of one experiment. Contains no
/// wall-clock data, so identical configs give identical bytes.
struct ExperimentReport {
  json config = json::object();
  json summary = json::object();
  std::vector<std::string> trial_header;
  std::vector<std::vector<double>> trial_rows;
  std::map<std::string, std::string> extra_files;  // file name -> contents

  json to_json() const { return json{{"config", config}, {"summary", summary}}; }

  std::string trials_csv() const {
    CsvWriter w(trial_header);
    for (const auto& r : trial_rows) w.row(r);
    return w.str();
  }

  void write(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    write_text(dir / "report.json", to_json_text(to_json()));
    if (!trial_header.empty()) write_text(dir / "trials.csv", trials_csv());
    for (const auto& [name, text] : extra_files) write_text(dir / name, text);
  }
};

/// Sweep settings used inside experiments: statistical error dominates, so
/// the certificate tolerance is 1e-4 and the initial grid is coarse.
inline SweepOptions experiment_sweep(double tol = 1e-4) {
  SweepOptions o;
  o.tol = tol;
  o.coarse_tol = 0.25;
  return o;
}

inline double r_plus_prediction(double n) {
  return std::numbers::sqrt2 + std::pow(std::log(n), 2.0 / 3.0) / (4.0 * std::numbers::sqrt2 * std::pow(n, 2.0 / 3.0));
}

inline double r_minus_prediction(double n) {
  return std::numbers::sqrt2 - std::pow(std::log(n), 1.0 / 3.0) / (std::pow(2.0, 1.0 / 6.0) * std::pow(n, 2.0 / 3.0));
}

struct RadiiRow {
  std::size_t n = 0;
  double r_plus_mean = 0.0, r_plus_se = 0.0;
  double r_minus_mean = 0.0, r_minus_se = 0.0;
  double s_plus = 0.0, s_minus = 0.0;
  std::size_t uncertified = 0;
};

struct RadiiScaling {
  std::vector<RadiiRow> rows;
  ExperimentReport report;
};

inline RadiiScaling radii_scaling(std::span<const std::size_t> n_list, std::size_t trials,
                                  std::uint64_t seed, std::size_t threads = 1,
                                  const SweepOptions& sweep = experiment_sweep()) {
  require(!n_list.empty(), "radii_scaling needs at least one N");
  for (std::size_t n : n_list) require(n >= 32, "radii_scaling needs every N >= 32");
  require(trials >= 100, "radii_scaling needs at least 100 trials");
  sweep.validate();

  RadiiScaling out;
  auto& rep = out.report;
  rep.config = json{{"experiment", "radii_scaling"},
                    {"ensemble", "ginibre_complex"},
                    {"n", json(std::vector<std::size_t>(n_list.begin(), n_list.end()))},
                    {"trials", trials},
                    {"seed", seed},
                    {"tol", sweep.tol},
                    {"coarse_tol", sweep.coarse_tol}};
  rep.trial_header = {"n", "trial", "r_plus", "r_plus_lower", "r_plus_upper",
                      "min_h", "min_h_lower", "min_h_upper", "r_minus", "certified", "samples"};
  json per_n = json::array();
  for (std::size_t n : n_list) {
    const auto recs = parallel_map(trials, threads, [&](std::size_t t) {
      RngStream rng = trial_stream(seed, t, n);
      const auto a = sample(EnsembleSpec::ginibre(n), rng);
      return range_boundary(a, sweep);
    });
    std::vector<double> rp(trials), rm(trials);
    RadiiRow row;
    row.n = n;
    for (std::size_t t = 0; t < trials; ++t) {
      const auto& rb = recs[t];
      rp[t] = rb.r_plus();
      rm[t] = rb.r_minus_value;
      row.uncertified += !rb.certified;
      rep.trial_rows.push_back({double(n), double(t), rp[t], rb.inner_r_plus, rb.outer_r_plus,
                                rb.min_h, rb.min_h_lower, rb.min_h_upper, rm[t],
                                rb.certified ? 1.0 : 0.0, double(rb.samples.size())});
    }
    const double nn = static_cast<double>(n);
    row.r_plus_mean = mean(rp);
    row.r_plus_se = standard_error(rp);
    row.r_minus_mean = mean(rm);
    row.r_minus_se = standard_error(rm);
    const double n23 = std::pow(nn, 2.0 / 3.0), ln = std::log(nn);
    row.s_plus = (row.r_plus_mean - std::numbers::sqrt2) * n23 / std::pow(ln, 2.0 / 3.0);
    row.s_minus = (std::numbers::sqrt2 - row.r_minus_mean) * n23 / std::pow(ln, 1.0 / 3.0);
    per_n.push_back(json{{"n", n},
                         {"r_plus_mean", row.r_plus_mean},
                         {"r_plus_se", row.r_plus_se},
                         {"r_minus_mean", row.r_minus_mean},
                         {"r_minus_se", row.r_minus_se},
                         {"S_plus", row.s_plus},
                         {"S_minus", row.s_minus},
                         {"r_plus_prediction", r_plus_prediction(nn)},
                         {"r_minus_prediction", r_minus_prediction(nn)},
                         {"uncertified", row.uncertified}});
    out.rows.push_back(row);
  }
  bool decreasing = true;
  for (std::size_t k = 1; k < out.rows.size(); ++k)
    if (!(std::abs(out.rows[k].r_plus_mean - std::numbers::sqrt2) <
          std::abs(out.rows[k - 1].r_plus_mean - std::numbers::sqrt2)))
      decreasing = false;
  rep.summary = json{{"per_n", per_n},
                     {"S_plus_limit", 1.0 / (4.0 * std::numbers::sqrt2)},
                     {"S_minus_limit", std::pow(2.0, -1.0 / 6.0)},
                     {"r_plus_gap_decreasing", decreasing}};
  return out;
}

/// Sorted samples of N^{2/3}(lambda_1 - 2) from GUE draws at n_ref.
struct TW2Reference {
  std::size_t n_ref = 512;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::vector<double> samples;

  /// Disjoint pairs (T1, T2) via a seeded shuffle; returns sorted maxima
  /// and sorted minima, trials / 2 each.
  std::pair<std::vector<double>, std::vector<double>> paired_extrema() const {
    std::vector<double> v(samples);
    RngStream rng(seed, 0x70616972ULL);
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
      std::swap(v[i - 1], v[j]);
    }
    std::vector<double> mx, mn;
    for (std::size_t k = 0; k + 1 < v.size(); k += 2) {
      mx.push_back(std::max(v[k], v[k + 1]));
      mn.push_back(std::min(v[k], v[k + 1]));
    }
    std::sort(mx.begin(), mx.end());
    std::sort(mn.begin(), mn.end());
    return {std::move(mx), std::move(mn)};
  }
};

inline TW2Reference tw2_reference(std::size_t n_ref, std::size_t trials, std::uint64_t seed,
                                  std::size_t threads = 1) {
  require(n_ref >= 256, "tw2_reference needs n_ref >= 256");
  require(trials >= 2, "tw2_reference needs at least two trials");
  TW2Reference ref;
  ref.n_ref = n_ref;
  ref.trials = trials;
  ref.seed = seed;
  const double scale = std::pow(static_cast<double>(n_ref), 2.0 / 3.0);
  ref.samples = parallel_map(trials, threads, [&](std::size_t t) {
    RngStream rng = trial_stream(seed, t, n_ref, 0x747732ULL);
    const auto w = sample(EnsembleSpec::gue(n_ref), rng);
    const auto p = top_eigenpair(HermitianMatrix(w), process_tol, rng);
    return scale * (p.value - 2.0);
  });
  std::sort(ref.samples.begin(), ref.samples.end());
  return ref;
}

enum class EllipticSide { plus, minus };

inline EllipticSide parse_elliptic_side(std::string_view s) {
  if (s == "plus") return EllipticSide::plus;
  if (s == "minus") return EllipticSide::minus;
  throw ValidationError("elliptic side must be 'plus' or 'minus', got '" + std::string(s) + "'");
}

inline constexpr double elliptic_delta = 0.1;
inline constexpr double elliptic_delta_prime = 0.05;

/// Throws ValidationError explaining the violated bound when gamma is
/// outside [N^{-1/3+delta}, 1] (plus) or [N^{-1/3+delta}, 1 - delta'] (minus).
inline void check_elliptic_window(std::size_t n, double gamma, EllipticSide side) {
  const double lo = std::pow(static_cast<double>(n), -1.0 / 3.0 + elliptic_delta);
  const double hi = side == EllipticSide::plus ? 1.0 : 1.0 - elliptic_delta_prime;
  if (!(gamma >= lo && gamma <= hi))
    throw ValidationError("gamma = " + format_double(gamma) + " is outside the admissible window [" +
                          format_double(lo) + ", " + format_double(hi) + "] for the " +
                          (side == EllipticSide::plus ? "plus" : "minus") +
                          " statistic at n = " + std::to_string(n) +
                          (side == EllipticSide::minus && gamma > hi
                               ? " (the minus law degenerates as gamma -> 1)"
                               : ""));
}

struct EllipticFluctuation {
  std::vector<double> statistic;  // sorted
  double ks = 0.0;
  double centering = 0.0;
  ExperimentReport report;
};

/// sqrt(2) N^{2/3} / sqrt(1 +- gamma) (r_+-(A^gamma) - sqrt(2 (1 +- gamma))),
/// compared by KS with max{T1, T2} (plus) or min{T1, T2} (minus).
inline EllipticFluctuation elliptic_fluctuation(std::size_t n, double gamma, std::size_t trials,
                                                std::uint64_t seed, EllipticSide side,
                                                const TW2Reference& ref, std::size_t threads = 1,
                                                const SweepOptions& base = experiment_sweep()) {
  require(trials >= 500, "elliptic_fluctuation needs at least 500 trials");
  check_elliptic_window(n, gamma, side);
  const double sgn = side == EllipticSide::plus ? 1.0 : -1.0;
  const double centering = std::sqrt(2.0 * (1.0 + sgn * gamma));
  const double factor = std::numbers::sqrt2 * std::pow(static_cast<double>(n), 2.0 / 3.0) /
                        std::sqrt(1.0 + sgn * gamma);
  SweepOptions sweep = base;
  sweep.refine_plus = side == EllipticSide::plus;
  sweep.refine_minus = side == EllipticSide::minus;

  const auto recs = parallel_map(trials, threads, [&](std::size_t t) {
    RngStream rng = trial_stream(seed, t, n, 0x656C6CULL);
    const auto a = sample(EnsembleSpec::elliptic(n, gamma), rng);
    return range_boundary(a, sweep);
  });

  EllipticFluctuation out;
  out.centering = centering;
  auto& rep = out.report;
  rep.trial_header = {"trial", "radius", "statistic", "certified"};
  std::size_t uncertified = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const double r = side == EllipticSide::plus ? recs[t].r_plus() : recs[t].r_minus_value;
    const double s = factor * (r - centering);
    out.statistic.push_back(s);
    uncertified += !recs[t].certified;
    rep.trial_rows.push_back({double(t), r, s, recs[t].certified ? 1.0 : 0.0});
  }
  std::sort(out.statistic.begin(), out.statistic.end());
  const auto [mx, mn] = ref.paired_extrema();
  const auto& target = side == EllipticSide::plus ? mx : mn;
  out.ks = ks_distance(out.statistic, target);

  rep.config = json{{"experiment", "elliptic_fluctuation"},
                    {"n", n},
                    {"gamma", gamma},
                    {"side", side == EllipticSide::plus ? "plus" : "minus"},
                    {"trials", trials},
                    {"seed", seed},
                    {"tol", sweep.tol},
                    {"coarse_tol", sweep.coarse_tol},
                    {"reference", json{{"n_ref", ref.n_ref}, {"trials", ref.trials}, {"seed", ref.seed}}}};
  rep.summary = json{{"centering", centering},
                     {"statistic_mean", mean(out.statistic)},
                     {"statistic_se", standard_error(out.statistic)},
                     {"reference_mean", mean(target)},
                     {"ks", out.ks},
                     {"uncertified", uncertified}};
  return out;
}

struct FigureData {
  std::vector<cplx> eigenvalues;
  RangeBoundary boundary;
  std::vector<cplx> reference;  // closed reference curve
  std::size_t eigen_inside = 0;
  std::size_t eigen_not_inside = 0;
  bool membership_ok = false;  // every eigenvalue inside and |lambda| <= outer_r_plus
  double max_abs_re = 0.0, max_abs_im = 0.0;
  ExperimentReport report;
};

namespace detail {

inline std::string svg_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.5f", v);
  return buf;
}

// Scatter of eigenvalues, the boundary polygon through the witnesses and
// the reference curve, in one standalone SVG.
inline std::string figure_svg(const FigureData& f, std::string_view title) {
  double ext = 0.0;
  for (const auto& z : f.eigenvalues) ext = std::max({ext, std::abs(z.real()), std::abs(z.imag())});
  for (const auto& s : f.boundary.samples) ext = std::max({ext, std::abs(s.z.real()), std::abs(s.z.imag())});
  for (const auto& z : f.reference) ext = std::max({ext, std::abs(z.real()), std::abs(z.imag())});
  ext = ext * 1.1 + 1e-9;
  const double size = 600.0;
  auto px = [&](double x) { return svg_number((x + ext) / (2.0 * ext) * size); };
  auto py = [&](double y) { return svg_number((ext - y) / (2.0 * ext) * size); };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"630\" viewBox=\"0 0 600 630\">\n";
  s += "<rect width=\"600\" height=\"630\" fill=\"white\"/>\n";
  s += "<line x1=\"0\" y1=\"" + py(0) + "\" x2=\"600\" y2=\"" + py(0) + "\" stroke=\"#bbb\"/>\n";
  s += "<line x1=\"" + px(0) + "\" y1=\"0\" x2=\"" + px(0) + "\" y2=\"600\" stroke=\"#bbb\"/>\n";
  s += "<polygon fill=\"none\" stroke=\"#2a9d8f\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\" points=\"";
  for (const auto& z : f.reference) s += px(z.real()) + "," + py(z.imag()) + " ";
  s += "\"/>\n<polygon fill=\"#e9c46a\" fill-opacity=\"0.25\" stroke=\"#e76f51\" stroke-width=\"1.5\" points=\"";
  for (const auto& b : f.boundary.samples) s += px(b.z.real()) + "," + py(b.z.imag()) + " ";
  s += "\"/>\n<g fill=\"#264653\">\n";
  for (const auto& z : f.eigenvalues) s += "<circle cx=\"" + px(z.real()) + "\" cy=\"" + py(z.imag()) + "\" r=\"1.6\"/>\n";
  s += "</g>\n<text x=\"10\" y=\"622\" font-family=\"sans-serif\" font-size=\"13\">";
  s += std::string(title);
  s += "</text>\n</svg>\n";
  return s;
}

}  // namespace detail

/// One sampled matrix: spectrum, certified boundary and reference curve,
/// written as CSV and SVG into the report's extra files.
inline FigureData figure_data(const EnsembleSpec& spec, std::uint64_t seed,
                              const SweepOptions& sweep = experiment_sweep()) {
  spec.validate();
  require(spec.n <= 1024, "figure_data supports n <= 1024");
  RngStream rng = trial_stream(seed, 0, spec.n, 0x666967ULL);
  const auto a = sample(spec, rng);

  FigureData f;
  f.eigenvalues = eigvals_general(a);
  std::sort(f.eigenvalues.begin(), f.eigenvalues.end(), [](cplx x, cplx y) {
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  });
  f.boundary = range_boundary(a, sweep);

  const bool elliptic_like = spec.family == Family::elliptic || spec.family == Family::gue;
  const double gamma = spec.family == Family::elliptic ? *spec.gamma : 1.0;
  const double ax = elliptic_like ? std::sqrt(2.0 * (1.0 + gamma)) : std::numbers::sqrt2;
  const double ay = elliptic_like ? std::sqrt(2.0 * (1.0 - gamma)) : std::numbers::sqrt2;
  const std::size_t pts = 360;
  for (std::size_t k = 0; k < pts; ++k) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(pts);
    f.reference.emplace_back(ax * std::cos(t), ay * std::sin(t));
  }

  for (const auto& z : f.eigenvalues) {
    const bool inside = contains(f.boundary, z) == Membership::inside &&
                        std::abs(z) <= f.boundary.outer_r_plus + f.boundary.slack;
    inside ? ++f.eigen_inside : ++f.eigen_not_inside;
  }
  f.membership_ok = f.eigen_not_inside == 0;
  for (const auto& s : f.boundary.samples) {
    f.max_abs_re = std::max(f.max_abs_re, std::abs(s.z.real()));
    f.max_abs_im = std::max(f.max_abs_im, std::abs(s.z.imag()));
  }

  auto& rep = f.report;
  rep.config = json{{"experiment", "figure_data"},
                    {"ensemble", std::string(family_name(spec.family))},
                    {"n", spec.n},
                    {"seed", seed},
                    {"tol", sweep.tol},
                    {"coarse_tol", sweep.coarse_tol}};
  if (spec.gamma) rep.config["gamma"] = *spec.gamma;
  rep.summary = json{{"boundary", boundary_summary(f.boundary)},
                     {"eigenvalues_inside", f.eigen_inside},
                     {"eigenvalues_not_inside", f.eigen_not_inside},
                     {"membership_ok", f.membership_ok},
                     {"boundary_max_abs_re", f.max_abs_re},
                     {"boundary_max_abs_im", f.max_abs_im},
                     {"reference_semi_axes", json::array({ax, ay})}};
  double rho = 0.0;
  for (const auto& z : f.eigenvalues) rho = std::max(rho, std::abs(z));
  rep.summary["spectral_radius"] = rho;

  CsvWriter ev({"re", "im"});
  for (const auto& z : f.eigenvalues) ev.row({z.real(), z.imag()});
  CsvWriter rc({"re", "im"});
  for (const auto& z : f.reference) rc.row({z.real(), z.imag()});
  rep.extra_files["eigenvalues.csv"] = ev.str();
  rep.extra_files["boundary.csv"] = boundary_csv(f.boundary);
  rep.extra_files["reference.csv"] = rc.str();
  const std::string title = std::string(family_name(spec.family)) + " n=" + std::to_string(spec.n) +
                            (spec.gamma ? " gamma=" + detail::svg_number(*spec.gamma) : std::string()) +
                            " seed=" + std::to_string(seed);
  rep.extra_files["figure.svg"] = detail::figure_svg(f, title);
  return f;
}

}  // namespace fovlab
