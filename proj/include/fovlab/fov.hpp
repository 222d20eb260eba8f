#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "fovlab/eigen_general.hpp"
#include "fovlab/eigen_hermitian.hpp"
#include "fovlab/error.hpp"
#include "fovlab/lanczos.hpp"
#include "fovlab/matrix.hpp"
#include "fovlab/rng.hpp"

namespace fovlab {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// One support line Re(e^{i theta} w) <= h of R(B) and a point z of R(B)
/// on it. residual is the eigensolver residual of the vector behind z.
struct SupportSample {
  double theta = 0.0;
  double h = 0.0;
  cplx z = 0.0;
  double residual = 0.0;
};

inline double wrap_angle(double theta) {
  double t = std::fmod(theta, two_pi);
  if (t < 0.0) t += two_pi;
  if (t >= two_pi) t = 0.0;
  return t;
}

/// Dense support sample: top eigenpair of H(e^{i theta} B) by
/// tridiagonalization and inverse iteration, witness z = x* B x.
inline SupportSample support_sample(const ComplexMatrix& b, double theta) {
  require(std::isfinite(theta), "theta must be finite");
  const auto h = hermitian_part(b, theta);
  const auto p = top_eigenpair_dense(h, 3);
  return {wrap_angle(theta), p.value, rayleigh(b, p.vector), p.residual};
}

struct SweepOptions {
  double tol = 1e-6;
  double coarse_tol = 1e-2;
  std::size_t max_samples = 100000;
  bool refine_plus = true;   // drive outer_r_plus - inner_r_plus below tol
  bool refine_minus = true;  // drive the min_theta h bracket below tol
  std::size_t dense_cutoff = 48;  // below this n every sample is a dense solve

  void validate() const {
    require(std::isfinite(tol) && tol > 0.0, "tol must be positive");
    require(std::isfinite(coarse_tol) && coarse_tol > 0.0, "coarse tol must be positive");
    require(max_samples >= 64, "sample cap must allow the initial grid");
  }
};

/// Certified bounds after one refinement wave.
struct SweepWave {
  std::size_t samples = 0;
  double inner_r_plus = 0.0;
  double outer_r_plus = 0.0;
  double min_h_lower = 0.0;
  double min_h_upper = 0.0;
};

struct RangeBoundary {
  std::vector<SupportSample> samples;  // sorted by theta
  double inner_r_plus = 0.0;
  double outer_r_plus = 0.0;
  double min_h_lower = 0.0;  // certified bracket on min_theta h(theta)
  double min_h_upper = 0.0;
  double min_h = 0.0;
  double r_minus_value = 0.0;  // |min_h|
  double lipschitz_bound = 0.0;
  double tol = 0.0;
  double slack = 0.0;  // rounding allowance added to every support value
  bool certified = false;
  std::vector<SweepWave> waves;

  double gap() const noexcept { return outer_r_plus - inner_r_plus; }
  double r_plus() const noexcept { return 0.5 * (inner_r_plus + outer_r_plus); }
};

namespace detail {

inline double support_of(cplx z, double phi) {
  return z.real() * std::cos(phi) - z.imag() * std::sin(phi);
}

// Lift an angle into [a, a + 2 pi).
inline double lift(double phi, double a) {
  double t = std::fmod(phi - a, two_pi);
  if (t < 0.0) t += two_pi;
  return a + t;
}

// max over phi in [a, b] of the support function of the wedge cut out by
// the two support lines at a and b (b - a < pi).
inline double wedge_max(double a, double ha, double b, double hb) {
  const double s = std::sin(b - a);
  const double x = (ha * std::sin(b) - hb * std::sin(a)) / s;
  const double y = (ha * std::cos(b) - hb * std::cos(a)) / s;
  const cplx v(x, y);
  double m = std::max(ha, hb);
  const double peak = lift(-std::arg(v), a);
  if (peak <= b) m = std::max(m, std::abs(v));
  return m;
}

// min over phi in [a, b] of max(Re(e^{i phi} za), Re(e^{i phi} zb)).
inline double pair_floor(double a, cplx za, double b, cplx zb) {
  auto f = [&](double phi) { return std::max(support_of(za, phi), support_of(zb, phi)); };
  double m = std::min(f(a), f(b));
  auto consider = [&](double phi) {
    const double t = lift(phi, a);
    if (t <= b) m = std::min(m, f(t));
  };
  const cplx d = za - zb;
  if (d != 0.0) {
    consider(-std::arg(d) + 0.5 * std::numbers::pi);
    consider(-std::arg(d) - 0.5 * std::numbers::pi);
  }
  if (za != 0.0) consider(std::numbers::pi - std::arg(za));
  if (zb != 0.0) consider(std::numbers::pi - std::arg(zb));
  return m;
}

class SupportEvaluator {
 public:
  SupportEvaluator(const ComplexMatrix& b, const SweepOptions& opt)
      : b_(b), dense_(b.n() <= opt.dense_cutoff), fro_(b.frobenius_norm()) {
    abs_tol_ = std::max(0.05 * opt.tol, 1e-13 * std::max(fro_, 1.0));
    if (!dense_) {
      const auto bs = b.adjoint();
      std::vector<cplx> xe(b.n() * b.n()), ye(b.n() * b.n());
      const auto e = b.entries(), es = bs.entries();
      for (std::size_t k = 0; k < e.size(); ++k) {
        xe[k] = 0.5 * (e[k] + es[k]);
        ye[k] = cplx(0.0, 0.5) * (e[k] - es[k]);
      }
      x_ = DenseHermitianOperator(HermitianMatrix(b.n(), std::move(xe)));
      y_ = DenseHermitianOperator(HermitianMatrix(b.n(), std::move(ye)));
      split_ = SplitMatrix(b);
    }
  }

  bool dense() const noexcept { return dense_; }

  SupportSample operator()(double theta, std::span<const cplx> start, std::vector<cplx>& vec) {
    if (dense_) {
      vec.clear();
      return support_sample(b_, theta);
    }
    const DenseHermitianOperator op(x_, y_, std::cos(theta), std::sin(theta));
    LanczosOptions lo;
    lo.abs_tol = abs_tol_;
    lo.start_noise = 0.5;
    RngStream rng(0x7375707075ULL, std::bit_cast<std::uint64_t>(theta));
    auto res = lanczos_top(op, lo, rng, start);
    if (!res.converged) {
      const auto p = top_eigenpair_dense(op.to_matrix(), 3);
      vec = p.vector;
      return {theta, p.value, rayleigh(b_, vec), p.residual};
    }
    vec = std::move(res.pair.vector);
    return {theta, res.pair.value, split_.rayleigh(vec), res.pair.residual};
  }

 private:
  const ComplexMatrix& b_;
  bool dense_;
  double fro_;
  double abs_tol_ = 0.0;
  DenseHermitianOperator x_, y_;
  SplitMatrix split_;
};

}  // namespace detail

/// Adaptive support-function sweep with a certified sandwich on r_plus and
/// on min_theta h(theta).
///
/// Per arc between adjacent samples, max h is bounded above by the wedge of
/// the two support lines and by the Lipschitz bound ||B||op |dtheta|; min h
/// is bounded below by the two witnesses and by the same Lipschitz bound.
/// Children inherit their parent's bounds, so certificates are monotone.
inline RangeBoundary range_boundary(const ComplexMatrix& b, const SweepOptions& opt) {
  opt.validate();
  const std::size_t n = b.n();
  constexpr double eps = std::numeric_limits<double>::epsilon();

  RangeBoundary out;
  out.tol = opt.tol;
  out.lipschitz_bound = operator_norm_bounds(b).upper * (1.0 + 1e-12);
  const double lip = out.lipschitz_bound;
  out.slack = 16.0 * static_cast<double>(n) * eps * std::max(b.frobenius_norm(), 1e-300);

  detail::SupportEvaluator eval(b, opt);
  const std::size_t m0 = std::max<std::size_t>(
      64, static_cast<std::size_t>(std::ceil(two_pi * lip / opt.coarse_tol)));
  require(m0 <= opt.max_samples, "initial grid exceeds the sample cap");

  std::vector<SupportSample> s(m0);
  std::vector<std::vector<cplx>> vecs(m0);
  for (std::size_t k = 0; k < m0; ++k) {
    const double theta = two_pi * static_cast<double>(k) / static_cast<double>(m0);
    std::span<const cplx> start;
    if (k > 0 && !eval.dense()) start = vecs[k - 1];
    s[k] = eval(theta, start, vecs[k]);
  }

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> parent_up(m0, inf), parent_lo(m0, -inf);
  constexpr double min_width = 1e-11;

  while (true) {
    const std::size_t m = s.size();
    std::vector<double> lo(m), hi(m);
    double inner = 0.0, m_hi = inf;
    for (std::size_t k = 0; k < m; ++k) {
      lo[k] = detail::support_of(s[k].z, s[k].theta);
      hi[k] = std::max(s[k].h, lo[k]) + s[k].residual + out.slack;
      inner = std::max(inner, std::abs(s[k].z));
      m_hi = std::min(m_hi, hi[k]);
    }

    std::vector<double> up(m), floor(m), width(m);
    double outer = 0.0, m_lo = inf;
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t j = (k + 1) % m;
      const double a = s[k].theta;
      const double bb = j == 0 ? s[0].theta + two_pi : s[j].theta;
      const double w = bb - a;
      width[k] = w;
      double u = 0.5 * (hi[k] + hi[j] + lip * w);
      if (w < 0.5 * std::numbers::pi) u = std::min(u, detail::wedge_max(a, hi[k], bb, hi[j]));
      u = std::min(u, parent_up[k]);
      u = std::max(u, std::max(hi[k], hi[j]));
      double f = std::max(detail::pair_floor(a, s[k].z, bb, s[j].z),
                          0.5 * (lo[k] + lo[j] - lip * w)) - out.slack;
      f = std::max(f, parent_lo[k]);
      f = std::min(f, std::min(lo[k], lo[j]));
      up[k] = u;
      floor[k] = f;
      outer = std::max(outer, u);
      m_lo = std::min(m_lo, f);
    }
    // Keep each certificate monotone across waves.
    if (!out.waves.empty()) {
      const auto& prev = out.waves.back();
      outer = std::min(outer, prev.outer_r_plus);
      m_lo = std::max(m_lo, prev.min_h_lower);
    }
    inner = std::min(inner, outer);
    m_lo = std::min(m_lo, m_hi);
    out.waves.push_back({m, inner, outer, m_lo, m_hi});

    const bool plus_ok = !opt.refine_plus || outer - inner <= opt.tol;
    const bool minus_ok = !opt.refine_minus || m_hi - m_lo <= opt.tol;
    out.inner_r_plus = inner;
    out.outer_r_plus = outer;
    out.min_h_lower = m_lo;
    out.min_h_upper = m_hi;
    if (plus_ok && minus_ok) {
      out.certified = true;
      break;
    }
    if (m >= opt.max_samples) break;

    struct Candidate {
      double priority;
      std::size_t arc;
    };
    std::vector<Candidate> cand;
    for (std::size_t k = 0; k < m; ++k) {
      if (width[k] < min_width) continue;
      double g = 0.0;
      if (opt.refine_plus && up[k] - inner > opt.tol) g = std::max(g, up[k] - inner);
      if (opt.refine_minus && floor[k] < m_hi - opt.tol) g = std::max(g, m_hi - floor[k]);
      if (g > 0.0) cand.push_back({g, k});
    }
    if (cand.empty()) break;
    std::sort(cand.begin(), cand.end(), [&](const Candidate& x, const Candidate& y) {
      if (x.priority != y.priority) return x.priority > y.priority;
      return s[x.arc].theta < s[y.arc].theta;
    });
    cand.resize(std::min(cand.size(), opt.max_samples - m));

    std::vector<char> split(m, 0);
    for (const auto& c : cand) split[c.arc] = 1;

    std::vector<SupportSample> ns;
    std::vector<std::vector<cplx>> nv;
    std::vector<double> npu, npl;
    ns.reserve(m + cand.size());
    for (std::size_t k = 0; k < m; ++k) {
      ns.push_back(s[k]);
      nv.push_back(std::move(vecs[k]));
      npu.push_back(up[k]);
      npl.push_back(floor[k]);
      if (!split[k]) continue;
      const double mid = wrap_angle(s[k].theta + 0.5 * width[k]);
      std::vector<cplx> v;
      ns.push_back(eval(mid, nv.back(), v));
      nv.push_back(std::move(v));
      npu.push_back(up[k]);
      npl.push_back(floor[k]);
    }
    // A midpoint of the wrap-around arc lands before the first sample.
    std::vector<std::size_t> order(ns.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return ns[x].theta < ns[y].theta; });
    s.clear();
    vecs.clear();
    parent_up.clear();
    parent_lo.clear();
    for (std::size_t k = 0; k < order.size(); ++k) {
      const std::size_t o = order[k];
      s.push_back(ns[o]);
      vecs.push_back(std::move(nv[o]));
      parent_up.push_back(npu[o]);
      parent_lo.push_back(npl[o]);
    }
  }

  out.samples = std::move(s);
  out.min_h = 0.5 * (out.min_h_lower + out.min_h_upper);
  out.r_minus_value = std::abs(out.min_h);
  return out;
}

inline RangeBoundary range_boundary(const ComplexMatrix& b, double tol) {
  SweepOptions opt;
  opt.tol = tol;
  return range_boundary(b, opt);
}

struct RadiusCertificate {
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool certified = false;
};

/// r_plus(B) = max_theta lambda_1(H(e^{i theta} B)).
inline RadiusCertificate numerical_radius(const ComplexMatrix& b, double tol) {
  SweepOptions opt;
  opt.tol = tol;
  opt.refine_minus = false;
  const auto rb = range_boundary(b, opt);
  return {rb.r_plus(), rb.inner_r_plus, rb.outer_r_plus, rb.certified};
}

/// Certified bracket on m = min_theta lambda_1(H(e^{i theta} B)) and r_minus = |m|.
struct InnerRadius {
  double min_h = 0.0;
  double min_h_lower = 0.0;
  double min_h_upper = 0.0;
  double value = 0.0;  // |min_h|
  double lower = 0.0;  // bracket on |m|
  double upper = 0.0;
  bool certified = false;
};

inline InnerRadius inner_radius_from(const RangeBoundary& rb) {
  InnerRadius r;
  r.min_h = rb.min_h;
  r.min_h_lower = rb.min_h_lower;
  r.min_h_upper = rb.min_h_upper;
  r.value = rb.r_minus_value;
  if (rb.min_h_lower >= 0.0) {
    r.lower = rb.min_h_lower;
    r.upper = rb.min_h_upper;
  } else if (rb.min_h_upper <= 0.0) {
    r.lower = -rb.min_h_upper;
    r.upper = -rb.min_h_lower;
  } else {
    r.lower = 0.0;
    r.upper = std::max(-rb.min_h_lower, rb.min_h_upper);
  }
  r.certified = rb.certified;
  return r;
}

inline InnerRadius inner_numerical_radius_certificate(const ComplexMatrix& b, double tol) {
  SweepOptions opt;
  opt.tol = tol;
  opt.refine_plus = false;
  return inner_radius_from(range_boundary(b, opt));
}

inline double inner_numerical_radius(const ComplexMatrix& b, double tol) {
  return inner_numerical_radius_certificate(b, tol).value;
}

enum class Membership { inside, outside, uncertain };

inline const char* membership_name(Membership m) {
  switch (m) {
    case Membership::inside: return "inside";
    case Membership::outside: return "outside";
    case Membership::uncertain: return "uncertain";
  }
  return "uncertain";
}

namespace detail {

inline double cross(cplx o, cplx a, cplx b) {
  return (a.real() - o.real()) * (b.imag() - o.imag()) - (a.imag() - o.imag()) * (b.real() - o.real());
}

// Convex hull by monotone chain, counter-clockwise, collinear points dropped.
inline std::vector<cplx> convex_hull(std::vector<cplx> p) {
  std::sort(p.begin(), p.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  p.erase(std::unique(p.begin(), p.end()), p.end());
  if (p.size() < 3) return p;
  std::vector<cplx> h(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p[i]) <= 0.0) --k;
    h[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 2], h[k - 1], p[i]) <= 0.0) --k;
    h[k++] = p[i];
  }
  h.resize(k - 1);
  return h;
}

inline double segment_distance(cplx z, cplx a, cplx b) {
  const cplx d = b - a;
  const double len2 = std::norm(d);
  if (len2 == 0.0) return std::abs(z - a);
  const double t = std::clamp(((z - a) * std::conj(d)).real() / len2, 0.0, 1.0);
  return std::abs(z - (a + t * d));
}

inline double hull_distance(std::span<const cplx> hull, cplx z) {
  if (hull.empty()) return std::numeric_limits<double>::infinity();
  if (hull.size() == 1) return std::abs(z - hull[0]);
  if (hull.size() == 2) return segment_distance(z, hull[0], hull[1]);
  bool in = true;
  for (std::size_t i = 0; i < hull.size(); ++i)
    if (cross(hull[i], hull[(i + 1) % hull.size()], z) < 0.0) {
      in = false;
      break;
    }
  if (in) return 0.0;
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < hull.size(); ++i)
    d = std::min(d, segment_distance(z, hull[i], hull[(i + 1) % hull.size()]));
  return d;
}

}  // namespace detail

/// Inside: z lies in the convex hull of the witnesses (each witness is a
/// point of R(B)), up to rounding. Outside: z violates some support line by
/// more than twice its eigensolver residual. Otherwise uncertain.
inline Membership contains(const RangeBoundary& boundary, cplx z) {
  double max_res = 0.0, scale = 1.0;
  std::vector<cplx> pts;
  pts.reserve(boundary.samples.size());
  for (const auto& s : boundary.samples) {
    pts.push_back(s.z);
    max_res = std::max(max_res, s.residual);
    scale = std::max(scale, std::abs(s.z));
  }
  for (const auto& s : boundary.samples) {
    const double margin = 2.0 * s.residual + boundary.slack + 64.0 * std::numeric_limits<double>::epsilon() * scale;
    if (detail::support_of(z, s.theta) > std::max(s.h, detail::support_of(s.z, s.theta)) + margin)
      return Membership::outside;
  }
  const auto hull = detail::convex_hull(std::move(pts));
  const double tiny = 2.0 * max_res + boundary.slack +
                      64.0 * std::numeric_limits<double>::epsilon() * std::max(scale, std::abs(z));
  if (detail::hull_distance(hull, z) <= tiny) return Membership::inside;
  return Membership::uncertain;
}

}  // namespace fovlab
