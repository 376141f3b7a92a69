#pragma once
// Shared numerical kernel: the complementary error function, the Gauss
// hypergeometric function for the parameter families used by the transform
// calculus, and a deterministic adaptive Gauss-Kronrod integrator with
// helpers for square-root endpoint singularities and Fourier integrals of
// rapidly decaying even/odd spectra.
//
// Everything here is pure: no globals, no hidden caches, safe to call from
// any thread.  Adaptive subdivision follows a fixed worst-interval-first
// rule, so results are bit-stable run to run.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hypersieve {

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kSqrtPi = 1.77245385090551602729816748334114518;

// Tolerances and truncation controls shared by every quadrature-backed
// operation.  abs_tol/rel_tol bound the reported integration error,
// max_subdivisions caps the interval count, and tail_cutoff is the relative
// level (against the running maximum of |integrand|) below which decaying
// tails are truncated.
struct QuadratureConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_subdivisions = 4000;
  double tail_cutoff = 1e-16;

  void validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol >= 0.0))
      throw std::invalid_argument("QuadratureConfig: tolerances must be positive");
    if (max_subdivisions < 1)
      throw std::invalid_argument("QuadratureConfig: max_subdivisions must be >= 1");
    if (!(tail_cutoff > 0.0) || !(tail_cutoff < 1.0))
      throw std::invalid_argument("QuadratureConfig: tail_cutoff must be in (0,1)");
  }

  // Convenience for sub-integrals that need a tighter budget than the caller.
  QuadratureConfig scaled(double factor) const {
    QuadratureConfig c = *this;
    c.abs_tol *= factor;
    c.rel_tol *= factor;
    return c;
  }
};

// Closed interval [lo, hi]; hi may be +infinity for decaying integrands.
struct RealInterval {
  double lo = 0.0;
  double hi = 0.0;

  RealInterval() = default;
  RealInterval(double a, double b) : lo(a), hi(b) {
    if (std::isnan(lo) || std::isnan(hi) || !(lo <= hi) || !std::isfinite(lo))
      throw std::invalid_argument("RealInterval: need finite lo <= hi");
  }
  bool unbounded() const { return std::isinf(hi); }
  static RealInterval half_line(double lo) {
    return RealInterval(lo, std::numeric_limits<double>::infinity());
  }
};

// Raised when adaptive refinement exhausts its interval budget (or a tail
// never drops below the cutoff).  Carries the best estimate so callers can
// report partial results.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& msg, double best_estimate, double error_bound)
      : std::runtime_error(msg), best_(best_estimate), err_(error_bound) {}
  double best_estimate() const { return best_; }
  double error_bound() const { return err_; }

 private:
  double best_;
  double err_;
};

// Raised when a series (hypergeometric, continued fraction) fails to
// converge within its iteration cap.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Complementary error function, |error| <= 1e-12 absolute.  Maclaurin series
// with positive terms below |x| = 3, Legendre continued fraction beyond; the
// two branches agree to ~1e-15 in the overlap.  Satisfies erfc(x) <= e^{-x^2}
// for x >= 0 and erfc(x) + erfc(-x) = 2.
double erfc(double x);

// Gauss hypergeometric function 2F1(a, b; c; z) for real c (not a
// non-positive integer) and real z < 1.  For z < 0 the series is applied
// after the Pfaff transformation
//   2F1(a,b;c;z) = (1-z)^{-a} 2F1(a, c-b; c; z/(z-1)),
// which maps z in (-inf,0) to (0,1) where the series converges.  The
// conjugate-parameter family F(a, conj a; 2 Re a; z) -- the pairing kernels
// -- is additionally routed through the expansion at z = -infinity (or, near
// the degenerate Im a = 0 corner, a real Euler integral) once z drops below
// a fixed depth, so those kernels evaluate stably for arbitrarily negative z.
// Throws DivergenceError if a series does not settle within the iteration
// cap (only possible as z -> 1^-); throws std::domain_error outside the
// domain.
std::complex<double> hyp2f1(std::complex<double> a, std::complex<double> b, double c,
                            double z);
double hyp2f1(double a, double b, double c, double z);

enum class Parity { even, odd, none };

namespace detail {

struct PanelResult {
  double value = 0.0;
  double error = 0.0;
};

// One 15-point Gauss-Kronrod panel on [a,b] with the embedded 7-point Gauss
// estimate supplying the error.  Node/weight table is the standard (G7,K15)
// pair; endpoints are never evaluated.
template <class F>
PanelResult gk15(F& f, double a, double b) {
  static constexpr double xgk[8] = {
      0.991455371120812639206854697526329,
      0.949107912342758524526189684047851,
      0.864864423359769072789712788640926,
      0.741531185599394439863864773280788,
      0.586087235467691130294144838258730,
      0.405845151377397166906606412076961,
      0.207784955007898467600689403773245,
      0.000000000000000000000000000000000};
  static constexpr double wgk[8] = {
      0.022935322010529224963732008058970,
      0.063092092629978553290700663189204,
      0.104790010322250183839876322541518,
      0.140653259715525918745189590510238,
      0.169004726639267902826583426598550,
      0.190350578064785409913256402421014,
      0.204432940075298892414161999234649,
      0.209482141084727828012999174891714};
  static constexpr double wg[4] = {
      0.129484966168869693270611432679082,
      0.279705391489276667901467771423780,
      0.381830050505118944950369775488975,
      0.417959183673469387755102040816327};

  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  const double fc = f(mid);
  double resk = wgk[7] * fc;
  double resg = wg[3] * fc;
  double resabs = wgk[7] * std::fabs(fc);
  double fv1[7];
  double fv2[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * xgk[j];
    fv1[j] = f(mid - dx);
    fv2[j] = f(mid + dx);
    const double fsum = fv1[j] + fv2[j];
    resk += wgk[j] * fsum;
    resabs += wgk[j] * (std::fabs(fv1[j]) + std::fabs(fv2[j]));
    if (j == 1) resg += wg[0] * fsum;
    if (j == 3) resg += wg[1] * fsum;
    if (j == 5) resg += wg[2] * fsum;
  }
  const double reskh = resk * 0.5;
  double resasc = wgk[7] * std::fabs(fc - reskh);
  for (int j = 0; j < 7; ++j)
    resasc += wgk[j] * (std::fabs(fv1[j] - reskh) + std::fabs(fv2[j] - reskh));

  PanelResult out;
  out.value = resk * half;
  resabs *= std::fabs(half);
  resasc *= std::fabs(half);
  double err = std::fabs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0)
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  const double eps = std::numeric_limits<double>::epsilon();
  err = std::max(err, 50.0 * eps * resabs);
  out.error = err;
  return out;
}

struct Segment {
  double a, b, value, error;
};

// Global adaptive driver: bisect the worst-error segment until the summed
// error estimate meets max(abs_tol, rel_tol*|result|).  Ties pick the
// earliest segment, so the refinement path is deterministic.
template <class F>
double adaptive(F& f, double a, double b, const QuadratureConfig& cfg,
                std::span<const double> breakpoints) {
  cfg.validate();
  if (a == b) return 0.0;

  std::vector<double> edges;
  edges.push_back(a);
  for (double bp : breakpoints)
    if (bp > a && bp < b) edges.push_back(bp);
  edges.push_back(b);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  std::vector<Segment> segs;
  segs.reserve(edges.size() + 16);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    PanelResult p = gk15(f, edges[i], edges[i + 1]);
    segs.push_back({edges[i], edges[i + 1], p.value, p.error});
  }

  for (;;) {
    double total = 0.0;
    double err = 0.0;
    for (const Segment& s : segs) {
      total += s.value;
      err += s.error;
    }
    const double tol = std::max(cfg.abs_tol, cfg.rel_tol * std::fabs(total));
    if (err <= tol) return total;
    if (static_cast<int>(segs.size()) >= cfg.max_subdivisions)
      throw QuadratureError("adaptive quadrature did not converge", total, err);

    std::size_t worst = 0;
    for (std::size_t i = 1; i < segs.size(); ++i)
      if (segs[i].error > segs[worst].error) worst = i;

    const Segment s = segs[worst];
    const double m = 0.5 * (s.a + s.b);
    if (!(m > s.a && m < s.b))
      throw QuadratureError("adaptive quadrature hit an unresolvable feature", total, err);
    PanelResult left = gk15(f, s.a, m);
    PanelResult right = gk15(f, m, s.b);
    segs[worst] = {s.a, m, left.value, left.error};
    segs.push_back({m, s.b, right.value, right.error});
  }
}

// Scan a decaying |f| forward from `start` and return the point past which
// |f| stays below tail_cutoff times the running maximum.  Geometric step so
// slowly decaying tails are still reached quickly.
template <class F>
double tail_truncation_point(F& f, double start, const QuadratureConfig& cfg) {
  double step = 0.5;
  double x = start;
  double peak = 0.0;
  int quiet = 0;
  for (int iter = 0; iter < 400; ++iter) {
    x += step;
    step *= 1.25;
    const double ax = std::fabs(f(x));
    if (ax > peak) peak = ax;
    if (peak > 0.0 && ax <= cfg.tail_cutoff * peak) {
      if (++quiet >= 4) return x;
    } else {
      quiet = 0;
    }
  }
  throw QuadratureError("integrand tail never dropped below the cutoff", 0.0, 0.0);
}

inline std::vector<double> oscillation_breakpoints(double rho, double lo, double hi) {
  std::vector<double> bps;
  const double arho = std::fabs(rho);
  if (arho < 1e-12) return bps;
  const double period = kPi / arho;
  const double count = (hi - lo) / period;
  if (count > 16384.0)
    throw std::invalid_argument("fourier_integral: oscillation too fast for range");
  for (double x = std::ceil(lo / period) * period; x < hi; x += period)
    if (x > lo) bps.push_back(x);
  return bps;
}

}  // namespace detail

// Adaptive integral of f over iv.  Optional breakpoints seed the initial
// subdivision (peaks, oscillation nodes).  An unbounded interval is truncated
// where the tail drops below tail_cutoff relative to the running peak; the
// integrand must decay.  Error estimate <= max(abs_tol, rel_tol*|result|);
// throws QuadratureError (with best estimate) otherwise.
template <class F>
double quad(F&& f, RealInterval iv, const QuadratureConfig& cfg,
            std::span<const double> breakpoints = {}) {
  auto& fn = f;
  if (iv.unbounded()) {
    const double cut = detail::tail_truncation_point(fn, iv.lo, cfg);
    return detail::adaptive(fn, iv.lo, cut, cfg, breakpoints);
  }
  return detail::adaptive(fn, iv.lo, iv.hi, cfg, breakpoints);
}

// Integral of g(x)/sqrt(x-a) over [a, hi] (hi may be +inf), computed on the
// substitution x = a + s^2 which removes the endpoint singularity exactly:
//   int_a^hi g(x)/sqrt(x-a) dx = 2 int_0^{sqrt(hi-a)} g(a+s^2) ds.
template <class F>
double quad_sqrt_singular(F&& g, double a, double hi, const QuadratureConfig& cfg) {
  if (!(hi > a)) {
    if (hi == a) return 0.0;
    throw std::invalid_argument("quad_sqrt_singular: need hi >= a");
  }
  auto sub = [&g, a](double s) { return g(a + s * s); };
  if (std::isinf(hi)) return 2.0 * quad(sub, RealInterval::half_line(0.0), cfg);
  return 2.0 * quad(sub, RealInterval(0.0, std::sqrt(hi - a)), cfg);
}

// Fourier integral  int e^{i rho t} g(t) dt  over the real line, truncated
// where |g| falls below tail_cutoff relative to its peak (or at the caller's
// t_max).  Declared even/odd symmetry is exploited: an even g yields a purely
// real result via a half-line cosine transform, an odd g a purely imaginary
// one via the sine transform.
template <class G>
std::complex<double> fourier_integral(G&& g, double rho, const QuadratureConfig& cfg,
                                      Parity parity = Parity::none, double t_max = 0.0) {
  auto& gn = g;
  if (t_max <= 0.0) {
    if (parity == Parity::none) {
      auto both = [&gn](double t) { return std::max(std::fabs(gn(t)), std::fabs(gn(-t))); };
      t_max = detail::tail_truncation_point(both, 0.0, cfg);
    } else {
      t_max = detail::tail_truncation_point(gn, 0.0, cfg);
    }
  }
  const std::vector<double> bps = detail::oscillation_breakpoints(rho, 0.0, t_max);
  switch (parity) {
    case Parity::even: {
      auto fe = [&gn, rho](double t) { return gn(t) * std::cos(rho * t); };
      return {2.0 * detail::adaptive(fe, 0.0, t_max, cfg, bps), 0.0};
    }
    case Parity::odd: {
      auto fo = [&gn, rho](double t) { return gn(t) * std::sin(rho * t); };
      return {0.0, 2.0 * detail::adaptive(fo, 0.0, t_max, cfg, bps)};
    }
    case Parity::none:
    default: {
      std::vector<double> full = detail::oscillation_breakpoints(rho, -t_max, t_max);
      auto fr = [&gn, rho](double t) { return gn(t) * std::cos(rho * t); };
      auto fi = [&gn, rho](double t) { return gn(t) * std::sin(rho * t); };
      const double re = detail::adaptive(fr, -t_max, t_max, cfg, full);
      const double im = detail::adaptive(fi, -t_max, t_max, cfg, full);
      return {re, im};
    }
  }
}

}  // namespace hypersieve
