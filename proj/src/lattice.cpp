#include "hypersieve/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <set>

#include "hypersieve/cached_function.hpp"
#include "hypersieve/window.hpp"

namespace hypersieve::lattice {

namespace {

using transforms::KernelFunction;
using transforms::RadialTestFunction;

std::int64_t checked_int64(__int128 v) {
  if (v > std::numeric_limits<std::int64_t>::max() ||
      v < std::numeric_limits<std::int64_t>::min())
    throw std::overflow_error("GroupElement: entry overflow");
  return static_cast<std::int64_t>(v);
}

std::int64_t max_abs_entry(const GroupElement& g) {
  return std::max({std::llabs(g.a), std::llabs(g.b), std::llabs(g.c),
                   std::llabs(g.d)});
}

// Floor/ceil integer division for positive divisors.
std::int64_t floor_div(std::int64_t p, std::int64_t q) {
  return (p >= 0) ? p / q : -((-p + q - 1) / q);
}
std::int64_t ceil_div(std::int64_t p, std::int64_t q) {
  return -floor_div(-p, q);
}

struct ExtGcd {
  std::int64_t g, x, y;  // x*m + y*n == g
};

ExtGcd ext_gcd(std::int64_t m, std::int64_t n) {
  std::int64_t r0 = m, r1 = n;
  std::int64_t x0 = 1, x1 = 0;
  std::int64_t y0 = 0, y1 = 1;
  while (r1 != 0) {
    const std::int64_t q = r0 / r1;
    std::int64_t t = r0 - q * r1;
    r0 = r1;
    r1 = t;
    t = x0 - q * x1;
    x0 = x1;
    x1 = t;
    t = y0 - q * y1;
    y0 = y1;
    y1 = t;
  }
  if (r0 < 0) return {-r0, -x0, -y0};
  return {r0, x0, y0};
}

// Visit every element of PSL(2,Z) with |entries| <= bound exactly once.  The
// sign ambiguity is fixed on the bottom row: c > 0, or c == 0 and d > 0.
// For each coprime bottom row (c, d) the top rows are a = a0 + k c,
// b = b0 + k d with (a0, b0) one solution of a d - b c = 1.
template <class Fn>
void for_each_element(std::int64_t bound, Fn&& fn) {
  if (bound < 1)
    throw std::invalid_argument("lattice: entry bound must be >= 1");
  for (std::int64_t c = 0; c <= bound; ++c) {
    for (std::int64_t d = -bound; d <= bound; ++d) {
      if (c == 0 && d <= 0) continue;
      if (std::gcd(c, d) != 1) continue;
      const ExtGcd e = ext_gcd(d, -c);
      const std::int64_t a0 = e.x;
      const std::int64_t b0 = e.y;
      std::int64_t klo = std::numeric_limits<std::int64_t>::min() / 4;
      std::int64_t khi = std::numeric_limits<std::int64_t>::max() / 4;
      bool empty = false;
      auto restrict_to = [&](std::int64_t base, std::int64_t coef) {
        if (coef == 0) {
          if (base > bound || base < -bound) empty = true;
          return;
        }
        if (coef < 0) {
          base = -base;
          coef = -coef;
        }
        klo = std::max(klo, ceil_div(-bound - base, coef));
        khi = std::min(khi, floor_div(bound - base, coef));
      };
      restrict_to(a0, c);
      restrict_to(b0, d);
      if (empty) continue;
      for (std::int64_t k = klo; k <= khi; ++k)
        fn(GroupElement{a0 + k * c, b0 + k * d, c, d});
    }
  }
}

Mat2 inv_det1(const Mat2& m) { return {m.m11, -m.m01, -m.m10, m.m00}; }

// Power of the frame generator that moves the u-translate of the conjugated
// image of the base point i into [0, length).  Values within 1e-9 of a coset
// boundary are snapped to the nearest multiple so every member of a coset
// picks the same representative.
int reduce_power(const GeodesicFrame& frame, const GroupElement& g) {
  const Mat2 gt = frame.conj(g);
  const std::complex<double> w = gt.apply({0.0, 1.0});
  const double u = std::log(std::abs(w));
  const double q = u / frame.length;
  const double qi = std::nearbyint(q);
  const double kf = (std::fabs(q - qi) < 1e-9) ? -qi : -std::floor(q);
  if (!(std::fabs(kf) <= 60.0))
    throw std::runtime_error("lattice: coset reduction power out of range");
  return static_cast<int>(kf);
}

GroupElement coset_reduce(const GeodesicFrame& frame, const GroupElement& g) {
  return (power(frame.generator, reduce_power(frame, g)) * g).normalized();
}

// Census of double cosets with |B| <= b_bound among |entries| <= bound,
// keyed by the canonical representative.
std::map<GroupElement, DoubleCosetRep> census_once(const GeodesicFrame& frame,
                                                   double b_bound,
                                                   std::int64_t bound) {
  std::map<GroupElement, DoubleCosetRep> census;
  const GroupElement identity{};
  const double gate = b_bound * (1.0 + 1e-9) + 1e-9;
  for_each_element(bound, [&](const GroupElement& g) {
    const double b_raw = b_invariant(g, frame);
    if (std::fabs(b_raw) > gate) return;
    // Generator powers carry B = 1 exactly; recognize them with an exact
    // integer test before the floating-point canonicalization.
    if (std::fabs(b_raw - 1.0) < 1e-6 && coset_reduce(frame, g) == identity)
      return;
    const GroupElement rep = canonical_double_coset_rep(g, frame);
    if (rep == identity) return;
    if (census.count(rep)) return;
    const double B = b_invariant(rep, frame);
    if (std::fabs(B) > b_bound) return;
    census.emplace(rep, DoubleCosetRep{rep, B, max_abs_entry(rep)});
  });
  return census;
}

std::vector<DoubleCosetRep> sorted_census(
    const std::map<GroupElement, DoubleCosetRep>& census) {
  std::vector<DoubleCosetRep> out;
  out.reserve(census.size());
  for (const auto& [key, rep] : census) out.push_back(rep);
  std::sort(out.begin(), out.end(),
            [](const DoubleCosetRep& l, const DoubleCosetRep& r) {
              const double fl = std::fabs(l.B), fr = std::fabs(r.B);
              if (fl != fr) return fl < fr;
              return l.element < r.element;
            });
  return out;
}

// Weight of the g1 pairing with its evaluations cached: the raw weight
// calls f' which may itself be a quadrature, so summing it over a census
// without a cache would repeat that work thousands of times.
RadialTestFunction cached_g1_weight(const RadialTestFunction& f,
                                    const QuadratureConfig& cfg) {
  RadialTestFunction w = g1_weight(f);
  const double scale = std::max(w.decay().scale, 1e-300);
  const double p_hi = std::max(w.cutoff_p(1e-13 * scale), 1.0 + 1e-6);
  double sample = 0.0;
  for (double p : {1.0, 1.0 + 1e-3, 1.1, 2.0, 0.5 * (1.0 + p_hi), p_hi})
    sample = std::max(sample, std::fabs(w(std::min(p, p_hi))));
  const double tol =
      std::max(10.0 * cfg.abs_tol, 1e-9 * std::max(sample, 1e-300));
  auto cache = std::make_shared<CachedFunction>(
      [w](double p) { return w(p); }, 1.0, p_hi, tol,
      CachedFunction::Outside::zero);
  auto eval = [cache](double p) { return (*cache)(p); };
  auto deriv = [cache](double p) {
    return transforms::detail::fd5([&](double q) { return (*cache)(q); }, p);
  };
  return RadialTestFunction(eval, deriv, w.decay(), p_hi);
}

}  // namespace

// ---------------------------------------------------------------------------
// Group elements
// ---------------------------------------------------------------------------

void GroupElement::validate() const {
  const __int128 det =
      static_cast<__int128>(a) * d - static_cast<__int128>(b) * c;
  if (det != 1)
    throw std::invalid_argument("GroupElement: determinant must be 1");
}

GroupElement GroupElement::normalized() const {
  if (a < 0 || (a == 0 && b < 0)) return {-a, -b, -c, -d};
  return *this;
}

std::complex<double> GroupElement::apply(std::complex<double> z) const {
  const std::complex<double> num =
      static_cast<double>(a) * z + static_cast<double>(b);
  const std::complex<double> den =
      static_cast<double>(c) * z + static_cast<double>(d);
  return num / den;
}

GroupElement operator*(const GroupElement& l, const GroupElement& r) {
  auto dot = [](std::int64_t u, std::int64_t v, std::int64_t w,
                std::int64_t s) {
    return checked_int64(static_cast<__int128>(u) * v +
                         static_cast<__int128>(w) * s);
  };
  return {dot(l.a, r.a, l.b, r.c), dot(l.a, r.b, l.b, r.d),
          dot(l.c, r.a, l.d, r.c), dot(l.c, r.b, l.d, r.d)};
}

bool operator<(const GroupElement& l, const GroupElement& r) {
  if (l.a != r.a) return l.a < r.a;
  if (l.b != r.b) return l.b < r.b;
  if (l.c != r.c) return l.c < r.c;
  return l.d < r.d;
}

GroupElement power(const GroupElement& g, int n) {
  if (std::abs(n) > 64)
    throw std::domain_error("power: exponent out of range");
  const GroupElement base = (n >= 0) ? g : g.inverse();
  GroupElement out{};
  for (int i = std::abs(n); i > 0; --i) out = out * base;
  return out;
}

// ---------------------------------------------------------------------------
// Frames
// ---------------------------------------------------------------------------

std::complex<double> Mat2::apply(std::complex<double> z) const {
  return (m00 * z + m01) / (m10 * z + m11);
}

Mat2 operator*(const Mat2& l, const Mat2& r) {
  return {l.m00 * r.m00 + l.m01 * r.m10, l.m00 * r.m01 + l.m01 * r.m11,
          l.m10 * r.m00 + l.m11 * r.m10, l.m10 * r.m01 + l.m11 * r.m11};
}

Mat2 to_real(const GroupElement& g) {
  return {static_cast<double>(g.a), static_cast<double>(g.b),
          static_cast<double>(g.c), static_cast<double>(g.d)};
}

HuberPoint huber_coords(std::complex<double> z) {
  if (!(z.imag() > 0.0))
    throw std::domain_error("huber_coords: point must lie in the upper half plane");
  return {std::log(std::abs(z)), std::atan2(-z.real(), z.imag())};
}

FrameScales frame_scales(double trace) {
  const double t = std::fabs(trace);
  if (!(t > 2.0))
    throw std::domain_error("frame_scales: |trace| must exceed 2");
  const double mu = 0.5 * (t + std::sqrt(t * t - 4.0));
  return {mu, mu * mu, 2.0 * std::log(mu)};
}

Mat2 GeodesicFrame::conj(const GroupElement& g) const {
  return conjugator * to_real(g) * inv_det1(conjugator);
}

std::complex<double> GeodesicFrame::conj_point(std::complex<double> z) const {
  return conjugator.apply(z);
}

GeodesicFrame build_frame(const GroupElement& generator) {
  generator.validate();
  GroupElement g = generator;
  if (g.a + g.d < 0) g = {-g.a, -g.b, -g.c, -g.d};
  if (!(g.a + g.d > 2))
    throw std::domain_error("build_frame: generator must be hyperbolic (|trace| > 2)");
  const FrameScales sc = frame_scales(static_cast<double>(g.a + g.d));

  // Columns of conjugator^{-1}: the eigenvector of mu first, so the
  // attracting fixed point lands at infinity and the conjugated generator is
  // diag(mu, 1/mu).  The better-conditioned of the two eigenvector formulas
  // is chosen row-wise; hyperbolicity keeps the eigenvalues well separated.
  const double a = static_cast<double>(g.a), b = static_cast<double>(g.b);
  const double c = static_cast<double>(g.c), d = static_cast<double>(g.d);
  double v1x, v1y, v2x, v2y;
  if (std::fabs(c) >= std::fabs(b)) {
    v1x = sc.mu - d;
    v1y = c;
    v2x = 1.0 / sc.mu - d;
    v2y = c;
  } else {
    v1x = b;
    v1y = sc.mu - a;
    v2x = b;
    v2y = 1.0 / sc.mu - a;
  }
  double det = v1x * v2y - v2x * v1y;
  if (!(std::fabs(det) > 0.0))
    throw std::runtime_error("build_frame: degenerate eigenvectors");
  if (det < 0.0) {
    v2x = -v2x;
    v2y = -v2y;
    det = -det;
  }
  const double s = 1.0 / std::sqrt(det);
  GeodesicFrame frame;
  frame.generator = generator.normalized();
  frame.conjugator = Mat2{v2y * s, -v2x * s, -v1y * s, v1x * s};
  frame.mu = sc.mu;
  frame.norm_lambda = sc.norm_lambda;
  frame.length = sc.length;

  const Mat2 diag = frame.conjugator * to_real(g) * inv_det1(frame.conjugator);
  const double residual =
      std::fabs(diag.m00 - sc.mu) + std::fabs(diag.m01) + std::fabs(diag.m10) +
      std::fabs(diag.m11 - 1.0 / sc.mu);
  if (!(residual <= 1e-12 * std::max(1.0, sc.mu)))
    throw std::runtime_error("build_frame: conjugation residual too large");
  return frame;
}

const GeodesicFrame& default_frame() {
  static const GeodesicFrame frame = build_frame(GroupElement{2, 1, 1, 1});
  return frame;
}

// ---------------------------------------------------------------------------
// Invariants and enumeration
// ---------------------------------------------------------------------------

double b_invariant(const GroupElement& g, const GeodesicFrame& frame) {
  const Mat2 m = frame.conj(g);
  return m.m00 * m.m11 + m.m01 * m.m10;
}

std::vector<GroupElement> enumerate_cosets(const GeodesicFrame& frame,
                                           int entry_bound) {
  std::set<GroupElement> reps;
  for_each_element(entry_bound, [&](const GroupElement& g) {
    reps.insert(coset_reduce(frame, g));
  });
  return {reps.begin(), reps.end()};
}

bool same_coset(const GroupElement& g, const GroupElement& h,
                const GeodesicFrame& frame) {
  const GroupElement q = (h * g.inverse()).normalized();
  if (q == GroupElement{}) return true;
  const std::int64_t limit = 4 * max_abs_entry(q) + 4;
  for (const GroupElement& step :
       {frame.generator, frame.generator.inverse()}) {
    GroupElement p = step;
    while (true) {
      if (p.normalized() == q) return true;
      if (max_abs_entry(p) > limit) break;
      p = p * step;
    }
  }
  return false;
}

bool same_double_coset(const GroupElement& g, const GroupElement& h,
                       const GeodesicFrame& frame, int power_bound) {
  const GroupElement hn = h.normalized();
  for (int l = -power_bound; l <= power_bound; ++l) {
    const GroupElement gl = power(frame.generator, l) * g;
    for (int r = -power_bound; r <= power_bound; ++r)
      if ((gl * power(frame.generator, r)).normalized() == hn) return true;
  }
  return false;
}

GroupElement canonical_double_coset_rep(const GroupElement& g,
                                        const GeodesicFrame& frame) {
  g.validate();
  const Mat2 gt = frame.conj(g);
  const double ap = gt.m00, bp = gt.m01, cp = gt.m10, dp = gt.m11;
  const double size =
      std::fabs(ap) + std::fabs(bp) + std::fabs(cp) + std::fabs(dp);

  // Diagonal conjugation means g is a generator power; reduce it exactly.
  if (std::fabs(bp) <= 1e-9 * size && std::fabs(cp) <= 1e-9 * size) {
    const GroupElement rep = coset_reduce(frame, g);
    if (rep == GroupElement{}) return rep;
  }

  // Left/right powers scale the conjugated entries by mu^{l+r} and
  // mu^{l-r}; in s = l+r, t = l-r the squared Frobenius norm splits into two
  // independent convex terms, so the constrained minimum (s and t of equal
  // parity) lies within one step of the real minimizers.
  const double ell = frame.length;
  auto minimizer = [&](double den, double num) {
    const double v = std::log(std::max(std::fabs(num), 1e-300) /
                              std::max(std::fabs(den), 1e-300)) /
                     ell;
    return std::clamp(v, -40.0, 40.0);
  };
  const double s_star = minimizer(ap, dp);
  const double t_star = minimizer(bp, cp);
  const double mu2 = frame.norm_lambda;
  auto frob2 = [&](long s, long t) {
    const double ms = std::pow(mu2, static_cast<double>(s));
    const double mt = std::pow(mu2, static_cast<double>(t));
    return ap * ap * ms + dp * dp / ms + bp * bp * mt + cp * cp / mt;
  };

  const long s0 = static_cast<long>(std::floor(s_star));
  const long t0 = static_cast<long>(std::floor(t_star));
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::pair<long, long>> ties;
  for (long s = s0 - 2; s <= s0 + 3; ++s) {
    for (long t = t0 - 2; t <= t0 + 3; ++t) {
      if ((s - t) % 2 != 0) continue;
      const double v = frob2(s, t);
      if (v < best * (1.0 - 1e-9)) {
        best = v;
        ties.assign(1, {s, t});
      } else if (v <= best * (1.0 + 1e-9)) {
        best = std::min(best, v);
        ties.emplace_back(s, t);
      }
    }
  }

  bool first = true;
  GroupElement out;
  for (const auto& [s, t] : ties) {
    const int l = static_cast<int>((s + t) / 2);
    const int r = static_cast<int>((s - t) / 2);
    const GroupElement cand =
        ((power(frame.generator, l) * g) * power(frame.generator, r))
            .normalized();
    if (first || cand < out) {
      out = cand;
      first = false;
    }
  }
  return out;
}

std::vector<DoubleCosetRep> enumerate_double_cosets(const GeodesicFrame& frame,
                                                    double b_bound,
                                                    int entry_bound,
                                                    bool* saturated) {
  if (!(b_bound >= 0.0))
    throw std::invalid_argument("enumerate_double_cosets: b_bound must be >= 0");
  const auto at_bound = census_once(frame, b_bound, entry_bound);
  const auto doubled = census_once(frame, b_bound, 2LL * entry_bound);
  const bool complete =
      at_bound.size() == doubled.size() &&
      std::equal(at_bound.begin(), at_bound.end(), doubled.begin(),
                 [](const auto& l, const auto& r) { return l.first == r.first; });
  if (saturated)
    *saturated = complete;
  else if (!complete)
    throw CensusIncompleteError(
        "double-coset census grew when the entry bound was doubled; "
        "increase the entry bound");
  return sorted_census(doubled);
}

int count_B(const GeodesicFrame& frame, double b_bound, int entry_bound,
            bool* saturated) {
  return static_cast<int>(
      enumerate_double_cosets(frame, b_bound, entry_bound, saturated).size());
}

std::string census_to_csv(const std::vector<DoubleCosetRep>& reps) {
  std::vector<DoubleCosetRep> rows = reps;
  std::sort(rows.begin(), rows.end(),
            [](const DoubleCosetRep& l, const DoubleCosetRep& r) {
              const double fl = std::fabs(l.B), fr = std::fabs(r.B);
              if (fl != fr) return fl < fr;
              return l.element < r.element;
            });
  std::string out = "a,b,c,d,B,height\n";
  char line[160];
  for (const DoubleCosetRep& rep : rows) {
    std::snprintf(line, sizeof line, "%lld,%lld,%lld,%lld,%.12g,%lld\n",
                  static_cast<long long>(rep.element.a),
                  static_cast<long long>(rep.element.b),
                  static_cast<long long>(rep.element.c),
                  static_cast<long long>(rep.element.d), rep.B,
                  static_cast<long long>(rep.height));
    out += line;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pairing integrals
// ---------------------------------------------------------------------------

double g0_geom(double B, const RadialTestFunction& f,
               const QuadratureConfig& cfg) {
  const double disc = B * B - 1.0;
  if (disc > 0.0) return 2.0 * window::tail_integral_g0(std::sqrt(disc), f, cfg);
  if (disc < 0.0) return 2.0 * window::intersect_integral(std::sqrt(-disc), f, cfg);
  return 2.0 * window::tail_integral_g0(0.0, f, cfg);
}

RadialTestFunction g1_weight(const RadialTestFunction& f) {
  auto eval = [f](double t) { return f(t) + 2.0 * (t - 1.0) * f.deriv(t); };
  auto deriv = [eval](double t) { return transforms::detail::fd5(eval, t); };
  // The polynomial factor is absorbed by trading a slice of the decay rate,
  // and the support bound survives as a hard cutoff: window reconstructions
  // carry their support there, with only a token soft envelope.
  const transforms::DecayEnvelope env = f.decay();
  const double rate = std::max(env.rate, 1e-2);
  return RadialTestFunction(eval, deriv,
                            {env.scale * (8.0 + 8.0 / rate), 0.8 * env.rate},
                            f.cutoff_p(1e-300));
}

double g1_geom(double B, const RadialTestFunction& f,
               const QuadratureConfig& cfg) {
  if (B == 0.0) return 0.0;
  return B * g0_geom(B, g1_weight(f), cfg);
}

// ---------------------------------------------------------------------------
// Huber series and the kernel sum
// ---------------------------------------------------------------------------

double huber_series_A0(const RadialTestFunction& f, std::complex<double> z,
                       const GeodesicFrame& frame, int entry_bound,
                       const QuadratureConfig& cfg) {
  if (!(z.imag() > 0.0))
    throw std::domain_error("huber_series_A0: point must lie in the upper half plane");
  cfg.validate();
  const auto cosets = enumerate_cosets(frame, entry_bound);
  const double p_cut = f.cutoff_p(std::min(cfg.abs_tol, 1e-10) /
                                  static_cast<double>(cosets.size() + 1));
  double sum = 0.0;
  for (const GroupElement& g : cosets) {
    const std::complex<double> w = frame.conj_point(g.apply(z));
    const double p = std::norm(w) / (w.imag() * w.imag());
    if (p > p_cut) continue;
    sum += f(p);
  }
  return sum;
}

double huber_series_A1(const RadialTestFunction& f, std::complex<double> z,
                       const GeodesicFrame& frame, int entry_bound,
                       const QuadratureConfig& cfg) {
  if (!(z.imag() > 0.0))
    throw std::domain_error("huber_series_A1: point must lie in the upper half plane");
  cfg.validate();
  const auto cosets = enumerate_cosets(frame, entry_bound);
  const double p_cut = f.cutoff_p(std::min(cfg.abs_tol, 1e-10) /
                                  static_cast<double>(cosets.size() + 1));
  double sum = 0.0;
  for (const GroupElement& g : cosets) {
    const std::complex<double> w = frame.conj_point(g.apply(z));
    const double p = std::norm(w) / (w.imag() * w.imag());
    if (p > p_cut) continue;
    sum += (-w.real() / w.imag()) * f(p);
  }
  return sum;
}

double kernel_sum_F(const KernelFunction& k, std::complex<double> z,
                    double theta, const GeodesicFrame& frame, int entry_bound,
                    const QuadratureConfig& cfg) {
  if (!(z.imag() > 0.0))
    throw std::domain_error("kernel_sum_F: point must lie in the upper half plane");
  if (!(std::fabs(theta) < kPi / 2.0 - 1e-9))
    throw std::domain_error("kernel_sum_F: |theta| must be below pi/2");
  cfg.validate();
  const auto cosets = enumerate_cosets(frame, entry_bound);
  const double sec = 1.0 / std::cos(theta);
  const double tn = std::tan(theta);
  const double u_cut = k.cutoff_u(1e-2 * std::min(cfg.abs_tol, 1e-10) /
                                  static_cast<double>(cosets.size() + 1));
  double total = 0.0;
  for (const GroupElement& g : cosets) {
    const std::complex<double> w = frame.conj_point(g.apply(z));
    const double x = w.real(), y = w.imag();
    const double p = (x * x + y * y) / (y * y);
    // On r = sqrt(p) e^s the line integral of k over the orbit of the ray
    // through this coset is even in s with argument base*cosh(s) + off.
    const double base = 0.5 * std::sqrt(p) * sec;
    const double off = (0.5 * x / y) * tn - 0.5;
    if (base + off >= u_cut) continue;
    const double s_max = std::acosh(std::max((u_cut - off) / base, 1.0));
    auto integrand = [&](double s) { return k(base * std::cosh(s) + off); };
    total += 2.0 * quad(integrand, RealInterval(0.0, std::max(s_max, 1e-8)), cfg);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Geometric side
// ---------------------------------------------------------------------------

int epsilon_flag(int entry_bound, int congruence_level) {
  if (congruence_level < 1)
    throw std::invalid_argument("epsilon_flag: congruence level must be >= 1");
  if (entry_bound < 1) return 0;
  const std::int64_t L = congruence_level;
  for (std::int64_t b = -entry_bound; b <= entry_bound; ++b) {
    if (b == 0 || (-1) % b != 0) continue;
    const std::int64_t c = -1 / b;
    if (std::llabs(c) > entry_bound) continue;
    // Element [[0, b], [c, 0]]; congruent to the identity mod L?
    if ((0 - 1) % L == 0 && b % L == 0 && c % L == 0) return 1;
  }
  return 0;
}

GeometricSideResult geometric_side_detail(GeomVariant variant,
                                          const RadialTestFunction& f,
                                          const GeodesicFrame& frame,
                                          double b_bound, int entry_bound,
                                          const QuadratureConfig& cfg) {
  cfg.validate();
  GeometricSideResult res;
  const auto census =
      enumerate_double_cosets(frame, b_bound, entry_bound, &res.saturated);
  const int eps = epsilon_flag(std::max(entry_bound, 2));
  const double sign = (variant == GeomVariant::a) ? 1.0 : -1.0;
  res.value = (1.0 + sign * eps) * f(1.0) * frame.length;

  const bool use_g1 = (variant == GeomVariant::b);
  const RadialTestFunction weight = use_g1 ? cached_g1_weight(f, cfg) : f;
  for (const DoubleCosetRep& rep : census) {
    if (std::fabs(std::fabs(rep.B) - 1.0) < 1e-9) {
      ++res.b_one_count;
      continue;
    }
    const double term =
        use_g1 ? rep.B * g0_geom(rep.B, weight, cfg) : g0_geom(rep.B, f, cfg);
    res.census_sum += term;
    res.census_abs_sum += std::fabs(term);
    ++res.census_count;
  }
  res.value += res.census_sum;
  return res;
}

double geometric_side(GeomVariant variant, const RadialTestFunction& f,
                      const GeodesicFrame& frame, double b_bound,
                      int entry_bound, const QuadratureConfig& cfg) {
  const GeometricSideResult res =
      geometric_side_detail(variant, f, frame, b_bound, entry_bound, cfg);
  if (!res.saturated)
    throw CensusIncompleteError(
        "geometric_side: census did not saturate within the entry bound");
  return res.value;
}

}  // namespace hypersieve::lattice
