#include "hypersieve/window.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

namespace hypersieve::window {

namespace tr = hypersieve::transforms;

namespace {

constexpr double kSqrtPi = 1.7724538509055160272981674833411452;
// Grid points whose majorant sits below max(kUnderflowFloor,
// kMeasureRel * max|lhs|) are skipped: the bound there is smaller than the
// instrument noise of the reconstruction, so no ratio can be certified.
constexpr double kUnderflowFloor = 1e-280;
constexpr double kMeasureRel = 1e-6;

double sq(double x) { return x * x; }

}  // namespace

void WindowParams::validate() const {
  if (!(T >= 1.0))
    throw std::domain_error("window: T must be >= 1");
  if (!(r > 0.0) || !(r <= std::log(2.0)))
    throw std::domain_error("window: r must lie in (0, log 2]");
}

double WindowParams::B() const { return T / std::sqrt(T * T + 1.0); }

// ---------------------------------------------------------------------------
// Closed forms.

double d0_window(double t, const WindowParams& p) {
  return std::exp(-t * t / (4.0 * p.T * p.T)) * std::cos(p.r * t);
}

double d1_window(double t, const WindowParams& p) {
  const double gauss = std::exp(-t * t / (4.0 * p.T * p.T)) * std::cos(p.r * t);
  if (std::fabs(t) < 1e-3) {
    // Taylor value of (1 - e^{-t^2/4}) / (2t^2); next term is < 1e-21 here.
    const double t2 = t * t;
    return gauss * (1.0 / 8.0) * (1.0 - t2 / 8.0 + t2 * t2 / 96.0);
  }
  return gauss * (-std::expm1(-t * t / 4.0)) / (2.0 * t * t);
}

double omega_window(double x, const WindowParams& p) {
  const double T = p.T;
  return (T / (2.0 * kSqrtPi)) *
         (std::exp(-sq(T * (x - p.r))) + std::exp(-sq(T * (x + p.r))));
}

double omega_prime_window(double x, const WindowParams& p) {
  const double T = p.T;
  return -(T * T * T / kSqrtPi) *
         ((x - p.r) * std::exp(-sq(T * (x - p.r))) +
          (x + p.r) * std::exp(-sq(T * (x + p.r))));
}

double tau_window(double rho, const WindowParams& p) {
  const double T = p.T;
  const double B = p.B();
  return -0.125 * (erfc(T * (rho - p.r)) - erfc(B * (rho - p.r)) +
                   erfc(T * (rho + p.r)) - erfc(B * (rho + p.r)));
}

double tau_prime_window(double rho, const WindowParams& p) {
  const double T = p.T;
  const double B = p.B();
  return (1.0 / (4.0 * kSqrtPi)) *
         (T * std::exp(-sq(T * (rho - p.r))) - B * std::exp(-sq(B * (rho - p.r))) +
          T * std::exp(-sq(T * (rho + p.r))) - B * std::exp(-sq(B * (rho + p.r))));
}

// ---------------------------------------------------------------------------
// Spectral wrappers and closed-form profiles.

transforms::SpectralFunction spectrum_d0(const WindowParams& p) {
  // e^{-t^2/4T^2} reaches ~1e-17 at t = 12.6 T; cos(rt) only oscillates.
  return transforms::SpectralFunction([p](double t) { return d0_window(t, p); },
                                      Parity::even, 12.6 * p.T);
}

transforms::SpectralFunction spectrum_d1(const WindowParams& p) {
  return transforms::SpectralFunction([p](double t) { return d1_window(t, p); },
                                      Parity::even, 12.6 * p.T);
}

namespace {

// Smallest rho beyond which |value| + |deriv| stays below 1e-17 of its peak.
template <class V, class D>
double profile_support(V&& value, D&& deriv, double start, double step) {
  double peak = 0.0;
  for (double rho = 0.0;; rho += step) {
    const double a = std::fabs(value(rho)) + std::fabs(deriv(rho));
    peak = std::max(peak, a);
    if (rho > start && a <= 1e-17 * peak) return rho;
    if (rho > 1e4) return rho;  // unreachable for admissible params
  }
}

}  // namespace

transforms::ReconstructionProfile profile0(const WindowParams& p) {
  p.validate();
  transforms::ReconstructionProfile prof;
  prof.kind = transforms::ReconstructionProfile::Kind::omega;
  prof.value = [p](double x) { return omega_window(x, p); };
  prof.deriv = [p](double x) { return omega_prime_window(x, p); };
  prof.rho_max =
      profile_support(prof.value, prof.deriv, p.r, std::min(0.05, 0.2 / p.T));
  for (double lm : {p.r, 2.0 * p.r})
    if (lm < prof.rho_max) prof.landmarks.push_back(lm);
  return prof;
}

transforms::ReconstructionProfile profile1(const WindowParams& p) {
  p.validate();
  transforms::ReconstructionProfile prof;
  prof.kind = transforms::ReconstructionProfile::Kind::tau;
  prof.value = [p](double x) { return tau_window(x, p); };
  prof.deriv = [p](double x) { return tau_prime_window(x, p); };
  // The B-Gaussian pair has width ~1/B with B in [1/sqrt2, 1); it, not the
  // T-Gaussian, controls the support edge.
  prof.rho_max = profile_support(prof.value, prof.deriv, p.r, 0.05);
  for (double lm : {p.r, 2.0 * p.r})
    if (lm < prof.rho_max) prof.landmarks.push_back(lm);
  return prof;
}

// ---------------------------------------------------------------------------
// WindowReconstruction.

WindowReconstruction::WindowReconstruction(const WindowParams& p,
                                           const QuadratureConfig& cfg)
    : params_(p), cfg_(cfg), tight_(cfg) {
  p.validate();
  cfg.validate();
  tight_.abs_tol = std::min(cfg.abs_tol, 1e-12);

  prof0_ = profile0(p);
  prof1_ = profile1(p);
  p_max0_ = sq(std::cosh(prof0_.rho_max));
  p_max1_ = sq(std::cosh(prof1_.rho_max));

  const QuadratureConfig ecfg = cfg_;
  auto raw_f0 = [prof = prof0_, ecfg](double logp) {
    return tr::reconstruct(prof, std::acosh(std::sqrt(std::max(std::exp(logp), 1.0))),
                           ecfg);
  };
  auto raw_f1 = [prof = prof1_, ecfg](double logp) {
    return tr::reconstruct(prof, std::acosh(std::sqrt(std::max(std::exp(logp), 1.0))),
                           ecfg);
  };

  // Value scales for the cache tolerances (absolute in the cached quantity).
  double scale0 = 0.0;
  double scale1 = 0.0;
  for (double w : {0.0, 0.5 * p.r, p.r, 2.0 * p.r, 4.0 * p.r}) {
    scale0 = std::max(scale0, std::fabs(tr::reconstruct(prof0_, w, cfg_)));
    scale1 = std::max(scale1, std::fabs(tr::reconstruct(prof1_, w, cfg_)));
  }
  const double tol0 = std::max(3.0 * cfg_.abs_tol, 1e-10 * std::max(1.0, scale0));
  const double tol1 = std::max(3.0 * cfg_.abs_tol, 1e-10 * std::max(1.0, scale1));

  f0_cache_ = std::make_shared<CachedFunction>(
      raw_f0, 0.0, std::log(p_max0_), tol0, CachedFunction::Outside::zero);
  f1_cache_ = std::make_shared<CachedFunction>(
      raw_f1, 0.0, std::log(p_max1_), tol1, CachedFunction::Outside::zero);

  auto raw_g1 = [this](double logp) {
    const double pv = std::max(std::exp(logp), 1.0);
    return f1_direct(pv) + 2.0 * (pv - 1.0) * chain_deriv(prof1_, pv);
  };
  g1_cache_ = std::make_shared<CachedFunction>(
      raw_g1, 0.0, std::log(p_max1_), tol1, CachedFunction::Outside::zero);
}

double WindowReconstruction::f0(double p_val) const {
  if (!(p_val >= 1.0)) throw std::domain_error("f0: p must be >= 1");
  if (p_val >= p_max0_) return 0.0;
  return (*f0_cache_)(std::log(p_val));
}

double WindowReconstruction::f1(double p_val) const {
  if (!(p_val >= 1.0)) throw std::domain_error("f1: p must be >= 1");
  if (p_val >= p_max1_) return 0.0;
  return (*f1_cache_)(std::log(p_val));
}

double WindowReconstruction::g1(double p_val) const {
  if (!(p_val >= 1.0)) throw std::domain_error("g1: p must be >= 1");
  if (p_val >= p_max1_) return 0.0;
  return (*g1_cache_)(std::log(p_val));
}

double WindowReconstruction::f1_direct(double p_val) const {
  return tr::reconstruct(prof1_, std::acosh(std::sqrt(std::max(p_val, 1.0))), cfg_);
}

double WindowReconstruction::chain_deriv(const tr::ReconstructionProfile& prof,
                                         double p_val) const {
  if (!(p_val >= 1.0)) throw std::domain_error("chain_deriv: p must be >= 1");
  const bool om = (prof.kind == tr::ReconstructionProfile::Kind::omega);
  auto slope = [&prof, om](double rho) {
    return om ? prof.deriv(rho) : prof.kappa_prime(rho);
  };
  auto F_of_w = [&](double w) { return tr::reconstruct(prof, w, cfg_); };

  const double w = std::acosh(std::sqrt(std::max(p_val, 1.0)));
  const double w_eps = 1e-2;
  if (w < w_eps) {
    // F is even in w, so f'(1+) = F''(0)/2; estimate the curvature with a
    // symmetric step (relative error O(h^2)), which dominates the secant
    // noise floor near the removable dp/dw = 0 point.
    const double h = 2e-2;
    return (F_of_w(h) - F_of_w(0.0)) / (h * h);
  }
  if (w >= prof.rho_max) return 0.0;

  const double W = std::cosh(w);
  double dFdw = -slope(w) * tr::kernel_I_closed(W, W);
  std::vector<double> bps;
  for (double lm : prof.landmarks)
    if (lm > w && lm < prof.rho_max) bps.push_back(lm);
  dFdw += std::sinh(w) *
          quad(
              [&](double rho) {
                return slope(rho) *
                       tr::kernel_I_dW(W, std::max(std::cosh(rho), W));
              },
              RealInterval(w, prof.rho_max), cfg_, bps);
  return dFdw / std::sinh(2.0 * w);
}

double WindowReconstruction::f0_prime(double p_val) const {
  if (p_val >= p_max0_) return 0.0;
  return chain_deriv(prof0_, p_val);
}

double WindowReconstruction::f1_prime(double p_val) const {
  if (p_val >= p_max1_) return 0.0;
  return chain_deriv(prof1_, p_val);
}

double WindowReconstruction::sinh_f1_deriv(double w, double h) const {
  // sinh(w) f1(cosh^2 w) is odd in w, so the stencil extends below zero by
  // reflection; reconstruct() itself is evaluated at |w|.
  auto F1 = [this](double x) {
    const double ax = std::fabs(x);
    const double v = std::sinh(ax) * tr::reconstruct(prof1_, ax, tight_);
    return x < 0.0 ? -v : v;
  };
  return (F1(w + h) - F1(w - h)) / (2.0 * h);
}

transforms::RadialTestFunction WindowReconstruction::f0_radial() const {
  // The hard cutoff carries the support; the envelope only needs to
  // dominate inside it (rate ~ 1/p_max makes the soft bound inactive).
  double scale = 0.0;
  for (double w : {0.0, params_.r, 2.0 * params_.r, 1.0})
    scale = std::max(scale, std::fabs(tr::reconstruct(prof0_, w, cfg_)));
  auto self = *this;
  return transforms::RadialTestFunction(
      [self](double p) { return self.f0(p); },
      [self](double p) { return self.f0_prime(p); },
      {2.0 * std::max(scale, 1e-300), 1.0 / p_max0_}, p_max0_);
}

transforms::RadialTestFunction WindowReconstruction::f1_radial() const {
  double scale = 0.0;
  for (double w : {0.0, params_.r, 2.0 * params_.r, 1.0})
    scale = std::max(scale, std::fabs(tr::reconstruct(prof1_, w, cfg_)));
  auto self = *this;
  return transforms::RadialTestFunction(
      [self](double p) { return self.f1(p); },
      [self](double p) { return self.f1_prime(p); },
      {2.0 * std::max(scale, 1e-300), 1.0 / p_max1_}, p_max1_);
}

// ---------------------------------------------------------------------------
// One-shot evaluators with memoized reconstructions.

namespace {

const WindowReconstruction& shared_reconstruction(const WindowParams& p,
                                                  const QuadratureConfig& cfg) {
  static std::mutex mu;
  static std::map<std::tuple<double, double, double>,
                  std::shared_ptr<const WindowReconstruction>>
      memo;
  std::lock_guard<std::mutex> lock(mu);
  const auto key = std::make_tuple(p.T, p.r, cfg.abs_tol);
  auto it = memo.find(key);
  if (it == memo.end())
    it = memo.emplace(key, std::make_shared<WindowReconstruction>(p, cfg)).first;
  return *it->second;
}

}  // namespace

double f0_window(double p_val, const WindowParams& p, const QuadratureConfig& cfg) {
  return shared_reconstruction(p, cfg).f0(p_val);
}

double f1_window(double p_val, const WindowParams& p, const QuadratureConfig& cfg) {
  return shared_reconstruction(p, cfg).f1(p_val);
}

// ---------------------------------------------------------------------------
// Geometric-side integrals.

double tail_integral_g0(double u, const transforms::RadialTestFunction& f,
                        const QuadratureConfig& cfg) {
  if (!(u >= 0.0)) throw std::domain_error("tail_integral_g0: u must be >= 0");
  cfg.validate();
  const double p_cut = f.cutoff_p(cfg.tail_cutoff * std::max(f.decay().scale, 1e-300));
  if (p_cut <= 1.0) return 0.0;
  const double x_cut = std::sqrt(p_cut - 1.0);
  if (u == 0.0) {
    if (std::fabs(f(1.0)) > 1e-300)
      throw DivergenceError(
          "tail_integral_g0: integral of f(x^2+1)/x diverges logarithmically "
          "at u = 0 because f(1) != 0");
    return quad([&f](double x) { return f(x * x + 1.0) / x; },
                RealInterval(0.0, x_cut), cfg);
  }
  if (x_cut <= u) return 0.0;
  const double theta_max = std::acosh(x_cut / u);
  return quad(
      [&f, u](double th) {
        const double x = u * std::cosh(th);
        return f(x * x + 1.0);
      },
      RealInterval(0.0, theta_max), cfg);
}

double intersect_integral(double u, const transforms::RadialTestFunction& f,
                          const QuadratureConfig& cfg) {
  if (!(u > 0.0)) throw std::domain_error("intersect_integral: u must be > 0");
  cfg.validate();
  const double p_cut = f.cutoff_p(cfg.tail_cutoff * std::max(f.decay().scale, 1e-300));
  if (p_cut <= 1.0) return 0.0;
  const double x_cut = std::sqrt(p_cut - 1.0);
  const double theta_max = std::asinh(x_cut / u);
  return quad(
      [&f, u](double th) {
        const double x = u * std::sinh(th);
        return f(x * x + 1.0);
      },
      RealInterval(0.0, theta_max), cfg);
}

// ---------------------------------------------------------------------------
// Bound suite.

namespace {

// Assemble a report from measured pairs, applying the measurement floor.
BoundReport finish_report(std::vector<double> grid, std::vector<double> lhs,
                          std::vector<double> majorant, std::string regime) {
  double lhs_scale = 0.0;
  for (double v : lhs) lhs_scale = std::max(lhs_scale, std::fabs(v));
  const double floor = std::max(kUnderflowFloor, kMeasureRel * lhs_scale);

  BoundReport rep;
  rep.regime = std::move(regime);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(majorant[i] >= floor)) {
      ++rep.skipped;
      continue;
    }
    rep.grid.push_back(grid[i]);
    rep.lhs.push_back(lhs[i]);
    rep.majorant.push_back(majorant[i]);
    rep.ratio_sup = std::max(rep.ratio_sup, std::fabs(lhs[i]) / majorant[i]);
  }
  return rep;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g;
  g.reserve(n);
  const double L = std::log(hi / lo);
  for (int i = 0; i < n; ++i) g.push_back(lo * std::exp(L * i / (n - 1)));
  return g;
}

}  // namespace

std::vector<double> grid_below_2r(const WindowParams& p) {
  std::vector<double> g;
  g.reserve(21);
  for (int i = 0; i <= 20; ++i) g.push_back(2.0 * p.r * i / 20.0);
  return g;
}

std::vector<double> grid_above_2r(const WindowParams& p) {
  return log_grid(2.0 * p.r, 5.0, 64);
}

BoundReport bound_suite_a(const WindowReconstruction& rec,
                          const std::vector<double>& w_grid, AVariant variant,
                          const QuadratureConfig& cfg, double fd_step) {
  cfg.validate();
  const WindowParams& p = rec.params();
  std::vector<double> lhs;
  std::vector<double> maj;
  lhs.reserve(w_grid.size());
  maj.reserve(w_grid.size());
  bool all_below = true;
  for (double w : w_grid) {
    if (!(w >= 0.0)) throw std::domain_error("bound_suite_a: w must be >= 0");
    if (w > 2.0 * p.r) all_below = false;
    double v;
    double m = p.T * std::exp(-sq(p.T * (w - p.r)));
    if (variant == AVariant::f0_pointwise) {
      v = tr::reconstruct(rec.prof0(), w, cfg);
      if (w <= 2.0 * p.r) m += 1.0;
    } else {
      v = rec.sinh_f1_deriv(w, fd_step);
      m += (w <= 2.0 * p.r) ? 1.0 : std::exp(-2.0 * sq(w - p.r) / 3.0);
    }
    lhs.push_back(v);
    maj.push_back(m);
  }
  return finish_report(w_grid, std::move(lhs), std::move(maj),
                       all_below ? "w<=2r" : "w>=2r");
}

BoundReport bound_suite_b(const WindowReconstruction& rec, int weight,
                          const QuadratureConfig& cfg) {
  cfg.validate();
  if (weight != 0 && weight != 1)
    throw std::domain_error("bound_suite_b: weight must be 0 or 1");
  const WindowParams& p = rec.params();
  const double u_lo = std::sinh(2.0 * p.r);  // constraint asinh(u) >= 2r
  const std::vector<double> grid = log_grid(u_lo, 20.0, 12);

  const double p_max = (weight == 0) ? rec.p_max0() : rec.p_max1();
  auto integrand_p = [&rec, weight](double pv) {
    return weight == 0 ? rec.f0(pv) : rec.g1(pv);
  };
  const double majorant_base =
      (weight == 0)
          ? p.T * std::exp(-0.5 * sq(p.T * p.r))
          : p.T * std::exp(-0.5 * sq(p.T * p.r)) + std::exp(-0.5 * sq(p.r));

  std::vector<double> lhs;
  std::vector<double> maj;
  for (double u : grid) {
    const double x_cut = std::sqrt(std::max(p_max - 1.0, 0.0));
    double v = 0.0;
    if (x_cut > u) {
      const double theta_max = std::acosh(x_cut / u);
      v = quad(
          [&](double th) {
            const double x = u * std::cosh(th);
            return integrand_p(x * x + 1.0);
          },
          RealInterval(0.0, theta_max), cfg);
    }
    lhs.push_back(v);
    maj.push_back(majorant_base / (u * u));
  }
  return finish_report(grid, std::move(lhs), std::move(maj), "tail");
}

BoundReport bound_suite_c(const WindowReconstruction& rec, int weight,
                          const QuadratureConfig& cfg) {
  cfg.validate();
  if (weight != 0 && weight != 1)
    throw std::domain_error("bound_suite_c: weight must be 0 or 1");
  const std::vector<double> grid = {2.0, 4.0, 8.0, 16.0};
  const double p_max = (weight == 0) ? rec.p_max0() : rec.p_max1();
  auto integrand_p = [&rec, weight](double pv) {
    return weight == 0 ? rec.f0(pv) : rec.g1(pv);
  };

  std::vector<double> lhs;
  std::vector<double> maj;
  for (double u : grid) {
    const double x_cut = std::sqrt(std::max(p_max - 1.0, 0.0));
    const double theta_max = std::asinh(x_cut / u);
    const double v = theta_max <= 0.0
                         ? 0.0
                         : quad(
                               [&](double th) {
                                 const double x = u * std::sinh(th);
                                 return integrand_p(x * x + 1.0);
                               },
                               RealInterval(0.0, theta_max), cfg);
    lhs.push_back(v);
    maj.push_back(1.0);
  }
  return finish_report(grid, std::move(lhs), std::move(maj), "intersect");
}

double clause_constant(const std::string& clause, const WindowParams& p,
                       const QuadratureConfig& cfg, bool* all_skipped) {
  const WindowReconstruction rec(p, cfg);
  std::vector<BoundReport> reports;
  if (clause == "a-i" || clause == "a-ii") {
    const AVariant variant =
        clause == "a-i" ? AVariant::f0_pointwise : AVariant::f1_derivative;
    reports.push_back(bound_suite_a(rec, grid_below_2r(p), variant, cfg));
    reports.push_back(bound_suite_a(rec, grid_above_2r(p), variant, cfg));
  } else if (clause == "b-i") {
    reports.push_back(bound_suite_b(rec, 0, cfg));
  } else if (clause == "b-ii") {
    reports.push_back(bound_suite_b(rec, 1, cfg));
  } else if (clause == "c-i") {
    reports.push_back(bound_suite_c(rec, 0, cfg));
  } else if (clause == "c-ii") {
    reports.push_back(bound_suite_c(rec, 1, cfg));
  } else {
    throw std::invalid_argument("clause_constant: unknown clause " + clause);
  }

  double c = 0.0;
  bool any_kept = false;
  for (const BoundReport& rep : reports) {
    c = std::max(c, rep.ratio_sup);
    if (!rep.grid.empty()) any_kept = true;
  }
  if (all_skipped) *all_skipped = !any_kept;
  return c;
}

const std::vector<std::string>& clause_names() {
  static const std::vector<std::string> names = {"a-i", "a-ii", "b-i",
                                                 "b-ii", "c-i",  "c-ii"};
  return names;
}

}  // namespace hypersieve::window
