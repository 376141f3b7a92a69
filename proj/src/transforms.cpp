#include "hypersieve/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <stdexcept>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace hypersieve::transforms {

namespace {

// Interpolation caches are never built tighter than the quadrature noise of
// the values they store; chasing that noise would exhaust the node budget.
double cache_tol(const QuadratureConfig& cfg) {
  return std::max(3.0 * cfg.abs_tol, 1e-13);
}

// Largest |g| over a log-spaced probe grid on [lo, hi], lo > 0.
template <class F>
double probe_scale_log(F&& g, double lo, double hi, int n = 64) {
  double m = 0.0;
  const double ratio = std::log(hi / lo);
  for (int i = 0; i <= n; ++i)
    m = std::max(m, std::fabs(g(lo * std::exp(ratio * i / n))));
  return m;
}

// Largest |g| over a uniform probe grid on [lo, hi].
template <class F>
double probe_scale_lin(F&& g, double lo, double hi, int n = 64) {
  double m = 0.0;
  for (int i = 0; i <= n; ++i)
    m = std::max(m, std::fabs(g(lo + (hi - lo) * i / n)));
  return m;
}

// Derivative of the degree-4 Lagrange interpolant through (xs, ys) at x.
// Used for numerical derivatives of cached functions near domain edges,
// where a centred stencil would fall outside the cache.
double lagrange5_deriv(const double* xs, const double* ys, double x) {
  double out = 0.0;
  for (int i = 0; i < 5; ++i) {
    double denom = 1.0;
    for (int j = 0; j < 5; ++j)
      if (j != i) denom *= xs[i] - xs[j];
    // d/dx prod_{j!=i}(x-x_j) = sum_{m!=i} prod_{j!=i,m}(x-x_j)
    double dnum = 0.0;
    for (int m = 0; m < 5; ++m) {
      if (m == i) continue;
      double prod = 1.0;
      for (int j = 0; j < 5; ++j)
        if (j != i && j != m) prod *= x - xs[j];
      dnum += prod;
    }
    out += ys[i] * dnum / denom;
  }
  return out;
}

// Five-point numerical derivative of g at x, with the stencil shifted to
// stay inside [lo, hi].
template <class F>
double fd_deriv(F&& g, double x, double lo, double hi) {
  double h = std::cbrt(std::numeric_limits<double>::epsilon()) *
             std::max(1.0, std::fabs(x));
  h = std::min(h, 0.2 * (hi - lo));
  const double center = std::clamp(x, lo + 2.0 * h, hi - 2.0 * h);
  double xs[5];
  double ys[5];
  for (int i = 0; i < 5; ++i) {
    xs[i] = center + (i - 2) * h;
    ys[i] = g(xs[i]);
  }
  return lagrange5_deriv(xs, ys, x);
}

// Scale of the direct pairing integrand, max |p f(p)| over the probe grid.
double pairing_scale(const RadialTestFunction& f) {
  auto g = [&f](double p) { return p * f(p); };
  return std::max(probe_scale_log(g, 1.0, 1e4), 1e-300);
}

// ---------------------------------------------------------------------------
// Direct evaluation of the hypergeometric pairings.
//
// Both pairings integrate sec^2 v f(sec^2 v) against a conjugate-parameter
// hypergeometric kernel:
//   weight 0:  2F1(a, conj a; 1/2; -tan^2 v),  a = 1/4 + it/2,
//   weight 1:  tan^2 v 2F1(a, conj a; 3/2; -tan^2 v),  a = 3/4 + it/2.
// The kernel is real-valued; any imaginary residue is roundoff and is
// asserted below 1e-9 before being dropped.

struct PairingKernel {
  std::complex<double> a;
  double c;
  PairingKernel(int weight, double t)
      : a(weight == 0 ? 0.25 : 0.75, 0.5 * t), c(weight == 0 ? 0.5 : 1.5) {}

  double operator()(double tan2v) const {
    const std::complex<double> F = hyp2f1(a, std::conj(a), c, -tan2v);
    if (!(std::fabs(F.imag()) <= 1e-9 * std::max(1.0, std::abs(F))))
      throw std::runtime_error(
          "pairing kernel: imaginary residue above 1e-9; conjugate-parameter "
          "evaluation lost too much precision");
    return F.real();
  }
};

double pairing_direct(const RadialTestFunction& f, double t,
                      const QuadratureConfig& cfg, int weight) {
  cfg.validate();
  const double fscale = pairing_scale(f);
  const double eps = cfg.tail_cutoff * fscale;
  const double p_cut = f.cutoff_p(eps);
  if (!(p_cut > 1.0)) return 0.0;
  const double v_max = std::atan(std::sqrt(p_cut - 1.0));

  const PairingKernel kernel(weight, t);
  // Kernel magnitude stays O(1) on the whole range (see the amplitude-bound
  // test), so integrand points with a negligible f-weight can skip the
  // hypergeometric evaluation outright.
  const double skip = 1e-3 * eps;
  auto integrand = [&](double v) {
    const double tanv = std::tan(v);
    const double tan2 = tanv * tanv;
    const double p = 1.0 + tan2;  // sec^2 v
    const double wfac = (weight == 0) ? 1.0 : tan2;
    const double pf = wfac * p * f(p);
    if (std::fabs(pf) < skip) return 0.0;
    return pf * kernel(tan2);
  };

  // Seed the subdivision with geometric p-landmarks (resolving the f decay)
  // and with the kernel oscillation, which advances linearly in
  // w = asinh(tan v) at frequency t.
  std::vector<double> bps;
  for (double p = 2.0; p < p_cut; p *= 4.0)
    bps.push_back(std::atan(std::sqrt(p - 1.0)));
  if (std::fabs(t) > 1e-12) {
    const double w_max = std::asinh(std::tan(v_max));
    const double step = kPi / std::fabs(t);
    for (double w = step; w < w_max && bps.size() < 512; w += step)
      bps.push_back(std::atan(std::sinh(w)));
  }
  return quad(integrand, RealInterval(0.0, v_max), cfg, bps);
}

// Absolute roundoff in pairing_direct: the Pfaff series at x = sin^2 v
// carries terms of size ~ e^{t v} that cancel down to an O(1) kernel value,
// so the evaluation noise is ~ 5e-17 e^{t v} weighted by the integrand
// scale at that v.  Beyond tan^2 v = 2 the kernel switches to its
// expansion at infinity, which has no such cancellation, so the exponent
// saturates at v = atan(sqrt 2).
double pairing_direct_noise(const RadialTestFunction& f, double t, double p_cut,
                            int weight) {
  double worst = 0.0;
  const double v_pfaff = std::atan(std::sqrt(2.0));
  const double lp = std::log(std::max(p_cut, 1.0 + 1e-9));
  for (int i = 0; i <= 160; ++i) {
    const double p = std::exp(lp * i / 160.0);
    const double tan2 = std::max(p - 1.0, 0.0);
    const double v = std::min(std::atan(std::sqrt(tan2)), v_pfaff);
    const double wfac = (weight == 0) ? 1.0 : tan2;
    const double expo = std::min(std::fabs(t) * v, 700.0);
    worst = std::max(worst, std::fabs(wfac * p * f(p)) * std::exp(expo));
  }
  return worst * 5e-17;
}

}  // namespace

double RadialTestFunction::cutoff_p(double eps) const {
  if (!(eps > 0.0)) throw std::invalid_argument("cutoff_p: eps must be > 0");
  double p = 1.0;
  if (decay_.scale > eps) {
    const double x = std::log(decay_.scale / eps) / std::max(decay_.rate, 1e-12);
    p = std::max(1.0, x * x);
  }
  p = std::min(p, 1e12);
  if (hard_cutoff_ > 0.0) p = std::min(p, hard_cutoff_);
  return p;
}

double KernelFunction::cutoff_u(double eps) const {
  if (!(eps > 0.0)) throw std::invalid_argument("cutoff_u: eps must be > 0");
  double u = 0.0;
  if (decay_.scale > eps)
    u = std::log(decay_.scale / eps) / std::max(decay_.rate, 1e-12);
  u = std::min(u, 1e9);
  if (hard_cutoff_ > 0.0) u = std::min(u, hard_cutoff_);
  return u;
}

double d0_direct(const RadialTestFunction& f, double t, const QuadratureConfig& cfg) {
  return pairing_direct(f, t, cfg, 0);
}

double d1_direct(const RadialTestFunction& f, double t, const QuadratureConfig& cfg) {
  return pairing_direct(f, t, cfg, 1);
}

// ---------------------------------------------------------------------------
// Weyl-type conversions.

namespace {

// Shared core of k0 / k1': the half-line integral of f' against the inverse
// square root, int_{(2u+1)^2}^{p_cut} f'(p) (p - (2u+1)^2)^{-1/2} dp.
double fprime_abel(const RadialTestFunction& f, double u, double p_cut,
                   const QuadratureConfig& cfg) {
  const double x = 2.0 * u + 1.0;
  const double a = x * x;
  if (p_cut <= a) return 0.0;
  auto g = [&f](double p) { return f.deriv(p); };
  return quad_sqrt_singular(g, a, p_cut, cfg);
}

// Truncation point for integrals involving both f and f'.
double joint_p_cut(const RadialTestFunction& f, const QuadratureConfig& cfg) {
  auto both = [&f](double p) {
    return std::max(std::fabs(f(p)), std::fabs(f.deriv(p)));
  };
  const double scale = std::max(probe_scale_log(both, 1.0, 1e4), 1e-300);
  return f.cutoff_p(1e-2 * cfg.tail_cutoff * scale);
}

// Envelope whose cutoff reproduces the sampled peak and a given hard edge.
DecayEnvelope envelope_from_samples(const std::function<double(double)>& g,
                                    double hi, double rate) {
  DecayEnvelope env;
  env.rate = std::max(rate, 1e-6);
  double scale = 0.0;
  for (int i = 0; i <= 64; ++i) {
    const double x = hi * i / 64.0;
    scale = std::max(scale, std::fabs(g(x)) * std::exp(std::min(env.rate * x, 690.0)));
  }
  env.scale = std::max(scale, 1e-300);
  return env;
}

}  // namespace

KernelFunction k0_from_f(const RadialTestFunction& f, const QuadratureConfig& cfg) {
  cfg.validate();
  const double p_cut = joint_p_cut(f, cfg);
  const double u_max = std::max((std::sqrt(p_cut) - 1.0) / 2.0, 1e-3);
  auto raw = [f, p_cut, cfg](double u) {
    return -((2.0 * u + 1.0) / kPi) * fprime_abel(f, u, p_cut, cfg);
  };
  auto cache = std::make_shared<CachedFunction>(raw, 0.0, u_max, cache_tol(cfg),
                                                CachedFunction::Outside::zero);
  auto eval = [cache](double u) { return (*cache)(u); };
  auto deriv = [cache](double u) {
    return fd_deriv([&cache](double x) { return (*cache)(x); }, u, cache->lo(),
                    cache->hi());
  };
  const DecayEnvelope env = envelope_from_samples(eval, u_max, 2.0 * f.decay().rate);
  return KernelFunction(eval, deriv, env, u_max);
}

CachedFunction k1prime_from_f(const RadialTestFunction& f, const QuadratureConfig& cfg) {
  cfg.validate();
  const double p_cut = joint_p_cut(f, cfg);
  const double u_max = std::max((std::sqrt(p_cut) - 1.0) / 2.0, 1e-3);
  auto raw = [f, p_cut, cfg](double u) {
    return ((4.0 * u + 2.0) / kPi) * fprime_abel(f, u, p_cut, cfg);
  };
  return CachedFunction(raw, 0.0, u_max, cache_tol(cfg),
                        CachedFunction::Outside::zero);
}

KernelFunction k1_from_f(const RadialTestFunction& f, const QuadratureConfig& cfg) {
  cfg.validate();
  auto kp = std::make_shared<CachedFunction>(k1prime_from_f(f, cfg));
  const double u_max = kp->hi();
  auto raw = [kp, u_max, cfg](double u) {
    if (u >= u_max) return 0.0;
    auto g = [&kp](double v) { return (*kp)(v); };
    return -quad(g, RealInterval(u, u_max), cfg);
  };
  auto cache = std::make_shared<CachedFunction>(raw, 0.0, u_max, cache_tol(cfg),
                                                CachedFunction::Outside::zero);
  auto eval = [cache](double u) { return (*cache)(u); };
  auto deriv = [kp](double u) { return (*kp)(u); };
  const DecayEnvelope env = envelope_from_samples(eval, u_max, 2.0 * f.decay().rate);
  return KernelFunction(eval, deriv, env, u_max);
}

namespace {

// Support edge of a kernel relative to its own sampled peak.
double kernel_support(const KernelFunction& k, const QuadratureConfig& cfg) {
  const double probe_hi =
      std::max(k.cutoff_u(1e-12 * std::max(k.decay().scale, 1e-300)), 1e-3);
  const double kscale = std::max(
      probe_scale_lin([&k](double u) { return k(u); }, 0.0, probe_hi), 1e-300);
  return std::max(k.cutoff_u(cfg.tail_cutoff * kscale), 1e-3);
}

}  // namespace

RadialTestFunction f_from_k0(const KernelFunction& k, const QuadratureConfig& cfg) {
  cfg.validate();
  const double u_cut = kernel_support(k, cfg);
  const double x_cut = 2.0 * u_cut + 1.0;  // largest sqrt(p) cosh(theta)
  auto eval = [k, x_cut, cfg](double p) {
    const double sp = std::sqrt(p);
    if (sp >= x_cut) return 0.0;
    const double theta_max = std::acosh(x_cut / sp);
    auto g = [&k, sp](double th) { return k((sp * std::cosh(th) - 1.0) / 2.0); };
    return 2.0 * quad(g, RealInterval(0.0, theta_max), cfg);
  };
  auto deriv = [k, x_cut, cfg](double p) {
    const double sp = std::sqrt(p);
    if (sp >= x_cut) return 0.0;
    const double theta_max = std::acosh(x_cut / sp);
    auto g = [&k, sp](double th) {
      return k.deriv((sp * std::cosh(th) - 1.0) / 2.0) * std::cosh(th);
    };
    return (0.5 / sp) * quad(g, RealInterval(0.0, theta_max), cfg);
  };
  DecayEnvelope env;
  env.rate = std::max(0.5 * k.decay().rate, 1e-6);
  env.scale = std::max(6.0 * k.decay().scale * std::exp(std::min(k.decay().rate, 600.0) / 2.0),
                       1e-300);
  return RadialTestFunction(eval, deriv, env, x_cut * x_cut);
}

RadialTestFunction f_from_k1(const KernelFunction& k, const QuadratureConfig& cfg) {
  cfg.validate();
  const double u_cut = kernel_support(k, cfg);
  const double x_cut = 2.0 * u_cut + 1.0;
  auto eval = [k, x_cut, cfg](double p) {
    const double sp = std::sqrt(p);
    if (sp >= x_cut) return 0.0;
    const double theta_max = std::acosh(x_cut / sp);
    auto g = [&k, sp](double th) {
      return k.deriv((sp * std::cosh(th) - 1.0) / 2.0);
    };
    return -quad(g, RealInterval(0.0, theta_max), cfg);
  };
  auto eval_copy = eval;
  auto deriv = [eval_copy, x_cut](double p) {
    return fd_deriv(eval_copy, p, 1.0, std::max(x_cut * x_cut, 2.0));
  };
  DecayEnvelope env;
  env.rate = std::max(0.5 * k.decay().rate, 1e-6);
  env.scale = std::max(6.0 * (k.decay().scale * k.decay().rate + 1.0) *
                           std::exp(std::min(k.decay().rate, 600.0) / 2.0),
                       1e-300);
  return RadialTestFunction(eval, deriv, env, x_cut * x_cut);
}

// ---------------------------------------------------------------------------
// Selberg/Harish-Chandra chain.

SelbergChain::SelbergChain(const KernelFunction& k, const QuadratureConfig& cfg)
    : cfg_(cfg) {
  cfg.validate();
  v_max_ = kernel_support(k, cfg);
  const double vm = v_max_;
  auto raw_q = [k, vm, cfg](double v) {
    if (v >= vm) return 0.0;
    return quad_sqrt_singular([&k](double u) { return k(u); }, v, vm, cfg);
  };
  q_ = std::make_shared<CachedFunction>(raw_q, 0.0, v_max_, cache_tol(cfg),
                                        CachedFunction::Outside::zero);
  rho_max_ = 2.0 * std::asinh(std::sqrt(v_max_));
}

double SelbergChain::q(double v) const { return (*q_)(v); }

double SelbergChain::g(double rho) const {
  const double s = std::sinh(0.5 * rho);
  return 2.0 * (*q_)(s * s);
}

double SelbergChain::h(double t) const {
  auto integrand = [this, t](double rho) { return std::cos(rho * t) * g(rho); };
  const std::vector<double> bps =
      hypersieve::detail::oscillation_breakpoints(t, 0.0, rho_max_);
  return 2.0 * quad(integrand, RealInterval(0.0, rho_max_), cfg_, bps);
}

double sht_forward(const KernelFunction& k, double t, const QuadratureConfig& cfg) {
  return SelbergChain(k, cfg).h(t);
}

KernelFunction sht_inverse(const SpectralFunction& h, const QuadratureConfig& cfg) {
  cfg.validate();
  if (!(h.t_max() > 0.0))
    throw std::invalid_argument("sht_inverse: spectral function needs t_max > 0");
  const double tmax = h.t_max();

  // Even part only: the chain output is even in t, so an odd component of a
  // caller-supplied spectrum is annihilated rather than propagated.
  auto he = [h](double t) { return 0.5 * (h(t) + h(-t)); };
  auto Q = [he, tmax, cfg](double rho) {
    auto g = [&he, rho](double t) { return std::cos(rho * t) * he(t); };
    const std::vector<double> bps =
        hypersieve::detail::oscillation_breakpoints(rho, 0.0, tmax);
    return (0.5 / kPi) * quad(g, RealInterval(0.0, tmax), cfg, bps);
  };
  auto Qp = [he, tmax, cfg](double rho) {
    auto g = [&he, rho](double t) { return t * std::sin(rho * t) * he(t); };
    const std::vector<double> bps =
        hypersieve::detail::oscillation_breakpoints(rho, 0.0, tmax);
    return (-0.5 / kPi) * quad(g, RealInterval(0.0, tmax), cfg, bps);
  };

  // Truncate where both Q and Q' have decayed relative to their peak.
  double peak = 0.0;
  double rho_hi = 1.0;
  int quiet = 0;
  for (double rho = 0.0; rho <= 100.0; rho += 0.5) {
    const double a = std::fabs(Q(rho)) + std::fabs(Qp(rho));
    peak = std::max(peak, a);
    const double floor = std::max(peak * cfg.tail_cutoff, 2.0 * cfg.abs_tol);
    if (peak > 0.0 && a <= floor) {
      if (++quiet >= 3) {
        rho_hi = rho;
        break;
      }
    } else {
      quiet = 0;
    }
    rho_hi = rho + 0.5;
  }

  const double v_hi = std::sinh(0.5 * rho_hi) * std::sinh(0.5 * rho_hi);
  auto qp_raw = [Qp](double v) {
    const double rho = std::max(2.0 * std::asinh(std::sqrt(std::max(v, 0.0))), 1e-4);
    return 2.0 * Qp(rho) / std::sinh(rho);
  };
  auto qp = std::make_shared<CachedFunction>(qp_raw, 0.0, v_hi, cache_tol(cfg),
                                             CachedFunction::Outside::zero);

  auto k_raw = [qp, v_hi, cfg](double u) {
    if (u >= v_hi) return 0.0;
    auto g = [&qp](double v) { return (*qp)(v); };
    return -(1.0 / kPi) * quad_sqrt_singular(g, u, v_hi, cfg);
  };
  auto cache = std::make_shared<CachedFunction>(k_raw, 0.0, v_hi, cache_tol(cfg),
                                                CachedFunction::Outside::zero);
  auto eval = [cache](double u) { return (*cache)(u); };
  auto deriv = [cache](double u) {
    return fd_deriv([&cache](double x) { return (*cache)(x); }, u, cache->lo(),
                    cache->hi());
  };
  // Envelope tuned so the declared cutoff lands at the cached edge.
  const DecayEnvelope env =
      envelope_from_samples(eval, v_hi, 41.0 / std::max(v_hi, 1e-3));
  return KernelFunction(eval, deriv, env, v_hi);
}

double d0_via_sht(const RadialTestFunction& f, double t, const QuadratureConfig& cfg) {
  return SelbergChain(k0_from_f(f, cfg), cfg).h(t) / 2.0;
}

double d1_via_sht(const RadialTestFunction& f, double t, const QuadratureConfig& cfg) {
  return SelbergChain(k1_from_f(f, cfg), cfg).h(t) / 2.0;
}

// ---------------------------------------------------------------------------
// Cached spectral pairings.

namespace {

// The direct quadrature and the transform chain compute the same pairing;
// the direct route loses absolute accuracy once the hypergeometric series
// cancellation (~ e^{t v}) amplifies roundoff past the tolerance, while the
// chain stays stable at every t.  The cache therefore evaluates directly at
// small t and through the chain beyond the crossover, with a consistency
// check at the seam.
SpectralFunction spectral_pairing(const RadialTestFunction& f,
                                  const QuadratureConfig& cfg, int weight) {
  cfg.validate();
  const KernelFunction kw = (weight == 0) ? k0_from_f(f, cfg) : k1_from_f(f, cfg);
  auto chain = std::make_shared<SelbergChain>(kw, cfg);

  // Spectral truncation scan on the chain route.
  const double peak = std::fabs(chain->h(0.0)) / 2.0;
  double t_hi = 1.0;
  {
    double runpeak = peak;
    int quiet = 0;
    for (double t = 0.5; t <= 200.0; t += 0.5) {
      const double a = std::fabs(chain->h(t)) / 2.0;
      runpeak = std::max(runpeak, a);
      const double floor = std::max(runpeak * cfg.tail_cutoff, 0.5 * cfg.abs_tol);
      if (a <= floor) {
        if (++quiet >= 4) {
          t_hi = t;
          break;
        }
      } else {
        quiet = 0;
      }
      t_hi = t + 0.5;
    }
    t_hi = std::max(t_hi, 2.0);
  }

  // Crossover where the direct route's roundoff would exceed a fraction of
  // the cache tolerance.
  const double p_cut = f.cutoff_p(cfg.tail_cutoff * pairing_scale(f));
  const double noise_budget = 0.03 * std::max(cfg.abs_tol, 1e-13);
  double t_switch = t_hi;
  for (double t = 1.0; t < t_hi; t += 0.5) {
    if (pairing_direct_noise(f, t, p_cut, weight) > noise_budget) {
      t_switch = std::max(1.0, t - 0.5);
      break;
    }
  }

  if (t_switch < t_hi) {
    const double direct = pairing_direct(f, t_switch, cfg, weight);
    const double via_chain = chain->h(t_switch) / 2.0;
    if (!(std::fabs(direct - via_chain) <= 1e-6 * std::max(1.0, peak)))
      throw std::runtime_error(
          "spectral pairing: direct quadrature and transform chain disagree at "
          "the evaluation seam; check that the test function's deriv matches "
          "its eval");
  }

  const double ts = t_switch;
  auto raw = [f, cfg, weight, chain, ts](double t) {
    if (t < ts) return pairing_direct(f, t, cfg, weight);
    return chain->h(t) / 2.0;
  };
  auto cache = std::make_shared<CachedFunction>(
      raw, 0.0, t_hi, cache_tol(cfg), CachedFunction::Outside::zero,
      std::vector<double>{t_switch});
  auto eval = [cache](double t) { return (*cache)(std::fabs(t)); };
  return SpectralFunction(eval, Parity::even, t_hi);
}

}  // namespace

SpectralFunction spectral_d0(const RadialTestFunction& f, const QuadratureConfig& cfg) {
  return spectral_pairing(f, cfg, 0);
}

SpectralFunction spectral_d1(const RadialTestFunction& f, const QuadratureConfig& cfg) {
  return spectral_pairing(f, cfg, 1);
}

// ---------------------------------------------------------------------------
// Reconstruction kernel I(W, R).
//
// The closed form is -2 W^{-1/2} 2F1(1/2, 1/2; 1; (W-R)/(2W)).  Writing the
// quadrature form over the complementary angle turns it into a complete
// elliptic integral,
//   I(W,R) = -(4 sqrt2/pi) (W+R)^{-1/2} K(m),  m = (R-W)/(R+W),
// which the AGM evaluates stably for every R >= W (the hypergeometric series
// would need ~R/W terms as R/W grows).

namespace {

struct EllipticKE {
  double K = 0.0;
  double E = 0.0;
};

// Complete elliptic integrals of parameter m = k^2 in [0, 1) via the
// arithmetic-geometric mean; quadratic convergence for all m.  Once a - b
// reaches its roundoff plateau (about one ulp of a), c stops shrinking, so
// the loop must stop on the current c: letting it run with the doubling
// weight pow2 would feed exponentially amplified rounding noise into the
// E-sum.  A genuine c at the break point contributes pow2 * c^2 = O(eps^2),
// so dropping the final term is harmless.
EllipticKE elliptic_ke(double m) {
  if (!(m >= 0.0) || !(m < 1.0))
    throw std::domain_error("elliptic_ke: parameter must lie in [0,1)");
  double a = 1.0;
  double b = std::sqrt(1.0 - m);
  double c = std::sqrt(m);
  double sum = 0.5 * c * c;
  double pow2 = 0.5;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (int i = 0; i < 64; ++i) {
    c = 0.5 * (a - b);
    if (!(std::fabs(c) > 4.0 * eps * a)) break;
    const double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
    pow2 *= 2.0;
    sum += pow2 * c * c;
  }
  EllipticKE out;
  out.K = kPi / (2.0 * a);
  out.E = out.K * (1.0 - sum);
  return out;
}

// dK/dm.  The closed form (E - (1-m)K) / (2m(1-m)) loses nearly all figures
// as m -> 0 (its numerator is O(m) built from O(1) pieces), so small m uses
// the Maclaurin series dK/dm = (pi/2) sum_n n [c_n m^(n-1)] with
// c_n = ((2n)! / (2^(2n) n!^2))^2; five terms leave a relative truncation
// error below 2e-10 at the m = 1e-2 crossover, where the closed form is
// already good to ~5e-14.
double elliptic_dK_dm(double m, const EllipticKE& ke) {
  if (m < 1e-2)
    return (kPi / 2.0) *
           (0.25 + m * (9.0 / 32.0 +
                        m * (75.0 / 256.0 +
                             m * (1225.0 / 4096.0 + m * (19845.0 / 65536.0)))));
  return (ke.E - (1.0 - m) * ke.K) / (2.0 * m * (1.0 - m));
}

void check_kernel_domain(double W, double R) {
  if (!(W >= 1.0)) throw std::domain_error("kernel I: need W >= 1");
  if (!(R >= W)) throw std::domain_error("kernel I: need R >= W");
}

constexpr double kKernelIFactor = 5.65685424949238019520675489683879231 / kPi;
// 4 sqrt(2) / pi

}  // namespace

double kernel_I(double W, double R, const QuadratureConfig& cfg) {
  check_kernel_domain(W, R);
  cfg.validate();
  auto integrand = [W, R](double phi) {
    const double s = std::sin(phi);
    return 1.0 / std::sqrt(2.0 * W + (R - W) * s * s);
  };
  return -kKernelIFactor * quad(integrand, RealInterval(0.0, kPi / 2.0), cfg);
}

double kernel_I_closed(double W, double R) {
  check_kernel_domain(W, R);
  const double m = (R - W) / (R + W);
  return -kKernelIFactor * elliptic_ke(m).K / std::sqrt(W + R);
}

double kernel_I_dR(double W, double R) {
  check_kernel_domain(W, R);
  const double S = W + R;
  const double m = (R - W) / S;
  const EllipticKE ke = elliptic_ke(m);
  const double dKdm = elliptic_dK_dm(m, ke);
  // dm/dR = 2W/S^2; the product rule against S^{-1/2} gives
  return kKernelIFactor * std::pow(S, -1.5) * (0.5 * ke.K - dKdm * 2.0 * W / S);
}

double kernel_I_dW(double W, double R) {
  check_kernel_domain(W, R);
  const double S = W + R;
  const double m = (R - W) / S;
  const EllipticKE ke = elliptic_ke(m);
  const double dKdm = elliptic_dK_dm(m, ke);
  // dm/dW = -2R/S^2
  return kKernelIFactor * std::pow(S, -1.5) * (0.5 * ke.K + dKdm * 2.0 * R / S);
}

// ---------------------------------------------------------------------------
// Profiles and reconstruction.

double omega_from_d0(const SpectralFunction& d0, double rho, const QuadratureConfig& cfg) {
  auto g = [&d0, rho](double t) { return std::cos(rho * t) * d0(t); };
  const std::vector<double> bps =
      hypersieve::detail::oscillation_breakpoints(rho, 0.0, d0.t_max());
  return (1.0 / kPi) * quad(g, RealInterval(0.0, d0.t_max()), cfg, bps);
}

double omega_deriv_from_d0(const SpectralFunction& d0, double rho,
                           const QuadratureConfig& cfg) {
  auto g = [&d0, rho](double t) { return t * std::sin(rho * t) * d0(t); };
  const std::vector<double> bps =
      hypersieve::detail::oscillation_breakpoints(rho, 0.0, d0.t_max());
  return (-1.0 / kPi) * quad(g, RealInterval(0.0, d0.t_max()), cfg, bps);
}

double tau_from_d1(const SpectralFunction& d1, double rho, const QuadratureConfig& cfg) {
  auto g = [&d1, rho](double t) { return std::sin(rho * t) * t * d1(t); };
  const std::vector<double> bps =
      hypersieve::detail::oscillation_breakpoints(rho, 0.0, d1.t_max());
  return kTauHalfLineNorm * quad(g, RealInterval(0.0, d1.t_max()), cfg, bps);
}

double tau_deriv_from_d1(const SpectralFunction& d1, double rho,
                         const QuadratureConfig& cfg) {
  auto g = [&d1, rho](double t) { return t * t * std::cos(rho * t) * d1(t); };
  const std::vector<double> bps =
      hypersieve::detail::oscillation_breakpoints(rho, 0.0, d1.t_max());
  return kTauHalfLineNorm * quad(g, RealInterval(0.0, d1.t_max()), cfg, bps);
}

double ReconstructionProfile::kappa_prime(double rho) const {
  // kappa = tau / sinh is even with kappa'(0) = 0; below eps the quotient
  // rule cancels catastrophically, so switch to the linear model through 0.
  const double eps = 1e-3;
  if (rho < eps) {
    const double sh = std::sinh(eps);
    const double ch = std::cosh(eps);
    const double at_eps = (deriv(eps) * sh - value(eps) * ch) / (sh * sh);
    return at_eps * (rho / eps);
  }
  const double sh = std::sinh(rho);
  const double ch = std::cosh(rho);
  return (deriv(rho) * sh - value(rho) * ch) / (sh * sh);
}

namespace {

ReconstructionProfile profile_from_spectrum(const SpectralFunction& spec,
                                            const QuadratureConfig& cfg,
                                            ReconstructionProfile::Kind kind) {
  cfg.validate();
  const bool omega_kind = (kind == ReconstructionProfile::Kind::omega);

  // The deriv integrand carries a weight of t (plain profile) or t^2
  // (weighted profile).  Truncating the spectrum at t_max leaves ringing of
  // roughly the weighted tail value, and quadrature roundoff scales with the
  // weighted peak amplitude; neither can be integrated away.  Floor the eval
  // tolerance, the support-scan floor, and the cache tolerances there —
  // refining below that level chases noise, not signal.
  const double t_hi = spec.t_max();
  double amp = 0.0;
  for (int i = 0; i <= 256; ++i) {
    const double t = t_hi * static_cast<double>(i) / 256.0;
    const double wfac = omega_kind ? std::max(1.0, t) : std::max(1.0, t * t);
    amp = std::max(amp, wfac * std::fabs(spec(t)));
  }
  const double tail_wt = omega_kind ? std::max(1.0, t_hi) : std::max(1.0, t_hi * t_hi);
  const double noise =
      std::max(1e-14 * amp, tail_wt * std::fabs(spec(t_hi)));
  QuadratureConfig eval_cfg = cfg;
  eval_cfg.abs_tol = std::max(cfg.abs_tol, 0.5 * noise);

  auto value_raw = [&spec, &eval_cfg, omega_kind](double rho) {
    return omega_kind ? omega_from_d0(spec, rho, eval_cfg)
                      : tau_from_d1(spec, rho, eval_cfg);
  };
  auto deriv_raw = [&spec, &eval_cfg, omega_kind](double rho) {
    return omega_kind ? omega_deriv_from_d0(spec, rho, eval_cfg)
                      : tau_deriv_from_d1(spec, rho, eval_cfg);
  };

  // Scan for the support edge and remember interior peaks as quadrature
  // landmarks.
  const double step = 0.25;
  std::vector<double> vals;
  std::vector<double> rhos;
  double peak = 0.0;
  double rho_max = step;
  int quiet = 0;
  for (double rho = 0.0; rho <= 60.0; rho += step) {
    const double a = std::fabs(value_raw(rho)) + std::fabs(deriv_raw(rho));
    rhos.push_back(rho);
    vals.push_back(a);
    peak = std::max(peak, a);
    const double floor =
        std::max({peak * cfg.tail_cutoff, 2.0 * cfg.abs_tol, 2.0 * noise});
    if (peak > 0.0 && a <= floor) {
      if (++quiet >= 4) {
        rho_max = rho;
        break;
      }
    } else {
      quiet = 0;
    }
    rho_max = rho + step;
  }

  std::vector<double> landmarks;
  for (std::size_t i = 1; i + 1 < vals.size(); ++i)
    if (vals[i] >= vals[i - 1] && vals[i] >= vals[i + 1] && vals[i] > 0.01 * peak)
      landmarks.push_back(rhos[i]);

  const SpectralFunction spec_copy = spec;
  const QuadratureConfig cfg_copy = eval_cfg;
  auto value_fn = [spec_copy, cfg_copy, omega_kind](double rho) {
    return omega_kind ? omega_from_d0(spec_copy, rho, cfg_copy)
                      : tau_from_d1(spec_copy, rho, cfg_copy);
  };
  auto deriv_fn = [spec_copy, cfg_copy, omega_kind](double rho) {
    return omega_kind ? omega_deriv_from_d0(spec_copy, rho, cfg_copy)
                      : tau_deriv_from_d1(spec_copy, rho, cfg_copy);
  };
  const double profile_tol = std::max(cache_tol(cfg), 3.0 * noise);
  auto value_cache = std::make_shared<CachedFunction>(
      value_fn, 0.0, rho_max, profile_tol, CachedFunction::Outside::zero,
      landmarks);
  auto deriv_cache = std::make_shared<CachedFunction>(
      deriv_fn, 0.0, rho_max, profile_tol, CachedFunction::Outside::zero,
      landmarks);

  ReconstructionProfile profile;
  profile.kind = kind;
  profile.value = [value_cache](double rho) { return (*value_cache)(rho); };
  profile.deriv = [deriv_cache](double rho) { return (*deriv_cache)(rho); };
  profile.rho_max = rho_max;
  profile.landmarks = landmarks;
  return profile;
}

}  // namespace

ReconstructionProfile profile_from_d0(const SpectralFunction& d0,
                                      const QuadratureConfig& cfg) {
  return profile_from_spectrum(d0, cfg, ReconstructionProfile::Kind::omega);
}

ReconstructionProfile profile_from_d1(const SpectralFunction& d1,
                                      const QuadratureConfig& cfg) {
  return profile_from_spectrum(d1, cfg, ReconstructionProfile::Kind::tau);
}

double reconstruct(const ReconstructionProfile& profile, double w,
                   const QuadratureConfig& cfg) {
  if (!(w >= 0.0)) throw std::domain_error("reconstruct: need w >= 0");
  cfg.validate();
  if (w >= profile.rho_max) return 0.0;
  const double W = std::cosh(w);
  const bool omega_kind = (profile.kind == ReconstructionProfile::Kind::omega);
  auto integrand = [&profile, W, omega_kind](double rho) {
    const double slope =
        omega_kind ? profile.deriv(rho) : profile.kappa_prime(rho);
    // rho > w implies cosh(rho) >= W mathematically; clamp the roundoff.
    return slope * kernel_I_closed(W, std::max(std::cosh(rho), W));
  };
  std::vector<double> bps;
  for (double lm : profile.landmarks)
    if (lm > w && lm < profile.rho_max) bps.push_back(lm);
  return quad(integrand, RealInterval(w, profile.rho_max), cfg, bps);
}

double reconstruct_f0(const SpectralFunction& d0, double w, const QuadratureConfig& cfg) {
  return reconstruct(profile_from_d0(d0, cfg), w, cfg);
}

double reconstruct_f1(const SpectralFunction& d1, double w, const QuadratureConfig& cfg) {
  return reconstruct(profile_from_d1(d1, cfg), w, cfg);
}

double majorant_a(const ReconstructionProfile& omega_profile, double w,
                  const QuadratureConfig& cfg) {
  cfg.validate();
  if (w >= omega_profile.rho_max) return 0.0;
  auto g = [&omega_profile](double rho) { return std::fabs(omega_profile.value(rho)); };
  std::vector<double> bps;
  for (double lm : omega_profile.landmarks)
    if (lm > w && lm < omega_profile.rho_max) bps.push_back(lm);
  return std::fabs(omega_profile.value(w)) +
         quad(g, RealInterval(w, omega_profile.rho_max), cfg, bps);
}

double majorant_b(const ReconstructionProfile& tau_profile, double w,
                  const QuadratureConfig& cfg) {
  cfg.validate();
  if (w >= tau_profile.rho_max) return 0.0;
  auto g = [&tau_profile](double rho) { return std::fabs(tau_profile.value(rho)); };
  std::vector<double> bps;
  for (double lm : tau_profile.landmarks)
    if (lm > w && lm < tau_profile.rho_max) bps.push_back(lm);
  return std::fabs(tau_profile.deriv(w)) + std::fabs(tau_profile.value(w)) +
         quad(g, RealInterval(w, tau_profile.rho_max), cfg, bps);
}

}  // namespace hypersieve::transforms
