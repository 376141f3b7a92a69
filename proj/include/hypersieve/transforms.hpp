#pragma once
// Transform calculus connecting three equivalent descriptions of a radial
// test function:
//   f(p)  - radial form on p >= 1,
//   k(u)  - point-pair kernel on u >= 0,
//   h(t)  - spectral form (even, entire, rapidly decaying).
//
// The module provides the two hypergeometric pairings d0_t(f), d1_t(f); the
// Weyl-type conversion integrals between f and k; the Selberg/Harish-Chandra
// chain k -> q -> g -> h and its inverse; and the reconstruction of f from
// d0/d1 through the profile functions omega/tau and the kernel I(W,R).
//
// Objects are immutable after construction (internal caches are filled
// eagerly), so all evaluation entry points are const and thread-safe.

#include <complex>
#include <functional>
#include <memory>
#include <vector>

#include "hypersieve/cached_function.hpp"
#include "hypersieve/numerics.hpp"

namespace hypersieve::transforms {

// Declared decay majorant.  For radial functions the bound reads
// |f(p)| <= scale * exp(-rate * sqrt(p)); for kernels and spectra the
// argument enters linearly: |k(u)| <= scale * exp(-rate * u).
struct DecayEnvelope {
  double scale = 1.0;
  double rate = 1.0;
};

// Radial test function f on [1, inf) with an explicit derivative and a
// declared decay envelope |f(p)| <= scale * e^{-rate sqrt(p)}.  Functions
// backed by a finite cache may also carry a hard cutoff beyond which they
// are identically zero; cutoff_p() honours both.
class RadialTestFunction {
 public:
  RadialTestFunction() = default;
  RadialTestFunction(std::function<double(double)> eval,
                     std::function<double(double)> deriv, DecayEnvelope decay,
                     double hard_cutoff = 0.0)
      : eval_(std::move(eval)),
        deriv_(std::move(deriv)),
        decay_(decay),
        hard_cutoff_(hard_cutoff) {}

  double operator()(double p) const { return eval_(p); }
  double deriv(double p) const { return deriv_(p); }
  const DecayEnvelope& decay() const { return decay_; }

  // Smallest P such that |f| <= eps beyond P, from the declared envelope
  // (and the hard cutoff when one is set).
  double cutoff_p(double eps) const;

 private:
  std::function<double(double)> eval_;
  std::function<double(double)> deriv_;
  DecayEnvelope decay_;
  double hard_cutoff_ = 0.0;
};

// Point-pair kernel k on u >= 0 with |k(u)| <= scale * e^{-rate u}.
class KernelFunction {
 public:
  KernelFunction() = default;
  KernelFunction(std::function<double(double)> eval,
                 std::function<double(double)> deriv, DecayEnvelope decay,
                 double hard_cutoff = 0.0)
      : eval_(std::move(eval)),
        deriv_(std::move(deriv)),
        decay_(decay),
        hard_cutoff_(hard_cutoff) {}

  double operator()(double u) const { return eval_(u); }
  double deriv(double u) const { return deriv_(u); }
  const DecayEnvelope& decay() const { return decay_; }

  double cutoff_u(double eps) const;

 private:
  std::function<double(double)> eval_;
  std::function<double(double)> deriv_;
  DecayEnvelope decay_;
  double hard_cutoff_ = 0.0;
};

// Even (or odd) spectral function with an explicit truncation point t_max
// beyond which |h| is below the working tail cutoff.
class SpectralFunction {
 public:
  SpectralFunction() = default;
  SpectralFunction(std::function<double(double)> eval, Parity parity, double t_max)
      : eval_(std::move(eval)), parity_(parity), t_max_(t_max) {}

  double operator()(double t) const { return eval_(t); }
  Parity parity() const { return parity_; }
  double t_max() const { return t_max_; }

 private:
  std::function<double(double)> eval_;
  Parity parity_ = Parity::even;
  double t_max_ = 0.0;
};

// ---------------------------------------------------------------------------
// Hypergeometric pairings.

// d0_t(f) = int_0^{pi/2} sec^2 v f(sec^2 v) 2F1(s/2, (1-s)/2; 1/2; -tan^2 v) dv
// with s = 1/2 + it.  The conjugate parameter pair makes the kernel real;
// the imaginary residue of each kernel evaluation is asserted < 1e-9 and
// dropped.  Even in t.
double d0_direct(const RadialTestFunction& f, double t, const QuadratureConfig& cfg);

// d1_t(f) = int_0^{pi/2} tan^2 v sec^2 v f(sec^2 v)
//             2F1((s+1)/2, (2-s)/2; 3/2; -tan^2 v) dv.
double d1_direct(const RadialTestFunction& f, double t, const QuadratureConfig& cfg);

// Cached spectral forms of the two pairings (even in t, truncated where the
// values fall below tail_cutoff relative to the peak).
SpectralFunction spectral_d0(const RadialTestFunction& f, const QuadratureConfig& cfg);
SpectralFunction spectral_d1(const RadialTestFunction& f, const QuadratureConfig& cfg);

// ---------------------------------------------------------------------------
// Weyl-type conversions between f and k.

// k0(u) = -((2u+1)/pi) int_{(2u+1)^2}^inf f'(p) / sqrt(p - (2u+1)^2) dp.
KernelFunction k0_from_f(const RadialTestFunction& f, const QuadratureConfig& cfg);

// f(p) = 2 int_{sqrt p}^inf k((x-1)/2) / sqrt(x^2 - p) dx.
RadialTestFunction f_from_k0(const KernelFunction& k, const QuadratureConfig& cfg);

// f(p) = -int_{sqrt p}^inf k'((x-1)/2) / sqrt(x^2 - p) dx.
RadialTestFunction f_from_k1(const KernelFunction& k, const QuadratureConfig& cfg);

// k1'(u) = ((4u+2)/pi) int_{(2u+1)^2}^inf f'(p) / sqrt(p - (2u+1)^2) dp,
// returned as a cached callable on [0, u_max] (zero beyond).
CachedFunction k1prime_from_f(const RadialTestFunction& f, const QuadratureConfig& cfg);

// k1(u) = -int_u^inf k1'(v) dv, assembled from k1prime_from_f.  Its deriv()
// is the cached k1' itself (no finite differences).
KernelFunction k1_from_f(const RadialTestFunction& f, const QuadratureConfig& cfg);

// ---------------------------------------------------------------------------
// Selberg/Harish-Chandra transform chain.

// Holds the incomplete-integral cache q for one kernel so repeated h(t)
// evaluations share the work:
//   q(v)   = int_v^inf k(u) (u - v)^{-1/2} du,
//   g(rho) = 2 q(sinh^2(rho/2)),
//   h(t)   = int e^{i rho t} g(rho) drho   (real, even).
class SelbergChain {
 public:
  SelbergChain(const KernelFunction& k, const QuadratureConfig& cfg);

  double q(double v) const;
  double g(double rho) const;
  double h(double t) const;
  double rho_max() const { return rho_max_; }

 private:
  std::shared_ptr<const CachedFunction> q_;
  double v_max_ = 0.0;
  double rho_max_ = 0.0;
  QuadratureConfig cfg_;
};

// One-shot convenience: h(t) for kernel k (builds a fresh chain per call).
double sht_forward(const KernelFunction& k, double t, const QuadratureConfig& cfg);

// Inverse chain h -> q -> k:
//   q(sinh^2(rho/2)) = (1/4pi) int e^{i rho t} h(t) dt,
//   k(u) = -(1/pi) int_u^inf q'(v) (v - u)^{-1/2} dv.
// Only the even part of h contributes; an odd perturbation is annihilated.
KernelFunction sht_inverse(const SpectralFunction& h, const QuadratureConfig& cfg);

// Route equality d0_t(f) = h_{k0}(t) / 2 evaluated through the chain.
double d0_via_sht(const RadialTestFunction& f, double t, const QuadratureConfig& cfg);
// Same for the weighted pairing, through k1.
double d1_via_sht(const RadialTestFunction& f, double t, const QuadratureConfig& cfg);

// ---------------------------------------------------------------------------
// Reconstruction kernel I(W, R), W = cosh w <= R = cosh rho.

// Quadrature form (substitution y = sin^2 phi removes both endpoints):
//   I(W,R) = -(4 sqrt2 / pi) int_0^{pi/2} (2W + (R-W) sin^2 phi)^{-1/2} dphi.
double kernel_I(double W, double R, const QuadratureConfig& cfg);

// Closed form -2 W^{-1/2} 2F1(1/2, 1/2; 1; (W-R)/(2W)) and its partials.
double kernel_I_closed(double W, double R);
double kernel_I_dR(double W, double R);
double kernel_I_dW(double W, double R);

// ---------------------------------------------------------------------------
// Profiles and reconstruction.

// omega(rho) = (1/2pi) int e^{i rho t} d0_t dt  (cosine form on the half line).
double omega_from_d0(const SpectralFunction& d0, double rho, const QuadratureConfig& cfg);
double omega_deriv_from_d0(const SpectralFunction& d0, double rho,
                           const QuadratureConfig& cfg);

// tau(rho) = kTauHalfLineNorm * int_0^inf sin(rho t) t d1_t dt.  The absolute
// normalization is pinned by the reconstruction round trip
// f == reconstruct_f1(spectral_d1(f)); see the calibration test.
inline constexpr double kTauHalfLineNorm = 1.0 / kPi;
double tau_from_d1(const SpectralFunction& d1, double rho, const QuadratureConfig& cfg);
double tau_deriv_from_d1(const SpectralFunction& d1, double rho,
                         const QuadratureConfig& cfg);

// A reconstruction profile is either omega (plain pairing) or tau (weighted
// pairing, tau(rho) = kappa(rho) sinh rho).  `value` and `deriv` must be
// evaluable on [0, rho_max]; landmarks seed the quadrature subdivision.
struct ReconstructionProfile {
  enum class Kind { omega, tau };
  Kind kind = Kind::omega;
  std::function<double(double)> value;
  std::function<double(double)> deriv;
  double rho_max = 0.0;
  std::vector<double> landmarks;

  // kappa'(rho) for tau-kind profiles, with the removable rho -> 0 point
  // handled by a linear model below 1e-3.
  double kappa_prime(double rho) const;
};

// Profiles derived from spectra, with value/deriv materialized as cached
// evaluators of the corresponding Fourier forms.  (The derivative uses the
// differentiated Fourier integral rather than finite differences of the
// cached profile: the reconstruction tolerances require derivative accuracy
// at the cache's absolute level.)
ReconstructionProfile profile_from_d0(const SpectralFunction& d0,
                                      const QuadratureConfig& cfg);
ReconstructionProfile profile_from_d1(const SpectralFunction& d1,
                                      const QuadratureConfig& cfg);

// f(cosh^2 w) = int_w^inf omega'(rho) I(cosh w, cosh rho) drho        (omega)
// f(cosh^2 w) = int_w^inf kappa'(rho) I(cosh w, cosh rho) drho        (tau)
double reconstruct(const ReconstructionProfile& profile, double w,
                   const QuadratureConfig& cfg);
double reconstruct_f0(const SpectralFunction& d0, double w, const QuadratureConfig& cfg);
double reconstruct_f1(const SpectralFunction& d1, double w, const QuadratureConfig& cfg);

// Majorants entering the pointwise bounds on reconstructed functions:
//   majorant_a(w) = |omega(w)| + int_w^inf |omega|,
//   majorant_b(w) = |tau'(w)| + |tau(w)| + int_w^inf |tau|.
double majorant_a(const ReconstructionProfile& omega_profile, double w,
                  const QuadratureConfig& cfg);
double majorant_b(const ReconstructionProfile& tau_profile, double w,
                  const QuadratureConfig& cfg);

namespace detail {

// Five-point central difference with the usual cube-root step scaling.
template <class F>
double fd5(F&& f, double x, double scale = 1.0) {
  const double h =
      std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(scale, std::fabs(x));
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

}  // namespace detail

}  // namespace hypersieve::transforms
