#pragma once
// The concrete Gaussian/erfc window pair (f0, f1): the test functions whose
// spectral forms are
//   d0(t) = e^{-t^2/4T^2} cos(rt),
//   d1(t) = (1/2t^2) e^{-t^2/4T^2} (1 - e^{-t^2/4}) cos(rt),
// together with their closed-form profiles omega, tau, the reconstruction
// caches, the tail/intersect integrals of the geometric side, and the full
// bound suite (clauses a-i, a-ii, b-i, b-ii, c-i, c-ii) with measured
// constants checked against committed baselines.
//
// The closed-form evaluators are pure formulas and do not validate their
// parameters (several identity tests evaluate them at boundary values such
// as r = 0); everything that builds caches or reports validates via
// WindowParams::validate().

#include <memory>
#include <string>
#include <vector>

#include "hypersieve/numerics.hpp"
#include "hypersieve/transforms.hpp"

namespace hypersieve::window {

struct WindowParams {
  double T = 4.0;  // spectral width, >= 1
  double r = 0.1;  // oscillation offset, 0 < r <= log 2

  // Throws std::domain_error when outside the admissible range.
  void validate() const;

  // B = T / sqrt(T^2 + 1), the width of the second Gaussian pair in tau.
  double B() const;
};

// ---------------------------------------------------------------------------
// Closed forms.

// d0(t) = e^{-t^2/4T^2} cos(rt).
double d0_window(double t, const WindowParams& p);

// d1(t) = (1/2t^2) e^{-t^2/4T^2} (1 - e^{-t^2/4}) cos(rt); the removable
// singularity at t = 0 is handled by the declared Taylor value
// (1/8)(1 - t^2/8 + t^4/96) for |t| < 1e-3 (limit 1/8 at t = 0).
double d1_window(double t, const WindowParams& p);

// omega(x) = (T / 2 sqrt(pi)) (e^{-T^2(x-r)^2} + e^{-T^2(x+r)^2}) and its
// derivative in x.
double omega_window(double x, const WindowParams& p);
double omega_prime_window(double x, const WindowParams& p);

// tau(rho) = -(1/8) [erfc(T(rho-r)) - erfc(B(rho-r))
//                    + erfc(T(rho+r)) - erfc(B(rho+r))].
// The prefactor matches the half-line normalization kTauHalfLineNorm pinned
// by the weighted reconstruction round trip (tau_from_d1(d1_window) must
// reproduce this formula; see the Fourier closed-form tests).
double tau_window(double rho, const WindowParams& p);
// tau'(rho) = (1/4 sqrt(pi)) [T e^{-T^2(rho-r)^2} - B e^{-B^2(rho-r)^2}
//                             + T e^{-T^2(rho+r)^2} - B e^{-B^2(rho+r)^2}].
double tau_prime_window(double rho, const WindowParams& p);

// Spectral wrappers (even, truncated where the Gaussian factor reaches
// double-precision dust) for use with the transform-module Fourier forms.
transforms::SpectralFunction spectrum_d0(const WindowParams& p);
transforms::SpectralFunction spectrum_d1(const WindowParams& p);

// Closed-form reconstruction profiles (no quadrature behind value/deriv).
transforms::ReconstructionProfile profile0(const WindowParams& p);
transforms::ReconstructionProfile profile1(const WindowParams& p);

// ---------------------------------------------------------------------------
// Cached reconstruction of the implicitly defined f0, f1.

class WindowReconstruction {
 public:
  WindowReconstruction(const WindowParams& p, const QuadratureConfig& cfg);

  // f0(p_val), f1(p_val) for p_val >= 1, via the closed-form profiles and the
  // kernel I; cached on a log grid in p_val, identically zero beyond the
  // profile support.
  double f0(double p_val) const;
  double f1(double p_val) const;

  // Derivatives d f/dp via the analytic chain
  //   d/dw int_w^R s(rho) I(cosh w, cosh rho) drho
  //     = -s(w) I(cosh w, cosh w) + sinh w int_w^R s(rho) dI/dW drho,
  // divided by dp/dw = sinh 2w (secant model across the removable w = 0
  // point). Direct evaluation, no cache.
  double f0_prime(double p_val) const;
  double f1_prime(double p_val) const;

  // G1(p) = f1(p) + 2 (p-1) f1'(p), so that (x f1(x^2+1))' = G1(x^2+1);
  // cached on a log grid (the form the clause (b)/(c) integrands take).
  double g1(double p_val) const;

  // d/dw [sinh(w) f1(cosh^2 w)] by central differences with the given step
  // (odd extension below w = 0). Exercised at h and h/2 by the Richardson
  // consistency tests; equals cosh(w) G1(cosh^2 w) analytically.
  double sinh_f1_deriv(double w, double h = 1e-4) const;

  // Radial wrappers for the pairing integrals (hard cutoff at the profile
  // support edge).
  transforms::RadialTestFunction f0_radial() const;
  transforms::RadialTestFunction f1_radial() const;

  const transforms::ReconstructionProfile& prof0() const { return prof0_; }
  const transforms::ReconstructionProfile& prof1() const { return prof1_; }
  double p_max0() const { return p_max0_; }
  double p_max1() const { return p_max1_; }
  const WindowParams& params() const { return params_; }

 private:
  double chain_deriv(const transforms::ReconstructionProfile& prof, double p_val) const;
  // Uncached f1 (used while the caches are being built).
  double f1_direct(double p_val) const;

  WindowParams params_;
  QuadratureConfig cfg_;
  QuadratureConfig tight_;  // FD stencils need quadrature noise ~1e-12
  transforms::ReconstructionProfile prof0_;
  transforms::ReconstructionProfile prof1_;
  double p_max0_ = 1.0;
  double p_max1_ = 1.0;
  std::shared_ptr<const CachedFunction> f0_cache_;   // over log p
  std::shared_ptr<const CachedFunction> f1_cache_;   // over log p
  std::shared_ptr<const CachedFunction> g1_cache_;   // over log p
};

// Convenience one-shot evaluators; reconstructions are memoized per
// (T, r, abs_tol) behind a mutex, so repeated calls are cheap.
double f0_window(double p_val, const WindowParams& p, const QuadratureConfig& cfg);
double f1_window(double p_val, const WindowParams& p, const QuadratureConfig& cfg);

// ---------------------------------------------------------------------------
// Geometric-side integrals.

// int_u^inf f(x^2+1) / sqrt(x^2 - u^2) dx.  For u > 0 the substitution
// x = u cosh(theta) removes the endpoint singularity; u = 0 integrates
// f(x^2+1)/x directly and diverges logarithmically unless f(1) = 0
// (DivergenceError).
double tail_integral_g0(double u, const transforms::RadialTestFunction& f,
                        const QuadratureConfig& cfg);

// int_0^inf f(x^2+1) / sqrt(x^2 + u^2) dx for u > 0 (substitution
// x = u sinh(theta)). The bounds of interest hold for u >> 1; the caller
// picks the grid.
double intersect_integral(double u, const transforms::RadialTestFunction& f,
                          const QuadratureConfig& cfg);

// ---------------------------------------------------------------------------
// Bound suite.

struct BoundReport {
  std::vector<double> grid;      // abscissae (w for clause a, u for b and c)
  std::vector<double> lhs;       // measured left-hand sides (signed)
  std::vector<double> majorant;  // bound values at the kept points, all > 0
  double ratio_sup = 0.0;        // max |lhs| / majorant over the kept points
  std::string regime;            // "w<=2r" | "w>=2r" | "tail" | "intersect"
  int skipped = 0;  // points dropped because the majorant sits below the
                    // measurement floor (max of 1e-280 and 1e-6 times the
                    // largest measured |lhs|): a ratio cannot be certified
                    // where the bound is smaller than the instrument noise.
};

enum class AVariant {
  f0_pointwise,    // lhs = f0(cosh^2 w)
  f1_derivative,   // lhs = (sinh w * f1(cosh^2 w))' by central differences
};

// Clause (a): majorant T e^{-T^2(w-r)^2} + 1 on w <= 2r; on w >= 2r the +1
// drops (f0 variant) or becomes e^{-2(w-r)^2/3} (f1 derivative variant).
// fd_step only affects the f1 variant.
BoundReport bound_suite_a(const WindowReconstruction& rec,
                          const std::vector<double>& w_grid, AVariant variant,
                          const QuadratureConfig& cfg, double fd_step = 1e-4);

// Clause (b): tail integrals over u with asinh(u) >= 2r, majorant
// T e^{-T^2 r^2/2} u^{-2} (weight 0) or (T e^{-T^2 r^2/2} + e^{-r^2/2}) u^{-2}
// (weight 1, integrand (x f1(x^2+1))').
BoundReport bound_suite_b(const WindowReconstruction& rec, int weight,
                          const QuadratureConfig& cfg);

// Clause (c): intersect integrals at u in {2,4,8,16}, majorant 1.
BoundReport bound_suite_c(const WindowReconstruction& rec, int weight,
                          const QuadratureConfig& cfg);

// The spec grids for clause (a): 21 uniform points on [0, 2r] and 64
// log-uniform points on [2r, 5].
std::vector<double> grid_below_2r(const WindowParams& p);
std::vector<double> grid_above_2r(const WindowParams& p);

// Measured constant for one clause ("a-i", "a-ii", "b-i", "b-ii", "c-i",
// "c-ii") at the given parameters: the max ratio_sup over the clause's
// reports. Returns 0 with *all_skipped = true when no grid point was
// measurable.
double clause_constant(const std::string& clause, const WindowParams& p,
                       const QuadratureConfig& cfg, bool* all_skipped = nullptr);

// All six clause names in report order.
const std::vector<std::string>& clause_names();

}  // namespace hypersieve::window
