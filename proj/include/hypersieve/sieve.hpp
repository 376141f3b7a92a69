#pragma once
// Large-sieve workbench on synthetic spectra: the S-matrix with its two
// smoothing weights, the duality/Gram row-sum reduction, Gaussian spacing
// sums over sample points in [X, 2X], the period recursion factors, and a
// randomized ratio experiment against the (T + X/delta) budget.
//
// Everything here is deterministic: randomness comes from an explicit
// 64-bit seed, uniforms are the top 53 bits of mt19937_64 words, and
// normals are fixed-form Box-Muller (two uniforms per draw), so recorded
// baselines reproduce bit-for-bit across runs.

#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "hypersieve/numerics.hpp"

namespace hypersieve::sieve {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

enum class WeightMode { m0, m1 };

// A synthetic point spectrum: eigenvalue parameters t_j (sorted ascending)
// with one period value per t_j and the weight family the periods belong to.
struct SyntheticSpectrum {
  std::vector<double> eigen_ts;
  std::vector<double> periods;
  WeightMode weight_mode = WeightMode::m0;

  // Throws std::invalid_argument unless sizes match, every entry is finite,
  // and eigen_ts is sorted ascending.
  void validate() const;
};

// Sample points x_1 < ... < x_R inside [X, 2X] with minimum gap delta.
struct SamplePoints {
  std::vector<double> xs;
  double X = 2.0;
  double delta = 1.0;

  // Throws std::invalid_argument unless X > 1, delta > 0, xs is non-empty,
  // every x lies in [X, 2X], and all pairwise gaps are >= delta (up to a
  // 1e-12 relative slack).
  void validate() const;
};

// count points spread evenly across [X, 2X]; the resulting gap must be >= delta.
SamplePoints equal_spaced_points(double X, double delta, int count);
// count points packed at gap exactly delta starting from X; must fit in [X, 2X].
SamplePoints clustered_points(double X, double delta, int count);

// Coefficient vector with its recorded norm, norm_star^2 = sum |a_j|^2.
struct CoefficientVector {
  std::vector<std::complex<double>> a;
  double norm_star = 0.0;

  // Throws std::invalid_argument when norm_star disagrees with the entries.
  void validate() const;
};

// Builds the vector and fills in norm_star.
CoefficientVector make_coefficients(std::vector<std::complex<double>> a);

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// Smoothing weight w(t) at cutoff T > 0:
//   m0: exp(-t^2 / 4T^2)
//   m1: (lambda / t^2) (1 - e^{-t^2/4}) exp(-t^2 / 4T^2),  lambda = t^2 + 1/4,
// with the t = 0 value lambda/4 = 1/16 taken analytically (the factor
// (1 - e^{-t^2/4})/t^2 tends to 1/4).
double spectral_weight(WeightMode mode, double t, double T);

// S_{nu,mu} = sum_j w_j(T) cos(r_{nu,mu} t_j) u_j^2 with
// r_{nu,mu} = |log(x_nu / x_mu)|.  Symmetric with non-negative diagonal.
// Rows are assembled in parallel; the j-sum order is fixed, so the result
// is deterministic.
std::vector<std::vector<double>> s_matrix(const SamplePoints& pts, double T,
                                          const SyntheticSpectrum& spec);

// Duality/Gram reduction: for V of shape R x J returns
//   lhs = sum_nu |sum_j a_j V_{nu,j}|^2,
//   rhs = norm_star^2 * max_mu sum_nu |(V V*)_{mu,nu}|.
// lhs <= rhs always (the Gram matrix's spectral radius is at most its
// largest absolute row sum).
std::pair<double, double> dual_reduction_bound(
    const std::vector<std::vector<std::complex<double>>>& V,
    const CoefficientVector& a);

// Recorded global constant for the spacing bound below; chosen once with
// headroom above the measured grid maximum (4.8145 over T in {1,10,100},
// X in {10,100}, delta in {0.01,0.1,1}, even and clustered layouts; see
// baselines/sieve_constants.txt), not tuned per call.
inline constexpr double kSpacingConstant = 6.0;

// Gaussian spacing sum: worst row of sum_nu exp(-T^2 r_{mu,nu}^2 / 2) over
// mu, paired with the budget bound = C (1 + X / (delta T)).
std::pair<double, double> spacing_sum(const SamplePoints& pts, double T,
                                      double C = kSpacingConstant);

// Period recursion factor -sqrt((m^2+m+lambda) / (m^2+3m+2+lambda)) taking
// the order-m period to order m+2.  Always in (-1, 0]; |factor| increases
// in lambda.  Throws std::invalid_argument for m < 0 or lambda < 0.
double period_recursion_factor(int m, double lambda);

// One sieve ratio:
//   lhs = sum_nu |sum_{|t_j| <= T} a_j x_nu^{i t_j} u_j|^2,
//   rhs = (T + X/delta) * norm_star^2,
// returned as lhs/rhs (0 when a = 0).  a indexes the active eigenvalues
// |t_j| <= T in spectrum order and must match their count.
double sieve_ratio(const SamplePoints& pts, double T,
                   const SyntheticSpectrum& spec, const CoefficientVector& a);

struct SieveStats {
  std::uint64_t seed = 0;
  int trials = 0;
  double ratio_max = 0.0;
  double ratio_mean = 0.0;
  // True when some |log(x_nu/x_mu)| exceeds log 2, i.e. a run that would
  // need the dyadic partition step; never the case for valid SamplePoints.
  bool partition_required = false;
};

// Draws `trials` standard complex Gaussian coefficient vectors on the
// active eigenvalues (deterministically from seed; trial k is independent
// of threading) and reports the distribution of sieve_ratio.
SieveStats sieve_experiment(const SamplePoints& pts, double T,
                            const SyntheticSpectrum& spec, int trials,
                            std::uint64_t seed);

// Deterministic synthetic spectrum obeying the T^2 counting law: exactly
// round(density_const * t_max^2) parameters t = t_max sqrt(u) in
// [0, t_max), sorted, with periods g_j (1 + t_j^2)^{-1/4} for standard
// normal g_j (a declared polynomial decay in t_j).
SyntheticSpectrum weyl_synthetic(double t_max, double density_const,
                                 std::uint64_t seed,
                                 WeightMode mode = WeightMode::m0);

// CSV with header "t,period", one row per eigenvalue, full double
// precision; parse accepts exactly that shape back, ignoring any
// '#'-prefixed metadata lines above the header.
std::string spectrum_to_csv(const SyntheticSpectrum& spec);
SyntheticSpectrum spectrum_from_csv(const std::string& csv,
                                    WeightMode mode = WeightMode::m0);

// ---------------------------------------------------------------------------
// Reproducible randomness (exposed for tests and the CLI)
// ---------------------------------------------------------------------------

// mt19937_64 words mapped to doubles by fixed formulas, bypassing the
// implementation-defined standard distributions so that seeded runs give
// identical streams on every platform.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : rng_(seed) {}

  // Uniform in [0, 1): the top 53 bits of the next word.
  double uniform() { return double(rng_() >> 11) * 0x1.0p-53; }
  // Standard normal by Box-Muller; always consumes exactly two words.
  double normal();

 private:
  std::mt19937_64 rng_;
};

}  // namespace hypersieve::sieve
