#pragma once

// Geometric side of the trace identity on the modular group: Huber
// coordinates adapted to a closed geodesic, the B-invariant of a double
// coset, coset and double-coset enumeration with saturation auditing, the
// geodesic pairing integrals g0/g1, Huber series, and the automorphic
// kernel sum they equal.

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypersieve/numerics.hpp"
#include "hypersieve/transforms.hpp"

namespace hypersieve::lattice {

// ---------------------------------------------------------------------------
// Group elements and frames
// ---------------------------------------------------------------------------

// Integer matrix [[a,b],[c,d]] with determinant 1, viewed as an element of
// PSL(2,Z): g and -g are the same element, and normalized() picks the sign
// with a > 0, or a == 0 and b > 0.  Entry arithmetic is exact in 64-bit
// integers; every routine here keeps entries far below the overflow range.
struct GroupElement {
  std::int64_t a = 1;
  std::int64_t b = 0;
  std::int64_t c = 0;
  std::int64_t d = 1;

  // Throws std::invalid_argument unless det == 1.
  void validate() const;

  std::int64_t trace() const { return a + d; }

  GroupElement normalized() const;
  GroupElement inverse() const { return GroupElement{d, -b, -c, a}; }

  // Moebius action on the upper half plane.
  std::complex<double> apply(std::complex<double> z) const;

  friend GroupElement operator*(const GroupElement& l, const GroupElement& r);
  friend bool operator==(const GroupElement& l, const GroupElement& r) {
    return l.a == r.a && l.b == r.b && l.c == r.c && l.d == r.d;
  }
  friend bool operator<(const GroupElement& l, const GroupElement& r);
};

// g^n for n of either sign (g must have det 1).
GroupElement power(const GroupElement& g, int n);

// Real 2x2 matrix with determinant 1, used for the conjugation that maps a
// geodesic to the imaginary axis.
struct Mat2 {
  double m00 = 1.0;
  double m01 = 0.0;
  double m10 = 0.0;
  double m11 = 1.0;

  std::complex<double> apply(std::complex<double> z) const;
  friend Mat2 operator*(const Mat2& l, const Mat2& r);
};

Mat2 to_real(const GroupElement& g);

// Geodesic polar coordinates about the imaginary axis: z = e^u (-sin v + i
// cos v) with u real and v in (-pi/2, pi/2).  u moves along the axis, v
// measures the signed angle away from it; cosh(dist(z, axis)) = 1/cos v.
struct HuberPoint {
  double u = 0.0;
  double v = 0.0;
};

// Requires Im z > 0; throws std::domain_error otherwise.
HuberPoint huber_coords(std::complex<double> z);

// Scales attached to a hyperbolic trace t with |t| > 2: the multiplier
// mu = (|t| + sqrt(t^2 - 4)) / 2 > 1, the norm mu^2, and the geodesic
// length log(mu^2).  Throws std::domain_error for |t| <= 2.
struct FrameScales {
  double mu = 1.0;
  double norm_lambda = 1.0;
  double length = 0.0;
};

FrameScales frame_scales(double trace);

// A hyperbolic generator together with the change of frame that makes it
// diagonal: conjugator * generator * conjugator^{-1} = diag(mu, 1/mu) up to
// a residual below 1e-12.  The conjugator maps the generator's axis onto
// the imaginary axis with the attracting endpoint at infinity.
struct GeodesicFrame {
  GroupElement generator;
  Mat2 conjugator;
  double mu = 1.0;
  double norm_lambda = 1.0;
  double length = 0.0;

  // conjugator * g * conjugator^{-1}, as a real matrix.
  Mat2 conj(const GroupElement& g) const;
  // Moebius action of the conjugator.
  std::complex<double> conj_point(std::complex<double> z) const;
};

// Throws std::domain_error if |trace| <= 2 (not hyperbolic).
GeodesicFrame build_frame(const GroupElement& generator);

// The frame of the default generator [[2,1],[1,1]].
const GeodesicFrame& default_frame();

// ---------------------------------------------------------------------------
// Invariants and enumeration
// ---------------------------------------------------------------------------

// B(g) = a'd' + b'c' of the conjugated matrix g' = M g M^{-1}.  Constant on
// double cosets Gamma_1 g Gamma_1 where Gamma_1 = <generator>; equals 1
// exactly on Gamma_1 itself, and cosh(dist(axis, g axis)) = |B| for
// |B| > 1.
double b_invariant(const GroupElement& g, const GeodesicFrame& frame);

// All elements of PSL(2,Z) with |entries| <= entry_bound, reduced to one
// representative per left coset Gamma_1 g: the representative whose
// conjugated image moves the base point i to u-translate in [0, length).
// Sorted by entries; duplicate-free.
std::vector<GroupElement> enumerate_cosets(const GeodesicFrame& frame,
                                           int entry_bound);

// True iff g and h lie in the same left coset Gamma_1 g, i.e. h g^{-1} is a
// power of the generator (checked exactly in integers, |power| <= 64).
bool same_coset(const GroupElement& g, const GroupElement& h,
                const GeodesicFrame& frame);

// True iff h lies in Gamma_1 g Gamma_1, checked by exact orbit search over
// generator^l * g * generator^r with |l|, |r| <= power_bound.
bool same_double_coset(const GroupElement& g, const GroupElement& h,
                       const GeodesicFrame& frame, int power_bound = 12);

// One double coset Gamma_1 g Gamma_1, represented canonically: among all
// generator^l * g * generator^r the (sign-normalized) matrix of minimal
// Frobenius norm, ties broken by lexicographic entry order.
struct DoubleCosetRep {
  GroupElement element;
  double B = 0.0;
  std::int64_t height = 1;  // max |entry| of the canonical representative
};

// Canonical representative of the double coset of g.
GroupElement canonical_double_coset_rep(const GroupElement& g,
                                        const GeodesicFrame& frame);

// Raised when an enumeration cannot certify completeness within the
// requested entry bound.
class CensusIncompleteError : public std::runtime_error {
 public:
  explicit CensusIncompleteError(const std::string& what)
      : std::runtime_error(what) {}
};

// Census of double cosets Gamma_1 g Gamma_1 with g not in Gamma_1 and
// |B(g)| <= b_bound, found among elements with |entries| <= entry_bound.
// Saturation is audited by re-running at twice the entry bound: if the
// censuses differ, *saturated is set false when a pointer is supplied, and
// CensusIncompleteError is thrown otherwise.  Sorted by |B|, then entries.
std::vector<DoubleCosetRep> enumerate_double_cosets(const GeodesicFrame& frame,
                                                    double b_bound,
                                                    int entry_bound,
                                                    bool* saturated = nullptr);

// Census size |{double cosets : |B| <= b_bound}|, same saturation contract.
int count_B(const GeodesicFrame& frame, double b_bound, int entry_bound,
            bool* saturated = nullptr);

// CSV serialization of a census: header "a,b,c,d,B,height", one row per
// representative, B with 12 significant digits.
std::string census_to_csv(const std::vector<DoubleCosetRep>& reps);

// ---------------------------------------------------------------------------
// Pairing integrals
// ---------------------------------------------------------------------------

// g0(B; f) pairs a radial test function with a double coset at invariant B:
//   |B| > 1:  2 * integral_{sqrt(B^2-1)}^inf f(x^2+1) dx / sqrt(x^2-B^2+1)
//   |B| < 1:  2 * integral_0^inf     f(x^2+1) dx / sqrt(x^2+1-B^2)
// Even in B.  At |B| = 1 the integral diverges logarithmically unless
// f(1) = 0; DivergenceError propagates from the window module.
double g0_geom(double B, const transforms::RadialTestFunction& f,
               const QuadratureConfig& cfg);

// The weight entering g1: t -> f(t) + 2(t-1) f'(t), so that
// (x f(x^2+1))' matches the g0 integrand with this weight.
transforms::RadialTestFunction g1_weight(const transforms::RadialTestFunction& f);

// g1(B; f) = B * g0(B; g1_weight(f)).  Odd in B; g1(0) = 0.
double g1_geom(double B, const transforms::RadialTestFunction& f,
               const QuadratureConfig& cfg);

// ---------------------------------------------------------------------------
// Huber series and the kernel sum
// ---------------------------------------------------------------------------

// A0(z) = sum over cosets Gamma_1 gamma of f(sec^2 v(gamma z)) and
// A1(z) = sum of tan(v(gamma z)) f(sec^2 v(gamma z)), with v measured in
// the frame of the geodesic.  Cosets beyond f's decay cutoff (relative to
// cfg.abs_tol) are skipped.
double huber_series_A0(const transforms::RadialTestFunction& f,
                       std::complex<double> z, const GeodesicFrame& frame,
                       int entry_bound, const QuadratureConfig& cfg);
double huber_series_A1(const transforms::RadialTestFunction& f,
                       std::complex<double> z, const GeodesicFrame& frame,
                       int entry_bound, const QuadratureConfig& cfg);

// F(z; theta | k) = sum over cosets Gamma_1 gamma of
//   integral_0^inf k( (p/(4r) + r/4) sec theta + (x/2y) tan theta - 1/2 )
//   dr / r,
// where p = (x^2 + y^2)/y^2 and x + iy is the conjugated image of gamma z.
// The elements with |entries| <= entry_bound are reduced to coset
// representatives; the generator direction of the group is carried by the
// r-integral, so summing unreduced elements would count each coset once
// per representative.  Requires |theta| < pi/2.
double kernel_sum_F(const transforms::KernelFunction& k,
                    std::complex<double> z, double theta,
                    const GeodesicFrame& frame, int entry_bound,
                    const QuadratureConfig& cfg);

// ---------------------------------------------------------------------------
// Geometric side
// ---------------------------------------------------------------------------

// 1 if the group contains an element with zero diagonal (a = d = 0) within
// |entries| <= entry_bound, else 0.  congruence_level restricts to matrices
// congruent to the identity modulo that level: the principal congruence
// subgroup of level 2 (or higher) has no zero-diagonal elements at all.
int epsilon_flag(int entry_bound, int congruence_level = 1);

enum class GeomVariant { a, b };

struct GeometricSideResult {
  double value = 0.0;          // (1 +/- eps) f(1) length + census_sum
  double census_sum = 0.0;     // sum of g0 or g1 over the census
  double census_abs_sum = 0.0; // sum of |terms|
  int census_count = 0;        // census entries contributing to the sum
  int b_one_count = 0;         // |B| = 1 entries reported, not summed
  bool saturated = true;
};

// Geometric side of the trace identity: variant a uses g0 and weight
// (1 + eps), variant b uses g1 and (1 - eps), over the census of double
// cosets with |B| <= b_bound.  Entries with |B| = 1, where the pairing
// integral diverges unless f(1) = 0 (the modular group has exactly one:
// the axis-reversing element [[0,-1],[1,0]] with B = -1), are counted
// separately in b_one_count and excluded from the sum.
GeometricSideResult geometric_side_detail(GeomVariant variant,
                                          const transforms::RadialTestFunction& f,
                                          const GeodesicFrame& frame,
                                          double b_bound, int entry_bound,
                                          const QuadratureConfig& cfg);

// The value alone; throws CensusIncompleteError if the census did not
// saturate within the entry bound.
double geometric_side(GeomVariant variant,
                      const transforms::RadialTestFunction& f,
                      const GeodesicFrame& frame, double b_bound,
                      int entry_bound, const QuadratureConfig& cfg);

}  // namespace hypersieve::lattice
