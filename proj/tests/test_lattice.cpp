#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hypersieve/lattice.hpp"
#include "hypersieve/numerics.hpp"
#include "hypersieve/transforms.hpp"
#include "hypersieve/window.hpp"

using namespace hypersieve;
namespace lat = hypersieve::lattice;
namespace tr = hypersieve::transforms;
namespace wd = hypersieve::window;

namespace {

const QuadratureConfig kCfg;
const lat::GroupElement kGen{2, 1, 1, 1};
const lat::GroupElement kS{0, -1, 1, 0};  // axis-reversing involution
const double kLen = 2.0 * std::acosh(1.5);
const double kMu = 0.5 * (3.0 + std::sqrt(5.0));

// f(p) = e^{1-p}: analytic derivative, envelope e * e^{-sqrt(p)} valid on
// p >= 1 since p >= sqrt(p) there.
tr::RadialTestFunction exp_radial() {
  return tr::RadialTestFunction([](double p) { return std::exp(1.0 - p); },
                                [](double p) { return -std::exp(1.0 - p); },
                                {std::exp(1.0), 1.0});
}

// f(p) = (p-1) e^{1-p}: vanishes at p = 1, so the |B| = 1 integral is finite.
tr::RadialTestFunction vanishing_radial() {
  return tr::RadialTestFunction(
      [](double p) { return (p - 1.0) * std::exp(1.0 - p); },
      [](double p) { return (2.0 - p) * std::exp(1.0 - p); }, {8.0, 0.5});
}

tr::RadialTestFunction zero_radial() {
  return tr::RadialTestFunction([](double) { return 0.0; },
                                [](double) { return 0.0; }, {0.0, 1.0});
}

// All of PSL(2,Z) with |entries| <= bound, by brute force, sign-normalized.
std::vector<lat::GroupElement> brute_elements(int bound) {
  std::set<lat::GroupElement> out;
  for (int a = -bound; a <= bound; ++a)
    for (int b = -bound; b <= bound; ++b)
      for (int c = -bound; c <= bound; ++c)
        for (int d = -bound; d <= bound; ++d)
          if (a * d - b * c == 1)
            out.insert(lat::GroupElement{a, b, c, d}.normalized());
  return {out.begin(), out.end()};
}

const wd::WindowReconstruction& ref_rec() {
  static const wd::WindowReconstruction rec(wd::WindowParams{4.0, 0.1}, kCfg);
  return rec;
}

}  // namespace

TEST_CASE("group elements: algebra, normalization, action") {
  const lat::GroupElement id{};
  CHECK(id.a == 1);
  CHECK(id.trace() == 2);
  kGen.validate();
  const lat::GroupElement bad{2, 0, 0, 2};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  CHECK(kGen * kGen.inverse() == id);
  CHECK(kGen.inverse() == lat::GroupElement{1, -1, -1, 2});
  CHECK(lat::GroupElement{-2, -1, -1, -1}.normalized() == kGen);
  CHECK(lat::GroupElement{0, -1, 1, 0}.normalized() ==
        lat::GroupElement{0, 1, -1, 0});

  // Moebius action: [[2,1],[1,1]] i = (2i+1)/(i+1) = (3+i)/2.
  const std::complex<double> w = kGen.apply({0.0, 1.0});
  CHECK(w.real() == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(w.imag() == doctest::Approx(0.5).epsilon(1e-14));

  // Real lift multiplies compatibly with the integer product.
  const lat::Mat2 prod = lat::to_real(kGen * kS);
  const lat::Mat2 sep = lat::to_real(kGen) * lat::to_real(kS);
  CHECK(prod.m00 == doctest::Approx(sep.m00).epsilon(1e-14));
  CHECK(prod.m01 == doctest::Approx(sep.m01).epsilon(1e-14));
  CHECK(prod.m10 == doctest::Approx(sep.m10).epsilon(1e-14));
  CHECK(prod.m11 == doctest::Approx(sep.m11).epsilon(1e-14));
}

TEST_CASE("power: recursion, exponent guard, overflow detection") {
  const lat::GroupElement id{};
  CHECK(lat::power(kGen, 0) == id);
  CHECK(lat::power(kGen, 1) == kGen);
  CHECK(lat::power(kGen, 3) == kGen * kGen * kGen);
  CHECK(lat::power(kGen, -2) == kGen.inverse() * kGen.inverse());
  CHECK(lat::power(kGen, 2) * lat::power(kGen, -2) == id);
  // Entries grow like mu^n ~ 2.618^n; n = 60 exceeds int64.
  CHECK_THROWS_AS(lat::power(kGen, 60), std::overflow_error);
  CHECK_THROWS_AS(lat::power(kGen, 65), std::domain_error);
}

TEST_CASE("huber coordinates: anchors, round trip, domain") {
  auto hp = lat::huber_coords({0.0, 1.0});
  CHECK(hp.u == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(hp.v == doctest::Approx(0.0).epsilon(1e-15));
  hp = lat::huber_coords({0.0, 2.0});
  CHECK(hp.u == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(hp.v == doctest::Approx(0.0).epsilon(1e-15));
  hp = lat::huber_coords({1.0, 1.0});
  CHECK(hp.u == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-14));
  CHECK(hp.v == doctest::Approx(-0.25 * M_PI).epsilon(1e-14));

  // z = e^u (-sin v + i cos v) inverts the chart.
  for (double u : {0.3, -0.2})
    for (double v : {-0.9, 0.7}) {
      const std::complex<double> z{-std::exp(u) * std::sin(v),
                                   std::exp(u) * std::cos(v)};
      hp = lat::huber_coords(z);
      CHECK(hp.u == doctest::Approx(u).epsilon(1e-13));
      CHECK(hp.v == doctest::Approx(v).epsilon(1e-13));
    }

  const std::complex<double> boundary{1.0, 0.0};
  const std::complex<double> lower{1.0, -2.0};
  CHECK_THROWS_AS(lat::huber_coords(boundary), std::domain_error);
  CHECK_THROWS_AS(lat::huber_coords(lower), std::domain_error);
}

TEST_CASE("frame scales and build_frame") {
  // trace 2.5 factors as mu + 1/mu with mu = 2.
  const auto fs = lat::frame_scales(2.5);
  CHECK(fs.mu == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(fs.norm_lambda == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(fs.length == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-14));
  const auto fsn = lat::frame_scales(-2.5);
  CHECK(fsn.mu == doctest::Approx(2.0).epsilon(1e-14));
  CHECK_THROWS_AS(lat::frame_scales(2.0), std::domain_error);
  CHECK_THROWS_AS(lat::frame_scales(-1.0), std::domain_error);

  const auto& frame = lat::default_frame();
  CHECK(frame.generator == kGen);
  CHECK(frame.mu == doctest::Approx(kMu).epsilon(1e-14));
  CHECK(frame.norm_lambda == doctest::Approx(kMu * kMu).epsilon(1e-14));
  CHECK(frame.length == doctest::Approx(kLen).epsilon(1e-14));
  CHECK(frame.conjugator.m00 ==
        doctest::Approx(0.668740304976422).epsilon(1e-12));
  CHECK(frame.conjugator.m01 ==
        doctest::Approx(0.413304238122399).epsilon(1e-12));
  CHECK(frame.conjugator.m10 ==
        doctest::Approx(-0.668740304976422).epsilon(1e-12));
  CHECK(frame.conjugator.m11 ==
        doctest::Approx(1.08204454309882).epsilon(1e-12));

  // The conjugated generator is diag(mu, 1/mu).
  const lat::Mat2 dg = frame.conj(kGen);
  CHECK(std::fabs(dg.m01) <= 1e-12);
  CHECK(std::fabs(dg.m10) <= 1e-12);
  CHECK(dg.m00 == doctest::Approx(kMu).epsilon(1e-13));
  CHECK(dg.m11 == doctest::Approx(1.0 / kMu).epsilon(1e-13));

  // A negated generator describes the same frame.
  const auto neg = lat::build_frame({-2, -1, -1, -1});
  CHECK(neg.generator == kGen);
  CHECK(neg.mu == doctest::Approx(frame.mu).epsilon(1e-15));
  CHECK(neg.conjugator.m00 ==
        doctest::Approx(frame.conjugator.m00).epsilon(1e-15));

  const lat::GroupElement parabolic{1, 1, 0, 1};
  CHECK_THROWS_AS(lat::build_frame(parabolic), std::domain_error);
  CHECK_THROWS_AS(lat::build_frame(kS), std::domain_error);  // elliptic

  // Another hyperbolic generator builds a consistent frame.
  const auto other = lat::build_frame({3, 1, 2, 1});
  const lat::Mat2 od = other.conj({3, 1, 2, 1});
  CHECK(std::fabs(od.m01) <= 1e-12);
  CHECK(std::fabs(od.m10) <= 1e-12);
  CHECK(od.m00 == doctest::Approx(other.mu).epsilon(1e-13));

  // Conjugation turns the generator into scaling by norm_lambda.
  const std::complex<double> z{0.3, 0.8};
  const std::complex<double> lhs = frame.conj_point(kGen.apply(z));
  const std::complex<double> rhs = frame.norm_lambda * frame.conj_point(z);
  CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(rhs));
}

TEST_CASE("b invariant: closed form and frame anchors") {
  // With an identity conjugator the invariant is just ad + bc.
  const lat::GeodesicFrame triv{lat::GroupElement{}, lat::Mat2{}, 1.0, 1.0,
                                0.0};
  CHECK(lat::b_invariant({}, triv) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(lat::b_invariant(kS, triv) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(lat::b_invariant(kGen, triv) == doctest::Approx(3.0).epsilon(1e-15));

  const auto& frame = lat::default_frame();
  CHECK(lat::b_invariant({}, frame) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(lat::b_invariant(kGen, frame) ==
        doctest::Approx(1.0).epsilon(1e-12));
  // The involution reverses the axis: its conjugated matrix is
  // antidiagonal, so B = -1 on the nose.
  CHECK(lat::b_invariant(kS, frame) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(lat::b_invariant({2, -1, -1, 1}, frame) ==
        doctest::Approx(2.6).epsilon(1e-12));

  // Invariance along the double coset.
  const lat::GroupElement g{3, 1, 2, 1};
  const double b0 = lat::b_invariant(g, frame);
  for (int l = -2; l <= 2; ++l)
    for (int r = -2; r <= 2; ++r) {
      const auto moved = lat::power(kGen, l) * g * lat::power(kGen, r);
      CHECK(lat::b_invariant(moved, frame) ==
            doctest::Approx(b0).epsilon(1e-9));
    }
}

TEST_CASE("coset enumeration matches brute force") {
  const auto& frame = lat::default_frame();
  CHECK(lat::enumerate_cosets(frame, 1).size() == 8);
  CHECK(lat::enumerate_cosets(frame, 2).size() == 16);
  CHECK(lat::enumerate_cosets(frame, 5).size() == 80);
  CHECK(lat::enumerate_cosets(frame, 8).size() == 176);

  const auto reps = lat::enumerate_cosets(frame, 3);
  CHECK(reps.size() == 32);
  CHECK(std::is_sorted(reps.begin(), reps.end()));
  CHECK(std::adjacent_find(reps.begin(), reps.end()) == reps.end());
  CHECK(std::find(reps.begin(), reps.end(), lat::GroupElement{}) !=
        reps.end());

  // Representatives sit in the fundamental u-window [0, length).
  for (const auto& g : reps) {
    const double u = std::log(std::abs(frame.conj(g).apply({0.0, 1.0})));
    CHECK(u >= -1e-6);
    CHECK(u < kLen + 1e-6);
  }

  // Pairwise inequivalent...
  for (std::size_t i = 0; i < reps.size(); ++i)
    for (std::size_t j = i + 1; j < reps.size(); ++j)
      CHECK_FALSE(lat::same_coset(reps[i], reps[j], frame));
  // ...and jointly complete: every group element with |entries| <= 3 lands
  // in exactly one class.
  for (const auto& g : brute_elements(3)) {
    int hits = 0;
    for (const auto& r : reps)
      if (lat::same_coset(r, g, frame)) ++hits;
    CHECK(hits == 1);
  }

  CHECK(lat::same_coset(kGen * kS, kS, frame));
  CHECK(lat::same_coset(lat::power(kGen, 3) * kS, kS, frame));
  CHECK_FALSE(lat::same_coset(lat::GroupElement{}, kS, frame));
}

TEST_CASE("double cosets: invariance and canonical representatives") {
  const auto& frame = lat::default_frame();
  const lat::GroupElement g{3, 1, 2, 1};

  CHECK(lat::same_double_coset(g, lat::power(kGen, 2) * g * kGen.inverse(),
                               frame));
  CHECK(lat::same_double_coset(kS, kGen * kS * kGen, frame));
  CHECK_FALSE(lat::same_double_coset(lat::GroupElement{}, kS, frame));
  CHECK_FALSE(lat::same_double_coset(g, kS, frame));

  // Generator powers collapse to the identity.
  CHECK(lat::canonical_double_coset_rep(lat::power(kGen, 3), frame) ==
        lat::GroupElement{});
  CHECK(lat::canonical_double_coset_rep(lat::power(kGen, -2), frame) ==
        lat::GroupElement{});

  // Canonical form is constant along the double coset and idempotent.
  const auto canon = lat::canonical_double_coset_rep(g, frame);
  CHECK(lat::canonical_double_coset_rep(canon, frame) == canon);
  for (int l = -2; l <= 2; ++l)
    for (int r = -2; r <= 2; ++r)
      CHECK(lat::canonical_double_coset_rep(
                lat::power(kGen, l) * g * lat::power(kGen, r), frame) ==
            canon);
  for (const auto& h : brute_elements(2)) {
    const auto c = lat::canonical_double_coset_rep(h, frame);
    CHECK(lat::canonical_double_coset_rep(c, frame) == c);
    CHECK(lat::same_double_coset(h, c, frame));
  }
}

TEST_CASE("census: saturation, involution pairing, anchors") {
  const auto& frame = lat::default_frame();
  bool sat = false;
  const auto census = lat::enumerate_double_cosets(frame, 10.0, 50, &sat);
  CHECK(sat);
  CHECK(census.size() == 25);

  // Doubling the search bound changes nothing.
  const auto census2 = lat::enumerate_double_cosets(frame, 10.0, 100);
  REQUIRE(census2.size() == census.size());
  for (std::size_t i = 0; i < census.size(); ++i) {
    CHECK(census2[i].element == census[i].element);
    CHECK(census2[i].B == doctest::Approx(census[i].B).epsilon(1e-12));
  }

  // Sorted by |B|; fields are self-consistent.
  for (std::size_t i = 0; i + 1 < census.size(); ++i)
    CHECK(std::fabs(census[i].B) <= std::fabs(census[i + 1].B) + 1e-12);
  int b_one = 0;
  for (const auto& r : census) {
    r.element.validate();
    CHECK(lat::b_invariant(r.element, frame) ==
          doctest::Approx(r.B).epsilon(1e-12));
    CHECK(lat::canonical_double_coset_rep(r.element, frame) == r.element);
    const std::int64_t h = std::max(
        {std::llabs(r.element.a), std::llabs(r.element.b),
         std::llabs(r.element.c), std::llabs(r.element.d)});
    CHECK(r.height == h);
    CHECK(std::fabs(r.B) <= 10.0 + 1e-9);
    if (std::fabs(std::fabs(r.B) - 1.0) < 1e-9) ++b_one;
  }
  // Exactly one |B| = 1 class: the axis-reversing involution itself.
  CHECK(b_one == 1);
  const auto s_it = std::find_if(census.begin(), census.end(), [](auto& r) {
    return r.element == lat::GroupElement{0, 1, -1, 0};
  });
  REQUIRE(s_it != census.end());
  CHECK(s_it->B == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(s_it->height == 1);

  // Small-height anchors.
  const auto has = [&](lat::GroupElement e, double B) {
    const auto it = std::find_if(census.begin(), census.end(),
                                 [&](auto& r) { return r.element == e; });
    REQUIRE(it != census.end());
    CHECK(it->B == doctest::Approx(B).epsilon(1e-12));
  };
  has({0, 1, -1, 1}, -0.6);
  has({1, 1, 0, 1}, 0.6);
  has({2, -1, -1, 1}, 2.6);

  // Distinct rows are genuinely distinct double cosets.
  for (std::size_t i = 0; i < census.size(); ++i)
    for (std::size_t j = i + 1; j < census.size(); ++j)
      CHECK_FALSE(
          lat::same_double_coset(census[i].element, census[j].element, frame));

  // Left-multiplying by the involution negates B and permutes the census
  // (the B = -1 class is paired with the trivial coset and drops out).
  for (const auto& r : census) {
    if (std::fabs(r.B + 1.0) < 1e-9) continue;
    const auto partner = lat::canonical_double_coset_rep(kS * r.element, frame);
    const auto it = std::find_if(census.begin(), census.end(),
                                 [&](auto& q) { return q.element == partner; });
    REQUIRE(it != census.end());
    CHECK(it->B == doctest::Approx(-r.B).epsilon(1e-9));
  }
}

TEST_CASE("count_B: anchors and saturation contract") {
  const auto& frame = lat::default_frame();
  CHECK(lat::count_B(frame, 0.5, 80) == 0);
  CHECK(lat::count_B(frame, 5.0, 80) == 9);
  CHECK(lat::count_B(frame, 10.0, 80) == 25);
  CHECK(lat::count_B(frame, 20.0, 80) == 49);
  CHECK(lat::count_B(frame, 40.0, 80) == 97);

  // A bound this small cannot certify a census out to |B| = 40.
  bool sat = true;
  const int partial = lat::count_B(frame, 40.0, 2, &sat);
  CHECK_FALSE(sat);
  CHECK(partial >= 1);
  CHECK_THROWS_AS(lat::count_B(frame, 40.0, 2), lat::CensusIncompleteError);
  CHECK_THROWS_AS(lat::enumerate_double_cosets(frame, 40.0, 2),
                  lat::CensusIncompleteError);
}

TEST_CASE("census CSV serialization") {
  const auto& frame = lat::default_frame();
  const auto census = lat::enumerate_double_cosets(frame, 10.0, 50);
  const std::string csv = lat::census_to_csv(census);

  std::istringstream in(csv);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "a,b,c,d,B,height");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    CHECK(std::count(line.begin(), line.end(), ',') == 5);
    ++rows;
  }
  CHECK(rows == census.size());
  // First row is the smallest-|B| class.
  CHECK(csv.find("0,1,-1,1,-0.6,1\n") != std::string::npos);
}

TEST_CASE("pairing integral g0: oracles, parity, divergence") {
  const auto f = exp_radial();

  // B = 0 against the radial substitution t = x^2 + 1:
  //   g0(0) = int_1^inf e^{1-t} dt / sqrt(t (t-1)).
  const double oracle0 =
      std::exp(1.0) *
      quad_sqrt_singular(
          [](double t) { return std::exp(-t) / std::sqrt(t); }, 1.0,
          std::numeric_limits<double>::infinity(), kCfg);
  CHECK(lat::g0_geom(0.0, f, kCfg) ==
        doctest::Approx(oracle0).epsilon(1e-10));
  CHECK(oracle0 == doctest::Approx(1.52410938577).epsilon(1e-9));

  // Intersecting regime, direct quadrature.
  const double oracle_half =
      2.0 * quad([](double x) { return std::exp(-x * x) /
                                       std::sqrt(x * x + 0.75); },
                 RealInterval::half_line(0.0), kCfg);
  CHECK(lat::g0_geom(0.5, f, kCfg) ==
        doctest::Approx(oracle_half).epsilon(1e-10));

  // Disjoint regime oracle at B = 2, singular factor split off.
  const double s3 = std::sqrt(3.0);
  const double oracle2 =
      2.0 * quad_sqrt_singular(
                [s3](double x) {
                  return std::exp(-x * x) / std::sqrt(x + s3);
                },
                s3, std::numeric_limits<double>::infinity(), kCfg);
  CHECK(lat::g0_geom(2.0, f, kCfg) ==
        doctest::Approx(oracle2).epsilon(1e-10));

  // Even in B, bitwise.
  CHECK(lat::g0_geom(3.0, f, kCfg) == lat::g0_geom(-3.0, f, kCfg));
  CHECK(lat::g0_geom(3.0, f, kCfg) ==
        doctest::Approx(0.000204396597304).epsilon(1e-9));

  // |B| = 1 diverges unless f(1) = 0.
  CHECK_THROWS_AS(lat::g0_geom(1.0, f, kCfg), DivergenceError);
  CHECK_THROWS_AS(lat::g0_geom(-1.0, f, kCfg), DivergenceError);
  // With f = (p-1) e^{1-p}: 2 int_0^inf x e^{-x^2} dx = 1 exactly.
  CHECK(lat::g0_geom(1.0, vanishing_radial(), kCfg) ==
        doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("pairing integral g1: weight, parity, oracle") {
  const auto f = exp_radial();
  CHECK(lat::g1_geom(0.0, f, kCfg) == 0.0);
  CHECK(lat::g1_geom(2.5, f, kCfg) == -lat::g1_geom(-2.5, f, kCfg));
  CHECK(lat::g1_geom(2.5, f, kCfg) ==
        doctest::Approx(-0.101589230948).epsilon(1e-9));

  // The weight evaluates f + 2 (t-1) f'.
  const auto w = lat::g1_weight(f);
  for (double t : {1.0, 1.7, 3.2}) {
    const double expect = std::exp(1.0 - t) * (1.0 - 2.0 * (t - 1.0));
    CHECK(w(t) == doctest::Approx(expect).epsilon(1e-12));
  }

  // Direct oracle at B = 2 with the analytic weight (3 - 2t) e^{1-t}:
  //   g1(2) = 2 * 2 int_{sqrt 3}^inf (1 - 2x^2) e^{-x^2} dx / sqrt(x^2-3).
  const double s3 = std::sqrt(3.0);
  const double oracle =
      4.0 * quad_sqrt_singular(
                [s3](double x) {
                  return (1.0 - 2.0 * x * x) * std::exp(-x * x) /
                         std::sqrt(x + s3);
                },
                s3, std::numeric_limits<double>::infinity(), kCfg);
  CHECK(lat::g1_geom(2.0, f, kCfg) == doctest::Approx(oracle).epsilon(1e-8));
}

TEST_CASE("g1 agrees with the window chain's cached weight") {
  const auto& rec = ref_rec();
  const auto f1 = rec.f1_radial();
  double scale = 1e-12;
  for (double p : {1.0, 2.0, 5.0, 25.0, 100.0})
    scale = std::max(scale, std::fabs(rec.g1(p)));
  const tr::RadialTestFunction g1w(
      [&rec](double p) { return rec.g1(p); },
      [&rec](double p) {
        return tr::detail::fd5([&rec](double q) { return rec.g1(q); }, p);
      },
      {4.0 * scale, 2.0 / std::sqrt(rec.p_max1())}, rec.p_max1());
  for (double B : {1.2, 1.8}) {
    const double lhs = lat::g1_geom(B, f1, kCfg);
    const double rhs = B * lat::g0_geom(B, g1w, kCfg);
    CHECK(std::fabs(lhs - rhs) <= 1e-6 * std::max(1.0, std::fabs(rhs)));
  }
}

TEST_CASE("huber series: anchors, tail, axis, cancellation") {
  const auto& frame = lat::default_frame();
  const std::complex<double> z0{1.0 / 3.0, 1.0};

  CHECK(lat::huber_series_A0(zero_radial(), z0, frame, 10, kCfg) == 0.0);
  CHECK(lat::huber_series_A1(zero_radial(), z0, frame, 10, kCfg) == 0.0);

  const auto f = exp_radial();
  const double a0 = lat::huber_series_A0(f, z0, frame, 50, kCfg);
  CHECK(a0 == doctest::Approx(5.80919274297).epsilon(1e-9));
  // Saturated in the entry bound: the tail beyond the decay cutoff is cut.
  CHECK(std::fabs(lat::huber_series_A0(f, z0, frame, 100, kCfg) - a0) <=
        1e-12);

  const auto f0 = ref_rec().f0_radial();
  CHECK(lat::huber_series_A0(f0, z0, frame, 50, kCfg) ==
        doctest::Approx(12.2025634791).epsilon(1e-9));

  // The odd series vanishes identically: left-multiplying a coset by the
  // axis-reversing involution flips v and fixes p, so terms cancel in
  // pairs at every z, not just on the axis.
  CHECK(std::fabs(lat::huber_series_A1(f, z0, frame, 50, kCfg)) <= 1e-9);
  CHECK(std::fabs(lat::huber_series_A1(f0, z0, frame, 50, kCfg)) <= 1e-9);

  // On the lifted axis the base point's own term already has v = 0.
  const lat::Mat2& M = frame.conjugator;
  const lat::Mat2 Minv{M.m11, -M.m01, -M.m10, M.m00};
  const std::complex<double> zax = Minv.apply({0.0, 1.3});
  CHECK(std::abs(frame.conj_point(zax) - std::complex<double>{0.0, 1.3}) <=
        1e-12);
  CHECK(lat::huber_series_A0(f0, zax, frame, 50, kCfg) ==
        doctest::Approx(13.1042882685).epsilon(1e-9));
  CHECK(std::fabs(lat::huber_series_A1(f0, zax, frame, 50, kCfg)) <= 1e-9);

  const std::complex<double> below{0.3, -1.0};
  const std::complex<double> edge{0.3, 0.0};
  CHECK_THROWS_AS(lat::huber_series_A0(f, below, frame, 10, kCfg),
                  std::domain_error);
  CHECK_THROWS_AS(lat::huber_series_A1(f, edge, frame, 10, kCfg),
                  std::domain_error);
}

TEST_CASE("kernel sum: zero kernel, theta = 0 equivalence, derivative") {
  const auto& frame = lat::default_frame();
  const tr::KernelFunction kz([](double) { return 0.0; },
                              [](double) { return 0.0; }, {0.0, 1.0});
  CHECK(lat::kernel_sum_F(kz, {0.3, 1.0}, 0.0, frame, 10, kCfg) == 0.0);

  const auto f = exp_radial();
  const auto k0 = tr::k0_from_f(f, kCfg);

  // At theta = 0 the coset integrals telescope back to the even series.
  const std::complex<double> pts[] = {{1.0 / 3.0, 1.0}, {0.7, 2.0}, {0.2, 1.5}};
  const double anchors[] = {5.80919274297, 3.76501884202, 5.07747760464};
  for (int i = 0; i < 3; ++i) {
    const double a0 = lat::huber_series_A0(f, pts[i], frame, 50, kCfg);
    const double F0 = lat::kernel_sum_F(k0, pts[i], 0.0, frame, 50, kCfg);
    CHECK(a0 == doctest::Approx(anchors[i]).epsilon(1e-9));
    CHECK(std::fabs(F0 - a0) <= 1e-6 * std::max(1.0, std::fabs(a0)));
  }

  // The theta-derivative reproduces the odd series (both vanish here).
  const std::complex<double> z0{1.0 / 3.0, 1.0};
  const double h = 1e-3;
  const double dF = (lat::kernel_sum_F(k0, z0, h, frame, 50, kCfg) -
                     lat::kernel_sum_F(k0, z0, -h, frame, 50, kCfg)) /
                    (2.0 * h);
  const double a1 = lat::huber_series_A1(f, z0, frame, 50, kCfg);
  CHECK(std::fabs(dF - a1) <= 1e-4);

  const std::complex<double> below{0.3, -1.0};
  CHECK_THROWS_AS(lat::kernel_sum_F(k0, below, 0.0, frame, 10, kCfg),
                  std::domain_error);
  CHECK_THROWS_AS(lat::kernel_sum_F(k0, z0, 0.5 * M_PI, frame, 10, kCfg),
                  std::domain_error);
}

TEST_CASE("epsilon flag") {
  CHECK(lat::epsilon_flag(0) == 0);
  CHECK(lat::epsilon_flag(1) == 1);
  CHECK(lat::epsilon_flag(50) == 1);
  // No zero-diagonal elements in a level-2 congruence subgroup.
  CHECK(lat::epsilon_flag(5, 2) == 0);
  CHECK(lat::epsilon_flag(50, 3) == 0);
  CHECK_THROWS_AS(lat::epsilon_flag(5, 0), std::invalid_argument);
}

TEST_CASE("geometric side: zero function, variants, saturation") {
  const auto& frame = lat::default_frame();

  for (auto variant : {lat::GeomVariant::a, lat::GeomVariant::b}) {
    const auto res =
        lat::geometric_side_detail(variant, zero_radial(), frame, 5.0, 50, kCfg);
    CHECK(res.value == 0.0);
    CHECK(res.census_sum == 0.0);
    CHECK(res.saturated);
    CHECK(res.census_count == 8);
    CHECK(res.b_one_count == 1);
  }

  // Identity-term bookkeeping: value - census_sum = (1 + eps) f(1) length.
  const auto f0 = ref_rec().f0_radial();
  const auto ga = lat::geometric_side_detail(lat::GeomVariant::a, f0, frame,
                                             20.0, 60, kCfg);
  CHECK(ga.saturated);
  CHECK(ga.b_one_count == 1);
  CHECK(ga.census_count == 48);
  CHECK(ga.value == doctest::Approx(24.4788903323).epsilon(1e-8));
  CHECK(ga.value - ga.census_sum ==
        doctest::Approx(2.0 * f0(1.0) * frame.length).epsilon(1e-10));
  CHECK(lat::geometric_side(lat::GeomVariant::a, f0, frame, 20.0, 60, kCfg) ==
        doctest::Approx(ga.value).epsilon(1e-12));

  // Odd weight: the involution pairing cancels the census sum while the
  // absolute sum stays order one, and (1 - eps) kills the identity term.
  const auto f1 = ref_rec().f1_radial();
  const auto gb = lat::geometric_side_detail(lat::GeomVariant::b, f1, frame,
                                             30.0, 60, kCfg);
  CHECK(gb.saturated);
  CHECK(gb.b_one_count == 1);
  CHECK(gb.census_count == 72);
  CHECK(gb.census_abs_sum ==
        doctest::Approx(0.687197615252).epsilon(1e-6));
  CHECK(std::fabs(gb.census_sum) <= 0.05 * gb.census_abs_sum);
  CHECK(gb.value == gb.census_sum);

  CHECK_THROWS_AS(
      lat::geometric_side(lat::GeomVariant::a, zero_radial(), frame, 40.0, 2,
                          kCfg),
      lat::CensusIncompleteError);
}
