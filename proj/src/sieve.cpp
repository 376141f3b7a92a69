#include "hypersieve/sieve.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace hypersieve::sieve {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); });
}

// Contiguous-chunk parallel loop over [0, n).  Each index is visited by
// exactly one worker and fn touches only index-owned state, so the result
// never depends on scheduling.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), 8);
  if (n < 64 || workers < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

// splitmix64 of seed + (k+1) * golden ratio: decorrelated per-trial seeds
// that do not depend on how trials are distributed over threads.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t k) {
  std::uint64_t z = seed + (k + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::vector<std::size_t> active_indices(const SyntheticSpectrum& spec,
                                        double T) {
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < spec.eigen_ts.size(); ++j)
    if (std::fabs(spec.eigen_ts[j]) <= T) idx.push_back(j);
  return idx;
}

}  // namespace

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

void SyntheticSpectrum::validate() const {
  require(eigen_ts.size() == periods.size(),
          "SyntheticSpectrum: eigen_ts and periods must have equal length");
  require(all_finite(eigen_ts) && all_finite(periods),
          "SyntheticSpectrum: entries must be finite");
  require(std::is_sorted(eigen_ts.begin(), eigen_ts.end()),
          "SyntheticSpectrum: eigen_ts must be sorted ascending");
}

void SamplePoints::validate() const {
  require(std::isfinite(X) && X > 1.0, "SamplePoints: need X > 1");
  require(std::isfinite(delta) && delta > 0.0, "SamplePoints: need delta > 0");
  require(!xs.empty(), "SamplePoints: need at least one point");
  require(all_finite(xs), "SamplePoints: points must be finite");
  const double slack = 1e-12 * X;
  for (double x : xs)
    require(x >= X - slack && x <= 2.0 * X + slack,
            "SamplePoints: points must lie in [X, 2X]");
  std::vector<double> sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
    require(sorted[i + 1] - sorted[i] + 1e-12 * std::max(1.0, delta) >= delta,
            "SamplePoints: pairwise gaps must be >= delta");
}

SamplePoints equal_spaced_points(double X, double delta, int count) {
  require(count >= 1, "equal_spaced_points: need count >= 1");
  SamplePoints pts;
  pts.X = X;
  pts.delta = delta;
  pts.xs.reserve(static_cast<std::size_t>(count));
  if (count == 1) {
    pts.xs.push_back(X);
  } else {
    const double gap = X / (count - 1);
    for (int i = 0; i < count; ++i) pts.xs.push_back(X + gap * i);
  }
  pts.validate();
  return pts;
}

SamplePoints clustered_points(double X, double delta, int count) {
  require(count >= 1, "clustered_points: need count >= 1");
  SamplePoints pts;
  pts.X = X;
  pts.delta = delta;
  pts.xs.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) pts.xs.push_back(X + delta * i);
  pts.validate();
  return pts;
}

void CoefficientVector::validate() const {
  double sq = 0.0;
  for (const auto& z : a) {
    require(std::isfinite(z.real()) && std::isfinite(z.imag()),
            "CoefficientVector: entries must be finite");
    sq += std::norm(z);
  }
  require(std::isfinite(norm_star) && norm_star >= 0.0,
          "CoefficientVector: norm_star must be finite and non-negative");
  require(std::fabs(norm_star * norm_star - sq) <= 1e-9 * std::max(1.0, sq),
          "CoefficientVector: norm_star^2 must equal sum |a_j|^2");
}

CoefficientVector make_coefficients(std::vector<std::complex<double>> a) {
  double sq = 0.0;
  for (const auto& z : a) sq += std::norm(z);
  CoefficientVector out;
  out.a = std::move(a);
  out.norm_star = std::sqrt(sq);
  out.validate();
  return out;
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

double spectral_weight(WeightMode mode, double t, double T) {
  require(std::isfinite(t), "spectral_weight: t must be finite");
  require(std::isfinite(T) && T > 0.0, "spectral_weight: need T > 0");
  const double gauss = std::exp(-t * t / (4.0 * T * T));
  if (mode == WeightMode::m0) return gauss;
  // (1 - e^{-t^2/4}) / t^2 -> 1/4 as t -> 0; expm1 keeps the small-t
  // evaluation exact, only t = 0 itself needs the limit value.
  const double lambda = t * t + 0.25;
  const double ratio = t == 0.0 ? 0.25 : -std::expm1(-0.25 * t * t) / (t * t);
  return lambda * ratio * gauss;
}

std::vector<std::vector<double>> s_matrix(const SamplePoints& pts, double T,
                                          const SyntheticSpectrum& spec) {
  pts.validate();
  spec.validate();
  const std::size_t R = pts.xs.size();
  const std::size_t J = spec.eigen_ts.size();
  std::vector<double> q(J);  // w_j(T) u_j^2
  for (std::size_t j = 0; j < J; ++j)
    q[j] = spectral_weight(spec.weight_mode, spec.eigen_ts[j], T) *
           spec.periods[j] * spec.periods[j];
  std::vector<double> logs(R);
  for (std::size_t v = 0; v < R; ++v) logs[v] = std::log(pts.xs[v]);

  std::vector<std::vector<double>> S(R, std::vector<double>(R, 0.0));
  // Each worker owns whole rows; the redundant lower-triangle work buys a
  // race-free deterministic assembly.
  parallel_for(R, [&](std::size_t v) {
    for (std::size_t u = 0; u < R; ++u) {
      const double r = std::fabs(logs[v] - logs[u]);
      double acc = 0.0;
      for (std::size_t j = 0; j < J; ++j)
        acc += q[j] * std::cos(r * spec.eigen_ts[j]);
      S[v][u] = acc;
    }
  });
  return S;
}

std::pair<double, double> dual_reduction_bound(
    const std::vector<std::vector<std::complex<double>>>& V,
    const CoefficientVector& a) {
  a.validate();
  const std::size_t J = a.a.size();
  for (const auto& row : V)
    require(row.size() == J,
            "dual_reduction_bound: V rows must match the coefficient count");
  const std::size_t R = V.size();

  double lhs = 0.0;
  for (std::size_t v = 0; v < R; ++v) {
    std::complex<double> dot = 0.0;
    for (std::size_t j = 0; j < J; ++j) dot += a.a[j] * V[v][j];
    lhs += std::norm(dot);
  }

  double max_row = 0.0;
  for (std::size_t u = 0; u < R; ++u) {
    double row = 0.0;
    for (std::size_t v = 0; v < R; ++v) {
      std::complex<double> gram = 0.0;
      for (std::size_t j = 0; j < J; ++j) gram += V[u][j] * std::conj(V[v][j]);
      row += std::abs(gram);
    }
    max_row = std::max(max_row, row);
  }
  // The coefficient norm enters squared; summing |a_j|^2 directly skips the
  // sqrt/square round trip through norm_star.  In the degenerate tie cases
  // (e.g. R = J = 1, where lhs equals rhs exactly in real arithmetic) the
  // two sides still round independently, so callers comparing them should
  // allow equality up to a few ulp.
  double norm_sq = 0.0;
  for (const auto& z : a.a) norm_sq += std::norm(z);
  return {lhs, norm_sq * max_row};
}

std::pair<double, double> spacing_sum(const SamplePoints& pts, double T,
                                      double C) {
  pts.validate();
  require(std::isfinite(T) && T > 0.0, "spacing_sum: need T > 0");
  require(std::isfinite(C) && C > 0.0, "spacing_sum: need C > 0");
  const std::size_t R = pts.xs.size();
  std::vector<double> logs(R);
  for (std::size_t v = 0; v < R; ++v) logs[v] = std::log(pts.xs[v]);

  std::vector<double> rows(R, 0.0);
  parallel_for(R, [&](std::size_t u) {
    double acc = 0.0;
    for (std::size_t v = 0; v < R; ++v) {
      const double r = logs[u] - logs[v];
      acc += std::exp(-0.5 * T * T * r * r);
    }
    rows[u] = acc;
  });
  const double sum = *std::max_element(rows.begin(), rows.end());
  return {sum, C * (1.0 + pts.X / (pts.delta * T))};
}

double period_recursion_factor(int m, double lambda) {
  require(m >= 0, "period_recursion_factor: need m >= 0");
  require(std::isfinite(lambda) && lambda >= 0.0,
          "period_recursion_factor: need lambda >= 0");
  const double dm = m;
  return -std::sqrt((dm * dm + dm + lambda) /
                    (dm * dm + 3.0 * dm + 2.0 + lambda));
}

double sieve_ratio(const SamplePoints& pts, double T,
                   const SyntheticSpectrum& spec, const CoefficientVector& a) {
  pts.validate();
  spec.validate();
  a.validate();
  require(std::isfinite(T) && T > 0.0, "sieve_ratio: need T > 0");
  const auto active = active_indices(spec, T);
  require(a.a.size() == active.size(),
          "sieve_ratio: coefficient count must match |t_j| <= T entries");
  if (a.norm_star == 0.0) return 0.0;

  double lhs = 0.0;
  for (double x : pts.xs) {
    const double lx = std::log(x);
    std::complex<double> dot = 0.0;
    for (std::size_t k = 0; k < active.size(); ++k) {
      const double t = spec.eigen_ts[active[k]];
      const std::complex<double> phase{std::cos(t * lx), std::sin(t * lx)};
      dot += a.a[k] * phase * spec.periods[active[k]];
    }
    lhs += std::norm(dot);
  }
  const double rhs =
      (T + pts.X / pts.delta) * a.norm_star * a.norm_star;
  return lhs / rhs;
}

SieveStats sieve_experiment(const SamplePoints& pts, double T,
                            const SyntheticSpectrum& spec, int trials,
                            std::uint64_t seed) {
  pts.validate();
  spec.validate();
  require(trials >= 0, "sieve_experiment: need trials >= 0");
  require(std::isfinite(T) && T > 0.0, "sieve_experiment: need T > 0");
  const auto active = active_indices(spec, T);

  SieveStats stats;
  stats.seed = seed;
  stats.trials = trials;
  const auto [lo, hi] =
      std::minmax_element(pts.xs.begin(), pts.xs.end());
  stats.partition_required = std::log(*hi / *lo) > std::log(2.0) + 1e-12;
  if (trials == 0) return stats;

  std::vector<double> ratios(static_cast<std::size_t>(trials), 0.0);
  parallel_for(ratios.size(), [&](std::size_t k) {
    NormalStream rng(mix_seed(seed, k));
    std::vector<std::complex<double>> a(active.size());
    for (auto& z : a) {
      const double re = rng.normal();
      const double im = rng.normal();
      z = {re, im};
    }
    ratios[k] = sieve_ratio(pts, T, spec, make_coefficients(std::move(a)));
  });

  double acc = 0.0;
  for (double r : ratios) {
    stats.ratio_max = std::max(stats.ratio_max, r);
    acc += r;
  }
  stats.ratio_mean = acc / trials;
  return stats;
}

SyntheticSpectrum weyl_synthetic(double t_max, double density_const,
                                 std::uint64_t seed, WeightMode mode) {
  require(std::isfinite(t_max) && t_max >= 0.0,
          "weyl_synthetic: need t_max >= 0");
  require(std::isfinite(density_const) && density_const >= 0.0,
          "weyl_synthetic: need density_const >= 0");
  const long long count = std::llround(density_const * t_max * t_max);
  require(count <= 50'000'000, "weyl_synthetic: spectrum too large");

  NormalStream rng(seed);
  SyntheticSpectrum spec;
  spec.weight_mode = mode;
  spec.eigen_ts.reserve(static_cast<std::size_t>(count));
  for (long long i = 0; i < count; ++i)
    spec.eigen_ts.push_back(t_max * std::sqrt(rng.uniform()));
  std::sort(spec.eigen_ts.begin(), spec.eigen_ts.end());
  spec.periods.reserve(spec.eigen_ts.size());
  for (double t : spec.eigen_ts)
    spec.periods.push_back(rng.normal() * std::pow(1.0 + t * t, -0.25));
  spec.validate();
  return spec;
}

std::string spectrum_to_csv(const SyntheticSpectrum& spec) {
  spec.validate();
  std::string out = "t,period\n";
  char buf[80];
  for (std::size_t j = 0; j < spec.eigen_ts.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", spec.eigen_ts[j],
                  spec.periods[j]);
    out += buf;
  }
  return out;
}

SyntheticSpectrum spectrum_from_csv(const std::string& csv, WeightMode mode) {
  std::istringstream in(csv);
  std::string line;
  // Batch artifacts carry '#'-prefixed metadata above the header.
  while (std::getline(in, line) && (line.empty() || line[0] == '#')) {
  }
  if (line != "t,period")
    throw std::invalid_argument("spectrum_from_csv: missing t,period header");
  SyntheticSpectrum spec;
  spec.weight_mode = mode;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double t = 0.0, u = 0.0;
    if (std::sscanf(line.c_str(), "%lf,%lf", &t, &u) != 2)
      throw std::invalid_argument("spectrum_from_csv: malformed row " + line);
    spec.eigen_ts.push_back(t);
    spec.periods.push_back(u);
  }
  spec.validate();
  return spec;
}

double NormalStream::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]: keeps the log finite
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace hypersieve::sieve
