#pragma once
// Adaptive sampled evaluator for expensive smooth functions on an interval.
// The table is refined where local cubic interpolation disagrees with the
// underlying function by more than `tol`, then evaluation is a binary search
// plus a 4-point Lagrange interpolation.  Immutable (and therefore freely
// shareable across threads) once constructed.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace hypersieve {

class CachedFunction {
 public:
  // Behaviour for arguments outside [lo, hi]: treat the function as zero
  // (decayed tails), clamp to the boundary value, or refuse.
  enum class Outside { zero, clamp, error };

  CachedFunction() = default;

  CachedFunction(const std::function<double(double)>& f, double lo, double hi,
                 double tol, Outside outside = Outside::error,
                 std::vector<double> seeds = {}, std::size_t max_nodes = 200000)
      : lo_(lo), hi_(hi), tol_(tol), outside_(outside) {
    if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi))
      throw std::invalid_argument("CachedFunction: need finite lo < hi");
    if (!(tol > 0.0)) throw std::invalid_argument("CachedFunction: tol must be > 0");

    xs_.push_back(lo);
    const int kInitial = 32;
    for (int i = 1; i < kInitial; ++i)
      xs_.push_back(lo + (hi - lo) * static_cast<double>(i) / kInitial);
    for (double s : seeds)
      if (s > lo && s < hi) xs_.push_back(s);
    xs_.push_back(hi);
    std::sort(xs_.begin(), xs_.end());
    xs_.erase(std::unique(xs_.begin(), xs_.end()), xs_.end());
    ys_.resize(xs_.size());
    for (std::size_t i = 0; i < xs_.size(); ++i) ys_[i] = f(xs_[i]);

    // Pass-based refinement: probe every midpoint against the current table,
    // insert the failures, repeat until every probe is inside tolerance.
    const double min_gap = (hi - lo) * 1e-12;
    for (int pass = 0; pass < 64; ++pass) {
      std::vector<std::pair<double, double>> add;
      for (std::size_t i = 0; i + 1 < xs_.size(); ++i) {
        if (xs_[i + 1] - xs_[i] <= min_gap) continue;
        const double xm = 0.5 * (xs_[i] + xs_[i + 1]);
        const double approx = interp(xm);
        const double exact = f(xm);
        if (std::fabs(approx - exact) > tol) add.emplace_back(xm, exact);
      }
      if (add.empty()) break;
      if (xs_.size() + add.size() > max_nodes)
        throw std::runtime_error("CachedFunction: node budget exhausted");
      merge_nodes(add);
    }
  }

  double operator()(double x) const {
    if (x < lo_ || x > hi_) {
      switch (outside_) {
        case Outside::zero:
          return 0.0;
        case Outside::clamp:
          x = std::clamp(x, lo_, hi_);
          break;
        case Outside::error:
          throw std::domain_error("CachedFunction: argument outside cached range");
      }
    }
    return interp(x);
  }

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double tol() const { return tol_; }
  std::size_t node_count() const { return xs_.size(); }

 private:
  double interp(double x) const {
    // 4-point Lagrange on the bracketing window, clamped at the edges.
    const std::size_t n = xs_.size();
    std::size_t idx = std::upper_bound(xs_.begin(), xs_.end(), x) - xs_.begin();
    std::size_t first = (idx >= 2) ? idx - 2 : 0;
    if (first + 4 > n) first = n - 4;
    double out = 0.0;
    for (std::size_t i = first; i < first + 4; ++i) {
      double li = 1.0;
      for (std::size_t j = first; j < first + 4; ++j)
        if (j != i) li *= (x - xs_[j]) / (xs_[i] - xs_[j]);
      out += ys_[i] * li;
    }
    return out;
  }

  void merge_nodes(const std::vector<std::pair<double, double>>& add) {
    std::vector<double> nx, ny;
    nx.reserve(xs_.size() + add.size());
    ny.reserve(xs_.size() + add.size());
    std::size_t i = 0, j = 0;
    while (i < xs_.size() || j < add.size()) {
      if (j == add.size() || (i < xs_.size() && xs_[i] < add[j].first)) {
        nx.push_back(xs_[i]);
        ny.push_back(ys_[i]);
        ++i;
      } else {
        nx.push_back(add[j].first);
        ny.push_back(add[j].second);
        ++j;
      }
    }
    xs_ = std::move(nx);
    ys_ = std::move(ny);
  }

  std::vector<double> xs_, ys_;
  double lo_ = 0.0, hi_ = 1.0, tol_ = 1e-9;
  Outside outside_ = Outside::error;
};

}  // namespace hypersieve
