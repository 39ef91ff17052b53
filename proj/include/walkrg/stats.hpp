#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace walkrg {

/// Streaming mean/variance (Welford). Merge is associative up to rounding.
class RunningStats {
 public:
  void add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }

  void merge(const RunningStats& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) {
      *this = o;
      return;
    }
    const double n = static_cast<double>(n_ + o.n_);
    const double delta = o.mean_ - mean_;
    mean_ += delta * static_cast<double>(o.n_) / n;
    m2_ += o.m2_ + delta * delta * static_cast<double>(n_) * static_cast<double>(o.n_) / n;
    n_ += o.n_;
  }

  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double stderr_of_mean() const {
    return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double rms_residual = 0.0;
};

/// Ordinary least squares y = intercept + slope * x.
inline LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: need >= 2 paired points");
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    ssr += r * r;
  }
  f.rms_residual = std::sqrt(ssr / n);
  f.slope_stderr = x.size() > 2 ? std::sqrt(ssr / (n - 2) / sxx) : 0.0;
  return f;
}

/// Weighted least squares with weights 1/sigma^2.
inline LinearFit fit_line_weighted(std::span<const double> x, std::span<const double> y,
                                   std::span<const double> sigma) {
  if (x.size() != y.size() || x.size() != sigma.size() || x.size() < 2)
    throw std::invalid_argument("fit_line_weighted: need >= 2 paired points");
  double sw = 0, swx = 0, swy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = 1.0 / (sigma[i] * sigma[i]);
    sw += w;
    swx += w * x[i];
    swy += w * y[i];
  }
  const double mx = swx / sw, my = swy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = 1.0 / (sigma[i] * sigma[i]);
    sxx += w * (x[i] - mx) * (x[i] - mx);
    sxy += w * (x[i] - mx) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.slope_stderr = std::sqrt(1.0 / sxx);
  double ssr = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    ssr += r * r;
  }
  f.rms_residual = std::sqrt(ssr / static_cast<double>(x.size()));
  return f;
}

/// Standard error of the mean of a correlated series by non-overlapping
/// batch means.
inline double batch_means_stderr(std::span<const double> series, std::size_t batches = 50) {
  if (series.size() < 2 * batches) batches = std::max<std::size_t>(2, series.size() / 2);
  const std::size_t len = series.size() / batches;
  if (len == 0) return 0.0;
  RunningStats s;
  for (std::size_t b = 0; b < batches; ++b) {
    double acc = 0;
    for (std::size_t i = b * len; i < (b + 1) * len; ++i) acc += series[i];
    s.add(acc / static_cast<double>(len));
  }
  return s.stderr_of_mean();
}

}  // namespace walkrg
