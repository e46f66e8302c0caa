#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>

#include "netabc/csv.hpp"
#include "netabc/experiments.hpp"

namespace netabc {

namespace {

double tricube(double u) {
  if (u >= 1.0) return 0.0;
  const double t = 1.0 - u * u * u;
  return t * t * t;
}

// Equivalent-kernel row of the local-linear fit at x0: fit(x0) = row . y.
// Returns false when fewer than two distinct x carry positive weight.
bool local_linear_row(std::span<const double> x, double x0, double h, std::vector<double>& row) {
  const std::size_t n = x.size();
  std::vector<double> w(n);
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  std::size_t positive = 0;
  for (std::size_t j = 0; j < n; ++j) {
    w[j] = tricube(std::abs(x[j] - x0) / h);
    if (w[j] <= 0.0) continue;
    ++positive;
    const double dx = x[j] - x0;
    s0 += w[j];
    s1 += w[j] * dx;
    s2 += w[j] * dx * dx;
  }
  const double det = s0 * s2 - s1 * s1;
  if (positive < 2 || !(det > 1e-12 * s0 * s2)) return false;
  row.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (w[j] > 0.0) row[j] = w[j] * (s2 - (x[j] - x0) * s1) / det;
  }
  return true;
}

}  // namespace

LoessCurve loess_fit(std::span<const double> x, std::span<const double> y, double span) {
  const std::size_t n = x.size();
  if (y.size() != n) throw std::invalid_argument("loess: x and y differ in length");
  if (n < 3) throw std::invalid_argument("loess: needs at least 3 points");
  if (!(span > 0.0 && span <= 1.0)) throw std::invalid_argument("loess: span must be in (0, 1]");
  if (std::set<double>(x.begin(), x.end()).size() != n) {
    throw std::invalid_argument("loess: x values must be distinct");
  }

  const std::size_t q0 = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil(span * static_cast<double>(n) - 1e-9)), 2, n);

  std::vector<std::vector<double>> smoother(n);
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) dist[j] = std::abs(x[j] - x[i]);
    std::sort(dist.begin(), dist.end());
    bool ok = false;
    for (std::size_t q = q0; q <= n && !ok; ++q) {
      ok = local_linear_row(x, x[i], dist[q - 1], smoother[i]);
    }
    if (!ok) ok = local_linear_row(x, x[i], dist[n - 1] * 1.001, smoother[i]);
    if (!ok) throw std::logic_error("loess: could not form a local neighbourhood");
  }

  LoessCurve c;
  c.x.assign(x.begin(), x.end());
  c.y.assign(y.begin(), y.end());
  c.span = span;
  c.fit.resize(n);
  double rss = 0.0;
  double df = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    c.fit[i] = std::inner_product(smoother[i].begin(), smoother[i].end(), y.begin(), 0.0);
    rss += (y[i] - c.fit[i]) * (y[i] - c.fit[i]);
  }
  // tr((I - L)'(I - L)) is the sum of squared entries of I - L.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double e = (i == j ? 1.0 : 0.0) - smoother[i][j];
      df += e * e;
    }
  }
  c.residual_df = df;
  c.residual_sd = df > 1e-12 ? std::sqrt(rss / df) : 0.0;
  c.se.resize(n);
  c.half_width.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double norm2 =
        std::inner_product(smoother[i].begin(), smoother[i].end(), smoother[i].begin(), 0.0);
    c.se[i] = c.residual_sd * std::sqrt(norm2);
    c.half_width[i] = 1.96 * c.se[i];
  }
  c.interval_method =
      "pointwise normal approximation: fit +/- 1.96 * sigma_hat * ||l(x)||, "
      "sigma_hat^2 = RSS / tr((I-L)'(I-L))";
  return c;
}

void write_loess_csv(std::ostream& out, const LoessCurve& c) {
  out << "x,fit,lo95,hi95\n";
  for (std::size_t i = 0; i < c.x.size(); ++i) {
    out << format_double(c.x[i]) << ',' << format_double(c.fit[i]) << ','
        << format_double(c.fit[i] - c.half_width[i]) << ','
        << format_double(c.fit[i] + c.half_width[i]) << '\n';
  }
}

}  // namespace netabc
