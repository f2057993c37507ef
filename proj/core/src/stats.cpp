#include "spaceiv/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/fisher_f.hpp>

#include "spaceiv/errors.hpp"

namespace spaceiv::stats {

double f_cdf(double x, double df1, double df2) {
  require(df1 > 0 && df2 > 0, ErrorKind::InvalidArgument,
          "F distribution requires positive degrees of freedom");
  if (x <= 0.0) return 0.0;
  boost::math::fisher_f_distribution<double> dist(df1, df2);
  return boost::math::cdf(dist, x);
}

double f_quantile(double p, double df1, double df2) {
  require(df1 > 0 && df2 > 0, ErrorKind::InvalidArgument,
          "F distribution requires positive degrees of freedom");
  require(p > 0.0 && p < 1.0, ErrorKind::InvalidArgument,
          "F quantile requires p in (0,1)");
  boost::math::fisher_f_distribution<double> dist(df1, df2);
  return boost::math::quantile(dist, p);
}

double quantile_type7(std::vector<double> values, double p) {
  require(!values.empty(), ErrorKind::InvalidArgument,
          "quantile of an empty sample");
  require(p >= 0.0 && p <= 1.0, ErrorKind::InvalidArgument,
          "quantile requires p in [0,1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  const double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

double median(std::vector<double> values) {
  return quantile_type7(std::move(values), 0.5);
}

}  // namespace spaceiv::stats
