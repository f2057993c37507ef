#pragma once

#include <vector>

namespace spaceiv::stats {

// CDF of the Fisher F distribution with (df1, df2) degrees of freedom.
double f_cdf(double x, double df1, double df2);

// Inverse CDF of the Fisher F distribution; p in (0,1).
double f_quantile(double p, double df1, double df2);

// Type-7 sample quantile (linear interpolation between order statistics),
// the convention fixed for all reported tables. p in [0,1].
double quantile_type7(std::vector<double> values, double p);

double median(std::vector<double> values);

}  // namespace spaceiv::stats
