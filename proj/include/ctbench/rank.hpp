#pragma once

#include <span>
#include <vector>

namespace ctbench {

/// 1-based ranks, tied values share the average of their positions.
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson correlation; NaN when either input is constant.
double pearson(std::span<const double> x, std::span<const double> y);

/// Spearman correlation with average-rank ties; NaN when either input is constant.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace ctbench
