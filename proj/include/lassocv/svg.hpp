#pragma once

#include <string>
#include <vector>

namespace lassocv {

struct ViolinSeries {
  std::string label;
  std::vector<double> values;  // NaN entries are skipped
};

// 0.9 min(sd, IQR / 1.34) m^{-1/5}; 0 for fewer than two distinct values.
double silverman_bandwidth(const std::vector<double>& values);

// Gaussian kernel density estimate at each point of `at`.
std::vector<double> gaussian_kde(const std::vector<double>& values, double bandwidth,
                                 const std::vector<double>& at);

// Violin per series (symmetric density silhouette) with a red polyline through the
// series means (element id "mean-line"). Output is a pure function of the input.
std::string violin_svg(const std::string& title, const std::vector<ViolinSeries>& series);

}  // namespace lassocv
