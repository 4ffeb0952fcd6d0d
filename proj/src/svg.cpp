#include "lassocv/svg.hpp"

#include "lassocv/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

namespace lassocv {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 60.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;
constexpr int kDensityPoints = 64;

std::vector<double> finite_sorted(const std::vector<double>& v) {
  std::vector<double> out;
  for (double x : v) {
    if (std::isfinite(x)) out.push_back(x);
  }
  std::sort(out.begin(), out.end());
  return out;
}

double quantile_sorted(const std::vector<double>& s, double q) {
  const double pos = q * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

double silverman_bandwidth(const std::vector<double>& values) {
  const std::vector<double> s = finite_sorted(values);
  if (s.size() < 2 || s.front() == s.back()) return 0.0;
  const double m = static_cast<double>(s.size());
  double mean = 0.0;
  for (double x : s) mean += x;
  mean /= m;
  double ss = 0.0;
  for (double x : s) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (m - 1.0));
  const double iqr = quantile_sorted(s, 0.75) - quantile_sorted(s, 0.25);
  const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  return 0.9 * spread * std::pow(m, -0.2);
}

std::vector<double> gaussian_kde(const std::vector<double>& values, double bandwidth,
                                 const std::vector<double>& at) {
  if (!(bandwidth > 0.0)) throw InputError("KDE bandwidth must be positive");
  const std::vector<double> s = finite_sorted(values);
  if (s.empty()) throw InputError("KDE needs at least one finite value");
  const double norm = 1.0 / (static_cast<double>(s.size()) * bandwidth *
                             std::sqrt(2.0 * std::numbers::pi));
  std::vector<double> out(at.size(), 0.0);
  for (std::size_t i = 0; i < at.size(); ++i) {
    double acc = 0.0;
    for (double x : s) {
      const double u = (at[i] - x) / bandwidth;
      acc += std::exp(-0.5 * u * u);
    }
    out[i] = acc * norm;
  }
  return out;
}

std::string violin_svg(const std::string& title, const std::vector<ViolinSeries>& series) {
  if (series.empty()) throw InputError("violin plot needs at least one series");
  std::vector<std::vector<double>> data;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : series) {
    data.push_back(finite_sorted(s.values));
    if (!data.back().empty()) {
      lo = std::min(lo, data.back().front());
      hi = std::max(hi, data.back().back());
    }
  }
  if (!std::isfinite(lo)) throw InputError("violin plot has no finite values");
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  } else {
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const double slot = plot_w / static_cast<double>(series.size());
  auto ypix = [&](double v) { return kTop + plot_h * (hi - v) / (hi - lo); };
  auto xcenter = [&](std::size_t i) { return kLeft + slot * (static_cast<double>(i) + 0.5); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(kWidth) << "\" height=\""
    << fmt(kHeight) << "\" viewBox=\"0 0 " << fmt(kWidth) << ' ' << fmt(kHeight) << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << fmt(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
    << escape(title) << "</text>\n";
  o << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kTop) << "\" x2=\"" << fmt(kLeft)
    << "\" y2=\"" << fmt(kTop + plot_h) << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = lo + (hi - lo) * k / 4.0;
    o << "<text x=\"" << fmt(kLeft - 6) << "\" y=\"" << fmt(ypix(v) + 4)
      << "\" text-anchor=\"end\" font-size=\"10\">" << fmt(v) << "</text>\n";
  }
  o << "<text x=\"14\" y=\"" << fmt(kTop + plot_h / 2)
    << "\" font-size=\"11\" transform=\"rotate(-90 14 " << fmt(kTop + plot_h / 2)
    << ")\" text-anchor=\"middle\">risk ratio</text>\n";

  std::vector<std::pair<double, double>> means;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = data[i];
    const double cx = xcenter(i);
    o << "<text x=\"" << fmt(cx) << "\" y=\"" << fmt(kHeight - kBottom + 18)
      << "\" text-anchor=\"middle\" font-size=\"11\">" << escape(series[i].label) << "</text>\n";
    if (s.empty()) continue;
    double mean = 0.0;
    for (double x : s) mean += x;
    mean /= static_cast<double>(s.size());
    means.emplace_back(cx, ypix(mean));

    const double h = silverman_bandwidth(s);
    if (h == 0.0) {
      // Degenerate sample: a vertical tick at the common value.
      const double y = ypix(s.front());
      o << "<line class=\"violin\" x1=\"" << fmt(cx) << "\" y1=\"" << fmt(y - 6) << "\" x2=\""
        << fmt(cx) << "\" y2=\"" << fmt(y + 6) << "\" stroke=\"#4a6fa5\" stroke-width=\"2\"/>\n";
      continue;
    }
    const double a = s.front() - 3.0 * h;
    const double b = s.back() + 3.0 * h;
    std::vector<double> at(kDensityPoints);
    for (int k = 0; k < kDensityPoints; ++k) at[k] = a + (b - a) * k / (kDensityPoints - 1.0);
    const std::vector<double> dens = gaussian_kde(s, h, at);
    const double peak = *std::max_element(dens.begin(), dens.end());
    const double half = 0.4 * slot;
    o << "<path class=\"violin\" d=\"";
    for (int k = 0; k < kDensityPoints; ++k) {
      o << (k == 0 ? 'M' : 'L') << fmt(cx + half * dens[k] / peak) << ','
        << fmt(ypix(std::clamp(at[k], lo, hi))) << ' ';
    }
    for (int k = kDensityPoints - 1; k >= 0; --k) {
      o << 'L' << fmt(cx - half * dens[k] / peak) << ',' << fmt(ypix(std::clamp(at[k], lo, hi)))
        << ' ';
    }
    o << "Z\" fill=\"#9bb7d4\" stroke=\"#4a6fa5\"/>\n";
  }
  o << "<polyline id=\"mean-line\" fill=\"none\" stroke=\"red\" stroke-width=\"2\" points=\"";
  for (std::size_t k = 0; k < means.size(); ++k) {
    if (k) o << ' ';
    o << fmt(means[k].first) << ',' << fmt(means[k].second);
  }
  o << "\"/>\n";
  for (const auto& [x, y] : means) {
    o << "<circle cx=\"" << fmt(x) << "\" cy=\"" << fmt(y) << "\" r=\"3\" fill=\"red\"/>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace lassocv
