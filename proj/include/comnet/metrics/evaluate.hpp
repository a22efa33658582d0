#pragma once

#include "../pipeline/slice.hpp"
#include "metrics.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace comnet {

struct SliceMetric
{
  std::string case_id;
  Index slice = 0;
  std::string method;
  double psnr_db = 0.0;
  double ssim = 0.0; // fraction
  bool failed = false;
  std::string error;
};

struct Summary
{
  double mean = 0.0;
  double sem = 0.0;
};

// Mean and standard error (sample std / sqrt(n)). Infinite PSNRs propagate:
// all-infinite gives (+inf, 0).
inline Summary summarize(std::vector<double> const &v)
{
  if (v.empty()) {
    return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  }
  std::size_t inf = 0;
  for (double x : v) {
    inf += std::isinf(x) ? 1 : 0;
  }
  double const n = static_cast<double>(v.size());
  if (inf > 0) {
    double const infinity = std::numeric_limits<double>::infinity();
    return {infinity, inf == v.size() ? 0.0 : infinity};
  }
  double mean = 0.0;
  for (double x : v) {
    mean += x;
  }
  mean /= n;
  if (v.size() < 2) {
    return {mean, 0.0};
  }
  double ss = 0.0;
  for (double x : v) {
    ss += (x - mean) * (x - mean);
  }
  return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

struct MetricReport
{
  std::string method;
  std::vector<SliceMetric> rows;
  Summary psnr;
  Summary ssim;
  Index failures = 0;
};

using Reconstructor = std::function<ComplexImage(PreparedSlice const &)>;

// Runs `recon` on every slice and scores it against the slice target.
// Failing slices are kept as failed rows and left out of the aggregate.
inline MetricReport evaluate(std::vector<PreparedSlice> const &slices, std::string const &method,
                             Reconstructor const &recon)
{
  if (slices.empty()) {
    throw InvalidArgument("evaluate: no slices to evaluate");
  }
  MetricReport report;
  report.method = method;
  std::vector<double> p;
  std::vector<double> s;
  for (std::size_t i = 0; i < slices.size(); ++i) {
    SliceMetric row;
    row.case_id = slices[i].id;
    row.slice = static_cast<Index>(i);
    row.method = method;
    try {
      ComplexImage const img = recon(slices[i]);
      row.psnr_db = psnr(img, slices[i].target);
      row.ssim = ssim(img, slices[i].target);
      p.push_back(row.psnr_db);
      s.push_back(row.ssim);
    } catch (Error const &e) {
      row.failed = true;
      row.error = e.what();
      ++report.failures;
    }
    report.rows.push_back(std::move(row));
  }
  report.psnr = summarize(p);
  report.ssim = summarize(s);
  return report;
}

inline std::string format_metric(double v)
{
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  if (std::isnan(v)) {
    return "nan";
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline constexpr char const *csv_header = "case_id,slice,method,psnr_db,ssim";

// One CSV row per slice; failed rows carry empty metric fields.
inline void write_csv_rows(std::ostream &os, MetricReport const &r)
{
  for (auto const &row : r.rows) {
    os << row.case_id << ',' << row.slice << ',' << row.method << ',';
    if (row.failed) {
      os << ",\n";
    } else {
      os << format_metric(row.psnr_db) << ',' << format_metric(row.ssim) << '\n';
    }
  }
}

} // namespace comnet
