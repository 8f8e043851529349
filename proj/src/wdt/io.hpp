#pragma once

#include <string>
#include <utility>
#include <vector>

#include "bayes.hpp"
#include "measurement.hpp"
#include "spectral.hpp"

namespace wdt {

// All result files share one shape: a versioned "# wdt <kind> <version>" first
// line, "# key value" header fields, a "# columns ..." line, then data rows.
// Floats are written with %.17g so every file round-trips bit-exactly.

std::string format_double(double x);

void write_charfn(const std::string& path, const CharFnSeries& s);
CharFnSeries read_charfn(const std::string& path);

void write_workdist(const std::string& path, const WorkDistEstimate& d);
WorkDistEstimate read_workdist(const std::string& path);

void write_posterior(const std::string& path, const Posterior& p);
Posterior read_posterior(const std::string& path);

// Ordered key -> value record used for per-run summaries and fit reports.
struct SummaryRecord {
  std::vector<std::pair<std::string, std::string>> items;

  void set(const std::string& key, const std::string& value);
  void set_double(const std::string& key, double value);
  void set_int(const std::string& key, long long value);
  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  long long get_int(const std::string& key) const;
};

void write_summary(const std::string& path, const SummaryRecord& r);
SummaryRecord read_summary(const std::string& path);

// Column table with header metadata; written comma-separated (plot data).
struct Table {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

void write_table(const std::string& path, const Table& t);
Table read_table(const std::string& path);

}  // namespace wdt
