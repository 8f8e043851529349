#include "io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "errors.hpp"

namespace wdt {

namespace {

constexpr int kVersion = 1;

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw IoError("bad float field: '" + s + "'");
  return v;
}

long long parse_int(const std::string& s) {
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0') throw IoError("bad integer field: '" + s + "'");
  return v;
}

uint64_t parse_u64(const std::string& s) {
  char* end = nullptr;
  const uint64_t v = std::strtoull(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0') throw IoError("bad uint64 field: '" + s + "'");
  return v;
}

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ' ' || c == '\t' || c == ',') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

struct Document {
  std::map<std::string, std::string> fields;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  const std::string& field(const std::string& key) const {
    auto it = fields.find(key);
    if (it == fields.end()) throw IoError("missing header field '" + key + "'");
    return it->second;
  }
  bool has(const std::string& key) const { return fields.count(key) != 0; }
};

Document parse_document(const std::string& path, const std::string& kind) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  Document doc;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(1);
      auto tok = tokenize(body);
      if (first) {
        if (tok.size() != 3 || tok[0] != "wdt" || tok[1] != kind)
          throw IoError("'" + path + "' is not a wdt " + kind + " file");
        if (parse_int(tok[2]) != kVersion)
          throw IoError("'" + path + "': unsupported " + kind + " version " + tok[2]);
        first = false;
        continue;
      }
      if (tok.empty()) continue;
      if (tok[0] == "columns") {
        doc.columns.assign(tok.begin() + 1, tok.end());
      } else {
        // value is everything after the key, verbatim
        const size_t key_pos = body.find_first_not_of(" \t");
        const size_t val_pos = body.find_first_not_of(" \t", key_pos + tok[0].size());
        doc.fields[tok[0]] = val_pos == std::string::npos ? "" : body.substr(val_pos);
      }
      continue;
    }
    if (first) throw IoError("'" + path + "' is not a wdt " + kind + " file");
    doc.rows.push_back(tokenize(line));
  }
  if (first) throw IoError("'" + path + "' is empty");
  return doc;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

void finish_out(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

std::string window_name(Window w) { return w == Window::Hann ? "hann" : "rectangular"; }

Window window_from(const std::string& s) {
  if (s == "hann") return Window::Hann;
  if (s == "rectangular") return Window::Rectangular;
  throw IoError("unknown window '" + s + "'");
}

}  // namespace

std::string format_double(double x) { return fmt(x); }

// ---------------------------------------------------------------------------
// charfn
// ---------------------------------------------------------------------------

void write_charfn(const std::string& path, const CharFnSeries& s) {
  s.validate();
  std::ofstream out = open_out(path);
  out << "# wdt charfn " << kVersion << "\n";
  out << "# t_window " << fmt(s.t_window) << "\n";
  out << "# n_steps " << s.n_steps << "\n";
  out << "# n_meas " << s.n_meas << "\n";
  out << "# seed " << s.seed << "\n";
  out << "# provenance " << (s.provenance == Provenance::Exact ? "exact" : "sampled") << "\n";
  out << "# engine " << s.engine << "\n";
  out << "# tag " << s.tag << "\n";
  out << "# tau " << fmt(s.tau) << "\n";
  out << "# beta " << fmt(s.beta) << "\n";
  out << "# clamp_count " << s.clamp_count << "\n";
  out << "# truncation_weight " << fmt(s.truncation_weight) << "\n";
  out << "# columns j u re_chi im_chi variance\n";
  for (int j = 0; j < s.n_steps; ++j)
    out << (j + 1) << ' ' << fmt(s.u[j]) << ' ' << fmt(s.value[j].real()) << ' '
        << fmt(s.value[j].imag()) << ' ' << fmt(s.variance[j]) << "\n";
  finish_out(out, path);
}

CharFnSeries read_charfn(const std::string& path) {
  const Document doc = parse_document(path, "charfn");
  CharFnSeries s;
  s.t_window = parse_double(doc.field("t_window"));
  s.n_steps = static_cast<int>(parse_int(doc.field("n_steps")));
  s.n_meas = static_cast<long>(parse_int(doc.field("n_meas")));
  s.seed = parse_u64(doc.field("seed"));
  const std::string prov = doc.field("provenance");
  if (prov == "exact")
    s.provenance = Provenance::Exact;
  else if (prov == "sampled")
    s.provenance = Provenance::Sampled;
  else
    throw IoError("unknown provenance '" + prov + "'");
  s.engine = doc.field("engine");
  s.tag = doc.field("tag");
  s.tau = parse_double(doc.field("tau"));
  s.beta = parse_double(doc.field("beta"));
  s.clamp_count = static_cast<int>(parse_int(doc.field("clamp_count")));
  s.truncation_weight = parse_double(doc.field("truncation_weight"));
  if (static_cast<int>(doc.rows.size()) != s.n_steps)
    throw IoError("charfn row count does not match n_steps");
  s.u.resize(s.n_steps);
  s.value.resize(s.n_steps);
  s.variance.resize(s.n_steps);
  for (int j = 0; j < s.n_steps; ++j) {
    const auto& r = doc.rows[j];
    if (r.size() != 5) throw IoError("charfn row needs 5 columns");
    s.u[j] = parse_double(r[1]);
    s.value[j] = {parse_double(r[2]), parse_double(r[3])};
    s.variance[j] = parse_double(r[4]);
  }
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------
// workdist
// ---------------------------------------------------------------------------

void write_workdist(const std::string& path, const WorkDistEstimate& d) {
  d.validate();
  std::ofstream out = open_out(path);
  out << "# wdt workdist " << kVersion << "\n";
  out << "# t_window " << fmt(d.t_window) << "\n";
  out << "# window " << window_name(d.window) << "\n";
  out << "# k_min " << d.k_min << "\n";
  out << "# k_max " << d.k_max << "\n";
  out << "# tag " << d.tag << "\n";
  out << "# columns k w p variance\n";
  for (int i = 0; i < d.size(); ++i)
    out << (d.k_min + i) << ' ' << fmt(d.w_grid[i]) << ' ' << fmt(d.p[i]) << ' '
        << fmt(d.var[i]) << "\n";
  finish_out(out, path);
}

WorkDistEstimate read_workdist(const std::string& path) {
  const Document doc = parse_document(path, "workdist");
  WorkDistEstimate d;
  d.t_window = parse_double(doc.field("t_window"));
  d.window = window_from(doc.field("window"));
  d.k_min = static_cast<int>(parse_int(doc.field("k_min")));
  d.k_max = static_cast<int>(parse_int(doc.field("k_max")));
  d.tag = doc.field("tag");
  const int n = d.k_max - d.k_min + 1;
  if (static_cast<int>(doc.rows.size()) != n)
    throw IoError("workdist row count does not match k range");
  d.w_grid.resize(n);
  d.p.resize(n);
  d.var.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto& r = doc.rows[i];
    if (r.size() != 4) throw IoError("workdist row needs 4 columns");
    d.w_grid[i] = parse_double(r[1]);
    d.p[i] = parse_double(r[2]);
    d.var[i] = parse_double(r[3]);
  }
  d.validate();
  return d;
}

// ---------------------------------------------------------------------------
// posterior
// ---------------------------------------------------------------------------

void write_posterior(const std::string& path, const Posterior& p) {
  const int nb = static_cast<int>(p.beta_grid.size());
  const int nd = static_cast<int>(p.df_grid.size());
  if (nb * nd != static_cast<int>(p.log_density.size()))
    throw IoError("posterior grid/density size mismatch");
  std::ofstream out = open_out(path);
  out << "# wdt posterior " << kVersion << "\n";
  out << "# n_beta " << nb << "\n";
  out << "# n_df " << nd << "\n";
  out << "# log_evidence " << fmt(p.log_evidence) << "\n";
  out << "# boundary_mass " << fmt(p.boundary_mass) << "\n";
  out << "# columns beta df log_density\n";
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < nd; ++j)
      out << fmt(p.beta_grid[i]) << ' ' << fmt(p.df_grid[j]) << ' '
          << fmt(p.log_density[static_cast<size_t>(i) * nd + j]) << "\n";
  finish_out(out, path);
}

Posterior read_posterior(const std::string& path) {
  const Document doc = parse_document(path, "posterior");
  Posterior p;
  const int nb = static_cast<int>(parse_int(doc.field("n_beta")));
  const int nd = static_cast<int>(parse_int(doc.field("n_df")));
  p.log_evidence = parse_double(doc.field("log_evidence"));
  p.boundary_mass = parse_double(doc.field("boundary_mass"));
  if (static_cast<long long>(doc.rows.size()) != 1LL * nb * nd)
    throw IoError("posterior row count does not match grid");
  p.beta_grid.resize(nb);
  p.df_grid.resize(nd);
  p.log_density.resize(static_cast<size_t>(nb) * nd);
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < nd; ++j) {
      const auto& r = doc.rows[static_cast<size_t>(i) * nd + j];
      if (r.size() != 3) throw IoError("posterior row needs 3 columns");
      const double b = parse_double(r[0]);
      const double f = parse_double(r[1]);
      if (j == 0) p.beta_grid[i] = b;
      if (i == 0) p.df_grid[j] = f;
      p.log_density[static_cast<size_t>(i) * nd + j] = parse_double(r[2]);
    }
  return p;
}

// ---------------------------------------------------------------------------
// summary
// ---------------------------------------------------------------------------

void SummaryRecord::set(const std::string& key, const std::string& value) {
  for (auto& kv : items)
    if (kv.first == key) {
      kv.second = value;
      return;
    }
  items.emplace_back(key, value);
}

void SummaryRecord::set_double(const std::string& key, double value) { set(key, fmt(value)); }

void SummaryRecord::set_int(const std::string& key, long long value) {
  set(key, std::to_string(value));
}

bool SummaryRecord::has(const std::string& key) const {
  for (const auto& kv : items)
    if (kv.first == key) return true;
  return false;
}

const std::string& SummaryRecord::get(const std::string& key) const {
  for (const auto& kv : items)
    if (kv.first == key) return kv.second;
  throw IoError("summary record has no key '" + key + "'");
}

double SummaryRecord::get_double(const std::string& key) const { return parse_double(get(key)); }

long long SummaryRecord::get_int(const std::string& key) const { return parse_int(get(key)); }

void write_summary(const std::string& path, const SummaryRecord& r) {
  std::ofstream out = open_out(path);
  out << "# wdt summary " << kVersion << "\n";
  out << "# columns key value\n";
  for (const auto& kv : r.items) out << kv.first << ' ' << kv.second << "\n";
  finish_out(out, path);
}

SummaryRecord read_summary(const std::string& path) {
  const Document doc = parse_document(path, "summary");
  SummaryRecord r;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const size_t sp = line.find(' ');
    if (sp == std::string::npos)
      r.set(line, "");
    else
      r.set(line.substr(0, sp), line.substr(sp + 1));
  }
  return r;
}

// ---------------------------------------------------------------------------
// table
// ---------------------------------------------------------------------------

void write_table(const std::string& path, const Table& t) {
  std::ofstream out = open_out(path);
  out << "# wdt table " << kVersion << "\n";
  for (const auto& kv : t.meta) out << "# " << kv.first << ' ' << kv.second << "\n";
  out << "# columns";
  for (const auto& c : t.columns) out << ' ' << c;
  out << "\n";
  for (const auto& row : t.rows) {
    if (row.size() != t.columns.size()) throw IoError("table row width mismatch");
    for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << fmt(row[i]);
    out << "\n";
  }
  finish_out(out, path);
}

Table read_table(const std::string& path) {
  const Document doc = parse_document(path, "table");
  Table t;
  for (const auto& kv : doc.fields) t.meta.emplace_back(kv.first, kv.second);
  t.columns = doc.columns;
  t.rows.reserve(doc.rows.size());
  for (const auto& r : doc.rows) {
    if (r.size() != t.columns.size()) throw IoError("table row width mismatch");
    std::vector<double> row(r.size());
    for (size_t i = 0; i < r.size(); ++i) row[i] = parse_double(r[i]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace wdt
