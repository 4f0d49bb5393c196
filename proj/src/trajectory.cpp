#include "cyclores/trajectory.hpp"

#include "cyclores/errors.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace cyclores {

std::string_view chart_name(Chart chart) {
  switch (chart) {
    case Chart::cartesian: return "cartesian";
    case Chart::polar: return "polar";
    case Chart::actionangle: return "actionangle";
    case Chart::averaged: return "averaged";
    case Chart::decoupled: return "decoupled";
  }
  return "unknown";
}

Chart chart_from_name(std::string_view name) {
  for (Chart c : {Chart::cartesian, Chart::polar, Chart::actionangle, Chart::averaged,
                  Chart::decoupled}) {
    if (chart_name(c) == name) return c;
  }
  throw Error("unknown chart '" + std::string(name) + "'");
}

std::vector<std::string> chart_columns(Chart chart) {
  switch (chart) {
    case Chart::cartesian: return {"q1", "q2", "p1", "p2"};
    case Chart::polar: return {"r", "theta", "p_r", "p_theta"};
    case Chart::actionangle: return {"I", "phi"};
    case Chart::averaged: return {"chi1", "J1"};
    case Chart::decoupled: return {"F", "phi"};
  }
  return {};
}

Eigen::VectorXd Trajectory::column(std::string_view name) const {
  const auto cols = chart_columns(chart);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i] == name) return states.col(Eigen::Index(i));
  }
  throw Error("chart " + std::string(chart_name(chart)) + " has no column '" + std::string(name) +
              "'");
}

void Trajectory::check() const {
  if (states.rows() != Eigen::Index(times.size())) {
    throw Error("trajectory has " + std::to_string(times.size()) + " times but " +
                std::to_string(states.rows()) + " states");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw Error("trajectory times are not strictly increasing");
  }
}

Trajectory Trajectory::truncated(double t_max) const {
  Trajectory out = *this;
  std::size_t n = 0;
  while (n < times.size() && times[n] <= t_max) ++n;
  out.times.resize(n);
  out.states = states.topRows(Eigen::Index(n));
  std::erase_if(out.events, [&](const PerihelionEvent& e) { return e.t > t_max; });
  return out;
}

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void CsvTable::write(std::ostream& os) const {
  if (!provenance.empty()) os << "# " << provenance << '\n';
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  std::string line;
  for (const auto& row : rows) {
    line.clear();
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) line += ',';
      line += format_double(row[i]);
    }
    line += '\n';
    os << line;
  }
}

void CsvTable::write(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  write(os);
}

CsvTable CsvTable::read(std::istream& is) {
  CsvTable t;
  std::string line;
  bool have_header = false;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (t.provenance.empty()) t.provenance = line.substr(line.find_first_not_of("# "));
      continue;
    }
    if (!have_header) {
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) t.header.push_back(cell);
      have_header = true;
      continue;
    }
    std::vector<double> row;
    const char* p = line.data();
    const char* end = p + line.size();
    int column = 1;
    while (p <= end) {
      const char* comma = std::find(p, end, ',');
      double v = 0.0;
      auto res = std::from_chars(p, comma, v);
      if (res.ec != std::errc() || res.ptr != comma) {
        throw ParseError("malformed number in CSV", line_no, column);
      }
      row.push_back(v);
      if (comma == end) break;
      p = comma + 1;
      column = int(p - line.data()) + 1;
    }
    if (row.size() != t.header.size()) throw ParseError("row width differs from header", line_no, 1);
    t.rows.push_back(std::move(row));
  }
  if (!have_header) throw ParseError("CSV has no header row", line_no, 1);
  return t;
}

CsvTable CsvTable::read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path + "'");
  return read(is);
}

std::string CsvTable::provenance_value(std::string_view key) const {
  const std::string needle = std::string(key) + "=";
  std::size_t pos = 0;
  while ((pos = provenance.find(needle, pos)) != std::string::npos) {
    if (pos == 0 || provenance[pos - 1] == ' ') {
      const auto start = pos + needle.size();
      const auto stop = provenance.find(' ', start);
      return provenance.substr(start, stop == std::string::npos ? std::string::npos : stop - start);
    }
    pos += needle.size();
  }
  return {};
}

int CsvTable::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return int(i);
  }
  return -1;
}

CsvTable trajectory_table(const Trajectory& tr) {
  CsvTable t;
  t.provenance = "cyclores chart=" + std::string(chart_name(tr.chart)) +
                 " params_digest=" + tr.params_digest;
  t.header.push_back("t");
  for (const auto& c : chart_columns(tr.chart)) t.header.push_back(c);
  t.rows.reserve(tr.size());
  for (std::size_t i = 0; i < tr.size(); ++i) {
    std::vector<double> row{tr.times[i]};
    for (Eigen::Index j = 0; j < tr.states.cols(); ++j) row.push_back(tr.states(Eigen::Index(i), j));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Trajectory trajectory_from_table(const CsvTable& table) {
  Trajectory tr;
  const std::string chart = table.provenance_value("chart");
  if (chart.empty()) throw Error("CSV provenance line has no chart");
  tr.chart = chart_from_name(chart);
  tr.params_digest = table.provenance_value("params_digest");
  const auto cols = chart_columns(tr.chart);
  const int ti = table.column_index("t");
  if (ti < 0) throw Error("CSV has no t column");
  std::vector<int> idx;
  for (const auto& c : cols) {
    const int i = table.column_index(c);
    if (i < 0) throw Error("CSV lacks column '" + c + "' of chart " + chart);
    idx.push_back(i);
  }
  tr.states.resize(Eigen::Index(table.rows.size()), Eigen::Index(cols.size()));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    tr.times.push_back(table.rows[r][std::size_t(ti)]);
    for (std::size_t j = 0; j < idx.size(); ++j) {
      tr.states(Eigen::Index(r), Eigen::Index(j)) = table.rows[r][std::size_t(idx[j])];
    }
  }
  tr.check();
  return tr;
}

}  // namespace cyclores
