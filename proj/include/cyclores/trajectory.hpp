#pragma once

#include "cyclores/ode.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace cyclores {

enum class Chart { cartesian, polar, actionangle, averaged, decoupled };

std::string_view chart_name(Chart chart);
Chart chart_from_name(std::string_view name);
/// State column names of a chart, in storage order.
std::vector<std::string> chart_columns(Chart chart);

/// Near-origin passage: minimum radius reached while r stayed below the perihelion threshold.
struct PerihelionEvent {
  double t;
  double r;
};

/// Time-stamped samples of one chart. Row i of `states` is the state at times[i].
struct Trajectory {
  Chart chart = Chart::cartesian;
  std::vector<double> times;
  Eigen::MatrixXd states;
  std::string params_digest;
  std::vector<PerihelionEvent> events;
  IntegratorStats stats;

  std::size_t size() const { return times.size(); }
  Eigen::VectorXd state(std::size_t i) const { return states.row(Eigen::Index(i)).transpose(); }
  Eigen::VectorXd column(std::string_view name) const;
  Eigen::Map<const Eigen::VectorXd> time_vector() const {
    return {times.data(), Eigen::Index(times.size())};
  }

  /// Throws Error if times are not strictly increasing or sizes disagree.
  void check() const;

  /// Prefix of samples with t <= t_max.
  Trajectory truncated(double t_max) const;
};

template <typename Scalar, int N>
Trajectory to_trajectory(Chart chart, const OdeSolution<Scalar, N>& sol, std::string digest) {
  Trajectory tr;
  tr.chart = chart;
  tr.times.assign(sol.times.begin(), sol.times.end());
  tr.states = sol.states.transpose().template cast<double>();
  tr.params_digest = std::move(digest);
  tr.stats = sol.stats;
  return tr;
}

/// Shortest round-trip decimal representation, independent of the C locale.
std::string format_double(double x);

/// Comma-separated table with a `# key=value ...` provenance line, a header row and
/// one row per sample; `\n` line endings.
struct CsvTable {
  std::string provenance;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  void write(std::ostream& os) const;
  void write(const std::string& path) const;
  static CsvTable read(std::istream& is);
  static CsvTable read_file(const std::string& path);

  /// Value of `key=` inside the provenance line, or empty.
  std::string provenance_value(std::string_view key) const;
  int column_index(std::string_view name) const;
};

CsvTable trajectory_table(const Trajectory& tr);
Trajectory trajectory_from_table(const CsvTable& table);

}  // namespace cyclores
