#include "cyclores/config.hpp"

#include "cyclores/errors.hpp"
#include "cyclores/trajectory.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace cyclores {

namespace {

struct Token {
  std::string_view text;
  int column;  // 1-based
};

std::vector<Token> split(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    const std::size_t j = line.find_first_of(" \t\r", i);
    const std::size_t end = j == std::string_view::npos ? line.size() : j;
    out.push_back({line.substr(i, end - i), int(i) + 1});
    i = end;
  }
  return out;
}

struct Diag {
  int line;
  int column;
  std::string what;
};

class LineParser {
 public:
  LineParser(std::vector<Token> toks, int line, std::vector<Diag>& diags)
      : toks_(std::move(toks)), line_(line), diags_(diags) {}

  bool arity(std::size_t n) {
    if (toks_.size() == n + 1) return true;
    const int col = toks_.size() > n + 1 ? toks_[n + 1].column : toks_.back().column;
    fail(col, "'" + std::string(toks_[0].text) + "' expects " + std::to_string(n) + " value(s), got " +
                  std::to_string(toks_.size() - 1));
    return false;
  }
  std::optional<double> real(std::size_t i) {
    const auto& t = toks_[i];
    double v;
    const auto r = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (r.ec != std::errc() || r.ptr != t.text.data() + t.text.size() || !std::isfinite(v)) {
      fail(t.column, "expected a finite number, got '" + std::string(t.text) + "'");
      return std::nullopt;
    }
    return v;
  }
  std::optional<std::int64_t> integer(std::size_t i) {
    const auto& t = toks_[i];
    std::int64_t v;
    const auto r = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (r.ec != std::errc() || r.ptr != t.text.data() + t.text.size()) {
      fail(t.column, "expected an integer, got '" + std::string(t.text) + "'");
      return std::nullopt;
    }
    return v;
  }
  std::optional<std::pair<std::int64_t, std::int64_t>> ratio(std::size_t i) {
    const auto& t = toks_[i];
    const auto slash = t.text.find('/');
    std::int64_t num, den = 1;
    const char* b = t.text.data();
    const char* mid = slash == std::string_view::npos ? b + t.text.size() : b + slash;
    auto r1 = std::from_chars(b, mid, num);
    bool ok = r1.ec == std::errc() && r1.ptr == mid;
    if (ok && slash != std::string_view::npos) {
      auto r2 = std::from_chars(mid + 1, b + t.text.size(), den);
      ok = r2.ec == std::errc() && r2.ptr == b + t.text.size();
    }
    if (!ok || num <= 0 || den <= 0) {
      fail(t.column, "expected a positive ratio like 1/2, got '" + std::string(t.text) + "'");
      return std::nullopt;
    }
    return std::pair{num, den};
  }
  void fail(int column, std::string what) { diags_.push_back({line_, column, std::move(what)}); }
  const std::vector<Token>& tokens() const { return toks_; }

 private:
  std::vector<Token> toks_;
  int line_;
  std::vector<Diag>& diags_;
};

}  // namespace

std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::simulate: return "simulate";
    case Mode::averaged: return "averaged";
    case Mode::decoupled: return "decoupled";
    case Mode::analyze: return "analyze";
    case Mode::scan: return "scan";
    case Mode::periodmap: return "periodmap";
  }
  return "simulate";
}

std::optional<Mode> mode_from_name(std::string_view name) {
  for (Mode m : {Mode::simulate, Mode::averaged, Mode::decoupled, Mode::analyze, Mode::scan,
                 Mode::periodmap}) {
    if (mode_name(m) == name) return m;
  }
  return std::nullopt;
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
  return mode == o.mode && params.digest() == o.params.digest() &&
         p_theta_explicit == o.p_theta_explicit && q0 == o.q0 && v0 == o.v0 && I0 == o.I0 &&
         phi0 == o.phi0 && chi0 == o.chi0 && J0 == o.J0 && F0 == o.F0 && t0 == o.t0 &&
         t1 == o.t1 && samples == o.samples && tol.rel == o.tol.rel && tol.abs == o.tol.abs &&
         seed == o.seed && ratios == o.ratios && seeds == o.seeds &&
         scan_periods == o.scan_periods && pm_rho == o.pm_rho && pm_a == o.pm_a &&
         pm_h0 == o.pm_h0 && pm_full == o.pm_full && trajectory == o.trajectory && out == o.out &&
         plot_points == o.plot_points;
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  std::vector<Diag> diags;
  std::vector<std::string> seen;
  bool any = false;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto toks = split(line);
    if (toks.empty()) continue;
    any = true;
    LineParser p(std::move(toks), line_no, diags);
    const std::string key(p.tokens()[0].text);
    const std::size_t nvals = p.tokens().size() - 1;
    const bool repeatable = key == "cos" || key == "sin";
    if (!repeatable) {
      if (std::find(seen.begin(), seen.end(), key) != seen.end()) {
        p.fail(p.tokens()[0].column, "duplicate key '" + key + "'");
        continue;
      }
      seen.push_back(key);
    }
    auto set_real = [&](double& dst) {
      if (p.arity(1)) {
        if (auto v = p.real(1)) dst = *v;
      }
    };
    auto set_opt = [&](std::optional<double>& dst) {
      if (p.arity(1)) {
        if (auto v = p.real(1)) dst = *v;
      }
    };
    auto set_vec = [&](std::optional<Vec2>& dst) {
      if (p.arity(2)) {
        auto x = p.real(1), y = p.real(2);
        if (x && y) dst = Vec2(*x, *y);
      }
    };
    auto set_count = [&](auto& dst, std::int64_t min) {
      if (p.arity(1)) {
        if (auto v = p.integer(1)) {
          if (*v < min) {
            p.fail(p.tokens()[1].column, "'" + key + "' must be at least " + std::to_string(min));
          } else {
            dst = static_cast<std::remove_reference_t<decltype(dst)>>(*v);
          }
        }
      }
    };

    if (key == "mode") {
      if (p.arity(1)) {
        if (auto m = mode_from_name(p.tokens()[1].text)) {
          cfg.mode = *m;
        } else {
          p.fail(p.tokens()[1].column, "unknown mode '" + std::string(p.tokens()[1].text) + "'");
        }
      }
    } else if (key == "b") {
      set_real(cfg.params.b);
    } else if (key == "omega") {
      set_real(cfg.params.omega);
    } else if (key == "epsilon") {
      set_real(cfg.params.epsilon);
    } else if (key == "p_theta") {
      set_real(cfg.params.p_theta);
      cfg.p_theta_explicit = true;
    } else if (key == "cos" || key == "sin") {
      if (p.arity(2)) {
        auto k = p.integer(1);
        auto v = p.real(2);
        if (k && *k < 1) {
          p.fail(p.tokens()[1].column, "harmonic index must be positive");
        } else if (k && v) {
          const int kk = int(*k);
          const double old = key == "cos" ? cfg.params.profile.cos_coeff(kk) : cfg.params.profile.sin_coeff(kk);
          if (old != 0.0) p.fail(p.tokens()[1].column, "harmonic " + key + " " + std::to_string(kk) + " given twice");
          if (key == "cos") {
            cfg.params.profile.set_cos(kk, *v);
          } else {
            cfg.params.profile.set_sin(kk, *v);
          }
        }
      }
    } else if (key == "ratio") {
      if (p.arity(1)) {
        if (auto r = p.ratio(1)) cfg.params.pair = ResonancePair::from_ratio(r->first, r->second);
      }
    } else if (key == "q0") {
      set_vec(cfg.q0);
    } else if (key == "v0") {
      set_vec(cfg.v0);
    } else if (key == "I0") {
      set_opt(cfg.I0);
    } else if (key == "phi0") {
      set_opt(cfg.phi0);
    } else if (key == "chi0") {
      set_opt(cfg.chi0);
    } else if (key == "J0") {
      set_opt(cfg.J0);
    } else if (key == "F0") {
      set_opt(cfg.F0);
    } else if (key == "t0") {
      set_real(cfg.t0);
    } else if (key == "t1") {
      set_real(cfg.t1);
    } else if (key == "samples") {
      set_count(cfg.samples, 2);
    } else if (key == "rtol") {
      set_real(cfg.tol.rel);
    } else if (key == "atol") {
      set_real(cfg.tol.abs);
    } else if (key == "seed") {
      set_count(cfg.seed, 0);
    } else if (key == "seeds") {
      set_count(cfg.seeds, 1);
    } else if (key == "scan_periods") {
      set_real(cfg.scan_periods);
    } else if (key == "ratios") {
      if (nvals == 0) p.fail(p.tokens()[0].column, "'ratios' needs at least one value");
      for (std::size_t i = 1; i <= nvals; ++i) {
        if (auto r = p.ratio(i)) cfg.ratios.push_back(*r);
      }
    } else if (key == "pm_rho") {
      set_real(cfg.pm_rho);
    } else if (key == "pm_a") {
      set_real(cfg.pm_a);
    } else if (key == "pm_h0") {
      if (nvals == 0) p.fail(p.tokens()[0].column, "'pm_h0' needs at least one value");
      for (std::size_t i = 1; i <= nvals; ++i) {
        if (auto v = p.real(i)) cfg.pm_h0.push_back(*v);
      }
    } else if (key == "pm_map") {
      if (p.arity(1)) {
        const auto v = p.tokens()[1].text;
        if (v == "full" || v == "half") {
          cfg.pm_full = v == "full";
        } else {
          p.fail(p.tokens()[1].column, "pm_map must be 'full' or 'half'");
        }
      }
    } else if (key == "trajectory") {
      if (p.arity(1)) cfg.trajectory = std::string(p.tokens()[1].text);
    } else if (key == "out") {
      if (p.arity(1)) cfg.out = std::string(p.tokens()[1].text);
    } else if (key == "plot_points") {
      set_count(cfg.plot_points, 2);
    } else {
      p.fail(p.tokens()[0].column, "unknown key '" + key + "'");
    }
  }
  if (!any) throw ParseError("config is empty", 1, 1);
  if (!diags.empty()) {
    std::string msg = diags.front().what;
    for (std::size_t i = 1; i < diags.size(); ++i) {
      msg += "; line " + std::to_string(diags[i].line) + ", column " + std::to_string(diags[i].column) +
             ": " + diags[i].what;
    }
    throw ParseError(msg, diags.front().line, diags.front().column);
  }

  std::vector<std::string> problems;
  if (!cfg.p_theta_explicit) {
    if (cfg.q0 && cfg.v0) {
      cfg.params.p_theta = p_theta_from_velocity(cfg.params.b, cfg.params.omega, cfg.params.epsilon,
                                                 cfg.params.profile, *cfg.q0, *cfg.v0, cfg.t0);
    } else {
      problems.push_back("p_theta or both q0 and v0 must be given");
    }
  }
  for (auto& v : cfg.params.violations()) problems.push_back(std::move(v));
  if (!(cfg.t1 > cfg.t0)) problems.push_back("t1 > t0");
  if (!(cfg.tol.rel > 0.0 && cfg.tol.abs > 0.0)) problems.push_back("rtol > 0 and atol > 0");
  if (cfg.q0 && !(cfg.q0->squaredNorm() > 0.0)) problems.push_back("q0 != 0");
  if (cfg.mode == Mode::scan && cfg.ratios.empty()) problems.push_back("scan mode needs 'ratios'");
  if (cfg.mode == Mode::periodmap && cfg.pm_h0.empty()) problems.push_back("periodmap mode needs 'pm_h0'");
  if (cfg.mode == Mode::analyze && cfg.trajectory.empty()) problems.push_back("analyze mode needs 'trajectory'");
  if (cfg.mode == Mode::averaged && !cfg.params.pair) problems.push_back("averaged mode needs 'ratio'");
  if (cfg.mode == Mode::decoupled && !cfg.F0) problems.push_back("decoupled mode needs 'F0'");
  if (!problems.empty()) {
    std::string msg = "invalid config:";
    for (const auto& s : problems) msg += " [" + s + "]";
    throw ValidationError(msg);
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream os;
  auto kv = [&](std::string_view k, double v) { os << k << ' ' << format_double(v) << '\n'; };
  os << "mode " << mode_name(c.mode) << '\n';
  kv("b", c.params.b);
  kv("omega", c.params.omega);
  kv("epsilon", c.params.epsilon);
  if (c.p_theta_explicit) kv("p_theta", c.params.p_theta);
  for (int k = 1; k <= c.params.profile.order(); ++k) {
    if (c.params.profile.cos_coeff(k) != 0.0) os << "cos " << k << ' ' << format_double(c.params.profile.cos_coeff(k)) << '\n';
    if (c.params.profile.sin_coeff(k) != 0.0) os << "sin " << k << ' ' << format_double(c.params.profile.sin_coeff(k)) << '\n';
  }
  if (c.params.pair) os << "ratio " << c.params.pair->mu() << '/' << c.params.pair->nu() << '\n';
  if (c.q0) os << "q0 " << format_double(c.q0->x()) << ' ' << format_double(c.q0->y()) << '\n';
  if (c.v0) os << "v0 " << format_double(c.v0->x()) << ' ' << format_double(c.v0->y()) << '\n';
  if (c.I0) kv("I0", *c.I0);
  if (c.phi0) kv("phi0", *c.phi0);
  if (c.chi0) kv("chi0", *c.chi0);
  if (c.J0) kv("J0", *c.J0);
  if (c.F0) kv("F0", *c.F0);
  kv("t0", c.t0);
  kv("t1", c.t1);
  os << "samples " << c.samples << '\n';
  kv("rtol", c.tol.rel);
  kv("atol", c.tol.abs);
  os << "seed " << c.seed << '\n';
  os << "seeds " << c.seeds << '\n';
  kv("scan_periods", c.scan_periods);
  if (!c.ratios.empty()) {
    os << "ratios";
    for (const auto& [n, d] : c.ratios) os << ' ' << n << '/' << d;
    os << '\n';
  }
  kv("pm_rho", c.pm_rho);
  kv("pm_a", c.pm_a);
  if (!c.pm_h0.empty()) {
    os << "pm_h0";
    for (double h : c.pm_h0) os << ' ' << format_double(h);
    os << '\n';
  }
  os << "pm_map " << (c.pm_full ? "full" : "half") << '\n';
  if (!c.trajectory.empty()) os << "trajectory " << c.trajectory << '\n';
  os << "out " << c.out << '\n';
  os << "plot_points " << c.plot_points << '\n';
  return os.str();
}

}  // namespace cyclores
