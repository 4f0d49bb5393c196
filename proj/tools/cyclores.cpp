// cyclores command-line front end.
#include "cyclores/errors.hpp"
#include "cyclores/runner.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
  using namespace cyclores;
  CLI::App app{"Resonant cyclotron acceleration by a periodic flux tube"};
  app.set_version_flag("--version", std::string(CYCLORES_VERSION));
  app.require_subcommand(1);

  std::string config_path;
  RunOverrides ov;
  std::string out_dir, tol_text;
  std::uint64_t seed = 0;
  double horizon = 0.0;

  std::string chosen;
  for (const char* name : {"simulate", "averaged", "decoupled", "analyze", "scan", "periodmap"}) {
    auto* sub = app.add_subcommand(name, std::string("run in ") + name + " mode");
    sub->add_option("config", config_path, "experiment config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "base random seed");
    sub->add_option("--horizon", horizon, "t1 - t0 (cyclotron periods in scan mode)");
    sub->add_option("--tol", tol_text, "relative,absolute tolerance");
    sub->callback([&chosen, name] { chosen = name; });
  }
  CLI11_PARSE(app, argc, argv);

  std::string err_dir = out_dir.empty() ? "." : out_dir;
  try {
    ExperimentConfig cfg = load_config(config_path);
    cfg.mode = *mode_from_name(chosen);
    if (!out_dir.empty()) ov.out = out_dir;
    if (app.get_subcommand(chosen)->count("--seed")) ov.seed = seed;
    if (app.get_subcommand(chosen)->count("--horizon")) ov.horizon = horizon;
    if (!tol_text.empty()) {
      const auto comma = tol_text.find(',');
      if (comma == std::string::npos) throw ValidationError("--tol expects R,A");
      ov.tol = Tolerance{std::stod(tol_text.substr(0, comma)), std::stod(tol_text.substr(comma + 1))};
      if (!(ov.tol->rel > 0 && ov.tol->abs > 0)) throw ValidationError("--tol values must be positive");
    }
    cfg = apply_overrides(std::move(cfg), ov);
    err_dir = cfg.out;
    // mode-specific requirements are checked against the chosen mode
    cfg = parse_config(serialize_config(cfg));
    const RunResult r = run(cfg);
    for (const auto& f : r.files) std::cout << f << '\n';
    std::cout << "manifest.json\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "cyclores: " << error_kind(e) << ": " << e.what() << '\n';
    write_error_record(err_dir, e);
    return 1;
  }
}
