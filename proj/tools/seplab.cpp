#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "seplab/seplab.hpp"

int main(int argc, char** argv) {
  CLI::App app{"seplab: two-layer vs three-layer separation experiments"};
  std::string experiment, d_range, config_file, format, out;
  std::uint64_t seed = 0;
  double sigma = 0, x0 = 0, eps = 0, ell = 0;

  auto* exp_opt = app.add_option("experiment", experiment, "experiment to run")
                      ->check(CLI::IsMember(seplab::experiment_names()));
  auto* d_opt = app.add_option("--d", d_range, "dimension range lo..hi");
  auto* seed_opt = app.add_option("--seed", seed, "64-bit seed");
  auto* out_opt = app.add_option("--out", out, "output directory");
  app.add_option("--config", config_file, "JSON config file")->check(CLI::ExistingFile);
  auto* fmt_opt = app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  auto* sigma_opt = app.add_option("--sigma", sigma, "noise level");
  auto* x0_opt = app.add_option("--x0", x0, "plateau half-width");
  auto* eps_opt = app.add_option("--eps", eps, "plateau failure probability");
  auto* ell_opt = app.add_option("--ell", ell, "sine frequency");
  CLI11_PARSE(app, argc, argv);

  try {
    seplab::ExperimentConfig cfg;
    if (!config_file.empty()) cfg = seplab::load_config_file(config_file);
    if (*exp_opt) cfg.experiment = experiment;
    if (*d_opt) std::tie(cfg.d_min, cfg.d_max) = seplab::parse_d_range(d_range);
    if (*seed_opt) cfg.seed = seed;
    if (*out_opt) cfg.out = out;
    if (*fmt_opt) cfg.format = format;
    if (*sigma_opt) cfg.sigma = sigma;
    if (*x0_opt) cfg.x0 = x0;
    if (*eps_opt) cfg.eps = eps;
    if (*ell_opt) cfg.ell = ell;
    if (cfg.experiment.empty()) throw seplab::Error(seplab::ErrorKind::ConfigInvalid, "no experiment given");

    const auto report = seplab::run(cfg);
    const auto path = seplab::emit(report);
    std::cout << path.string() << '\n';
    if (report.all_pass()) return 0;
    std::cerr << "failing rows:\n";
    for (const auto& row : report.rows)
      if (!row.at("pass").get<bool>()) std::cerr << "  " << row.dump() << '\n';
    return 1;
  } catch (const seplab::Error& e) {
    std::cerr << "error (" << seplab::to_string(e.kind()) << "): " << e.what() << '\n';
    return 2;
  }
}
