// zetalab <experiment> [options]; any further --key value pair becomes a config entry.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "zetalab/experiments.hpp"

namespace {

constexpr int kUsage = 2;

std::string joined_names() {
  std::string s;
  for (const auto &n : zetalab::experiment_names())
    s += (s.empty() ? "" : ", ") + n;
  return s;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Numerical laboratory for large values of log|zeta(1/2+it)|"};
  app.allow_extras();
  std::string experiment, config_file, out = "zetalab_out";
  unsigned threads = 0;
  app.add_option("experiment", experiment, "one of: " + joined_names())->required();
  app.add_option("--config", config_file, "flat key = value file; flags override it");
  app.add_option("--out", out, "output directory");
  app.add_option("--threads", threads, "worker threads (results do not depend on it)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kUsage;
  }

  zetalab::ExperimentConfig cfg;
  cfg.experiment = experiment;
  try {
    if (!config_file.empty())
      cfg.load_file(config_file);
    const auto extras = app.remaining();
    for (std::size_t i = 0; i < extras.size(); ++i) {
      std::string key = extras[i];
      if (key.rfind("--", 0) != 0)
        throw zetalab::validation_error("unexpected argument " + key);
      key = key.substr(2);
      if (auto eq = key.find('='); eq != std::string::npos) {
        cfg.set(key.substr(0, eq), key.substr(eq + 1));
      } else {
        if (i + 1 >= extras.size())
          throw zetalab::validation_error("--" + key + " needs a value");
        cfg.set(key, extras[++i]);
      }
    }
  } catch (const std::exception &e) {
    std::cerr << "zetalab: " << e.what() << '\n';
    return kUsage;
  }
  if (threads > 0)
    zetalab::set_worker_count(threads);

  try {
    const auto report = zetalab::run_experiment(cfg, out);
    for (const auto &c : report.checks)
      std::cout << (c.pass ? "PASS " : c.inconclusive ? "INCONCLUSIVE " : "FAIL ") << c.name << '\n';
    std::cout << "report: " << out << "/report.json\n";
    return report.exit_code();
  } catch (const zetalab::validation_error &e) {
    std::cerr << "zetalab: " << e.what() << '\n';
    return kUsage;
  } catch (const zetalab::domain_error &e) {
    std::cerr << "zetalab: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception &e) {
    std::cerr << "zetalab: " << e.what() << '\n';
    return 1;
  }
}
