#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "adgraph/config.hpp"
#include "adgraph/error.hpp"
#include "adgraph/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Pseudo-labeled dataset pipeline over ad-like text records"};
  app.set_version_flag("--version", adgraph::version_string());

  std::string stage;
  std::string config_path;
  std::vector<std::string> overrides;
  unsigned threads = 0;
  bool force = false;

  std::string stages_help = "Subcommand:";
  for (const auto& s : adgraph::stage_names()) stages_help += " " + s;
  app.add_option("stage", stage, stages_help)->required()->check(CLI::IsMember(adgraph::stage_names()));
  app.add_option("-c,--config", config_path, "Key-value config file");
  app.add_option("--set", overrides, "Override a config key (key=value), repeatable");
  app.add_option("--threads", threads, "Worker thread bound (0: all cores)");
  app.add_flag("--force", force, "Run even when upstream artifacts changed since their manifests");

  CLI11_PARSE(app, argc, argv);

  adgraph::PipelineConfig cfg;
  try {
    if (!config_path.empty()) cfg = adgraph::load_config(config_path);
    adgraph::apply_overrides(cfg, overrides);
    if (app.count("--threads")) cfg.threads = threads;
  } catch (const adgraph::ConfigError& e) {
    std::cerr << "adgraph: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "adgraph: " << e.what() << "\n";
    return 2;
  }
  adgraph::RunOptions opts;
  opts.force = force;
  return adgraph::run(stage, cfg, opts);
}
