#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dspn/error.hpp"
#include "dspn/parallel.hpp"
#include "dspn/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Depth refinement by spatial propagation (CSPN and deformable DSPN)"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  const std::vector<std::pair<const char*, const char*>> modes{
      {"generate", "Write synthetic scenes (truth, sparse, mask, coarse) as GRD files"},
      {"complete", "Refine coarse depth of generated scenes"},
      {"eval", "Score predictions against ground truth as CSV"},
      {"gradcheck", "Compare analytic gradients with finite differences"},
      {"ablate", "Sweep refine method, iterations and kernel size"},
  };
  for (const auto& [name, help] : modes) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON configuration file");
    sub->add_option("--set", overrides, "Override a config key, e.g. --set refine.iters=3")->take_all();
  }

  CLI11_PARSE(app, argc, argv);

  try {
    dspn::configure_threads_from_env();
    std::vector<std::string> all = overrides;
    all.insert(all.begin(), std::string("mode=") + app.get_subcommands().front()->get_name());
    const dspn::RunConfig cfg = dspn::load_config(config_path, all);
    return dspn::run(cfg, std::cout, std::cerr);
  } catch (const dspn::Error& e) {
    std::cerr << "dspn: " << dspn::to_string(e.code()) << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "dspn: " << e.what() << '\n';
    return 2;
  }
}
