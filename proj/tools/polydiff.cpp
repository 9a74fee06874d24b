#include <iostream>

#include "CLI11.hpp"
#include "app/config.hpp"
#include "app/tasks.hpp"
#include "polydiff/errors.hpp"

int main(int argc, char** argv) {
  using namespace polydiff;
  CLI::App cli{"Moments of measure-valued polynomial diffusions", "polydiff"};
  std::string task, config, preset_name, out;
  std::uint64_t seed = 0;
  bool quick = false;
  cli.add_option("task", task, "moments | simulate | validate | kkt")->required();
  auto* cfg = cli.add_option("--config", config, "experiment JSON file");
  auto* pre = cli.add_option("--preset", preset_name, "built-in experiment instead of --config");
  cfg->excludes(pre);
  auto* seed_opt = cli.add_option("--seed", seed, "master seed (overrides the config)");
  cli.add_flag("--quick", quick, "reduced sample sizes");
  auto* out_opt = cli.add_option("--out", out, "output directory (overrides the config)");
  cli.footer("presets: fleming-viot, heterozygosity, common-noise, factor-model\n"
             "exit status: 0 success, 1 validation failure, 2 usage or config error");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (config.empty() && preset_name.empty()) {
    std::cerr << "polydiff: one of --config or --preset is required\n";
    return 2;
  }

  try {
    const app::Task t = app::parse_task(task);
    app::ExperimentConfig c = config.empty() ? app::preset(preset_name) : app::load_config(config);
    app::RunOptions opts;
    if (*seed_opt) opts.seed = seed;
    if (*out_opt) opts.out = out;
    opts.quick = quick;
    const app::RunResult r = app::run_task(t, std::move(c), opts);
    std::cout << r.summary << '\n';
    return r.exit_code;
  } catch (const app::ConfigError& e) {
    std::cerr << "polydiff: " << e.what() << '\n';
    return 2;
  } catch (const MemoryGuardError& e) {
    std::cerr << "polydiff: " << e.what() << '\n';
    return 2;
  } catch (const ArgumentError& e) {
    std::cerr << "polydiff: invalid config: " << e.what() << '\n';
    return 2;
  } catch (const InvariantError& e) {
    std::cerr << "polydiff: invalid config: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "polydiff: " << e.what() << '\n';
    return 1;
  }
}
