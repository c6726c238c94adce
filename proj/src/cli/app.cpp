#include <algorithm>
#include <functional>
#include <ostream>

#include <CLI11.hpp>

#include "oam/cli.hpp"
#include "oam/error.hpp"

namespace oam::cli {

int main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optomechanical OAM detector simulator", "oam-sense"};
  app.require_subcommand(1);

  std::string config_path;
  std::string preset;
  std::string out_dir = ".";

  struct Command {
    const char* name;
    const char* help;
    std::function<void(const RunContext&)> run;
  };
  const std::vector<Command> commands = {
      {"mech-response", "coupled-mode driven response and peak table", [](const RunContext& c) { run_mech_response(c); }},
      {"noise-sweep", "noise budget versus support length", [](const RunContext& c) { run_noise_sweep(c); }},
      {"pulse-budget", "photons per pulse versus support length and n_cav", [](const RunContext& c) { run_pulse_budget(c); }},
      {"beam-sim", "Gaussian through the SWG: rasters, fidelity, OAM spectrum", [](const RunContext& c) { run_beam_sim(c); }},
      {"swg-gen", "pillar layout and diameter histogram", [](const RunContext& c) { run_swg_gen(c); }},
      {"fit-gm", "coupling rate from anti-crossing data", [](const RunContext& c) { run_fit_gm(c); }},
  };

  std::string presets;
  for (const auto& p : Config::preset_names()) presets += (presets.empty() ? "" : ", ") + p;

  for (const auto& cmd : commands) {
    auto* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("--config", config_path, "config file (INI style)");
    sub->add_option("--preset", preset, "built-in parameter set: " + presets);
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  const auto* chosen = app.get_subcommands().front();
  const auto it = std::find_if(commands.begin(), commands.end(),
                               [&](const Command& c) { return chosen->get_name() == c.name; });
  try {
    if (config_path.empty() && preset.empty()) {
      throw ConfigError("one of --config or --preset is required");
    }
    RunContext ctx;
    ctx.config = resolve_config(config_path.empty() ? std::nullopt : std::optional<std::filesystem::path>(config_path),
                                preset.empty() ? std::nullopt : std::optional<std::string>(preset));
    ctx.out_dir = out_dir;
    ctx.log = &out;
    it->run(ctx);
  } catch (const ConfigError& e) {
    err << "oam-sense " << it->name << ": config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "oam-sense " << it->name << ": " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace oam::cli
