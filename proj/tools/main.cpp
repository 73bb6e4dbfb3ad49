#include <exception>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "onramp/version.hpp"

namespace {

using onramp::KeyValueConfig;
using onramp::tools::RunOptions;

/// One subcommand: every flag records its raw text only when actually passed,
/// so the config file layers underneath the command line.  The recorded state
/// lives on the heap so the option callbacks survive moves of this object.
class SubCommand {
 public:
  SubCommand(CLI::App& parent, const std::string& name,
             const std::string& description,
             std::function<int(const RunOptions&)> run)
      : state_(std::make_unique<State>()) {
    state_->run = std::move(run);
    app_ = parent.add_subcommand(name, description);
    State* s = state_.get();
    app_->add_option_function<std::string>(
        "--config", [s](const std::string& v) { s->config_path = v; },
        "key = value configuration file");
    option("--seed", "seed", "rng seed, 0 = canonical defaults");
    option("--out", "out", "artifact directory, default 'out'");
  }

  SubCommand& option(const std::string& flag, const std::string& key,
                     const std::string& help) {
    State* s = state_.get();
    app_->add_option_function<std::string>(
        flag,
        [s, key](const std::string& v) { s->overrides.emplace_back(key, v); },
        help);
    return *this;
  }

  bool parsed() const { return app_->parsed(); }

  int run() const {
    KeyValueConfig cfg;
    if (!state_->config_path.empty())
      cfg = KeyValueConfig::parse_file(state_->config_path);
    for (const auto& [key, value] : state_->overrides) cfg.set(key, value);
    return state_->run(RunOptions::from_config(std::move(cfg)));
  }

 private:
  struct State {
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;
    std::function<int(const RunOptions&)> run;
  };

  CLI::App* app_ = nullptr;
  std::unique_ptr<State> state_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"classical and learned coupling conditions for a 2-to-1 merge"};
  app.set_version_flag("--version", std::string(onramp::kVersion));
  app.require_subcommand(1);

  std::vector<SubCommand> commands;
  commands.reserve(8);

  commands
      .emplace_back(app, "gen-synth",
                    "generate the synthetic trajectory corpus",
                    onramp::tools::cmd_gen_synth)
      .option("--duration", "duration",
              "arrival window override in seconds, 0 = empty datasets");
  commands.emplace_back(app, "fit-delays",
                        "estimate per-dataset measurement delays",
                        onramp::tools::cmd_fit_delays);
  commands.emplace_back(app, "fit-fd",
                        "fit the per-road fundamental diagrams",
                        onramp::tools::cmd_fit_fd);
  commands
      .emplace_back(app, "fit-classical",
                    "calibrate the closed-form couplings",
                    onramp::tools::cmd_fit_classical)
      .option("--model", "model", "single coupling id (c1..c4)");
  commands
      .emplace_back(app, "train-ml", "train the network couplings",
                    onramp::tools::cmd_train_ml)
      .option("--variant", "variant", "single variant (ml1, ml2, ml3)")
      .option("--epochs", "epochs", "training epochs, default 500")
      .option("--benchmark", "benchmark",
              "train on the reference grid instead of the corpus (c1prime)");
  commands
      .emplace_back(app, "capability-test",
                    "train/generalize benchmark across seeds",
                    onramp::tools::cmd_capability_test)
      .option("--variant", "variant", "single variant (ml1, ml2, ml3)")
      .option("--epochs", "epochs", "training epochs, default 500");
  commands
      .emplace_back(app, "simulate",
                    "predict measured outflows from measured inflows",
                    onramp::tools::cmd_simulate)
      .option("--model", "model", "single coupling id (c1..c4, ml1..ml3)");
  commands
      .emplace_back(app, "predict",
                    "network solution from piecewise-constant initial data",
                    onramp::tools::cmd_predict)
      .option("--model", "model", "single coupling id (c1..c4, ml1..ml3)");

  CLI11_PARSE(app, argc, argv);

  try {
    for (const auto& cmd : commands)
      if (cmd.parsed()) return cmd.run();
    std::cerr << "error: no command selected\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
