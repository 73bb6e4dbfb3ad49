#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "onramp/io_util.hpp"

namespace onramp::tools {

// Effective options of one CLI invocation: the config file layered under the
// command-line overrides, plus the typed values the commands read.  `config`
// holds every effective key and is what the artifact headers hash.
struct RunOptions {
  KeyValueConfig config;
  std::filesystem::path out = "out";
  std::uint64_t seed = 0;
  std::string model;       // model filter; empty = every applicable model
  std::string variant;     // ml variant filter; empty = ml1, ml2, ml3
  int epochs = 500;
  double duration = -1.0;  // gen-synth override; negative = per-dataset value
  std::string benchmark;   // train-ml: "c1prime" trains on the reference grid

  static RunOptions from_config(KeyValueConfig config);
};

int cmd_gen_synth(const RunOptions& opt);
int cmd_fit_delays(const RunOptions& opt);
int cmd_fit_fd(const RunOptions& opt);
int cmd_fit_classical(const RunOptions& opt);
int cmd_train_ml(const RunOptions& opt);
int cmd_capability_test(const RunOptions& opt);
int cmd_simulate(const RunOptions& opt);
int cmd_predict(const RunOptions& opt);

}  // namespace onramp::tools
