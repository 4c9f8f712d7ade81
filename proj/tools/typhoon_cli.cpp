//  Copyright 2026 The Typhoon Joint Authors. All Rights Reserved.
//
//  Licensed under the Apache License, Version 2.0 (the "License");
//  you may not use this file except in compliance with the License.
//  You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
//  Unless required by applicable law or agreed to in writing, software
//  distributed under the License is distributed on an "AS IS" BASIS,
//  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//  See the License for the specific language governing permissions and
//  limitations under the License.


// Command-line front end: synth, preprocess, embed, train, evaluate.

#include <CLI11.hpp>
#include <cstdio>
#include <json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "typhoon/errors.hpp"
#include "typhoon/log.hpp"
#include "typhoon/pipeline.hpp"

namespace {

using Overrides = std::vector<std::pair<std::string, std::string>>;

bool is_builtin(const std::string& name) {
  return name == "config" || name == "verbose" || name == "quiet" || name == "help";
}

// Pulls "--key=value" config overrides out of argv; CLI11 sees the rest.
std::vector<std::string> split_overrides(int argc, char** argv, Overrides& overrides) {
  std::vector<std::string> rest;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    const auto eq = arg.find('=');
    if (arg.rfind("--", 0) == 0 && eq != std::string::npos && !is_builtin(arg.substr(2, eq - 2))) {
      overrides.emplace_back(arg.substr(2, eq - 2), arg.substr(eq + 1));
    } else {
      rest.push_back(arg);
    }
  }
  return rest;
}

int fail(const std::string& stage, const char* kind, const std::string& message) {
  const nlohmann::json err = {{"error", kind}, {"stage", stage}, {"message", message}};
  std::fprintf(stderr, "%s\n", err.dump().c_str());
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  Overrides overrides;
  std::vector<std::string> args = split_overrides(argc, argv, overrides);

  CLI::App app{"Typhoon intensity classification from tweets and best-track data.\n"
               "Config overrides: --key=value with dotted keys, e.g. --joint.epochs=20 "
               "or --mode=standalone_env_only."};
  app.require_subcommand(1);
  std::string config_path;
  bool verbose = false, quiet = false;
  app.add_flag("-v,--verbose", verbose, "Log progress to stderr");
  app.add_flag("-q,--quiet", quiet, "Suppress warnings");

  const std::vector<std::pair<const char*, const char*>> commands = {
      {"synth", "Generate a synthetic dataset and its ground-truth report"},
      {"preprocess", "Clean and tokenize tweets, pair them with observations"},
      {"embed", "Train skip-gram embeddings and merge semantic vectors"},
      {"train", "Train the classifier (joint or baseline mode)"},
      {"evaluate", "Compute metrics, confusion matrix, importance and time series"}};
  for (const auto& [name, help] : commands) {
    app.add_subcommand(name, help)
        ->add_option("-c,--config", config_path, "JSON run configuration")
        ->required()
        ->check(CLI::ExistingFile);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  typhoon::set_log_level(quiet     ? typhoon::LogLevel::quiet
                         : verbose ? typhoon::LogLevel::info
                                   : typhoon::LogLevel::warn);

  const std::string stage = app.get_subcommands().front()->get_name();
  try {
    const typhoon::RunConfig config = typhoon::load_run_config(config_path, overrides);
    if (stage == "synth") {
      typhoon::run_synth(config);
    } else if (stage == "preprocess") {
      typhoon::run_preprocess(config);
    } else if (stage == "embed") {
      typhoon::run_embed(config);
    } else if (stage == "train") {
      typhoon::run_train(config);
    } else {
      typhoon::run_evaluate(config);
    }
  } catch (const typhoon::ShapeError& e) {
    return fail(stage, "ShapeError", e.what());
  } catch (const typhoon::ContractError& e) {
    return fail(stage, "ContractError", e.what());
  } catch (const typhoon::DataError& e) {
    return fail(stage, "DataError", e.what());
  } catch (const std::exception& e) {
    return fail(stage, "Error", e.what());
  }
  return 0;
}
