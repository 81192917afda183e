#pragma once

#include "sedge/config.hpp"
#include "sedge/dataset.hpp"
#include "sedge/synth.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace sedge {

/// Process exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitConfig = 2, kExitIo = 3, kExitData = 4 };

/// Exit code for an exception escaping a command.
int exit_code_for(const std::exception& e);

/// Train on cfg.paths.train_dataset and write cfg.paths.model.
Forest cmd_train(const RunConfig& cfg, std::ostream& log);

struct DetectArgs {
  std::filesystem::path model;
  std::vector<std::filesystem::path> inputs;  // files or directories of PNGs
  std::filesystem::path out_dir;
  DetectOptions opts;
  bool nms = false;      // also write <stem>_nms.png
  bool png16 = false;    // 16-bit instead of 8-bit PNG output
  bool raw = false;      // also write <stem>.raw float planes
  bool overlay = false;  // also write <stem>_overlay.png
};

/// Returns the written edge-map paths, one per input image.
std::vector<std::filesystem::path> cmd_detect(const DetectArgs& args, std::ostream& log);

struct EvalArgs {
  std::filesystem::path pred_dir;  // <id>.raw or <id>.png per image
  std::filesystem::path dataset;
  EvalOptions opts;
  std::filesystem::path out_dir;   // report.json, pr.csv, report.txt (optional)
};

EvalReport cmd_eval(const EvalArgs& args, std::ostream& log);

/// Load an edge map written by cmd_detect (.raw preferred over .png).
EdgeProbMap load_prediction(const std::filesystem::path& pred_dir, const std::string& id);

struct SweepArgs {
  RunConfig cfg;
  std::string param;
  std::vector<std::string> values;
  int trials = 5;
  std::filesystem::path out_csv;  // optional
};

struct SweepRow {
  std::string value;
  double ods_mean = 0.0;
  double ods_std = 0.0;
  std::vector<double> ods;  // per trial
};

/// Train on the train dataset and evaluate SE on the test dataset for each
/// value; trial r of every value uses the same seed.
std::vector<SweepRow> cmd_sweep(const SweepArgs& args, std::ostream& log);
std::string sweep_csv(const std::string& param, const std::vector<SweepRow>& rows);

struct SynthArgs {
  std::filesystem::path out_dir;
  std::uint64_t seed = 1;
  SynthOptions opts;
};

void cmd_synth(const SynthArgs& args, std::ostream& log);

void cmd_inspect(const std::filesystem::path& model, std::ostream& out);

}  // namespace sedge
