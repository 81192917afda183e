#include "sedge/commands.hpp"
#include "sedge/model_io.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace sedge;

/// Config from an optional file, then KEY=VALUE overrides.
RunConfig build_config(const std::string& file, const std::vector<std::string>& sets) {
  RunConfig cfg = file.empty() ? RunConfig{} : load_config(file);
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects KEY=VALUE, got \"" + kv + "\"");
    set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty() || !out.empty()) out.push_back(cur);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structured forest edge detection: train, detect, evaluate"};
  app.require_subcommand(1);

  std::string config_file;
  std::vector<std::string> sets;
  int threads = 0;

  auto* train = app.add_subcommand("train", "Train a forest on a dataset");
  std::string train_dir, model_out;
  bool print_config = false;
  train->add_option("-c,--config", config_file, "JSON run configuration");
  train->add_option("--set", sets, "Override a config key, e.g. forest.n_patches=20000");
  train->add_option("--train", train_dir, "Training dataset directory (paths.train_dataset)");
  train->add_option("-o,--model", model_out, "Output model file (paths.model)");
  train->add_option("-j,--threads", threads, "Worker threads");
  train->add_flag("--print-config", print_config, "Print the effective configuration and exit");

  auto* detect = app.add_subcommand("detect", "Compute edge maps");
  DetectArgs dargs;
  std::vector<std::string> inputs;
  std::string out_dir;
  std::string model_path;
  detect->add_option("-m,--model", model_path, "Model file")->required();
  detect->add_option("inputs", inputs, "Images or directories of PNG images")->required();
  detect->add_option("-o,--out", out_dir, "Output directory")->required();
  detect->add_option("--sharpen", dargs.opts.sharpen_steps, "Sharpening steps")->capture_default_str();
  detect->add_flag("--multiscale", dargs.opts.multiscale, "Average half, original and double scale");
  detect->add_option("--stride", dargs.opts.stride, "Patch stride (default: model)");
  detect->add_option("--trees", dargs.opts.n_trees_eval, "Trees per location T (default: model)");
  detect->add_flag("--nms", dargs.nms, "Also write thinned maps");
  detect->add_flag("--png16", dargs.png16, "Write 16-bit PNGs");
  detect->add_flag("--raw", dargs.raw, "Also write raw float planes");
  detect->add_flag("--overlay", dargs.overlay, "Also write edge overlays");
  detect->add_option("-j,--threads", threads, "Worker threads");

  auto* eval = app.add_subcommand("eval", "Benchmark edge maps against ground truth");
  EvalArgs eargs;
  std::string pred_dir, dataset_dir, eval_out;
  eval->add_option("-p,--pred", pred_dir, "Directory of predictions (<id>.raw or <id>.png)")->required();
  eval->add_option("-d,--dataset", dataset_dir, "Dataset directory")->required();
  eval->add_option("--thresholds", eargs.opts.n_thresholds, "Number of thresholds")->capture_default_str();
  eval->add_option("--tolerance", eargs.opts.tolerance, "Match tolerance, fraction of the diagonal")
      ->capture_default_str();
  eval->add_option("--nms-border", eargs.opts.nms.border, "Attenuate responses near the border");
  eval->add_option("-o,--out", eval_out, "Write report.json, pr.csv and report.txt here");
  eval->add_option("-j,--threads", threads, "Worker threads");

  auto* sweep = app.add_subcommand("sweep", "Train and evaluate over values of one parameter");
  std::string param, values, sweep_out;
  int trials = 5;
  sweep->add_option("-c,--config", config_file, "JSON run configuration");
  sweep->add_option("--set", sets, "Override a config key");
  sweep->add_option("--param", param, "Parameter name")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required();
  sweep->add_option("--trials", trials, "Trials per value")->capture_default_str();
  sweep->add_option("-o,--out", sweep_out, "CSV output file");
  sweep->add_option("-j,--threads", threads, "Worker threads");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  SynthArgs sargs;
  std::string synth_out;
  synth->add_option("-o,--out", synth_out, "Output dataset directory")->required();
  synth->add_option("--seed", sargs.seed, "Random seed")->capture_default_str();
  synth->add_option("-n,--images", sargs.opts.n_images, "Number of images")->capture_default_str();
  synth->add_option("--height", sargs.opts.height, "Image height")->capture_default_str();
  synth->add_option("--width", sargs.opts.width, "Image width")->capture_default_str();
  synth->add_option("--noise", sargs.opts.noise_sigma, "Gaussian noise sigma")->capture_default_str();
  synth->add_option("--min-segments", sargs.opts.min_segments)->capture_default_str();
  synth->add_option("--max-segments", sargs.opts.max_segments)->capture_default_str();

  auto* inspect = app.add_subcommand("inspect", "Print model statistics");
  std::string inspect_model;
  inspect->add_option("model", inspect_model, "Model file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*train) {
      RunConfig cfg = build_config(config_file, sets);
      if (!train_dir.empty()) cfg.paths.train_dataset = train_dir;
      if (!model_out.empty()) cfg.paths.model = model_out;
      if (threads > 0) cfg.threads = threads;
      if (print_config) {
        std::cout << config_to_json(cfg);
        return kExitOk;
      }
      cmd_train(cfg, std::cout);
    } else if (*detect) {
      dargs.model = model_path;
      for (const auto& i : inputs) dargs.inputs.emplace_back(i);
      dargs.out_dir = out_dir;
      dargs.opts.threads = threads;
      cmd_detect(dargs, std::cout);
    } else if (*eval) {
      eargs.pred_dir = pred_dir;
      eargs.dataset = dataset_dir;
      eargs.out_dir = eval_out;
      eargs.opts.threads = threads;
      const EvalReport rep = cmd_eval(eargs, std::cout);
      if (eval_out.empty()) std::cout << report_text(rep);
    } else if (*sweep) {
      SweepArgs a;
      a.cfg = build_config(config_file, sets);
      if (threads > 0) a.cfg.threads = threads;
      a.param = param;
      a.values = split_list(values);
      a.trials = trials;
      a.out_csv = sweep_out;
      const auto rows = cmd_sweep(a, std::cerr);
      std::cout << sweep_csv(param, rows);
    } else if (*synth) {
      sargs.out_dir = synth_out;
      cmd_synth(sargs, std::cout);
    } else if (*inspect) {
      cmd_inspect(inspect_model, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kExitOk;
}
