#include "sedge/commands.hpp"

#include "sedge/model_io.hpp"
#include "sedge/parallel.hpp"
#include "sedge/training.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace fs = std::filesystem;

namespace sedge {

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const fs::filesystem_error*>(&e)) return kExitIo;
  if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const std::invalid_argument*>(&e) ||
      dynamic_cast<const std::out_of_range*>(&e))
    return kExitData;
  return kExitFailure;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw IoError("write failed: " + path.string());
}

void ensure_dir(const fs::path& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::string variant_name(const DetectOptions& o) {
  std::string s = "SE";
  if (o.multiscale) s += "+MS";
  if (o.sharpen_steps > 0) s += "+SH";
  return s;
}

Dataset require_dataset(const std::string& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string("no ") + what + " dataset configured");
  Dataset ds = load_dataset(path);
  if (ds.size() == 0) throw DataError(std::string(what) + " dataset is empty: " + path);
  return ds;
}

Forest train_on(const Dataset& ds, const RunConfig& cfg, std::ostream* log) {
  TrainOptions topts;
  topts.threads = cfg.threads;
  if (log)
    topts.on_tree = [log](const TreeStats& st) {
      char line[160];
      std::snprintf(line, sizeof line, "tree %d: %d patches (%d positive), depth %d, %d leaves, %.1fs\n", st.index,
                    st.n_samples, st.n_positive, st.depth, st.n_leaves, st.seconds);
      *log << line << std::flush;
    };
  return train_forest(ds.images, ds.truths, cfg.forest, cfg.channels, topts);
}

}  // namespace

Forest cmd_train(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  if (cfg.paths.model.empty()) throw ConfigError("paths.model (output model file) is not set");
  const Dataset ds = require_dataset(cfg.paths.train_dataset, "training");
  log << "training " << cfg.forest.n_trees_trained << " trees on " << ds.size() << " images ("
      << resolve_threads(cfg.threads) << " threads)\n";
  const auto start = std::chrono::steady_clock::now();
  Forest forest = train_on(ds, cfg, &log);
  const fs::path out = cfg.paths.model;
  ensure_dir(out.parent_path());
  save_forest(out, forest);
  log << "wrote " << out.string() << " in "
      << std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() << "s\n";
  return forest;
}

std::vector<fs::path> cmd_detect(const DetectArgs& args, std::ostream& log) {
  const Forest forest = load_forest(args.model);
  std::vector<fs::path> files;
  for (const auto& in : args.inputs) {
    if (fs::is_directory(in)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(in))
        if (e.is_regular_file() && e.path().extension() == ".png") found.push_back(e.path());
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::is_regular_file(in)) {
      files.push_back(in);
    } else {
      throw IoError("input not found: " + in.string());
    }
  }
  ensure_dir(args.out_dir);
  std::vector<fs::path> written;
  for (const auto& f : files) {
    const Image img = read_png(f);
    if (img.n_planes() != forest.n_input_planes)
      throw DataError(f.string() + ": image has " + std::to_string(img.n_planes()) + " planes, model expects " +
                      std::to_string(forest.n_input_planes));
    const auto start = std::chrono::steady_clock::now();
    const EdgeProbMap e = run_detector(img, forest, args.opts);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const std::string stem = f.stem().string();
    const fs::path out = args.out_dir / (stem + ".png");
    write_png(out, e, args.png16 ? 16 : 8);
    if (args.raw) write_raw_plane(args.out_dir / (stem + ".raw"), e);
    if (args.nms) write_png(args.out_dir / (stem + "_nms.png"), nms(e), args.png16 ? 16 : 8);
    if (args.overlay) {
      Image ov = img.n_planes() >= 3 ? Image({img.planes[0], img.planes[1], img.planes[2]})
                                     : Image({img.planes[0], img.planes[0], img.planes[0]});
      const EdgeProbMap thin = nms(e);
      for (Eigen::Index i = 0; i < thin.size(); ++i) {
        const float a = thin.data()[i];
        ov.planes[0].data()[i] = ov.planes[0].data()[i] * (1 - a) + a;
        ov.planes[1].data()[i] *= 1 - a;
        ov.planes[2].data()[i] *= 1 - a;
      }
      write_png(args.out_dir / (stem + "_overlay.png"), ov, 8);
    }
    char line[256];
    std::snprintf(line, sizeof line, "%s [%s] %dx%d %.1f ms %.3f MP/s\n", stem.c_str(),
                  variant_name(args.opts).c_str(), img.width(), img.height(), 1e3 * secs,
                  img.width() * img.height() / 1e6 / std::max(secs, 1e-9));
    log << line;
    written.push_back(out);
  }
  return written;
}

EdgeProbMap load_prediction(const fs::path& pred_dir, const std::string& id) {
  const fs::path raw = pred_dir / (id + ".raw");
  if (fs::is_regular_file(raw)) return read_raw_plane(raw);
  const fs::path png = pred_dir / (id + ".png");
  if (fs::is_regular_file(png)) return read_png(png).planes[0];
  throw IoError("missing prediction for " + id);
}

EvalReport cmd_eval(const EvalArgs& args, std::ostream& log) {
  const Dataset ds = load_dataset(args.dataset);
  if (ds.size() == 0) throw DataError("evaluation dataset is empty: " + args.dataset.string());
  std::vector<std::string> missing;
  for (const auto& id : ds.ids)
    if (!fs::is_regular_file(args.pred_dir / (id + ".raw")) && !fs::is_regular_file(args.pred_dir / (id + ".png")))
      missing.push_back(id);
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw DataError("missing predictions for: " + list);
  }
  std::vector<EdgeProbMap> preds;
  for (const auto& id : ds.ids) {
    preds.push_back(load_prediction(args.pred_dir, id));
    if (preds.back().rows() != ds.truths[preds.size() - 1].height() ||
        preds.back().cols() != ds.truths[preds.size() - 1].width())
      throw DataError("prediction size differs from ground truth for " + id);
  }
  const EvalReport rep = evaluate(preds, ds.truths, args.opts);
  if (!args.out_dir.empty()) {
    ensure_dir(args.out_dir);
    write_text(args.out_dir / "report.json", report_json(rep));
    write_text(args.out_dir / "pr.csv", report_csv(rep));
    write_text(args.out_dir / "report.txt", report_text(rep));
  }
  char line[160];
  std::snprintf(line, sizeof line, "ODS %.4f  OIS %.4f  AP %.4f  R50 %.4f  (%d images, %d thresholds)\n", rep.ods,
                rep.ois, rep.ap, rep.r50, rep.n_images, rep.n_thresholds);
  log << line;
  return rep;
}

std::vector<SweepRow> cmd_sweep(const SweepArgs& args, std::ostream& log) {
  if (args.trials < 1) throw ConfigError("trials must be >= 1");
  if (args.values.empty()) throw ConfigError("sweep needs at least one value");
  // Validate every value before spending time on training.
  for (const auto& v : args.values) {
    RunConfig c = args.cfg;
    set_parameter(c, args.param, v);
  }
  const Dataset train = require_dataset(args.cfg.paths.train_dataset, "training");
  const Dataset test = require_dataset(args.cfg.paths.test_dataset, "test");
  std::vector<SweepRow> rows;
  for (const auto& v : args.values) {
    SweepRow row;
    row.value = v;
    for (int trial = 0; trial < args.trials; ++trial) {
      RunConfig c = args.cfg;
      set_parameter(c, args.param, v);
      c.forest.seed = mix_seed(args.cfg.forest.seed, static_cast<std::uint64_t>(trial));
      const Forest forest = train_on(train, c, nullptr);
      DetectOptions dopts = c.detect;
      dopts.threads = c.threads;
      std::vector<EdgeProbMap> preds(test.size());
      for (int i = 0; i < test.size(); ++i) preds[i] = run_detector(test.images[i], forest, dopts);
      const EvalReport rep = evaluate(preds, test.truths, c.eval_options());
      row.ods.push_back(rep.ods);
      log << args.param << "=" << v << " trial " << trial << ": ODS " << rep.ods << "\n" << std::flush;
    }
    double sum = 0.0, sq = 0.0;
    for (double o : row.ods) sum += o;
    row.ods_mean = sum / row.ods.size();
    for (double o : row.ods) sq += (o - row.ods_mean) * (o - row.ods_mean);
    row.ods_std = row.ods.size() > 1 ? std::sqrt(sq / (row.ods.size() - 1)) : 0.0;
    rows.push_back(std::move(row));
  }
  if (!args.out_csv.empty()) {
    ensure_dir(args.out_csv.parent_path());
    write_text(args.out_csv, sweep_csv(args.param, rows));
  }
  return rows;
}

std::string sweep_csv(const std::string& param, const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os.precision(10);
  os << "param,value,ods,ods_std,trials\n";
  for (const auto& r : rows)
    os << param << ',' << r.value << ',' << r.ods_mean << ',' << r.ods_std << ',' << r.ods.size() << '\n';
  return os.str();
}

void cmd_synth(const SynthArgs& args, std::ostream& log) {
  const SynthCorpus c = synth_corpus(args.seed, args.opts);
  std::vector<std::string> ids;
  for (int i = 0; i < args.opts.n_images; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "img_%04d", i);
    ids.push_back(name);
  }
  write_dataset(args.out_dir, c.images, c.truths, ids);
  log << "wrote " << ids.size() << " images to " << args.out_dir.string() << "\n";
}

void cmd_inspect(const fs::path& model, std::ostream& out) {
  const Forest f = load_forest(model);
  RunConfig cfg;
  cfg.forest = f.params;
  cfg.channels = f.channels;
  out << "model " << model.string() << "\n";
  out << "input planes " << f.n_input_planes << ", channels " << channel_count(f.n_input_planes, f.channels)
      << ", features " << f.layout().size() << ", trees " << f.trees.size() << "\n";
  out << "forest: m=" << f.params.m << " k=" << f.params.k_classes << " T=" << f.params.n_trees_eval
      << " stride=" << f.params.stride << " gain=" << to_string(f.params.gain)
      << " discretizer=" << to_string(f.params.discretizer) << " d_in=" << f.params.d_in
      << " d_out=" << f.params.d_out << " min_samples=" << f.params.min_samples
      << " max_depth=" << f.params.max_depth << " seed=" << f.params.seed << "\n";
  for (size_t t = 0; t < f.trees.size(); ++t) {
    const auto& tree = f.trees[t];
    long samples = 0;
    std::uint32_t min_count = tree.leaves.empty() ? 0 : tree.leaves[0].count;
    for (const auto& l : tree.leaves) {
      samples += l.count;
      min_count = std::min(min_count, l.count);
    }
    out << "tree " << t << ": nodes " << tree.nodes.size() << ", leaves " << tree.n_leaves() << ", depth "
        << tree.depth() << ", samples " << samples << ", min leaf count " << min_count << "\n";
  }
}

}  // namespace sedge
