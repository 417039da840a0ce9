// wavecpd: simulate wavefield datasets, train conditional Gaussian transition
// models on them, and evaluate or export the results.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "wavecpd/checkpoint.hpp"
#include "wavecpd/dataset.hpp"
#include "wavecpd/error.hpp"
#include "wavecpd/io.hpp"
#include "wavecpd/training.hpp"
#include "wavecpd/wave_sim.hpp"

namespace {

using namespace wavecpd;

enum Exit { kOk = 0, kUsage = 2, kInstability = 3, kMismatch = 4, kNumeric = 5 };

int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::invalid_argument:
    case ErrorKind::io:
      return kUsage;
    case ErrorKind::format:
    case ErrorKind::truncated:
    case ErrorKind::mismatch:
      return kMismatch;
    case ErrorKind::instability:
      return kInstability;
    case ErrorKind::numeric:
      return kNumeric;
  }
  return kUsage;
}

struct SimulateArgs {
  std::string config;
  std::string out;
};

struct TrainArgs {
  std::string train_path, test_path, out_model, out_log;
  std::string model = "reg-kl";
  std::string parent = "local";
  int patches_per_term = 1;
  TrainConfig cfg;
};

struct EvalArgs {
  std::string model_path, data_path, out;
};

struct ExportArgs {
  std::string data_path, out;
  long long index = 0;
};

int cmd_simulate(const SimulateArgs& a) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(io::read_file(a.config));
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: config '" << a.config << "' is not valid JSON: " << e.what() << "\n";
    return kUsage;
  }
  const SimulationSetup setup = parse_simulation_config(doc);
  const WaveDataset ds = simulate(setup.medium, setup.source, setup.sim, setup.seed);
  save_dataset(ds, a.out);
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (const auto& f : ds.frames)
    for (double v : f.values) {
      lo = first ? v : std::min(lo, v);
      hi = first ? v : std::max(hi, v);
      first = false;
    }
  std::cout << "d=" << ds.d << " frames=" << ds.frames.size() << " min=" << io::format_double(lo)
            << " max=" << io::format_double(hi) << " medium_hash=" << setup.medium.hash() << "\n";
  return kOk;
}

int cmd_train(TrainArgs a) {
  a.cfg.validate();
  ParentStrategy parent;
  if (a.parent == "random")
    parent.tag = ParentStrategy::Tag::random;
  else if (a.parent != "local")
    fail(ErrorKind::invalid_argument, "--parent must be 'local' or 'random'");
  require(a.patches_per_term >= 1, "--patches-per-term must be >= 1");
  parent.patches_per_term = a.patches_per_term;
  const ModelKind kind = ModelKind::parse(a.model, parent);

  const WaveDataset train_raw = load_dataset(a.train_path);
  const WaveDataset test_raw = load_dataset(a.test_path);
  const Standardization s =
      train_raw.standardization.applied ? train_raw.standardization : fit_standardization(train_raw);
  const WaveDataset train_ds = standardize(train_raw, s);
  const WaveDataset test_ds = standardize(test_raw, s);
  check_compatible(train_ds, test_ds);

  const TrainResult res = train(train_ds, test_ds, kind, a.cfg);
  save_checkpoint({res.model, res.config, s}, a.out_model);
  io::write_atomic(a.out_log, res.log.to_csv());
  std::cout << "model=" << res.model.kind.name() << " steps=" << res.log.rows.size()
            << " final_train_nll=" << io::format_double(res.final_train_nll)
            << " final_test_nll=" << io::format_double(res.final_test_nll) << "\n";
  return kOk;
}

int cmd_eval(const EvalArgs& a) {
  const Checkpoint ck = load_checkpoint(a.model_path);
  const WaveDataset raw = load_dataset(a.data_path);
  if (raw.d != ck.model.d)
    fail(ErrorKind::mismatch, "dataset d=" + std::to_string(raw.d) + " does not match model d=" +
                                  std::to_string(ck.model.d));
  const WaveDataset ds = standardize(raw, ck.standardization);
  if (ds.frames.size() < 2) fail(ErrorKind::mismatch, "dataset needs at least 2 frames");
  const EvalResult r = evaluate(ck.model, ds);

  std::string csv = "time_index,nll,log_nll\n";
  for (std::size_t k = 0; k < r.per_step.size(); ++k)
    csv += std::to_string(r.time_index[k]) + ',' + io::format_double(r.per_step[k]) + ',' +
           io::format_double(log_transform(r.per_step[k])) + '\n';
  csv += "total," + io::format_double(r.total) + ',' + io::format_double(log_transform(r.total)) + '\n';
  if (a.out.empty()) {
    std::cout << csv;
  } else {
    io::write_atomic(a.out, csv);
    std::cout << "total_nll=" << io::format_double(r.total) << "\n";
  }
  return kOk;
}

int cmd_export_frame(const ExportArgs& a) {
  const WaveDataset ds = load_dataset(a.data_path);
  if (a.index < 0 || a.index >= static_cast<long long>(ds.frames.size()))
    fail(ErrorKind::invalid_argument, "--index " + std::to_string(a.index) + " out of range [0, " +
                                          std::to_string(ds.frames.size()) + ")");
  const auto& f = ds.frames[static_cast<std::size_t>(a.index)].values;
  std::string csv;
  for (int r = 0; r < ds.d; ++r) {
    for (int c = 0; c < ds.d; ++c) {
      if (c) csv += ',';
      csv += io::format_double(f[static_cast<std::size_t>(r) * ds.d + c]);
    }
    csv += '\n';
  }
  io::write_atomic(a.out, csv);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wavefield simulation and conditional Gaussian transition learning"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  int threads = 0;
  app.add_option("--threads", threads, "Worker thread cap (0 = machine parallelism)");

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Run the finite-difference solver and write a dataset");
  simulate_cmd->add_option("--config", sim.config, "JSON medium/source/solver configuration")->required();
  simulate_cmd->add_option("--out", sim.out, "Output dataset path")->required();

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train a transition model and write checkpoint + CSV log");
  train_cmd->add_option("--train", tr.train_path, "Training dataset")->required();
  train_cmd->add_option("--test", tr.test_path, "Test dataset")->required();
  train_cmd->add_option("--model", tr.model, "free | shared | mtl | reg-kl | reg-bh");
  train_cmd->add_option("--parent", tr.parent, "Penalty parent values: local | random");
  train_cmd->add_option("--patches-per-term", tr.patches_per_term, "Random parent draws per penalty term");
  train_cmd->add_option("--lambda", tr.cfg.lambda, "Penalty weight");
  train_cmd->add_option("--lr", tr.cfg.lr, "Adam learning rate");
  train_cmd->add_option("--epochs", tr.cfg.epochs, "Passes over the training sequence");
  train_cmd->add_option("--seed", tr.cfg.seed, "Initialisation / sampling seed");
  train_cmd->add_option("--stride", tr.cfg.test_eval_stride, "Evaluate the test set every N steps");
  train_cmd->add_option("--hidden", tr.cfg.hidden, "Hidden width of per-node networks");
  train_cmd->add_option("--trunk-width", tr.cfg.trunk_width, "Shared layer width of the mtl model");
  train_cmd->add_option("--out-model", tr.out_model, "Checkpoint output path")->required();
  train_cmd->add_option("--out-log", tr.out_log, "CSV log output path")->required();

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Per-time-step NLL of a checkpoint on a dataset");
  eval_cmd->add_option("--model", ev.model_path, "Checkpoint path")->required();
  eval_cmd->add_option("--data", ev.data_path, "Dataset path")->required();
  eval_cmd->add_option("--out", ev.out, "CSV output path (stdout when empty)");

  ExportArgs ex;
  auto* export_cmd = app.add_subcommand("export-frame", "Write one frame as a d x d CSV grid");
  export_cmd->add_option("--data", ex.data_path, "Dataset path")->required();
  export_cmd->add_option("--index", ex.index, "Frame index")->required();
  export_cmd->add_option("--out", ex.out, "CSV output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  if (threads < 0) {
    std::cerr << "error: --threads must be >= 0\n";
    return kUsage;
  }
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif

  try {
    if (*simulate_cmd) return cmd_simulate(sim);
    if (*train_cmd) return cmd_train(tr);
    if (*eval_cmd) return cmd_eval(ev);
    if (*export_cmd) return cmd_export_frame(ex);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
