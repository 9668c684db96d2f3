// prsim command line: scenario simulation, dataset generation, classifier
// training/evaluation and parameter sweeps for the planar 3-RRR robot.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "prsim/classifier.hpp"
#include "prsim/dataset.hpp"
#include "prsim/scenario.hpp"
#include "prsim/sim.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

void print_summary(const prsim::RunSummary& s) {
  std::printf("detected:            %s\n", s.detected ? "yes" : "no");
  if (s.detected) std::printf("detection_time:      %.4f s\n", s.detection_time);
  std::printf("terminated:          %s\n", s.terminated ? "yes" : "no");
  if (s.terminated)
    std::printf("termination_time:    %.4f s (%.1f ms after detection)\n",
                s.termination_time,
                1e3 * (s.termination_time - s.detection_time));
  std::printf("f_contact_max:       %.3f N\n", s.f_contact_max);
  std::printf("constraint_residual: %.3e\n", s.constraint_residual_max);
}

std::vector<double> parse_value_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(std::stod(tok));
  }
  return out;
}

prsim::GridSpec load_grid(const std::string& path) {
  // Small YAML-free reader is not worth it; reuse the scenario module's YAML.
  std::ifstream in(path);
  if (!in) throw prsim::ConfigError("cannot open grid file: " + path);
  prsim::GridSpec grid;
  grid.hidden_layers.clear();
  grid.neurons.clear();
  grid.l2.clear();
  std::string line;
  auto parse_list = [](const std::string& body, auto push) {
    std::stringstream ss(body);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      tok.erase(0, tok.find_first_not_of(" \t["));
      tok.erase(tok.find_last_not_of(" \t]") + 1);
      if (!tok.empty()) push(tok);
    }
  };
  while (std::getline(in, line)) {
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    const std::string key = line.substr(0, colon);
    const std::string body = line.substr(colon + 1);
    if (key == "hidden_layers")
      parse_list(body, [&](const std::string& t) {
        grid.hidden_layers.push_back(std::stoi(t));
      });
    else if (key == "neurons")
      parse_list(body,
                 [&](const std::string& t) { grid.neurons.push_back(std::stoi(t)); });
    else if (key == "l2")
      parse_list(body,
                 [&](const std::string& t) { grid.l2.push_back(std::stod(t)); });
  }
  if (grid.hidden_layers.empty() || grid.neurons.empty() || grid.l2.empty())
    throw prsim::ConfigError("grid file must define hidden_layers, neurons, l2");
  return grid;
}

void write_confusion_csv(const std::string& path, const Eigen::MatrixXd& cm,
                         const std::vector<std::string>& names) {
  std::ofstream out(path);
  if (!out) throw prsim::ConfigError("cannot write confusion matrix: " + path);
  out << "true\\predicted";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  char buf[32];
  for (Eigen::Index r = 0; r < cm.rows(); ++r) {
    out << names[r];
    for (Eigen::Index c = 0; c < cm.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.6f", cm(r, c));
      out << ',' << buf;
    }
    out << '\n';
  }
}

struct TaskSplit {
  Eigen::MatrixXd train_x, val_x, test_x;
  Eigen::VectorXi train_y, val_y, test_y;
};

/// Cross-configuration split: the hold-out config becomes the test set, the
/// rest is balanced and split into train/validation rows.
TaskSplit make_split(const prsim::ContactDataset& ds, bool chain,
                     int holdout_config, std::uint64_t seed) {
  using namespace prsim;
  const auto test_rows = ds.rows_with_config({holdout_config});
  const auto train_rows = ds.rows_with_config({holdout_config}, true);
  if (test_rows.empty() || train_rows.empty())
    throw ConfigError("dataset must contain the hold-out and other configs");
  const ContactDataset test_ds = ds.select(test_rows);
  ContactDataset fit_ds = ds.select(train_rows);

  Eigen::MatrixXd fit_x;
  Eigen::VectorXi fit_y;
  if (chain)
    chain_task(fit_ds, fit_x, fit_y);
  else
    contact_task(fit_ds, fit_x, fit_y);
  const auto bal = balanced_indices(fit_y, seed);
  Eigen::MatrixXd bx(static_cast<Eigen::Index>(bal.size()), fit_x.cols());
  Eigen::VectorXi by(bal.size());
  for (std::size_t i = 0; i < bal.size(); ++i) {
    bx.row(i) = fit_x.row(bal[i]);
    by[i] = fit_y[bal[i]];
  }
  std::vector<Eigen::Index> tr, va;
  split_indices(bx.rows(), 0.8, seed + 1, tr, va);

  TaskSplit out;
  out.train_x.resize(static_cast<Eigen::Index>(tr.size()), bx.cols());
  out.train_y.resize(tr.size());
  for (std::size_t i = 0; i < tr.size(); ++i) {
    out.train_x.row(i) = bx.row(tr[i]);
    out.train_y[i] = by[tr[i]];
  }
  out.val_x.resize(static_cast<Eigen::Index>(va.size()), bx.cols());
  out.val_y.resize(va.size());
  for (std::size_t i = 0; i < va.size(); ++i) {
    out.val_x.row(i) = bx.row(va[i]);
    out.val_y[i] = by[va[i]];
  }
  if (chain)
    chain_task(test_ds, out.test_x, out.test_y);
  else
    contact_task(test_ds, out.test_x, out.test_y);
  return out;
}

void train_one_task(const prsim::ContactDataset& ds, bool chain,
                    const std::string& out_path, const prsim::GridSpec* grid,
                    prsim::TrainConfig cfg, int holdout_config, int jobs) {
  using namespace prsim;
  const TaskSplit split = make_split(ds, chain, holdout_config, cfg.seed);
  const int classes = chain ? 3 : 2;
  FnnModel model;
  if (grid) {
    const GridSearchResult gs =
        grid_search(split.train_x, split.train_y, split.val_x, split.val_y,
                    classes, *grid, cfg, jobs);
    model = gs.best;
    std::printf("grid search: %zu points, best %d layers x %d neurons, "
                "l2=%g, val acc %.4f\n",
                gs.report.size(), gs.best_row.hidden_layers,
                gs.best_row.neurons, gs.best_row.l2, gs.best_row.val_accuracy);
  } else {
    std::vector<int> sizes{static_cast<int>(split.train_x.cols()), 24, 24,
                           classes};
    model = FnnModel(sizes, cfg.seed);
    cfg.l2 = 1e-4;
    train(model, split.train_x, split.train_y, cfg);
  }
  const double val_acc = accuracy(model, split.val_x, split.val_y);
  const double test_acc = accuracy(model, split.test_x, split.test_y);
  std::printf("%s classifier: val acc %.4f, held-out config acc %.4f\n",
              chain ? "chain" : "contact", val_acc, test_acc);
  model.save(out_path);
  std::printf("wrote %s\n", out_path.c_str());
}

int run(int argc, char** argv) {
  CLI::App app{"planar 3-RRR parallel robot contact simulation"};
  app.require_subcommand(1);

  // simulate
  std::string scenario_path, trace_out, events_out;
  auto* sim_cmd = app.add_subcommand("simulate", "run one scenario");
  sim_cmd->add_option("scenario", scenario_path, "scenario YAML file")
      ->required();
  sim_cmd->add_option("--out", trace_out, "trace CSV output")->required();
  sim_cmd->add_option("--events", events_out, "mode-transition CSV output");

  // gen-dataset
  std::string matrix_path, data_out;
  int jobs = 1;
  auto* gen_cmd = app.add_subcommand("gen-dataset",
                                     "run the scenario matrix, emit samples");
  gen_cmd->add_option("matrix", matrix_path, "dataset matrix YAML")->required();
  gen_cmd->add_option("--out", data_out, "dataset CSV output")->required();
  gen_cmd->add_option("--jobs", jobs, "concurrent scenario runs");

  // train
  std::string train_data, grid_path, model_out, task = "both";
  int epochs = 30, holdout = -1;
  std::uint64_t seed = 1;
  auto* train_cmd = app.add_subcommand("train", "train the classifiers");
  train_cmd->add_option("--data", train_data, "dataset CSV")->required();
  train_cmd->add_option("--grid", grid_path, "grid-search YAML");
  train_cmd->add_option("--out", model_out, "model file prefix")->required();
  train_cmd->add_option("--task", task, "contact|chain|both");
  train_cmd->add_option("--epochs", epochs, "training epochs");
  train_cmd->add_option("--seed", seed, "training seed");
  train_cmd->add_option("--holdout-config", holdout,
                        "config id held out for testing (default: highest)");
  train_cmd->add_option("--jobs", jobs, "concurrent grid points");

  // evaluate
  std::string eval_model, eval_data, confusion_out, eval_task = "contact";
  auto* eval_cmd = app.add_subcommand("evaluate", "evaluate a classifier");
  eval_cmd->add_option("--model", eval_model, "model file")->required();
  eval_cmd->add_option("--data", eval_data, "dataset CSV")->required();
  eval_cmd->add_option("--confusion", confusion_out,
                       "row-normalized confusion matrix CSV")->required();
  eval_cmd->add_option("--task", eval_task, "contact|chain");

  // sweep
  std::string sweep_scenario, sweep_axis, sweep_values, sweep_out;
  auto* sweep_cmd = app.add_subcommand("sweep", "velocity or stiffness sweep");
  sweep_cmd->add_option("scenario", sweep_scenario, "scenario YAML file")
      ->required();
  sweep_cmd->add_option("--axis", sweep_axis, "velocity|stiffness")->required();
  sweep_cmd
      ->add_option("--values", sweep_values,
                   "comma-separated values (m/s, or N/mm for stiffness)")
      ->required();
  sweep_cmd->add_option("--out", sweep_out, "summary CSV output")->required();

  CLI11_PARSE(app, argc, argv);

  if (sim_cmd->parsed()) {
    const prsim::Scenario sc = prsim::load_scenario(scenario_path);
    const prsim::RunResult rr = prsim::run_scenario(sc);
    prsim::write_trace_csv(trace_out, rr.trace);
    if (!events_out.empty()) prsim::write_events_csv(events_out, rr.trace);
    print_summary(rr.summary);
    return 0;
  }

  if (gen_cmd->parsed()) {
    const prsim::DatasetMatrixSpec spec =
        prsim::load_dataset_matrix(matrix_path);
    const prsim::ContactDataset ds = prsim::generate_dataset(spec, jobs);
    ds.save_csv(data_out);
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(4);
    for (Eigen::Index i = 0; i < ds.size(); ++i) ++counts[ds.label[i]];
    std::printf("wrote %lld gated samples (collision %d, clamp per chain "
                "%d/%d/%d)\n",
                static_cast<long long>(ds.size()), counts[0], counts[1],
                counts[2], counts[3]);
    return 0;
  }

  if (train_cmd->parsed()) {
    const prsim::ContactDataset ds = prsim::ContactDataset::load_csv(train_data);
    if (ds.size() == 0) throw prsim::EmptyDataset("dataset is empty");
    if (holdout < 0) holdout = ds.config_id.maxCoeff();
    prsim::TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.seed = seed;
    std::unique_ptr<prsim::GridSpec> grid;
    if (!grid_path.empty())
      grid = std::make_unique<prsim::GridSpec>(load_grid(grid_path));
    if (task == "contact" || task == "both")
      train_one_task(ds, false, model_out + ".contact.fnn", grid.get(), cfg,
                     holdout, jobs);
    if (task == "chain" || task == "both")
      train_one_task(ds, true, model_out + ".chain.fnn", grid.get(), cfg,
                     holdout, jobs);
    if (task != "contact" && task != "chain" && task != "both")
      throw prsim::ConfigError("--task must be contact|chain|both");
    return 0;
  }

  if (eval_cmd->parsed()) {
    const prsim::FnnModel model = prsim::FnnModel::load(eval_model);
    const prsim::ContactDataset ds = prsim::ContactDataset::load_csv(eval_data);
    Eigen::MatrixXd x;
    Eigen::VectorXi y;
    std::vector<std::string> names;
    if (eval_task == "contact") {
      prsim::contact_task(ds, x, y);
      names = {"collision", "clamping"};
    } else if (eval_task == "chain") {
      prsim::chain_task(ds, x, y);
      names = {"chain1", "chain2", "chain3"};
    } else {
      throw prsim::ConfigError("--task must be contact|chain");
    }
    const double acc = prsim::accuracy(model, x, y);
    const Eigen::MatrixXd cm = prsim::confusion_matrix(
        model, x, y, static_cast<int>(names.size()));
    write_confusion_csv(confusion_out, cm, names);
    std::printf("accuracy: %.4f over %lld samples\n", acc,
                static_cast<long long>(x.rows()));
    return 0;
  }

  if (sweep_cmd->parsed()) {
    const prsim::Scenario sc = prsim::load_scenario(sweep_scenario);
    std::vector<double> values = parse_value_list(sweep_values);
    prsim::SweepAxis axis;
    if (sweep_axis == "velocity") {
      axis = prsim::SweepAxis::Velocity;
    } else if (sweep_axis == "stiffness") {
      axis = prsim::SweepAxis::Stiffness;
      for (double& v : values) v *= 1e3;  // N/mm -> N/m
    } else {
      throw prsim::ConfigError("--axis must be velocity|stiffness");
    }
    const auto rows = prsim::sweep(sc, axis, values);
    prsim::write_sweep_csv(sweep_out, rows);
    for (const auto& r : rows)
      std::printf("value %-8g terminated %s  t_term %.4f  f_max %.2f\n",
                  r.value, r.summary.terminated ? "yes" : "no ",
                  r.summary.termination_time, r.summary.f_contact_max);
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const prsim::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const prsim::NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return kExitNumeric;
  } catch (const prsim::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 1;
  }
}
