#include "prsim/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace prsim {

void ContactDataset::append_rows(const ContactDataset& other) {
  const Eigen::Index n0 = size(), n1 = other.size();
  if (n1 == 0) return;
  features.conservativeResize(n0 + n1, 6);
  label.conservativeResize(n0 + n1);
  config_id.conservativeResize(n0 + n1);
  scenario_id.conservativeResize(n0 + n1);
  features.bottomRows(n1) = other.features;
  label.tail(n1) = other.label;
  config_id.tail(n1) = other.config_id;
  scenario_id.tail(n1) = other.scenario_id;
}

ContactDataset ContactDataset::select(
    const std::vector<Eigen::Index>& rows) const {
  ContactDataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), 6);
  out.label.resize(rows.size());
  out.config_id.resize(rows.size());
  out.scenario_id.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(i) = features.row(rows[i]);
    out.label[i] = label[rows[i]];
    out.config_id[i] = config_id[rows[i]];
    out.scenario_id[i] = scenario_id[rows[i]];
  }
  return out;
}

std::vector<Eigen::Index> ContactDataset::rows_with_config(
    const std::vector<int>& configs, bool invert) const {
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < size(); ++i) {
    const bool in = std::find(configs.begin(), configs.end(), config_id[i]) !=
                    configs.end();
    if (in != invert) rows.push_back(i);
  }
  return rows;
}

ContactDataset ContactDataset::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw ConfigError("dataset file is empty: " + path);
  // Header row expected; tolerate its absence if the first line parses.
  std::vector<std::array<double, 9>> rows;
  auto parse = [&rows](const std::string& l) {
    std::array<double, 9> row{};
    std::istringstream ss(l);
    std::string cell;
    for (int c = 0; c < 9; ++c) {
      if (!std::getline(ss, cell, ',')) return false;
      try {
        row[c] = std::stod(cell);
      } catch (...) {
        return false;
      }
    }
    rows.push_back(row);
    return true;
  };
  parse(line);  // header fails silently
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (!parse(line)) throw ConfigError("malformed dataset row: " + line);
  }
  ContactDataset ds;
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  ds.features.resize(n, 6);
  ds.label.resize(n);
  ds.config_id.resize(n);
  ds.scenario_id.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int c = 0; c < 6; ++c) ds.features(i, c) = rows[i][c];
    ds.label[i] = static_cast<int>(rows[i][6]);
    ds.config_id[i] = static_cast<int>(rows[i][7]);
    ds.scenario_id[i] = static_cast<int>(rows[i][8]);
  }
  return ds;
}

void ContactDataset::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open dataset for writing: " + path);
  out << "fx,fy,mz,d1,d2,d3,label,config_id,scenario_id\n";
  char buf[48];
  for (Eigen::Index i = 0; i < size(); ++i) {
    for (int c = 0; c < 6; ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", features(i, c));
      out << buf << ',';
    }
    out << label[i] << ',' << config_id[i] << ',' << scenario_id[i] << '\n';
  }
}

std::vector<Eigen::Index> balanced_indices(const Eigen::VectorXi& labels,
                                           std::uint64_t seed) {
  if (labels.size() == 0) throw EmptyDataset("cannot balance an empty set");
  const int num_classes = labels.maxCoeff() + 1;
  std::vector<std::vector<Eigen::Index>> per_class(num_classes);
  for (Eigen::Index i = 0; i < labels.size(); ++i)
    per_class[labels[i]].push_back(i);
  std::size_t smallest = SIZE_MAX;
  for (const auto& c : per_class)
    if (!c.empty()) smallest = std::min(smallest, c.size());
  std::mt19937_64 rng(seed);
  std::vector<Eigen::Index> out;
  for (auto& c : per_class) {
    if (c.size() > smallest) {
      std::shuffle(c.begin(), c.end(), rng);
      c.resize(smallest);
      std::sort(c.begin(), c.end());
    }
    out.insert(out.end(), c.begin(), c.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void split_indices(Eigen::Index n, double first_fraction, std::uint64_t seed,
                   std::vector<Eigen::Index>& first,
                   std::vector<Eigen::Index>& second) {
  std::vector<Eigen::Index> all(n);
  std::iota(all.begin(), all.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(all.begin(), all.end(), rng);
  const auto cut = static_cast<std::size_t>(first_fraction * n);
  first.assign(all.begin(), all.begin() + cut);
  second.assign(all.begin() + cut, all.end());
}

void contact_task(const ContactDataset& ds, Eigen::MatrixXd& x,
                  Eigen::VectorXi& y) {
  x = ds.features.leftCols(3);
  y.resize(ds.size());
  for (Eigen::Index i = 0; i < ds.size(); ++i) y[i] = ds.label[i] > 0 ? 1 : 0;
}

void chain_task(const ContactDataset& ds, Eigen::MatrixXd& x,
                Eigen::VectorXi& y) {
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < ds.size(); ++i)
    if (ds.label[i] > 0) rows.push_back(i);
  x.resize(static_cast<Eigen::Index>(rows.size()), 6);
  y.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    x.row(i) = ds.features.row(rows[i]);
    y[i] = ds.label[rows[i]] - 1;
  }
}

}  // namespace prsim
