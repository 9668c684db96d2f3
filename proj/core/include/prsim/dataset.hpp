/**
 * @file dataset.hpp
 * @brief Gated contact samples for classifier training.
 *
 * CSV layout: fx, fy, mz, d1, d2, d3, label, config_id, scenario_id.
 * Label encoding: 0 = collision, 1..3 = clamping at that chain.
 */
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prsim/types.hpp"

namespace prsim {

struct ContactDataset {
  Eigen::MatrixXd features;  // N x 6: fx fy mz d1 d2 d3
  Eigen::VectorXi label;
  Eigen::VectorXi config_id;
  Eigen::VectorXi scenario_id;

  Eigen::Index size() const { return features.rows(); }

  void append_rows(const ContactDataset& other);

  ContactDataset select(const std::vector<Eigen::Index>& rows) const;

  /// Rows whose config_id is (not) in the given set.
  std::vector<Eigen::Index> rows_with_config(const std::vector<int>& configs,
                                             bool invert = false) const;

  static ContactDataset load_csv(const std::string& path);
  void save_csv(const std::string& path) const;
};

/// Undersamples the majority classes down to the smallest class count;
/// deterministic for a fixed seed, preserves row order within classes.
std::vector<Eigen::Index> balanced_indices(const Eigen::VectorXi& labels,
                                           std::uint64_t seed);

/// Deterministic shuffled split of [0, n); first fraction goes to the first
/// output.
void split_indices(Eigen::Index n, double first_fraction, std::uint64_t seed,
                   std::vector<Eigen::Index>& first,
                   std::vector<Eigen::Index>& second);

/// Binary contact-vs-clamping task: features (fx, fy, mz), labels 0/1.
void contact_task(const ContactDataset& ds, Eigen::MatrixXd& x,
                  Eigen::VectorXi& y);

/// Chain task: clamping rows only, all 6 features, labels 0..2.
void chain_task(const ContactDataset& ds, Eigen::MatrixXd& x,
                Eigen::VectorXi& y);

}  // namespace prsim
