#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "lldm/encoding.hpp"
#include "lldm/model.hpp"

namespace lldm {

struct Metrics {
  double accuracy = 0.0;
  std::int64_t tp = 0;
  std::int64_t tn = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t n = 0;
};

// Uniform random permutation split; the first floor(train_frac * n) permuted
// examples form the training side.
std::pair<Dataset, Dataset> split(const Dataset& ds, double train_frac, std::uint64_t seed);

// Threshold-0.5 accuracy of the model on ds.
Metrics accuracy(const LldmModel& model, const Dataset& ds);

// Concentration-principle baseline over explicit observed trajectories.
Metrics baseline_accuracy(std::span<const Trajectory> trajectories,
                          std::span<const std::uint8_t> labels, const DynamicsSpec& spec,
                          Rng& rng);

// Same baseline evaluated from the dataset's stored concentration flags.
Metrics baseline_accuracy(const Dataset& ds, Rng& rng);

struct ResidualRow {
  std::size_t index = 0;
  int label = 0;
  double fitted = 0.0;
  double deviance = 0.0;
};

// Deviance residuals d_i = sign(y_i - p_i) sqrt(-2 (y_i log p_i +
// (1-y_i) log(1-p_i))), with p_i clamped to [1e-12, 1-1e-12].
std::vector<ResidualRow> deviance_residuals(const LldmModel& model, const Dataset& ds);

// Plain logistic regression on vectorized CATs (intercept on); the LogReg
// reference row.
Metrics logreg_comparator(const Dataset& train, const Dataset& test, double ridge_lambda);

void write_residuals_csv(std::span<const ResidualRow> rows, const std::filesystem::path& path);
void write_metrics_json(const Metrics& m, std::uint64_t seed, const std::filesystem::path& path);

}  // namespace lldm
