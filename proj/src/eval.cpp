#include "lldm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "lldm/error.hpp"

namespace lldm {

namespace {

void tally(Metrics& m, int predicted, int label) {
  if (predicted == 1 && label == 1) ++m.tp;
  if (predicted == 0 && label == 0) ++m.tn;
  if (predicted == 1 && label == 0) ++m.fp;
  if (predicted == 0 && label == 1) ++m.fn;
  ++m.n;
}

void finish(Metrics& m) {
  m.accuracy = m.n > 0 ? static_cast<double>(m.tp + m.tn) / static_cast<double>(m.n) : 0.0;
}

}  // namespace

std::pair<Dataset, Dataset> split(const Dataset& ds, double train_frac, std::uint64_t seed) {
  require(train_frac > 0.0 && train_frac < 1.0, ErrorKind::Argument,
          "train fraction must lie strictly between 0 and 1");
  const std::size_t n = ds.count();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(mix_seed(seed, 0x5B117));
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = rng.below(i);
    std::swap(perm[i - 1], perm[j]);
  }
  const auto n_train = static_cast<std::size_t>(std::floor(train_frac * static_cast<double>(n)));
  require(n_train >= 1 && n_train < n, ErrorKind::Data, "split leaves an empty side");
  const std::span<const std::size_t> all(perm);
  return {subset(ds, all.subspan(0, n_train)), subset(ds, all.subspan(n_train))};
}

Metrics accuracy(const LldmModel& model, const Dataset& ds) {
  require(ds.count() > 0, ErrorKind::Argument, "cannot evaluate an empty dataset");
  Metrics m;
  for (std::size_t i = 0; i < ds.count(); ++i) {
    const int predicted = predict_prob(model, ds.cats[i]) > 0.5 ? 1 : 0;
    tally(m, predicted, ds.labels[i]);
  }
  finish(m);
  return m;
}

Metrics baseline_accuracy(std::span<const Trajectory> trajectories,
                          std::span<const std::uint8_t> labels, const DynamicsSpec& spec,
                          Rng& rng) {
  require(trajectories.size() == labels.size() && !trajectories.empty(), ErrorKind::Argument,
          "baseline needs matching trajectories and labels");
  Metrics m;
  for (std::size_t i = 0; i < trajectories.size(); ++i)
    tally(m, baseline_predict(trajectories[i], spec, rng), labels[i]);
  finish(m);
  return m;
}

Metrics baseline_accuracy(const Dataset& ds, Rng& rng) {
  require(ds.count() > 0, ErrorKind::Argument, "cannot evaluate an empty dataset");
  require(ds.has_aux(), ErrorKind::Data, "dataset lacks concentration flags for the baseline");
  Metrics m;
  for (std::size_t i = 0; i < ds.count(); ++i) {
    const int predicted = ds.ever_concentrated[i] ? 1 : (rng.bernoulli(0.5) ? 1 : 0);
    tally(m, predicted, ds.labels[i]);
  }
  finish(m);
  return m;
}

std::vector<ResidualRow> deviance_residuals(const LldmModel& model, const Dataset& ds) {
  require(ds.count() > 0, ErrorKind::Argument, "cannot evaluate an empty dataset");
  std::vector<ResidualRow> rows;
  rows.reserve(ds.count());
  for (std::size_t i = 0; i < ds.count(); ++i) {
    const int y = ds.labels[i];
    const double p = std::clamp(predict_prob(model, ds.cats[i]), 1e-12, 1.0 - 1e-12);
    const double e = static_cast<double>(y) - p;
    const double sign = e > 0.0 ? 1.0 : (e < 0.0 ? -1.0 : 0.0);
    const double mag = -2.0 * (y * std::log(p) + (1 - y) * std::log1p(-p));
    rows.push_back({i, y, p, sign * std::sqrt(std::max(mag, 0.0))});
  }
  return rows;
}

Metrics logreg_comparator(const Dataset& train, const Dataset& test, double ridge_lambda) {
  require(train.count() > 0 && test.count() > 0, ErrorKind::Argument,
          "comparator needs nonempty train and test sets");
  const Matrix x_train = transpose(matricize(train.cats));  // n x d
  FitBetaOptions opt;
  opt.ridge_lambda = ridge_lambda;
  opt.intercept = true;
  const FitBetaResult fit = fit_beta(x_train, train.labels, opt);

  Metrics m;
  for (std::size_t i = 0; i < test.count(); ++i) {
    const std::vector<double> v = vectorize(test.cats[i]);
    require(v.size() == fit.beta.size(), ErrorKind::Argument,
            "test example shape does not match the fitted comparator");
    double s = fit.intercept;
    for (std::size_t j = 0; j < v.size(); ++j) s += fit.beta[j] * v[j];
    tally(m, sigmoid(s) > 0.5 ? 1 : 0, test.labels[i]);
  }
  finish(m);
  return m;
}

void write_residuals_csv(std::span<const ResidualRow> rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::Io, "cannot write " + path.string());
  out << "index,label,fitted,deviance\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%zu,%d,%.12g,%.12g\n", r.index, r.label, r.fitted,
                  r.deviance);
    out << buf;
  }
  require(out.good(), ErrorKind::Io, "write failed: " + path.string());
}

void write_metrics_json(const Metrics& m, std::uint64_t seed, const std::filesystem::path& path) {
  nlohmann::json j;
  j["accuracy"] = m.accuracy;
  j["tp"] = m.tp;
  j["tn"] = m.tn;
  j["fp"] = m.fp;
  j["fn"] = m.fn;
  j["n"] = m.n;
  j["seed"] = seed;
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::Io, "cannot write " + path.string());
  out << j.dump(2) << "\n";
  require(out.good(), ErrorKind::Io, "write failed: " + path.string());
}

}  // namespace lldm
