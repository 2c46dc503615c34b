#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "lldm/error.hpp"
#include "lldm/eval.hpp"

using namespace lldm;

namespace {

Dataset labeled_dataset(std::size_t n, int k, int t, std::uint64_t seed) {
  Rng rng(seed);
  Dataset ds;
  for (std::size_t i = 0; i < n; ++i) {
    Cat c(k, t);
    const std::uint8_t label = i % 2;
    // class-dependent magnitude on the (0,1) edge
    const float mag = label ? 0.1f : 1.5f;
    for (int tt = 0; tt < t; ++tt) {
      const auto v = static_cast<float>(mag * (0.5 + rng.uniform()));
      c.data[c.index(0, 1, tt)] = c.data[c.index(1, 0, tt)] = v;
    }
    ds.cats.push_back(std::move(c));
    ds.labels.push_back(label);
    ds.densities.push_back(static_cast<float>(rng.uniform()));
    ds.init_concentrated.push_back(0);
    ds.ever_concentrated.push_back(label);  // baseline flag correlates with label
  }
  ds.manifest.dynamics = DynamicsKind::Fca;
  ds.manifest.kappa = 5;
  ds.manifest.k = k;
  ds.manifest.t_observed = t;
  ds.manifest.t_horizon = t + 1;
  ds.manifest.count = n;
  ds.manifest.labels_positive = n / 2;
  ds.manifest.mode = "run-on-subgraph";
  ds.manifest.parent = "synthetic";
  return ds;
}

LldmModel constant_model(int k, int t, double beta) {
  LldmModel m;
  m.dynamics = DynamicsKind::Fca;
  m.kappa = 5;
  m.k = k;
  m.t = t;
  std::vector<double> f(static_cast<std::size_t>(k) * k * t);
  const double v = 1.0 / std::sqrt(static_cast<double>(f.size()));
  for (auto& e : f) e = v;
  m.filters.push_back(f);
  m.beta = {beta};
  m.validate();
  return m;
}

}  // namespace

TEST_CASE("split") {
  const Dataset ds = labeled_dataset(10, 2, 3, 1);
  SUBCASE("80/20 on ten examples") {
    const auto [train, test] = split(ds, 0.8, 4);
    CHECK(train.count() == 8);
    CHECK(test.count() == 2);
  }
  SUBCASE("disjoint and exhaustive") {
    const auto [train, test] = split(ds, 0.7, 9);
    std::multiset<float> seen;
    for (const auto& c : train.cats) seen.insert(c.data[c.index(0, 1, 0)]);
    for (const auto& c : test.cats) seen.insert(c.data[c.index(0, 1, 0)]);
    std::multiset<float> expected;
    for (const auto& c : ds.cats) expected.insert(c.data[c.index(0, 1, 0)]);
    CHECK(seen == expected);
  }
  SUBCASE("same seed, same split") {
    const auto [a_train, a_test] = split(ds, 0.8, 3);
    const auto [b_train, b_test] = split(ds, 0.8, 3);
    for (std::size_t i = 0; i < a_train.count(); ++i)
      CHECK(a_train.cats[i].data == b_train.cats[i].data);
  }
  SUBCASE("degenerate fraction") {
    CHECK_THROWS_AS(split(ds, 0.05, 1), Error);  // empty train side
    CHECK_THROWS_AS(split(ds, 1.0, 1), Error);
  }
}

TEST_CASE("accuracy metrics") {
  const Dataset ds = labeled_dataset(20, 2, 3, 2);
  SUBCASE("confident-positive model on all-ones labels") {
    Dataset all_pos = ds;
    std::fill(all_pos.labels.begin(), all_pos.labels.end(), 1);
    const LldmModel m = constant_model(2, 3, 50.0);  // huge positive beta
    const Metrics metrics = accuracy(m, all_pos);
    CHECK(metrics.accuracy == doctest::Approx(1.0));
    CHECK(metrics.tp == 20);
    CHECK(metrics.n == 20);
  }
  SUBCASE("complementing the labels flips the accuracy") {
    const LldmModel m = constant_model(2, 3, -2.0);
    const Metrics a = accuracy(m, ds);
    Dataset flipped = ds;
    for (auto& b : flipped.labels) b = 1 - b;
    const Metrics b = accuracy(m, flipped);
    CHECK(a.accuracy == doctest::Approx(1.0 - b.accuracy));
  }
  SUBCASE("reordering leaves accuracy unchanged") {
    const LldmModel m = constant_model(2, 3, -2.0);
    const Metrics a = accuracy(m, ds);
    std::vector<std::size_t> order(ds.count());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = (i * 7 + 3) % order.size();
    const Metrics b = accuracy(m, subset(ds, order));
    CHECK(a.accuracy == doctest::Approx(b.accuracy));
    CHECK(a.tp == b.tp);
  }
  SUBCASE("counts sum to n") {
    const LldmModel m = constant_model(2, 3, 0.7);
    const Metrics metrics = accuracy(m, ds);
    CHECK(metrics.tp + metrics.tn + metrics.fp + metrics.fn == metrics.n);
  }
}

TEST_CASE("baseline accuracy") {
  SUBCASE("always-concentrated positives score perfectly") {
    const DynamicsSpec spec = DynamicsSpec::fca(5);
    std::vector<Trajectory> trajs;
    std::vector<std::uint8_t> labels;
    for (int i = 0; i < 6; ++i) {
      Trajectory t;
      t.spec = spec;
      t.configs = {{0, 1}};  // concentrated
      trajs.push_back(t);
      labels.push_back(1);
    }
    Trajectory never;
    never.spec = spec;
    never.configs = {{0, 2}};
    trajs.push_back(never);
    labels.push_back(0);
    Rng rng(3);
    const Metrics m = baseline_accuracy(trajs, labels, spec, rng);
    CHECK(m.tp == 6);
    CHECK(m.n == 7);
  }
  SUBCASE("flag-based overload matches the predictor semantics") {
    const Dataset ds = labeled_dataset(40, 2, 3, 5);
    Rng rng(11);
    const Metrics m = baseline_accuracy(ds, rng);
    // flags equal the labels here, so every flagged example is a true
    // positive and the rest are coin flips
    CHECK(m.tp == 20);
    CHECK(m.n == 40);
  }
}

TEST_CASE("deviance residuals") {
  const int t = 3;
  SUBCASE("closed-form values at one half") {
    LldmModel m = constant_model(2, t, 0.0);  // p = 0.5 everywhere
    const Dataset ds = labeled_dataset(4, 2, t, 7);
    const auto rows = deviance_residuals(m, ds);
    const double expected = std::sqrt(-2.0 * std::log(0.5));
    for (const auto& r : rows) {
      CHECK(r.fitted == doctest::Approx(0.5));
      if (r.label == 1) CHECK(r.deviance == doctest::Approx(expected).epsilon(1e-9));
      if (r.label == 0) CHECK(r.deviance == doctest::Approx(-expected).epsilon(1e-9));
    }
  }
  SUBCASE("perfect fit drives the residual to zero") {
    LldmModel m = constant_model(2, t, 500.0);
    Dataset ds = labeled_dataset(4, 2, t, 8);
    std::fill(ds.labels.begin(), ds.labels.end(), 1);
    for (const auto& r : deviance_residuals(m, ds)) CHECK(std::fabs(r.deviance) < 1e-3);
  }
  SUBCASE("sign pattern and sum identity") {
    LldmModel m = constant_model(2, t, -0.8);
    const Dataset ds = labeled_dataset(30, 2, t, 9);
    const auto rows = deviance_residuals(m, ds);
    double sum_sq = 0.0;
    double nll = 0.0;
    for (const auto& r : rows) {
      if (r.label == 1) CHECK(r.deviance >= 0.0);
      if (r.label == 0) CHECK(r.deviance <= 0.0);
      sum_sq += r.deviance * r.deviance;
      nll += r.label ? -std::log(r.fitted) : -std::log(1.0 - r.fitted);
    }
    CHECK(sum_sq == doctest::Approx(2.0 * nll).epsilon(1e-9));
  }
}

TEST_CASE("logreg comparator") {
  const Dataset train = labeled_dataset(40, 2, 3, 10);
  const Dataset test = labeled_dataset(16, 2, 3, 11);
  SUBCASE("separable magnitudes are classified perfectly") {
    const Metrics m = logreg_comparator(train, test, 1e-6);
    CHECK(m.accuracy == doctest::Approx(1.0));
  }
  SUBCASE("in-sample accuracy beats the majority fraction") {
    const Metrics m = logreg_comparator(train, train, 1e-6);
    const double majority = 0.5;
    CHECK(m.accuracy >= majority);
  }
  SUBCASE("order invariance") {
    std::vector<std::size_t> order(train.count());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = (i * 13 + 5) % order.size();
    const Metrics a = logreg_comparator(train, test, 1e-6);
    const Metrics b = logreg_comparator(subset(train, order), test, 1e-6);
    CHECK(a.accuracy == doctest::Approx(b.accuracy));
  }
}

TEST_CASE("result files") {
  const auto dir = std::filesystem::temp_directory_path() / "lldm_eval_out";
  std::filesystem::create_directories(dir);
  SUBCASE("residuals csv shape") {
    LldmModel m = constant_model(2, 3, -0.8);
    const Dataset ds = labeled_dataset(5, 2, 3, 12);
    const auto rows = deviance_residuals(m, ds);
    const auto path = dir / "residuals.csv";
    write_residuals_csv(rows, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "index,label,fitted,deviance");
    std::size_t lines = 0;
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) ++lines;
    CHECK(lines == 5);
  }
  SUBCASE("metrics json keys") {
    Metrics m;
    m.accuracy = 0.75;
    m.tp = 3;
    m.tn = 3;
    m.fp = 1;
    m.fn = 1;
    m.n = 8;
    const auto path = dir / "metrics.json";
    write_metrics_json(m, 42, path);
    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)), {});
    for (const char* key : {"accuracy", "tp", "tn", "fp", "fn", "\"n\"", "seed"})
      CHECK(text.find(key) != std::string::npos);
  }
}
