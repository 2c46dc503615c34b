#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>

#include "lldm/error.hpp"
#include "lldm/eval.hpp"
#include "lldm/model.hpp"

using namespace lldm;

namespace {

Graph edge_graph() { return Graph::from_edges(2, {{{0, 1}}}); }

LldmModel unit_model(int k, int t, std::vector<std::vector<double>> raw,
                     std::vector<double> beta) {
  LldmModel m;
  m.dynamics = DynamicsKind::Fca;
  m.kappa = 5;
  m.k = k;
  m.t = t;
  for (auto& f : raw) {
    double norm = 0.0;
    for (double v : f) norm += v * v;
    norm = std::sqrt(norm);
    for (double& v : f) v /= norm;
    m.filters.push_back(std::move(f));
  }
  m.beta = std::move(beta);
  m.validate();
  return m;
}

// K2/FCA dataset where synchronizing examples start constant (all-zero CAT)
// and non-synchronizing ones have strictly positive CATs at label time.
Dataset separable_dataset(std::size_t n_per_class) {
  const Graph g = edge_graph();
  const DynamicsSpec spec = DynamicsSpec::fca(5);
  const int t_horizon = 3;
  const int t_observed = 2;
  Dataset ds;
  const PhaseConfig spread[4] = {{0, 2}, {1, 3}, {2, 4}, {0, 3}};
  for (std::size_t i = 0; i < n_per_class; ++i) {
    for (int cls = 0; cls < 2; ++cls) {
      const PhaseConfig x0 = cls ? PhaseConfig{static_cast<double>(i % 5),
                                               static_cast<double>(i % 5)}
                                 : spread[i % 4];
      const Trajectory traj = simulate(g, x0, spec, t_horizon);
      const std::uint8_t label = is_synchronized(traj.configs[t_horizon], spec) ? 1 : 0;
      REQUIRE(label == cls);
      ds.cats.push_back(build_cat(g, traj, t_observed));
      ds.labels.push_back(label);
      ds.densities.push_back(1.0f);
      ds.init_concentrated.push_back(is_concentrated(x0, spec) ? 1 : 0);
      ds.ever_concentrated.push_back(0);
    }
  }
  ds.manifest.dynamics = DynamicsKind::Fca;
  ds.manifest.kappa = 5;
  ds.manifest.k = 2;
  ds.manifest.t_observed = t_observed;
  ds.manifest.t_horizon = t_horizon;
  ds.manifest.count = ds.cats.size();
  ds.manifest.labels_positive = n_per_class;
  ds.manifest.mode = "run-on-subgraph";
  ds.manifest.parent = "k2";
  return ds;
}

}  // namespace

TEST_CASE("proximity scores") {
  LldmModel m = unit_model(2, 1, {{0.0, 1.0, 1.0, 0.0}, {1.0, 0.0, 0.0, 1.0}}, {1.0, -1.0});
  SUBCASE("zero tensor gives the zero vector") {
    const Cat zero(2, 1);
    const auto h = proximity_scores(m, zero);
    CHECK(h == std::vector<double>{0.0, 0.0});
  }
  SUBCASE("matching filter attains the Frobenius norm") {
    Cat x(2, 1);
    x.data = {0.0f, 2.0f, 2.0f, 0.0f};
    const auto h = proximity_scores(m, x);
    const double norm = std::sqrt(8.0);
    CHECK(h[0] == doctest::Approx(norm).epsilon(1e-12));
    CHECK(h[1] == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("agrees with a brute-force double loop") {
    Rng rng(5);
    std::vector<double> f(3 * 3 * 2);
    for (auto& v : f) v = rng.uniform();
    LldmModel m2 = unit_model(3, 2, {f}, {0.5});
    Cat x(3, 2);
    for (auto& v : x.data) v = static_cast<float>(rng.uniform());
    double expected = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int t = 0; t < 2; ++t)
          expected += m2.filters[0][x.index(i, j, t)] * static_cast<double>(x.at(i, j, t));
    CHECK(proximity_scores(m2, x)[0] == doctest::Approx(expected).epsilon(1e-10));
  }
  SUBCASE("shape mismatch") {
    const Cat wrong(3, 1);
    CHECK_THROWS_AS(proximity_scores(m, wrong), Error);
  }
}

TEST_CASE("predict_prob") {
  SUBCASE("beta zero gives exactly one half") {
    LldmModel m = unit_model(2, 1, {{1.0, 1.0, 1.0, 1.0}}, {0.0});
    Cat x(2, 1);
    x.data = {1.0f, 1.0f, 1.0f, 1.0f};
    CHECK(predict_prob(m, x) == 0.5);
  }
  SUBCASE("logit ln 3 gives 0.75") {
    // single filter aligned with x: h = ||x||_F = 2, pick beta = ln3 / 2
    LldmModel m = unit_model(2, 1, {{0.0, 1.0, 1.0, 0.0}}, {std::log(3.0) / 2.0});
    Cat x(2, 1);
    x.data = {0.0f, std::sqrt(2.0f), std::sqrt(2.0f), 0.0f};
    CHECK(predict_prob(m, x) == doctest::Approx(0.75).epsilon(1e-6));  // float32 input
  }
  SUBCASE("scaling the input moves p monotonically and keeps the argmax") {
    LldmModel m = unit_model(2, 2, {{0.0, 1.0, 0.5, 0.0, 1.0, 0.5, 0.0, 0.0},
                                    {0.2, 0.0, 0.0, 0.9, 0.0, 0.1, 0.3, 0.0}},
                             {0.8, -0.3});
    Cat x(2, 2);
    for (std::size_t i = 0; i < x.data.size(); ++i) x.data[i] = 0.1f * (1 + (i % 3));
    const auto h1 = proximity_scores(m, x);
    const double p1 = predict_prob(m, x);
    Cat x2 = x;
    for (auto& v : x2.data) v *= 3.0f;
    const auto h2 = proximity_scores(m, x2);
    const double p2 = predict_prob(m, x2);
    const auto argmax = [](const std::vector<double>& h) {
      return std::distance(h.begin(), std::max_element(h.begin(), h.end()));
    };
    CHECK(argmax(h1) == argmax(h2));
    const double logit1 = m.beta[0] * h1[0] + m.beta[1] * h1[1];
    if (logit1 > 0.0) CHECK(p2 > p1);
    if (logit1 < 0.0) CHECK(p2 < p1);
  }
}

TEST_CASE("fit_beta") {
  SUBCASE("constant features with balanced labels give the zero fit") {
    Matrix features(6, 2);
    for (std::size_t i = 0; i < 6; ++i) {
      features(i, 0) = 1.5;
      features(i, 1) = -0.5;
    }
    std::vector<std::uint8_t> y{0, 1, 0, 1, 0, 1};
    FitBetaOptions opt;
    opt.intercept = true;
    const FitBetaResult fit = fit_beta(features, y, opt);
    CHECK(fit.converged);
    CHECK(fit.beta[0] == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(fit.beta[1] == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(fit.intercept == doctest::Approx(0.0).epsilon(1e-10));
  }
  SUBCASE("separable 1-D data gets a large finite slope and perfect accuracy") {
    Matrix features(8, 1);
    std::vector<std::uint8_t> y;
    for (int i = 0; i < 4; ++i) {
      features(i, 0) = -2.0 - 0.3 * i;
      y.push_back(0);
    }
    for (int i = 4; i < 8; ++i) {
      features(i, 0) = 2.0 + 0.3 * i;
      y.push_back(1);
    }
    FitBetaOptions opt;
    const FitBetaResult fit = fit_beta(features, y, opt);
    CHECK(std::isfinite(fit.beta[0]));
    CHECK(fit.beta[0] > 1.0);
    for (std::size_t i = 0; i < 8; ++i) {
      const int pred = sigmoid(features(i, 0) * fit.beta[0]) > 0.5 ? 1 : 0;
      CHECK(pred == y[i]);
    }
  }
  SUBCASE("permutation invariance") {
    Rng rng(6);
    Matrix features(12, 2);
    std::vector<std::uint8_t> y;
    for (std::size_t i = 0; i < 12; ++i) {
      features(i, 0) = rng.uniform();
      features(i, 1) = rng.uniform();
      y.push_back(features(i, 0) + 0.3 * rng.uniform() > 0.6 ? 1 : 0);
    }
    if (std::count(y.begin(), y.end(), 1) == 0) y[0] = 1;
    if (std::count(y.begin(), y.end(), 0) == 0) y[1] = 0;
    const FitBetaResult a = fit_beta(features, y, {});
    Matrix shuffled(12, 2);
    std::vector<std::uint8_t> y2(12);
    for (std::size_t i = 0; i < 12; ++i) {
      const std::size_t j = (i * 5 + 3) % 12;  // fixed permutation
      shuffled(i, 0) = features(j, 0);
      shuffled(i, 1) = features(j, 1);
      y2[i] = y[j];
    }
    const FitBetaResult b = fit_beta(shuffled, y2, {});
    CHECK(a.beta[0] == doctest::Approx(b.beta[0]).epsilon(1e-10));
    CHECK(a.beta[1] == doctest::Approx(b.beta[1]).epsilon(1e-10));
  }
  SUBCASE("single class rejected") {
    Matrix features(3, 1);
    std::vector<std::uint8_t> y{1, 1, 1};
    CHECK_THROWS_AS(fit_beta(features, y, {}), Error);
  }
}

TEST_CASE("training recipes on the constructed separable dataset") {
  const Dataset train = separable_dataset(20);
  const Dataset test = separable_dataset(11);
  TrainConfig cfg;
  cfg.rank = 1;
  cfg.xi = 0.5;
  cfg.iters = 80;
  cfg.seed = 2;
  cfg.intercept = true;

  SUBCASE("smf recipe reaches test accuracy 1.0") {
    const LldmModel m = train_lldm_smf(train, cfg);
    CHECK(accuracy(m, test).accuracy == doctest::Approx(1.0));
    for (const auto& f : m.filters) {
      double norm = 0.0;
      for (double v : f) norm += v * v;
      CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
  SUBCASE("nmf recipe reaches test accuracy 1.0") {
    const LldmModel m = train_lldm_nmf(train, cfg);
    CHECK(accuracy(m, test).accuracy == doctest::Approx(1.0));
  }
  SUBCASE("distilled recipe reaches test accuracy 1.0") {
    const LldmModel m = train_lldm_t(train, cfg);
    CHECK(accuracy(m, test).accuracy == doctest::Approx(1.0));
  }
  SUBCASE("nmf filters ignore the labels") {
    Dataset flipped = train;
    for (auto& b : flipped.labels) b = 1 - b;
    flipped.manifest.labels_positive = flipped.count() - flipped.manifest.labels_positive;
    const LldmModel a = train_lldm_nmf(train, cfg);
    const LldmModel b = train_lldm_nmf(flipped, cfg);
    CHECK(a.filters == b.filters);
  }
  SUBCASE("same seed gives identical model files") {
    const LldmModel a = train_lldm_smf(train, cfg);
    const LldmModel b = train_lldm_smf(train, cfg);
    CHECK(a.filters == b.filters);
    CHECK(a.beta == b.beta);
  }
}

TEST_CASE("baseline predictor") {
  const DynamicsSpec fca = DynamicsSpec::fca(5);
  SUBCASE("concentrated configuration forces a positive call") {
    Trajectory traj;
    traj.spec = fca;
    traj.configs = {{0, 2}, {0, 1}};  // second config concentrated
    Rng rng(1);
    for (int i = 0; i < 20; ++i) CHECK(baseline_predict(traj, fca, rng) == 1);
  }
  SUBCASE("synchronized GHM configuration counts as concentrated") {
    const DynamicsSpec ghm = DynamicsSpec::ghm(6);
    Trajectory traj;
    traj.spec = ghm;
    traj.configs = {{0, 2}, {3, 3}};
    Rng rng(1);
    CHECK(baseline_predict(traj, ghm, rng) == 1);
  }
  SUBCASE("otherwise a fair coin") {
    Trajectory traj;
    traj.spec = fca;
    traj.configs = {{0, 2}, {1, 3}};  // never concentrated
    std::size_t ones = 0;
    const std::size_t trials = 10000;
    for (std::size_t s = 0; s < trials; ++s) {
      Rng rng(s);
      ones += baseline_predict(traj, fca, rng);
    }
    const double mean = static_cast<double>(ones) / trials;
    CHECK(mean > 0.48);
    CHECK(mean < 0.52);
  }
}

TEST_CASE("global prediction by recursive averaging") {
  const Graph g = generate_nws({40, 4, 0.4, 19});
  const DynamicsSpec spec = DynamicsSpec::fca(5);
  Rng traj_rng(3);
  const PhaseConfig x0 = random_config(spec, g.node_count(), traj_rng);
  const Trajectory traj = simulate(g, x0, spec, 12);

  Rng rng(7);
  std::vector<double> f(4 * 4 * 8, 0.25);
  LldmModel m = unit_model(4, 8, {f}, {-0.4});

  SUBCASE("single sample equals its own average") {
    Rng r(5);
    const GlobalPrediction p = predict_global(m, g, traj, 1, r);
    CHECK(p.trace.size() == 1);
    CHECK(p.final_prob == p.per_sample[0]);
  }
  SUBCASE("running averages equal prefix means") {
    Rng r(6);
    const GlobalPrediction p = predict_global(m, g, traj, 50, r);
    CHECK(p.samples_used == 50);
    double acc = 0.0;
    for (std::size_t s = 0; s < p.per_sample.size(); ++s) {
      acc += p.per_sample[s];
      CHECK(std::fabs(p.trace[s] - acc / static_cast<double>(s + 1)) < 1e-12);
    }
    CHECK(std::fabs(p.final_prob - acc / 50.0) < 1e-12);
  }
  SUBCASE("running averages tighten as samples accumulate") {
    // across independent chains, the spread of the running average at 50
    // samples is below its spread at 5 samples
    std::vector<double> at5, at50;
    for (std::uint64_t seed = 0; seed < 24; ++seed) {
      Rng r(mix_seed(900, seed));
      const GlobalPrediction p = predict_global(m, g, traj, 50, r);
      at5.push_back(p.trace[4]);
      at50.push_back(p.trace[49]);
    }
    auto stdev = [](const std::vector<double>& v) {
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      double acc = 0.0;
      for (double x : v) acc += (x - mean) * (x - mean);
      return std::sqrt(acc / static_cast<double>(v.size()));
    };
    CHECK(stdev(at50) < stdev(at5));
  }
  SUBCASE("trajectory shorter than the window is rejected") {
    Trajectory shorty;
    shorty.spec = spec;
    shorty.configs = {x0};
    Rng r(6);
    CHECK_THROWS_AS(predict_global(m, g, shorty, 5, r), Error);
  }
}

TEST_CASE("model persistence") {
  const Dataset train = separable_dataset(16);
  TrainConfig cfg;
  cfg.rank = 2;
  cfg.xi = 0.5;
  cfg.iters = 40;
  cfg.seed = 5;
  cfg.intercept = true;
  const LldmModel m = train_lldm_smf(train, cfg);
  const auto dir = std::filesystem::temp_directory_path() / "lldm_model_rt";
  save_model(m, dir);
  const LldmModel back = load_model(dir);
  CHECK(back.rank() == m.rank());
  CHECK(back.k == m.k);
  CHECK(back.t == m.t);
  CHECK(back.kappa == m.kappa);
  CHECK(back.intercept.has_value() == m.intercept.has_value());
  const Dataset test = separable_dataset(6);
  for (std::size_t i = 0; i < test.count(); ++i) {
    const double a = predict_prob(m, test.cats[i]);
    const double b = predict_prob(back, test.cats[i]);
    CHECK(std::fabs(a - b) < 1e-5);  // float32 storage
  }

  SUBCASE("model without intercept round-trips the null field") {
    TrainConfig no_b = cfg;
    no_b.intercept = false;
    const LldmModel m2 = train_lldm_smf(train, no_b);
    const auto dir2 = std::filesystem::temp_directory_path() / "lldm_model_rt2";
    save_model(m2, dir2);
    const LldmModel back2 = load_model(dir2);
    CHECK_FALSE(back2.intercept.has_value());
  }
}
