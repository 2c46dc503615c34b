#include "lldm/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "lldm/error.hpp"
#include "lldm/sampling.hpp"

namespace lldm {

namespace {

void check_shape(const LldmModel& model, const Cat& x) {
  require(x.k == model.k && x.t == model.t, ErrorKind::Argument,
          "input tensor shape does not match the model");
}

// Rebuilds a model from normalized factors plus a beta refit on the
// proximity features of the (possibly rank-reduced) dictionary.
LldmModel assemble_model(const Dataset& ds, const TrainConfig& cfg, NormalizeResult norm,
                         const Matrix& x_full) {
  if (norm.dropped_columns > 0) {
    std::cerr << "lldm: dropped " << norm.dropped_columns
              << " zero dictionary column(s) during normalization\n";
  }
  const Matrix features_t = transpose_times(norm.factors.w, x_full);  // R x n
  FitBetaOptions opt;
  opt.ridge_lambda = cfg.ridge_lambda;
  opt.intercept = cfg.intercept;
  const FitBetaResult fit = fit_beta(transpose(features_t), ds.labels, opt);

  LldmModel model;
  model.dynamics = ds.manifest.dynamics;
  model.kappa = ds.manifest.kappa;
  model.k = ds.manifest.k;
  model.t = ds.manifest.t_observed;
  const std::size_t d = norm.factors.w.rows;
  model.filters.resize(norm.factors.w.cols);
  for (std::size_t j = 0; j < norm.factors.w.cols; ++j) {
    model.filters[j].resize(d);
    for (std::size_t i = 0; i < d; ++i) model.filters[j][i] = norm.factors.w(i, j);
  }
  model.beta = fit.beta;
  if (cfg.intercept) model.intercept = fit.intercept;
  model.validate();
  return model;
}

void check_trainable(const Dataset& ds) {
  require(ds.count() > 0, ErrorKind::Data, "cannot train on an empty dataset");
  bool has[2] = {false, false};
  for (auto b : ds.labels) has[b] = true;
  require(has[0] && has[1], ErrorKind::Data, "training data must contain both classes");
}

}  // namespace

void LldmModel::validate() const {
  require(!filters.empty(), ErrorKind::Argument, "model has no filters");
  require(beta.size() == filters.size(), ErrorKind::Argument, "beta length must match rank");
  const std::size_t d = static_cast<std::size_t>(k) * k * t;
  for (const auto& f : filters) {
    require(f.size() == d, ErrorKind::Argument, "filter size does not match k^2 T");
    double norm_sq = 0.0;
    for (double v : f) {
      require(v >= 0.0, ErrorKind::Data, "filter entries must be >= 0");
      norm_sq += v * v;
    }
    require(std::fabs(std::sqrt(norm_sq) - 1.0) <= 1e-9, ErrorKind::Data,
            "filters must have unit Frobenius norm");
  }
}

std::vector<double> proximity_scores(const LldmModel& model, const Cat& x) {
  check_shape(model, x);
  std::vector<double> h(model.rank(), 0.0);
  for (std::size_t j = 0; j < model.rank(); ++j) {
    const auto& f = model.filters[j];
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) acc += f[i] * static_cast<double>(x.data[i]);
    h[j] = acc;
  }
  return h;
}

double predict_prob(const LldmModel& model, const Cat& x) {
  const std::vector<double> h = proximity_scores(model, x);
  double s = model.intercept.value_or(0.0);
  for (std::size_t j = 0; j < h.size(); ++j) s += model.beta[j] * h[j];
  return sigmoid(s);
}

FitBetaResult fit_beta(const Matrix& features, std::span<const std::uint8_t> y,
                       const FitBetaOptions& opt) {
  const std::size_t n = features.rows;
  const std::size_t r = features.cols;
  require(y.size() == n, ErrorKind::Argument, "fit_beta: label count mismatch");
  bool has[2] = {false, false};
  for (auto b : y) {
    require(b == 0 || b == 1, ErrorKind::Data, "fit_beta: labels must be 0/1");
    has[b] = true;
  }
  require(has[0] && has[1], ErrorKind::Data, "fit_beta: both classes must be present");
  if (n < r) std::cerr << "lldm: fit_beta with fewer examples than features (" << n << " < " << r
                       << ")\n";

  const std::size_t p = r + (opt.intercept ? 1 : 0);
  std::vector<double> z(p, 0.0);  // beta, then optional intercept

  auto linear = [&](std::span<const double> zz, std::size_t i) {
    double s = opt.intercept ? zz[r] : 0.0;
    const double* fi = features.row(i);
    for (std::size_t j = 0; j < r; ++j) s += zz[j] * fi[j];
    return s;
  };
  auto objective = [&](std::span<const double> zz) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += bernoulli_nll(y[i], sigmoid(linear(zz, i)));
    for (std::size_t j = 0; j < r; ++j) acc += opt.ridge_lambda * zz[j] * zz[j];
    return acc;
  };

  FitBetaResult out;
  double obj = objective(z);
  for (int iter = 0; iter < opt.max_iters; ++iter) {
    out.iters = iter + 1;
    std::vector<double> grad(p, 0.0);
    Matrix hess(p, p);
    for (std::size_t i = 0; i < n; ++i) {
      const double pi = sigmoid(linear(z, i));
      const double resid = pi - static_cast<double>(y[i]);
      const double wgt = pi * (1.0 - pi);
      const double* fi = features.row(i);
      for (std::size_t a = 0; a < r; ++a) {
        grad[a] += resid * fi[a];
        for (std::size_t b = 0; b <= a; ++b) hess(a, b) += wgt * fi[a] * fi[b];
      }
      if (opt.intercept) {
        grad[r] += resid;
        for (std::size_t b = 0; b < r; ++b) hess(r, b) += wgt * fi[b];
        hess(r, r) += wgt;
      }
    }
    for (std::size_t a = 0; a < r; ++a) grad[a] += 2.0 * opt.ridge_lambda * z[a];
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = a + 1; b < p; ++b) hess(a, b) = hess(b, a);
    for (std::size_t a = 0; a < r; ++a) hess(a, a) += 2.0 * opt.ridge_lambda;

    double gmax = 0.0;
    for (double g : grad) gmax = std::max(gmax, std::fabs(g));
    if (gmax < opt.grad_tol) {
      out.converged = true;
      break;
    }

    std::vector<double> dir;
    if (!cholesky_solve(hess, grad, dir)) dir = grad;  // fall back to gradient descent

    double step = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving) {
      std::vector<double> cand(p);
      for (std::size_t j = 0; j < p; ++j) cand[j] = z[j] - step * dir[j];
      const double cand_obj = objective(cand);
      if (cand_obj <= obj) {
        z = std::move(cand);
        obj = cand_obj;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      out.converged = true;  // no descent direction left at double precision
      break;
    }
  }

  out.beta.assign(z.begin(), z.begin() + r);
  out.intercept = opt.intercept ? z[r] : 0.0;
  return out;
}

LldmModel train_lldm_smf(const Dataset& ds, const TrainConfig& cfg) {
  check_trainable(ds);
  const Matrix x = matricize(ds.cats);
  SmfConfig scfg;
  scfg.rank = cfg.rank;
  scfg.xi = cfg.xi;
  scfg.iters = cfg.iters;
  scfg.inner_iters = cfg.inner_iters;
  scfg.ridge_lambda = cfg.ridge_lambda;
  scfg.seed = cfg.seed;
  SmfSolution sol = smf(x, ds.labels, scfg);
  return assemble_model(ds, cfg, normalize_dictionary({std::move(sol.w), std::move(sol.h)}), x);
}

LldmModel train_lldm_nmf(const Dataset& ds, const TrainConfig& cfg) {
  check_trainable(ds);
  const Matrix x = matricize(ds.cats);
  NmfResult res = nmf(x, cfg.rank, cfg.iters, cfg.seed);
  return assemble_model(ds, cfg, normalize_dictionary(std::move(res.factors)), x);
}

LldmModel train_lldm_t(const Dataset& ds, const TrainConfig& cfg) {
  check_trainable(ds);
  const Dataset distilled = distill(ds, cfg.dense_frac, cfg.sparse_frac);
  const Matrix x_distilled = matricize(distilled.cats);
  NmfResult res = nmf(x_distilled, cfg.rank, cfg.iters, cfg.seed);
  const Matrix x_full = matricize(ds.cats);
  return assemble_model(ds, cfg, normalize_dictionary(std::move(res.factors)), x_full);
}

int baseline_predict(const Trajectory& observed, const DynamicsSpec& spec, Rng& rng) {
  require(!observed.configs.empty(), ErrorKind::Argument, "baseline needs a nonempty trajectory");
  for (const auto& cfg : observed.configs)
    if (is_concentrated(cfg, spec)) return 1;
  return rng.bernoulli(0.5) ? 1 : 0;
}

GlobalPrediction predict_global(const LldmModel& model, const Graph& g, const Trajectory& traj,
                                int n_samples, Rng& rng) {
  require(n_samples >= 1, ErrorKind::Argument, "need at least one MCMC sample");
  require(static_cast<int>(traj.configs.size()) >= model.t, ErrorKind::Argument,
          "trajectory shorter than the model's observation window");
  require(traj.spec.kind == model.dynamics, ErrorKind::Argument,
          "trajectory dynamics kind does not match the model");
  require(model.k <= static_cast<int>(g.node_count()), ErrorKind::Argument,
          "graph smaller than the model's subgraph size");

  GlobalPrediction out;
  out.trace.reserve(n_samples);
  out.per_sample.reserve(n_samples);
  WalkChain chain(g, model.k, rng);
  double running = 0.0;
  for (int s = 1; s <= n_samples; ++s) {
    const auto path = chain.next_path();
    const Graph sub = induced_subgraph(g, path);
    Trajectory restricted;
    restricted.spec = traj.spec;
    restricted.configs.reserve(model.t);
    for (int tt = 0; tt < model.t; ++tt) {
      PhaseConfig cfg(path.size());
      for (std::size_t i = 0; i < path.size(); ++i) cfg[i] = traj.configs[tt][path[i]];
      restricted.configs.push_back(std::move(cfg));
    }
    const Cat cat = build_cat(sub, restricted, model.t);
    const double p = predict_prob(model, cat);
    running = (1.0 - 1.0 / s) * running + p / s;
    out.per_sample.push_back(p);
    out.trace.push_back(running);
  }
  out.final_prob = running;
  out.samples_used = static_cast<std::size_t>(n_samples);
  return out;
}

void save_model(const LldmModel& model, const std::filesystem::path& dir) {
  model.validate();
  std::filesystem::create_directories(dir);

  nlohmann::json j;
  j["format_version"] = 1;
  j["rank"] = model.rank();
  j["k"] = model.k;
  j["t_observed"] = model.t;
  j["dynamics"] = dynamics_name(model.dynamics);
  j["kappa"] = model.kappa;
  j["beta"] = model.beta;
  if (model.intercept)
    j["intercept"] = *model.intercept;
  else
    j["intercept"] = nullptr;
  const std::string text = j.dump(2) + "\n";
  std::ofstream mf(dir / "manifest.json", std::ios::binary);
  require(mf.good(), ErrorKind::Io, "cannot write model manifest");
  mf << text;
  require(mf.good(), ErrorKind::Io, "model manifest write failed");

  std::ofstream ff(dir / "filters.f32", std::ios::binary);
  require(ff.good(), ErrorKind::Io, "cannot write filters.f32");
  for (const auto& filt : model.filters) {
    std::vector<float> as_f32(filt.begin(), filt.end());
    ff.write(reinterpret_cast<const char*>(as_f32.data()),
             static_cast<std::streamsize>(as_f32.size() * sizeof(float)));
  }
  require(ff.good(), ErrorKind::Io, "filters.f32 write failed");
}

LldmModel load_model(const std::filesystem::path& dir) {
  std::ifstream mf(dir / "manifest.json");
  require(mf.good(), ErrorKind::Io, "cannot open model manifest in " + dir.string());
  nlohmann::json j;
  try {
    mf >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, "bad model manifest: " + std::string(e.what()));
  }

  LldmModel model;
  std::size_t rank = 0;
  try {
    require(j.at("format_version").get<int>() == 1, ErrorKind::Data,
            "unsupported model format version");
    rank = j.at("rank").get<std::size_t>();
    model.k = j.at("k").get<int>();
    model.t = j.at("t_observed").get<int>();
    model.dynamics = dynamics_from_name(j.at("dynamics").get<std::string>());
    model.kappa = j.at("kappa").get<int>();
    model.beta = j.at("beta").get<std::vector<double>>();
    if (!j.at("intercept").is_null()) model.intercept = j.at("intercept").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, "model manifest missing key: " + std::string(e.what()));
  }
  require(model.beta.size() == rank, ErrorKind::Data, "beta length disagrees with rank");

  const std::size_t d = static_cast<std::size_t>(model.k) * model.k * model.t;
  std::ifstream ff(dir / "filters.f32", std::ios::binary | std::ios::ate);
  require(ff.good(), ErrorKind::Io, "cannot open filters.f32 in " + dir.string());
  const std::size_t bytes = static_cast<std::size_t>(ff.tellg());
  require(bytes == rank * d * sizeof(float), ErrorKind::Data,
          "filters.f32 size disagrees with manifest");
  ff.seekg(0);
  std::vector<float> flat(rank * d);
  ff.read(reinterpret_cast<char*>(flat.data()), static_cast<std::streamsize>(bytes));
  require(ff.good(), ErrorKind::Io, "filters.f32 read failed");

  model.filters.resize(rank);
  for (std::size_t f = 0; f < rank; ++f) {
    auto& filt = model.filters[f];
    filt.assign(flat.begin() + f * d, flat.begin() + (f + 1) * d);
    // float32 storage perturbs the norm at the 1e-7 level; renormalize so the
    // in-memory invariant is exact.
    double norm_sq = 0.0;
    for (double v : filt) norm_sq += v * v;
    require(norm_sq > 0.0, ErrorKind::Data, "stored filter is identically zero");
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (double& v : filt) v *= inv;
  }
  model.validate();
  return model;
}

}  // namespace lldm
