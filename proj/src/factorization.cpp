#include "lldm/factorization.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lldm/error.hpp"

namespace lldm {

namespace {

constexpr double kMuGuard = 1e-12;   // multiplicative-update denominator guard
constexpr double kProbClamp = 1e-12;

void check_nonnegative(const Matrix& x) {
  for (double v : x.data)
    require(v >= 0.0 && std::isfinite(v), ErrorKind::Data, "matrix must be entrywise >= 0");
}

void check_labels(std::span<const std::uint8_t> y) {
  bool has[2] = {false, false};
  for (auto b : y) {
    require(b == 0 || b == 1, ErrorKind::Data, "labels must be 0/1");
    has[b] = true;
  }
  require(has[0] && has[1], ErrorKind::Data, "both classes must be present");
}

void fill_uniform_open(Matrix& m, Rng& rng) {
  for (auto& v : m.data) v = rng.uniform_open();
}

// Classification loss from precomputed scores s_i = <beta, WT x_i>.
double cls_loss(std::span<const double> s, std::span<const std::uint8_t> y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) acc += bernoulli_nll(y[i], sigmoid(s[i]));
  return acc;
}

// ||X - WH||^2 via ||X||^2 - 2<W, XHT> + tr(WTW HHT); valid while H (hence
// xht, hht) is fixed.
double rec_from_w(const Matrix& w, const Matrix& xht, const Matrix& hht, double norm_x_sq) {
  return norm_x_sq - 2.0 * dot(w, xht) + trace_product(transpose_times(w, w), hht);
}

// Same quantity via <H, WTX>; valid while W (hence wtx, wtw) is fixed.
double rec_from_h(const Matrix& h, const Matrix& wtx, const Matrix& wtw, double norm_x_sq) {
  return norm_x_sq - 2.0 * dot(h, wtx) + trace_product(wtw, times_transpose(h, h));
}

std::vector<double> scores(const Matrix& x, const Matrix& w, std::span<const double> beta) {
  std::vector<double> v = times_vec(w, beta);  // W beta, length d
  return vec_times(v, x);                      // (W beta)T X, length n
}

// Ridge logistic Newton refit used by the beta block; warm-started and
// monotone in the ridge objective.
std::vector<double> ridge_logistic(const Matrix& features /* R x n */,
                                   std::span<const std::uint8_t> y, double lambda,
                                   std::vector<double> beta) {
  const std::size_t r = features.rows;
  const std::size_t n = features.cols;
  for (int iter = 0; iter < 100; ++iter) {
    const std::vector<double> s = vec_times(beta, features);
    std::vector<double> resid(n);
    double psi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(s[i]);
      resid[i] = p - static_cast<double>(y[i]);
      psi += bernoulli_nll(y[i], p);
    }
    for (double b : beta) psi += lambda * b * b;

    std::vector<double> grad = times_vec(features, resid);
    double gmax = 0.0;
    for (std::size_t j = 0; j < r; ++j) {
      grad[j] += 2.0 * lambda * beta[j];
      gmax = std::max(gmax, std::fabs(grad[j]));
    }
    if (gmax < 1e-10) break;

    Matrix hess(r, r);
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(s[i]);
      const double wgt = p * (1.0 - p);
      if (wgt == 0.0) continue;
      for (std::size_t a = 0; a < r; ++a) {
        const double fa = features(a, i) * wgt;
        for (std::size_t b = 0; b < r; ++b) hess(a, b) += fa * features(b, i);
      }
    }
    for (std::size_t a = 0; a < r; ++a) hess(a, a) += 2.0 * lambda;

    std::vector<double> dir;
    if (!cholesky_solve(hess, grad, dir)) dir = grad;  // gradient fallback

    double step = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving) {
      std::vector<double> cand(r);
      for (std::size_t j = 0; j < r; ++j) cand[j] = beta[j] - step * dir[j];
      const std::vector<double> sc = vec_times(cand, features);
      double psi_c = 0.0;
      for (std::size_t i = 0; i < n; ++i) psi_c += bernoulli_nll(y[i], sigmoid(sc[i]));
      for (double b : cand) psi_c += lambda * b * b;
      if (psi_c <= psi) {
        beta = std::move(cand);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  return beta;
}

}  // namespace

double sigmoid(double s) {
  if (s >= 0.0) {
    const double e = std::exp(-s);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(s);
  return e / (1.0 + e);
}

double bernoulli_nll(int y, double p) {
  p = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
  return y ? -std::log(p) : -std::log1p(-p);
}

NmfResult nmf(const Matrix& x, int rank, int iters, std::uint64_t seed) {
  check_nonnegative(x);
  require(rank >= 1 && static_cast<std::size_t>(rank) <= std::min(x.rows, x.cols),
          ErrorKind::Argument, "nmf rank out of range");
  require(iters >= 1, ErrorKind::Argument, "nmf needs at least one iteration");

  Rng rng(mix_seed(seed, 0xA11CE));
  Matrix w(x.rows, rank);
  Matrix h(rank, x.cols);
  fill_uniform_open(w, rng);
  fill_uniform_open(h, rng);
  const double norm_x_sq = frobenius_sq(x);

  NmfResult res;
  res.objective_trace.reserve(iters);
  for (int it = 0; it < iters; ++it) {
    {
      const Matrix wtx = transpose_times(w, x);
      const Matrix denom = matmul(transpose_times(w, w), h);
      for (std::size_t i = 0; i < h.size(); ++i)
        h.data[i] *= wtx.data[i] / (denom.data[i] + kMuGuard);
    }
    const Matrix xht = times_transpose(x, h);
    const Matrix hht = times_transpose(h, h);
    {
      const Matrix denom = matmul(w, hht);
      for (std::size_t i = 0; i < w.size(); ++i)
        w.data[i] *= xht.data[i] / (denom.data[i] + kMuGuard);
    }
    res.objective_trace.push_back(rec_from_w(w, xht, hht, norm_x_sq));
  }
  res.factors = {std::move(w), std::move(h)};
  return res;
}

double w_block_objective(const Matrix& x, std::span<const std::uint8_t> y, const Matrix& w,
                         const Matrix& h, std::span<const double> beta, double xi) {
  const std::vector<double> s = scores(x, w, beta);
  const Matrix xht = times_transpose(x, h);
  const Matrix hht = times_transpose(h, h);
  return cls_loss(s, y) + xi * rec_from_w(w, xht, hht, frobenius_sq(x));
}

Matrix w_block_gradient(const Matrix& x, std::span<const std::uint8_t> y, const Matrix& w,
                        const Matrix& h, std::span<const double> beta, double xi) {
  const std::vector<double> s = scores(x, w, beta);
  std::vector<double> resid(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) resid[i] = sigmoid(s[i]) - static_cast<double>(y[i]);
  const std::vector<double> xc = times_vec(x, resid);  // length d

  Matrix grad(w.rows, w.cols);
  for (std::size_t i = 0; i < w.rows; ++i)
    for (std::size_t j = 0; j < w.cols; ++j) grad(i, j) = xc[i] * beta[j];
  if (xi > 0.0) {
    const Matrix rec = matmul(w, times_transpose(h, h));
    const Matrix xht = times_transpose(x, h);
    for (std::size_t i = 0; i < grad.size(); ++i)
      grad.data[i] += 2.0 * xi * (rec.data[i] - xht.data[i]);
  }
  return grad;
}

double beta_block_objective(const Matrix& features, std::span<const std::uint8_t> y,
                            std::span<const double> beta, double ridge_lambda) {
  const std::vector<double> s = vec_times(beta, features);
  double acc = cls_loss(s, y);
  for (double b : beta) acc += ridge_lambda * b * b;
  return acc;
}

std::vector<double> beta_block_gradient(const Matrix& features, std::span<const std::uint8_t> y,
                                        std::span<const double> beta, double ridge_lambda) {
  const std::vector<double> s = vec_times(beta, features);
  std::vector<double> resid(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) resid[i] = sigmoid(s[i]) - static_cast<double>(y[i]);
  std::vector<double> grad = times_vec(features, resid);
  for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += 2.0 * ridge_lambda * beta[j];
  return grad;
}

double smf_objective(const Matrix& x, std::span<const std::uint8_t> y, const Matrix& w,
                     const Matrix& h, std::span<const double> beta, double xi) {
  require(w.rows == x.rows && h.cols == x.cols && w.cols == h.rows &&
              beta.size() == w.cols && y.size() == x.cols,
          ErrorKind::Argument, "smf_objective: inconsistent shapes");
  const std::vector<double> s = scores(x, w, beta);
  double acc = cls_loss(s, y);
  const Matrix wh = matmul(w, h);
  double rec = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x.data[i] - wh.data[i];
    rec += d * d;
  }
  return acc + xi * rec;
}

SmfSolution smf(const Matrix& x, std::span<const std::uint8_t> y, const SmfConfig& cfg) {
  check_nonnegative(x);
  check_labels(y);
  require(y.size() == x.cols, ErrorKind::Argument, "label count must equal example count");
  require(cfg.rank >= 1 && static_cast<std::size_t>(cfg.rank) <= std::min(x.rows, x.cols),
          ErrorKind::Argument, "smf rank out of range");
  require(cfg.xi >= 0.0, ErrorKind::Argument, "xi must be >= 0");
  require(cfg.iters >= 1 && cfg.inner_iters >= 1, ErrorKind::Argument,
          "iteration counts must be >= 1");

  const std::size_t d = x.rows;
  const std::size_t n = x.cols;
  Rng rng(mix_seed(cfg.seed, 0x5AFE));
  Matrix w(d, cfg.rank);
  Matrix h(cfg.rank, n);
  fill_uniform_open(w, rng);
  fill_uniform_open(h, rng);
  std::vector<double> beta(cfg.rank, 0.0);

  const double norm_x_sq = frobenius_sq(x);
  const double sigma_sq = gram_spectral_bound(x, 30, rng);  // lambda_max(XT X)

  SmfSolution sol;
  sol.objective_trace.reserve(cfg.iters);

  for (int outer = 0; outer < cfg.iters; ++outer) {
    // ---- W block: projected gradient on cls + xi * reconstruction ----
    const Matrix xht = times_transpose(x, h);
    const Matrix hht = times_transpose(h, h);
    double beta_sq = 0.0;
    for (double b : beta) beta_sq += b * b;
    const double lip = 1.1 * (0.25 * beta_sq * sigma_sq + 2.0 * cfg.xi * spectral_bound_sym(hht));
    if (lip > 0.0) {
      double step = 1.0 / lip;
      std::vector<double> s = scores(x, w, beta);
      double f = cls_loss(s, y) + cfg.xi * rec_from_w(w, xht, hht, norm_x_sq);
      for (int inner = 0; inner < cfg.inner_iters; ++inner) {
        std::vector<double> resid(n);
        for (std::size_t i = 0; i < n; ++i)
          resid[i] = sigmoid(s[i]) - static_cast<double>(y[i]);
        const std::vector<double> xc = times_vec(x, resid);
        Matrix grad(d, static_cast<std::size_t>(cfg.rank));
        for (std::size_t i = 0; i < d; ++i) {
          const double xci = xc[i];
          for (int j = 0; j < cfg.rank; ++j) grad(i, j) = xci * beta[j];
        }
        if (cfg.xi > 0.0) {
          const Matrix rec = matmul(w, hht);
          for (std::size_t i = 0; i < grad.size(); ++i)
            grad.data[i] += 2.0 * cfg.xi * (rec.data[i] - xht.data[i]);
        }
        bool accepted = false;
        for (int halving = 0; halving < 40; ++halving) {
          Matrix cand(d, static_cast<std::size_t>(cfg.rank));
          for (std::size_t i = 0; i < cand.size(); ++i)
            cand.data[i] = std::max(0.0, w.data[i] - step * grad.data[i]);
          std::vector<double> s_cand = scores(x, cand, beta);
          const double f_cand =
              cls_loss(s_cand, y) + cfg.xi * rec_from_w(cand, xht, hht, norm_x_sq);
          if (f_cand <= f) {
            w = std::move(cand);
            s = std::move(s_cand);
            f = f_cand;
            accepted = true;
            break;
          }
          step *= 0.5;
        }
        if (!accepted) break;
      }
    }

    // ---- H block: projected gradient on xi * reconstruction ----
    const Matrix wtx = transpose_times(w, x);  // also the beta-block features
    const Matrix wtw = transpose_times(w, w);
    if (cfg.xi > 0.0) {
      const double lip_h = 2.2 * cfg.xi * spectral_bound_sym(wtw);
      if (lip_h > 0.0) {
        double step = 1.0 / lip_h;
        double f = cfg.xi * rec_from_h(h, wtx, wtw, norm_x_sq);
        for (int inner = 0; inner < cfg.inner_iters; ++inner) {
          Matrix grad = matmul(wtw, h);
          for (std::size_t i = 0; i < grad.size(); ++i)
            grad.data[i] = 2.0 * cfg.xi * (grad.data[i] - wtx.data[i]);
          bool accepted = false;
          for (int halving = 0; halving < 40; ++halving) {
            Matrix cand(h.rows, h.cols);
            for (std::size_t i = 0; i < cand.size(); ++i)
              cand.data[i] = std::max(0.0, h.data[i] - step * grad.data[i]);
            const double f_cand = cfg.xi * rec_from_h(cand, wtx, wtw, norm_x_sq);
            if (f_cand <= f) {
              h = std::move(cand);
              f = f_cand;
              accepted = true;
              break;
            }
            step *= 0.5;
          }
          if (!accepted) break;
        }
      }
    }

    // ---- beta block: ridge logistic refit on features WT x_i ----
    {
      const std::vector<double> s_old = vec_times(beta, wtx);
      const double cls_old = cls_loss(s_old, y);
      std::vector<double> cand = ridge_logistic(wtx, y, cfg.ridge_lambda, beta);
      const std::vector<double> s_new = vec_times(cand, wtx);
      if (cls_loss(s_new, y) <= cls_old) beta = std::move(cand);
    }

    const std::vector<double> s = vec_times(beta, wtx);
    sol.objective_trace.push_back(cls_loss(s, y) +
                                  cfg.xi * rec_from_h(h, wtx, wtw, norm_x_sq));
  }

  sol.w = std::move(w);
  sol.h = std::move(h);
  sol.beta = std::move(beta);
  return sol;
}

NormalizeResult normalize_dictionary(FactorPair pair) {
  require(pair.w.cols == pair.h.rows, ErrorKind::Argument,
          "normalize_dictionary: W columns must match H rows");
  const std::size_t r = pair.w.cols;
  std::vector<double> norms(r, 0.0);
  for (std::size_t i = 0; i < pair.w.rows; ++i)
    for (std::size_t j = 0; j < r; ++j) norms[j] += pair.w(i, j) * pair.w(i, j);
  std::vector<std::size_t> kept;
  for (std::size_t j = 0; j < r; ++j) {
    norms[j] = std::sqrt(norms[j]);
    if (norms[j] > 1e-150) kept.push_back(j);
  }
  require(!kept.empty(), ErrorKind::Numeric, "normalize_dictionary: all dictionary columns zero");

  NormalizeResult out;
  out.dropped_columns = r - kept.size();
  out.factors.w = Matrix(pair.w.rows, kept.size());
  out.factors.h = Matrix(kept.size(), pair.h.cols);
  for (std::size_t jj = 0; jj < kept.size(); ++jj) {
    const std::size_t j = kept[jj];
    for (std::size_t i = 0; i < pair.w.rows; ++i)
      out.factors.w(i, jj) = pair.w(i, j) / norms[j];
    for (std::size_t c = 0; c < pair.h.cols; ++c)
      out.factors.h(jj, c) = pair.h(j, c) * norms[j];
  }
  return out;
}

}  // namespace lldm
