#include "lldm/linalg.hpp"

#include <cmath>

#include "lldm/error.hpp"
#include "lldm/parallel.hpp"

namespace lldm {

namespace {

void check(bool cond, const char* msg) { require(cond, ErrorKind::Argument, msg); }

// Dot product with eight independent accumulator chains; the fixed summation
// order keeps results bitwise reproducible while letting the compiler
// vectorize the reduction.
double dot_span(const double* a, const double* b, std::size_t n) {
  double acc[8] = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    acc[0] += a[k] * b[k];
    acc[1] += a[k + 1] * b[k + 1];
    acc[2] += a[k + 2] * b[k + 2];
    acc[3] += a[k + 3] * b[k + 3];
    acc[4] += a[k + 4] * b[k + 4];
    acc[5] += a[k + 5] * b[k + 5];
    acc[6] += a[k + 6] * b[k + 6];
    acc[7] += a[k + 7] * b[k + 7];
  }
  for (; k < n; ++k) acc[0] += a[k] * b[k];
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
  check(a.cols == b.rows, "matmul: inner dimensions differ");
  Matrix c(a.rows, b.cols);
  parallel_for(a.rows, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      double* ci = c.row(i);
      const double* ai = a.row(i);
      for (std::size_t k = 0; k < a.cols; ++k) {
        const double aik = ai[k];
        const double* bk = b.row(k);
        for (std::size_t j = 0; j < b.cols; ++j) ci[j] += aik * bk[j];
      }
    }
  });
  return c;
}

Matrix transpose_times(const Matrix& a, const Matrix& b) {
  check(a.rows == b.rows, "transpose_times: row counts differ");
  Matrix c(a.cols, b.cols);
  // Accumulate rank-1 contributions row by row of the shared dimension.
  for (std::size_t k = 0; k < a.rows; ++k) {
    const double* ak = a.row(k);
    const double* bk = b.row(k);
    for (std::size_t i = 0; i < a.cols; ++i) {
      const double aki = ak[i];
      if (aki == 0.0) continue;
      double* ci = c.row(i);
      for (std::size_t j = 0; j < b.cols; ++j) ci[j] += aki * bk[j];
    }
  }
  return c;
}

Matrix times_transpose(const Matrix& a, const Matrix& b) {
  check(a.cols == b.cols, "times_transpose: column counts differ");
  Matrix c(a.rows, b.rows);
  parallel_for(a.rows, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const double* ai = a.row(i);
      double* ci = c.row(i);
      for (std::size_t j = 0; j < b.rows; ++j) ci[j] = dot_span(ai, b.row(j), a.cols);
    }
  });
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols, a.rows);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
  return t;
}

std::vector<double> vec_times(std::span<const double> v, const Matrix& x) {
  check(v.size() == x.rows, "vec_times: length mismatch");
  std::vector<double> out(x.cols, 0.0);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const double vi = v[i];
    if (vi == 0.0) continue;
    const double* xi = x.row(i);
    for (std::size_t j = 0; j < x.cols; ++j) out[j] += vi * xi[j];
  }
  return out;
}

std::vector<double> times_vec(const Matrix& x, std::span<const double> c) {
  check(c.size() == x.cols, "times_vec: length mismatch");
  std::vector<double> out(x.rows, 0.0);
  parallel_for(x.rows, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) out[i] = dot_span(x.row(i), c.data(), x.cols);
  });
  return out;
}

double dot(const Matrix& a, const Matrix& b) {
  check(a.rows == b.rows && a.cols == b.cols, "dot: shapes differ");
  return dot_span(a.data.data(), b.data.data(), a.size());
}

double frobenius_sq(const Matrix& a) {
  return dot_span(a.data.data(), a.data.data(), a.size());
}

double trace_product(const Matrix& a, const Matrix& b) {
  check(a.rows == b.cols && a.cols == b.rows, "trace_product: shapes incompatible");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) acc += a(i, j) * b(j, i);
  return acc;
}

double spectral_bound_sym(const Matrix& s, int iters) {
  check(s.rows == s.cols, "spectral_bound_sym: matrix not square");
  const std::size_t n = s.rows;
  if (n == 0) return 0.0;
  std::vector<double> v(n, 1.0);
  double lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    std::vector<double> w(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* si = s.row(i);
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += si[j] * v[j];
      w[i] = acc;
    }
    double norm = 0.0;
    for (double x : w) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) return 0.0;
    lambda = norm;  // Rayleigh quotient of the normalized previous iterate
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / norm;
  }
  return lambda;
}

double gram_spectral_bound(const Matrix& x, int iters, Rng& rng) {
  const std::size_t n = x.cols;
  if (n == 0 || x.rows == 0) return 0.0;
  std::vector<double> v(n);
  for (auto& e : v) e = rng.uniform() + 0.5;
  double lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    std::vector<double> xv = times_vec(x, v);
    std::vector<double> w = vec_times(xv, x);  // xT (x v)
    double norm = 0.0;
    for (double e : w) norm += e * e;
    norm = std::sqrt(norm);
    if (norm == 0.0) return 0.0;
    lambda = norm;
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / norm;
  }
  return lambda;
}

bool cholesky_solve(Matrix a, std::vector<double> b, std::vector<double>& out) {
  check(a.rows == a.cols && b.size() == a.rows, "cholesky_solve: shape mismatch");
  const std::size_t n = a.rows;
  // In-place lower-triangular factorization.
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    const double ljj = std::sqrt(d);
    a(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      const double* ai = a.row(i);
      const double* aj = a.row(j);
      for (std::size_t k = 0; k < j; ++k) s -= ai[k] * aj[k];
      a(i, j) = s / ljj;
    }
  }
  // Forward then backward substitution.
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= a(i, k) * b[k];
    b[i] = s / a(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a(k, i) * b[k];
    b[i] = s / a(i, i);
  }
  out = std::move(b);
  return true;
}

}  // namespace lldm
