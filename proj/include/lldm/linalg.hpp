#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lldm/rng.hpp"

namespace lldm {

// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  double* row(std::size_t i) { return data.data() + i * cols; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }
  std::size_t size() const { return data.size(); }
};

Matrix matmul(const Matrix& a, const Matrix& b);           // a * b
Matrix transpose_times(const Matrix& a, const Matrix& b);  // aT * b
Matrix times_transpose(const Matrix& a, const Matrix& b);  // a * bT
Matrix transpose(const Matrix& a);

std::vector<double> vec_times(std::span<const double> v, const Matrix& x);  // vT x
std::vector<double> times_vec(const Matrix& x, std::span<const double> c);  // x c

double dot(const Matrix& a, const Matrix& b);
double frobenius_sq(const Matrix& a);
double trace_product(const Matrix& a, const Matrix& b);  // tr(a b), both square

// Largest eigenvalue estimate of a small symmetric PSD matrix.
double spectral_bound_sym(const Matrix& s, int iters = 50);

// Estimate of lambda_max(xT x) = squared spectral norm of x, by power
// iteration with a seeded random start.
double gram_spectral_bound(const Matrix& x, int iters, Rng& rng);

// Solves a z = b for symmetric positive-definite a (in-place Cholesky).
// Returns false if the factorization hits a non-positive or non-finite pivot.
bool cholesky_solve(Matrix a, std::vector<double> b, std::vector<double>& out);

}  // namespace lldm
