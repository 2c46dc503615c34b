#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lldm/linalg.hpp"

namespace lldm {

// Nonnegative dictionary (d x R) and code (R x n) pair with W H ~ X.
struct FactorPair {
  Matrix w;
  Matrix h;
};

struct NmfResult {
  FactorPair factors;
  std::vector<double> objective_trace;  // ||X - WH||_F^2 after each iteration
};

// Multiplicative-update NMF from uniform(0,1] initialization; the objective
// is nonincreasing across iterations.
NmfResult nmf(const Matrix& x, int rank, int iters, std::uint64_t seed);

struct SmfConfig {
  int rank = 2;
  double xi = 0.5;           // reconstruction weight
  int iters = 250;           // outer block-cycle rounds
  int inner_iters = 20;      // projected-gradient steps per W/H block
  double ridge_lambda = 1e-6;
  std::uint64_t seed = 0;
};

struct SmfSolution {
  Matrix w;
  Matrix h;
  std::vector<double> beta;
  std::vector<double> objective_trace;  // full objective after each outer round
};

// Supervised matrix factorization: cyclic block minimization of
//   sum_i l(y_i, <beta, WT x_i>) + xi ||X - WH||_F^2,  W, H >= 0.
// W and H blocks take projected-gradient steps at 1/Lipschitz-estimate step
// size with backtracking; the beta block is a ridge logistic refit. The full
// objective is nonincreasing across blocks.
SmfSolution smf(const Matrix& x, std::span<const std::uint8_t> y, const SmfConfig& cfg);

// The SMF objective evaluated directly (probabilities clamped to
// [1e-12, 1 - 1e-12] before the log).
double smf_objective(const Matrix& x, std::span<const std::uint8_t> y, const Matrix& w,
                     const Matrix& h, std::span<const double> beta, double xi);

struct NormalizeResult {
  FactorPair factors;
  std::size_t dropped_columns = 0;
};

// Rescales every dictionary column to unit Euclidean norm and the matching
// code row by its inverse, leaving W H unchanged. Zero columns are dropped
// with their code rows (shrinking the rank) and counted in the result.
NormalizeResult normalize_dictionary(FactorPair pair);

// Block objectives/gradients, exposed for finite-difference verification.
double w_block_objective(const Matrix& x, std::span<const std::uint8_t> y, const Matrix& w,
                         const Matrix& h, std::span<const double> beta, double xi);
Matrix w_block_gradient(const Matrix& x, std::span<const std::uint8_t> y, const Matrix& w,
                        const Matrix& h, std::span<const double> beta, double xi);
double beta_block_objective(const Matrix& features, std::span<const std::uint8_t> y,
                            std::span<const double> beta, double ridge_lambda);
std::vector<double> beta_block_gradient(const Matrix& features, std::span<const std::uint8_t> y,
                                        std::span<const double> beta, double ridge_lambda);

// Stable logistic function.
double sigmoid(double s);

// Negative Bernoulli log-likelihood of label y under clamped probability p.
double bernoulli_nll(int y, double p);

}  // namespace lldm
