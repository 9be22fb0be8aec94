#pragma once

// Superoperator matrices on the d^2-dimensional space of d x d matrices.
//
// Convention: column stacking throughout. vec(X) places column 0 of X first,
// so vec(X)[i + j*d] = X(i, j), and
//
//     vec(A X B) = (B^T kron A) vec(X).
//
// Every Liouvillian produced by this library follows it.

#include "gfgr/core.hpp"

namespace gfgr {

ComplexVector vectorize(const Matrix& x);
Matrix unvectorize(const ComplexVector& v, Eigen::Index dim);

// X -> A X
Matrix left_multiplication(const Matrix& a);
// X -> X B
Matrix right_multiplication(const Matrix& b);
// X -> A X B
Matrix sandwich(const Matrix& a, const Matrix& b);
// X -> [A, X]
Matrix commutator_superop(const Matrix& a);
// X -> -(i/hbar) [H, X]
Matrix hamiltonian_superop(const Matrix& h, double hbar = 1.0);

// Choi matrix sum_ij |i><j| kron Phi(|i><j|) of the map whose superoperator
// matrix is `map`.
Matrix choi_matrix(const Matrix& map, Eigen::Index dim);

// sum of singular values
double trace_norm(const Matrix& a);
// 0.5 * ||a - b||_1
double trace_distance(const Matrix& a, const Matrix& b);
double spectral_norm(const Matrix& a);

}  // namespace gfgr
