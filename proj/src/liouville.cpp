#include "gfgr/liouville.hpp"

#include <unsupported/Eigen/KroneckerProduct>

namespace gfgr {

ComplexVector vectorize(const Matrix& x) {
  return Eigen::Map<const ComplexVector>(x.data(), x.size());
}

Matrix unvectorize(const ComplexVector& v, Eigen::Index dim) {
  if (v.size() != dim * dim) throw DimensionError("unvectorize: length is not dim^2");
  return Eigen::Map<const Matrix>(v.data(), dim, dim);
}

Matrix left_multiplication(const Matrix& a) {
  const Matrix id = Matrix::Identity(a.rows(), a.rows());
  return Eigen::kroneckerProduct(id, a).eval();
}

Matrix right_multiplication(const Matrix& b) {
  const Matrix id = Matrix::Identity(b.rows(), b.rows());
  return Eigen::kroneckerProduct(b.transpose(), id).eval();
}

Matrix sandwich(const Matrix& a, const Matrix& b) {
  return Eigen::kroneckerProduct(b.transpose(), a).eval();
}

Matrix commutator_superop(const Matrix& a) {
  return left_multiplication(a) - right_multiplication(a);
}

Matrix hamiltonian_superop(const Matrix& h, double hbar) {
  return (-kI / hbar) * commutator_superop(h);
}

Matrix choi_matrix(const Matrix& map, Eigen::Index dim) {
  if (map.rows() != dim * dim || map.cols() != dim * dim) {
    throw DimensionError("choi_matrix: map is not dim^2 x dim^2");
  }
  Matrix choi = Matrix::Zero(dim * dim, dim * dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      // Phi(|i><j|) is column i + j*dim of the map.
      const Matrix image = unvectorize(map.col(i + j * dim), dim);
      choi.block(i * dim, j * dim, dim, dim) = image;
    }
  }
  return choi;
}

double trace_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(a);
  return svd.singularValues().sum();
}

double trace_distance(const Matrix& a, const Matrix& b) { return 0.5 * trace_norm(a - b); }

double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

}  // namespace gfgr
