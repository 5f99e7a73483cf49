#include "kf/linalg.hpp"

#include <Eigen/SVD>

#include "kf/errors.hpp"

namespace kf {

double operator_norm(const ComplexMatrix& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  Eigen::JacobiSVD<ComplexMatrix> svd(a);
  return svd.singularValues()(0);
}

bool is_projection_matrix(const ComplexMatrix& p, double tol) {
  if (p.rows() != p.cols()) return false;
  if (operator_norm(p - p.adjoint()) > tol) return false;
  return operator_norm(p * p - p) <= tol;
}

Projection Projection::rank_one(const ComplexVector& e) {
  const double norm = e.norm();
  if (norm < kZeroTol) {
    throw ZeroVector("rank-one projection axis has near-zero norm");
  }
  if (std::abs(norm - 1.0) > kUnitTol) {
    throw NotNormalized("rank-one projection axis is not unit length");
  }
  Projection p;
  p.rank_one_ = true;
  p.axis_ = e;
  return p;
}

Projection Projection::from_matrix(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch("projection matrix must be square");
  }
  if (!is_projection_matrix(m)) {
    throw Error("matrix is not an orthogonal projection within tolerance");
  }
  Projection p;
  p.rank_one_ = false;
  p.dense_ = m;
  return p;
}

Eigen::Index Projection::dim() const {
  return rank_one_ ? axis_.size() : dense_.rows();
}

const ComplexVector& Projection::axis() const {
  if (!rank_one_) throw Error("projection is not in rank-one form");
  return axis_;
}

ComplexMatrix Projection::matrix() const {
  if (rank_one_) return axis_ * axis_.adjoint();
  return dense_;
}

ComplexVector Projection::apply(const ComplexVector& x) const {
  if (x.size() != dim()) {
    throw DimensionMismatch("projection applied to vector of wrong dimension");
  }
  if (rank_one_) return axis_ * axis_.dot(x);
  return dense_ * x;
}

Projection rank1_projection(const ComplexVector& e, bool normalize) {
  const double norm = e.norm();
  if (norm < kZeroTol) {
    throw ZeroVector("cannot project onto a zero vector");
  }
  if (!normalize && std::abs(norm - 1.0) > kUnitTol) {
    throw NotNormalized("vector is not unit length; pass normalize=true");
  }
  return Projection::rank_one(e / norm);
}

Projection complement(const Projection& p) {
  const Eigen::Index d = p.dim();
  ComplexMatrix q = ComplexMatrix::Identity(d, d) - p.matrix();
  Projection out = Projection::from_matrix(q);
  return out;
}

bool subspace_order(const Projection& p1, const Projection& p2, double tol) {
  if (p1.dim() != p2.dim()) {
    throw DimensionMismatch("subspace order needs projections on one space");
  }
  const ComplexMatrix m1 = p1.matrix();
  return operator_norm(m1 - m1 * p2.matrix()) <= tol;
}

ComplexVector random_unit_vector(Philox& rng, Eigen::Index dim) {
  ComplexVector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double re = rng.next_gaussian();
    const double im = rng.next_gaussian();
    v(i) = Complex(re, im);
  }
  const double norm = v.norm();
  if (norm < kZeroTol) return random_unit_vector(rng, dim);
  return v / norm;
}

std::vector<ComplexVector> probe_panel(Eigen::Index dim, int n_random,
                                       std::uint64_t seed) {
  std::vector<ComplexVector> panel;
  panel.reserve(std::size_t(dim) + std::size_t(n_random));
  for (Eigen::Index i = 0; i < dim; ++i) {
    ComplexVector e = ComplexVector::Zero(dim);
    e(i) = 1.0;
    panel.push_back(e);
  }
  for (int k = 0; k < n_random; ++k) {
    Philox rng(seed, std::uint64_t(k));
    panel.push_back(random_unit_vector(rng, dim));
  }
  return panel;
}

}  // namespace kf
