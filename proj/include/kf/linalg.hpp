#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "kf/rng.hpp"

namespace kf {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

/// Absolute tolerance on operator-norm residuals of structural identities
/// (self-adjointness, idempotency, telescoping and the like).
inline constexpr double kStructuralTol = 1e-12;

/// Norm below which a vector counts as zero.
inline constexpr double kZeroTol = 1e-14;

/// Allowed deviation of a unit vector's norm from 1.
inline constexpr double kUnitTol = 1e-10;

/// Largest singular value.  The zero-sized matrix has norm 0.
double operator_norm(const ComplexMatrix& a);

/// True when ||P - P*|| and ||P^2 - P|| are both at most `tol` in operator
/// norm.
bool is_projection_matrix(const ComplexMatrix& p, double tol = kStructuralTol);

/// An orthogonal projection, stored either as a full matrix or, tagged, as
/// the unit vector spanning a one-dimensional range.  Values are immutable.
class Projection {
 public:
  /// Projection onto the span of the unit vector `e` (norm checked).
  static Projection rank_one(const ComplexVector& e);

  /// General projection; `p` must satisfy is_projection_matrix.
  static Projection from_matrix(const ComplexMatrix& p);

  Eigen::Index dim() const;
  bool rank_one_form() const { return rank_one_; }

  /// Spanning unit vector; only valid in the rank-1 form.
  const ComplexVector& axis() const;

  /// Dense matrix of the projection (materialized on demand for rank 1).
  ComplexMatrix matrix() const;

  ComplexVector apply(const ComplexVector& x) const;

 private:
  Projection() : rank_one_(false) {}

  bool rank_one_;
  ComplexVector axis_;    // rank-1 form
  ComplexMatrix dense_;   // general form
};

/// Rank-1 projection onto span{e}.  Throws ZeroVector when ||e|| < 1e-14 and
/// NotNormalized when e is not unit length, unless `normalize` permits
/// scaling it first.
Projection rank1_projection(const ComplexVector& e, bool normalize = false);

/// Complement projection 1 - P.
Projection complement(const Projection& p);

/// Range inclusion ran P1 subset-of ran P2, decided by ||P1 - P1 P2|| <= tol.
/// Equivalent to ||P1 x|| <= ||P2 x|| for all x.  Throws DimensionMismatch
/// when the two projections act on different spaces.
bool subspace_order(const Projection& p1, const Projection& p2,
                    double tol = kStructuralTol);

/// Haar-uniform random unit vector (complex Gaussian, normalized).
ComplexVector random_unit_vector(Philox& rng, Eigen::Index dim);

/// Deterministic probe panel: the standard basis followed by `n_random`
/// seeded random unit vectors.
std::vector<ComplexVector> probe_panel(Eigen::Index dim, int n_random,
                                       std::uint64_t seed);

}  // namespace kf
