#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "kf/linalg.hpp"

namespace kf {

/// An ordered sequence of projections P_0, P_1, ... fed to the product
/// iteration.  Three sources are supported: an explicit finite list, a finite
/// list recycled cyclically (step k uses entry k mod m), and an arbitrary
/// generator callback for windows that are produced on the fly.
class ProjectionSystem {
 public:
  static ProjectionSystem explicit_list(std::vector<Projection> ps,
                                        bool cyclic = false);

  /// Rank-1 system from unit vectors; `cyclic` recycles them forever.
  static ProjectionSystem rank_one_list(const std::vector<ComplexVector>& es,
                                        bool cyclic = true);

  /// Unbounded source backed by a callback.  `gen(k)` must return the k-th
  /// projection, all of dimension `dim`.
  static ProjectionSystem generator(Eigen::Index dim,
                                    std::function<Projection(std::size_t)> gen);

  /// Projection used at step k (cyclic policy applied).
  Projection at(std::size_t k) const;

  Eigen::Index dim() const { return dim_; }

  /// Number of distinct stored projections (0 for generator-backed systems).
  std::size_t base_size() const { return base_.size(); }

  bool cyclic() const { return cyclic_; }

  /// Total usable steps: nullopt when the system never runs out.
  std::optional<std::size_t> length() const;

  /// Unit vectors of a rank-1 list system (empty otherwise).
  const std::vector<ComplexVector>& generators() const { return vectors_; }

 private:
  ProjectionSystem() : dim_(0), cyclic_(false) {}

  Eigen::Index dim_;
  bool cyclic_;
  std::vector<Projection> base_;
  std::vector<ComplexVector> vectors_;
  std::function<Projection(std::size_t)> gen_;
};

/// Cyclic rank-1 system on R^2 c C^2 spanned by e0 = (1,0) and
/// e1 = (cos theta, sin theta).
ProjectionSystem make_two_vector_system(double theta);

/// Cyclic rank-1 system running through the standard basis of C^dim.
ProjectionSystem make_onb_system(Eigen::Index dim);

/// Cyclic rank-1 system of `count` seeded Haar-random unit vectors.
ProjectionSystem make_random_rank_one_system(Eigen::Index dim, std::size_t count,
                                             std::uint64_t seed);

}  // namespace kf
