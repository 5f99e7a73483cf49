#include "kf/projection_system.hpp"

#include <cmath>

#include "kf/errors.hpp"

namespace kf {

ProjectionSystem ProjectionSystem::explicit_list(std::vector<Projection> ps,
                                                 bool cyclic) {
  if (ps.empty()) throw Error("projection system needs at least one entry");
  ProjectionSystem s;
  s.dim_ = ps.front().dim();
  for (const Projection& p : ps) {
    if (p.dim() != s.dim_) {
      throw DimensionMismatch("projections in a system must share a dimension");
    }
  }
  s.base_ = std::move(ps);
  s.cyclic_ = cyclic;
  return s;
}

ProjectionSystem ProjectionSystem::rank_one_list(
    const std::vector<ComplexVector>& es, bool cyclic) {
  std::vector<Projection> ps;
  ps.reserve(es.size());
  for (const ComplexVector& e : es) ps.push_back(rank1_projection(e));
  ProjectionSystem s = explicit_list(std::move(ps), cyclic);
  s.vectors_ = es;
  return s;
}

ProjectionSystem ProjectionSystem::generator(
    Eigen::Index dim, std::function<Projection(std::size_t)> gen) {
  if (dim <= 0) throw DimensionMismatch("generator system needs dim >= 1");
  if (!gen) throw Error("generator system needs a callback");
  ProjectionSystem s;
  s.dim_ = dim;
  s.gen_ = std::move(gen);
  s.cyclic_ = false;
  return s;
}

Projection ProjectionSystem::at(std::size_t k) const {
  if (gen_) {
    Projection p = gen_(k);
    if (p.dim() != dim_) {
      throw DimensionMismatch("generator returned projection of wrong dimension");
    }
    return p;
  }
  if (cyclic_) return base_[k % base_.size()];
  if (k >= base_.size()) {
    throw LengthMismatch("projection index past the end of a finite system");
  }
  return base_[k];
}

std::optional<std::size_t> ProjectionSystem::length() const {
  if (gen_ || cyclic_) return std::nullopt;
  return base_.size();
}

ProjectionSystem make_two_vector_system(double theta) {
  ComplexVector e0(2), e1(2);
  e0 << 1.0, 0.0;
  e1 << std::cos(theta), std::sin(theta);
  return ProjectionSystem::rank_one_list({e0, e1}, true);
}

ProjectionSystem make_onb_system(Eigen::Index dim) {
  std::vector<ComplexVector> es;
  es.reserve(std::size_t(dim));
  for (Eigen::Index i = 0; i < dim; ++i) {
    ComplexVector e = ComplexVector::Zero(dim);
    e(i) = 1.0;
    es.push_back(e);
  }
  return ProjectionSystem::rank_one_list(es, true);
}

ProjectionSystem make_random_rank_one_system(Eigen::Index dim, std::size_t count,
                                             std::uint64_t seed) {
  std::vector<ComplexVector> es;
  es.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    Philox rng(seed, k);
    es.push_back(random_unit_vector(rng, dim));
  }
  return ProjectionSystem::rank_one_list(es, true);
}

}  // namespace kf
