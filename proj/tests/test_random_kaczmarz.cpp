#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <vector>

#include "kf/errors.hpp"
#include "kf/linalg.hpp"
#include "kf/random_kaczmarz.hpp"
#include "kf/rng.hpp"

using kf::Complex;
using kf::ComplexMatrix;
using kf::ComplexVector;

namespace {

kf::RandomProjectionLaw standard_basis_law(const std::vector<double>& weights) {
  std::vector<kf::Projection> atoms;
  const Eigen::Index d = Eigen::Index(weights.size());
  for (Eigen::Index k = 0; k < d; ++k) {
    atoms.push_back(kf::Projection::rank_one(ComplexVector::Unit(d, k)));
  }
  return kf::RandomProjectionLaw::create(atoms, weights);
}

kf::RandomProjectionLaw angle_law(double alpha) {
  ComplexVector u(2), v(2);
  u << 1.0, 0.0;
  v << std::cos(alpha), std::sin(alpha);
  return kf::RandomProjectionLaw::create(
      {kf::Projection::rank_one(u), kf::Projection::rank_one(v)}, {0.5, 0.5});
}

}  // namespace

TEST_SUITE_BEGIN("random-kaczmarz");

TEST_CASE("law construction validates its inputs") {
  CHECK_THROWS_AS(standard_basis_law({0.5, 0.6}), kf::Error);
  CHECK_THROWS_AS(standard_basis_law({1.0, 0.0}), kf::Error);
  std::vector<kf::Projection> mixed{
      kf::Projection::rank_one(ComplexVector::Unit(2, 0)),
      kf::Projection::rank_one(ComplexVector::Unit(3, 0))};
  CHECK_THROWS_AS(kf::RandomProjectionLaw::create(mixed, {0.5, 0.5}),
                  kf::DimensionMismatch);
  CHECK_THROWS_AS(kf::RandomProjectionLaw::create({}, {}), kf::Error);
}

TEST_CASE("uniform lower bound matches closed forms") {
  CHECK(kf::lower_bound_C(standard_basis_law({0.5, 0.5})) ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(kf::lower_bound_C(standard_basis_law({0.2, 0.8})) ==
        doctest::Approx(0.2).epsilon(1e-12));
  // Two equally weighted lines at angle alpha: eigenvalues (1 ± cos alpha)/2.
  CHECK(kf::lower_bound_C(angle_law(M_PI / 3.0)) ==
        doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("a law that misses a direction is rejected") {
  std::vector<kf::Projection> atoms{
      kf::Projection::rank_one(ComplexVector::Unit(3, 0)),
      kf::Projection::rank_one(ComplexVector::Unit(3, 1))};
  const auto law = kf::RandomProjectionLaw::create(atoms, {0.5, 0.5});
  CHECK_THROWS_AS(kf::lower_bound_C(law), kf::NotUniform);
}

TEST_CASE("coordinate-killing law decays at its exact rate") {
  // Frozen first factor removes coordinate 0; coordinate 1 then survives
  // each later draw with probability 1/2, so E||T_n x||^2 = |x_1|^2 2^{-n}.
  const auto law = standard_basis_law({0.5, 0.5});
  ComplexVector probe(2);
  probe << 0.6, 0.8;
  const kf::DecayReport rep =
      kf::run_random_products(law, 8, 4000, 101, {probe});
  CHECK(rep.c_value == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(rep.trials == 4000);
  for (std::size_t n = 1; n <= 8; ++n) {
    const double expect = 0.64 * std::pow(0.5, double(n));
    const double se = std::sqrt(expect * 0.64 / 4000.0);
    CHECK(std::abs(rep.mean_energy[0][n] - expect) <= 5.0 * se);
  }
  CHECK(rep.pass);
}

TEST_CASE("generic law stays below its certified envelope") {
  const auto law = angle_law(M_PI / 3.0);
  ComplexVector probe(2);
  probe << Complex(0.3, 0.4), Complex(-0.5, 0.1);
  const kf::DecayReport rep =
      kf::run_random_products(law, 50, 2000, 7, {probe});
  CHECK(rep.pass);
  CHECK(rep.envelope_ratio_max <= 1.05);
  // Envelope at n uses the post-freeze energy as its base.
  const double base = rep.envelope[0][0];
  CHECK(rep.envelope[0][10] == doctest::Approx(base * std::pow(0.75, 10.0))
                                   .epsilon(1e-12));
}

TEST_CASE("trajectories expose their choices and recompute pathwise") {
  const auto law = angle_law(0.7);
  ComplexVector x(2);
  x << Complex(0.9, 0.05), Complex(-0.2, 0.4);
  const kf::RandomTrajectory traj = kf::sample_trajectory(law, 20, 5, 3, x);
  REQUIRE(traj.choices.size() == 21);
  REQUIRE(traj.energy.size() == 21);
  CHECK(traj.choices[0] == 0);
  // Replay the same atom choices with explicit complement matrices.
  ComplexVector v = x;
  for (std::size_t n = 0; n <= 20; ++n) {
    const kf::Projection& p = law.atoms[traj.choices[n]];
    v = v - p.apply(v);
    CHECK(traj.energy[n] == doctest::Approx(v.squaredNorm()).epsilon(1e-12));
  }
  for (std::size_t n = 1; n <= 20; ++n) {
    CHECK(traj.energy[n] <= traj.energy[n - 1] + 1e-15);
  }
  const kf::RandomTrajectory again = kf::sample_trajectory(law, 20, 5, 3, x);
  CHECK(traj.choices == again.choices);
  const kf::RandomTrajectory other = kf::sample_trajectory(law, 20, 5, 4, x);
  CHECK(traj.choices != other.choices);
  const kf::RandomTrajectory free0 =
      kf::sample_trajectory(law, 20, 5, 3, x, true);
  REQUIRE(free0.choices.size() == 21);
}

TEST_CASE("every residual contracts by the uniform bound in expectation") {
  const auto law = angle_law(1.1);
  const double c = kf::lower_bound_C(law);
  kf::Philox rng(13, 2);
  for (int t = 0; t < 20; ++t) {
    const ComplexVector v = kf::random_unit_vector(rng, 2);
    double hit = 0.0;
    for (std::size_t j = 0; j < law.atoms.size(); ++j) {
      hit += law.weights[j] * law.atoms[j].apply(v).squaredNorm();
    }
    CHECK(hit >= c - 1e-12);
  }
}

TEST_CASE("aggregation is bit-identical for any worker count") {
  const auto law = angle_law(M_PI / 3.0);
  ComplexVector probe(2);
  probe << 0.6, 0.8;
  const kf::DecayReport a =
      kf::run_random_products(law, 30, 500, 42, {probe}, 1);
  const kf::DecayReport b =
      kf::run_random_products(law, 30, 500, 42, {probe}, 3);
  CHECK(a.mean_energy == b.mean_energy);
  CHECK(a.ci_half == b.ci_half);
  ::setenv("KF_WORKERS", "2", 1);
  const kf::DecayReport c =
      kf::run_random_products(law, 30, 500, 42, {probe}, 1);
  ::unsetenv("KF_WORKERS");
  CHECK(a.mean_energy == c.mean_energy);
  const kf::DecayReport traced =
      kf::run_random_products(law, 30, 500, 42, {probe}, 1, true);
  CHECK(traced.trial_energy.size() == 500);
  CHECK(traced.mean_energy == a.mean_energy);
}

TEST_CASE("row-sampling weights reproduce the hand-computed law") {
  ComplexMatrix a = ComplexMatrix::Zero(2, 2);
  a(0, 0) = 1.0;
  a(1, 1) = 2.0;
  std::vector<ComplexVector> frame{ComplexVector::Unit(2, 0),
                                   ComplexVector::Unit(2, 1)};
  const kf::SamplingWeights w = kf::sampling_weights(a, frame);
  CHECK(w.law.weights[0] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(w.law.weights[1] == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(w.weight_sum == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(w.certified_c == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(w.certified_c <= kf::lower_bound_C(w.law) + 1e-12);
}

TEST_CASE("certified rate never exceeds the exact eigen bound") {
  kf::Philox rng(19, 0);
  ComplexMatrix a(3, 3);
  for (Eigen::Index i = 0; i < 3; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) {
      a(i, j) = Complex(rng.next_gaussian(), rng.next_gaussian()) * 0.3;
    }
    a(i, i) += 2.0;
  }
  std::vector<ComplexVector> frame;
  for (Eigen::Index k = 0; k < 3; ++k) {
    frame.push_back(ComplexVector::Unit(3, k));
  }
  const kf::SamplingWeights w = kf::sampling_weights(a, frame);
  CHECK(w.certified_c > 0.0);
  CHECK(w.certified_c <= kf::lower_bound_C(w.law) + 1e-12);
}

TEST_CASE("degenerate sampling inputs raise their named errors") {
  std::vector<ComplexVector> frame1{ComplexVector::Ones(1)};
  ComplexMatrix one(1, 1);
  one(0, 0) = 3.0;
  CHECK_THROWS_AS(kf::sampling_weights(one, frame1), kf::Hp0Violated);

  ComplexMatrix sing = ComplexMatrix::Zero(2, 2);
  sing(0, 0) = 1.0;
  std::vector<ComplexVector> frame2{ComplexVector::Unit(2, 0),
                                    ComplexVector::Unit(2, 1)};
  CHECK_THROWS_AS(kf::sampling_weights(sing, frame2), kf::Singular);

  std::vector<ComplexVector> lopsided{ComplexVector::Unit(2, 0),
                                      ComplexVector::Unit(2, 0)};
  ComplexMatrix ident = ComplexMatrix::Identity(2, 2);
  CHECK_THROWS_AS(kf::sampling_weights(ident, lopsided), kf::Error);
}

TEST_CASE("randomized solve converges to the direct solution") {
  kf::Philox rng(29, 0);
  ComplexMatrix a(4, 4);
  for (Eigen::Index i = 0; i < 4; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) {
      a(i, j) = Complex(rng.next_gaussian(), rng.next_gaussian()) * 0.2;
    }
    a(i, i) += 1.5;
  }
  ComplexVector y(4);
  for (Eigen::Index i = 0; i < 4; ++i) {
    y(i) = Complex(rng.next_gaussian(), rng.next_gaussian());
  }
  std::vector<ComplexVector> frame;
  for (Eigen::Index k = 0; k < 4; ++k) {
    frame.push_back(ComplexVector::Unit(4, k));
  }
  const kf::RandomSolveResult r = kf::solve_random(a, y, frame, 300, 11);
  REQUIRE(r.errors.size() == 301);
  CHECK(r.errors[0] == doctest::Approx(r.x_direct.norm()).epsilon(1e-12));
  CHECK((a * r.x_direct - y).norm() <= 1e-10);
  CHECK(r.errors.back() <= 1e-8);
  CHECK((r.x - r.x_direct).norm() == doctest::Approx(r.errors.back()));
  // Consistent square system: every projection shrinks the distance.
  for (std::size_t j = 1; j < r.errors.size(); ++j) {
    CHECK(r.errors[j] <= r.errors[j - 1] + 1e-14);
  }
  // The first update is the frozen row regardless of seed.
  const kf::RandomSolveResult r2 = kf::solve_random(a, y, frame, 1, 999);
  const kf::RandomSolveResult r1 = kf::solve_random(a, y, frame, 1, 11);
  CHECK((r1.x - r2.x).norm() == 0.0);
}

TEST_SUITE_END();
