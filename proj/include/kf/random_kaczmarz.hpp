#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "kf/projection_system.hpp"

namespace kf {

/// A finitely supported random projection: atom j is drawn with probability
/// weights[j].  Weights must be strictly positive and sum to 1 within 1e-12;
/// atoms must share one dimension.
struct RandomProjectionLaw {
  std::vector<Projection> atoms;
  std::vector<double> weights;
  std::vector<double> cdf;
  Eigen::Index dim = 0;

  static RandomProjectionLaw create(std::vector<Projection> atoms,
                                    std::vector<double> weights);
};

/// Exact uniform lower bound: the smallest eigenvalue C of the mean
/// projection sum_j p_j P_j, computed by a Hermitian eigen-solve.  Then
/// E||xi x||^2 >= C ||x||^2 for every x.  Throws NotUniform when C < 1e-12
/// (the law leaves some direction untouched).
double lower_bound_C(const RandomProjectionLaw& law);

/// Monte Carlo record of the random products T_n = (1-xi_n)...(1-xi_0).
/// Step 0 uses the frozen atom xi_0 = P_0 unless randomized_step0 is set; all
/// later factors are i.i.d. draws from the law.  Per trial t the generator
/// stream is derived from (seed, t), and all aggregation is pairwise with a
/// fixed tree, so results are bit-identical for any worker count.
struct DecayReport {
  std::vector<std::vector<double>> mean_energy;  // [probe][n]
  std::vector<std::vector<double>> envelope;     // base * (1-C)^n
  std::vector<std::vector<double>> ci_half;      // 99% CLT half width
  double c_value = 0.0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  bool randomized_step0 = false;
  double envelope_ratio_max = 0.0;
  bool pass = false;
  // Per-trial energy curves of probe 0, kept only on request (trace output).
  std::vector<std::vector<double>> trial_energy;
};

DecayReport run_random_products(const RandomProjectionLaw& law,
                                std::size_t n_max, std::size_t trials,
                                std::uint64_t seed,
                                const std::vector<ComplexVector>& probes,
                                int workers = 1, bool keep_trial_trace = false,
                                bool randomize_step0 = false);

/// One trajectory of the same process with its atom choices exposed, for
/// pathwise checks.  energy[n] = ||T_n x||^2, choices[n] = index of xi_n.
struct RandomTrajectory {
  std::vector<std::size_t> choices;
  std::vector<double> energy;
};

RandomTrajectory sample_trajectory(const RandomProjectionLaw& law,
                                   std::size_t n_max, std::uint64_t seed,
                                   std::uint64_t trial, const ComplexVector& x,
                                   bool randomize_step0 = false);

/// Row-sampling law for solving A x = y against a Parseval frame {phi_k}:
/// directions A* phi_k with weights ||A* phi_k||^2 / sum_k ||A* phi_k||^2.
/// The certified rate constant is 1 / (||A^{-1}||^2 sum_k ||A* phi_k||^2),
/// never larger than the law's exact eigenvalue bound.  Throws Singular when
/// A has no inverse and Hp0Violated when the normalization sandwich
/// 1/||A^{-1}||^2 < sum_k ||A* phi_k||^2 fails.
struct SamplingWeights {
  RandomProjectionLaw law;
  std::vector<ComplexVector> directions;
  std::vector<double> direction_sq_norms;
  double weight_sum = 0.0;
  double certified_c = 0.0;
};

SamplingWeights sampling_weights(const ComplexMatrix& a,
                                 const std::vector<ComplexVector>& frame);

/// Randomized solve of A x = y.  The update only ever touches A, y and the
/// frame: x_j = x_{j-1} + (<phi_k, y> - <A* phi_k, x_{j-1}>) A* phi_k /
/// ||A* phi_k||^2.  The error trace against the direct solve is diagnostic
/// output, not part of the iteration.
struct RandomSolveResult {
  ComplexVector x;
  ComplexVector x_direct;
  std::vector<double> errors;  // ||x_j - x_direct||, j = 0..steps
};

RandomSolveResult solve_random(const ComplexMatrix& a, const ComplexVector& y,
                               const std::vector<ComplexVector>& frame,
                               std::size_t steps, std::uint64_t seed,
                               std::optional<ComplexVector> x0 = std::nullopt);

}  // namespace kf
