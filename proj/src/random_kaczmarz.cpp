#include "kf/random_kaczmarz.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

#include "kf/errors.hpp"
#include "kf/parallel.hpp"

namespace kf {
namespace {

constexpr double kZ99 = 2.5758293035489004;  // two-sided 99% normal quantile

std::vector<double> cumulative(const std::vector<double>& w) {
  std::vector<double> cdf(w.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    acc += w[i];
    cdf[i] = acc;
  }
  cdf.back() = 1.0;
  return cdf;
}

}  // namespace

RandomProjectionLaw RandomProjectionLaw::create(std::vector<Projection> atoms,
                                                std::vector<double> weights) {
  if (atoms.empty()) throw Error("projection law needs at least one atom");
  if (atoms.size() != weights.size()) {
    throw LengthMismatch("atom and weight counts differ");
  }
  RandomProjectionLaw law;
  law.dim = atoms.front().dim();
  double sum = 0.0;
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    if (atoms[j].dim() != law.dim) {
      throw DimensionMismatch("law atoms must share a dimension");
    }
    if (weights[j] <= 0.0) throw Error("law weights must be strictly positive");
    sum += weights[j];
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw Error("law weights must sum to 1");
  }
  law.atoms = std::move(atoms);
  law.weights = std::move(weights);
  law.cdf = cumulative(law.weights);
  return law;
}

double lower_bound_C(const RandomProjectionLaw& law) {
  ComplexMatrix mean = ComplexMatrix::Zero(law.dim, law.dim);
  for (std::size_t j = 0; j < law.atoms.size(); ++j) {
    mean += law.weights[j] * law.atoms[j].matrix();
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(mean);
  const double c = eig.eigenvalues().minCoeff();
  if (c < 1e-12) {
    throw NotUniform("law mean projection has a near-zero eigenvalue");
  }
  return c;
}

RandomTrajectory sample_trajectory(const RandomProjectionLaw& law,
                                   std::size_t n_max, std::uint64_t seed,
                                   std::uint64_t trial, const ComplexVector& x,
                                   bool randomize_step0) {
  Philox rng(seed, trial);
  RandomTrajectory out;
  out.choices.reserve(n_max + 1);
  out.energy.reserve(n_max + 1);
  ComplexVector v = x;
  for (std::size_t n = 0; n <= n_max; ++n) {
    const std::size_t j = (n == 0 && !randomize_step0)
                              ? 0
                              : rng.next_index(law.cdf);
    out.choices.push_back(j);
    v -= law.atoms[j].apply(v);
    out.energy.push_back(v.squaredNorm());
  }
  return out;
}

DecayReport run_random_products(const RandomProjectionLaw& law,
                                std::size_t n_max, std::size_t trials,
                                std::uint64_t seed,
                                const std::vector<ComplexVector>& probes,
                                int workers, bool keep_trial_trace,
                                bool randomize_step0) {
  if (trials == 0) throw Error("need at least one trial");
  if (probes.empty()) throw Error("need at least one probe");
  const std::size_t steps = n_max + 1;
  const std::size_t np = probes.size();
  for (const ComplexVector& x : probes) {
    if (x.size() != law.dim) {
      throw DimensionMismatch("probe dimension does not match the law");
    }
  }

  // energy[t * np * steps + p * steps + n], filled by trial-indexed slots.
  std::vector<double> energy(trials * np * steps);
  parallel_chunks(trials, workers, [&](std::size_t begin, std::size_t end) {
    std::vector<ComplexVector> v(np);
    for (std::size_t t = begin; t < end; ++t) {
      Philox rng(seed, t);
      for (std::size_t p = 0; p < np; ++p) v[p] = probes[p];
      double* slot = energy.data() + t * np * steps;
      for (std::size_t n = 0; n < steps; ++n) {
        const std::size_t j = (n == 0 && !randomize_step0)
                                  ? 0
                                  : rng.next_index(law.cdf);
        for (std::size_t p = 0; p < np; ++p) {
          v[p] -= law.atoms[j].apply(v[p]);
          slot[p * steps + n] = v[p].squaredNorm();
        }
      }
    }
  }, 64);

  DecayReport report;
  report.c_value = lower_bound_C(law);
  report.trials = trials;
  report.seed = seed;
  report.randomized_step0 = randomize_step0;
  report.mean_energy.assign(np, std::vector<double>(steps));
  report.envelope.assign(np, std::vector<double>(steps));
  report.ci_half.assign(np, std::vector<double>(steps));
  report.pass = true;

  std::vector<double> vals(trials), sq(trials);
  for (std::size_t p = 0; p < np; ++p) {
    // Envelope base: energy after the step-0 factor.
    double base;
    if (randomize_step0) {
      base = 0.0;
      for (std::size_t j = 0; j < law.atoms.size(); ++j) {
        base += law.weights[j] *
                (probes[p] - law.atoms[j].apply(probes[p])).squaredNorm();
      }
    } else {
      base = (probes[p] - law.atoms[0].apply(probes[p])).squaredNorm();
    }
    for (std::size_t n = 0; n < steps; ++n) {
      for (std::size_t t = 0; t < trials; ++t) {
        vals[t] = energy[t * np * steps + p * steps + n];
        sq[t] = vals[t] * vals[t];
      }
      const double mean = pairwise_sum(vals) / double(trials);
      const double mean_sq = pairwise_sum(sq) / double(trials);
      const double var =
          std::max(0.0, (mean_sq - mean * mean) * double(trials) /
                            double(trials > 1 ? trials - 1 : 1));
      const double half = kZ99 * std::sqrt(var / double(trials));
      const double env = base * std::pow(1.0 - report.c_value, double(n));
      report.mean_energy[p][n] = mean;
      report.envelope[p][n] = env;
      report.ci_half[p][n] = half;
      if (env > 0.0 && mean > 0.0) {
        report.envelope_ratio_max =
            std::max(report.envelope_ratio_max, mean / env);
        if (mean > env * (1.0 + half / mean)) report.pass = false;
      } else if (mean > env) {
        report.pass = false;
      }
    }
  }

  if (keep_trial_trace) {
    report.trial_energy.assign(trials, std::vector<double>(steps));
    for (std::size_t t = 0; t < trials; ++t) {
      for (std::size_t n = 0; n < steps; ++n) {
        report.trial_energy[t][n] = energy[t * np * steps + n];
      }
    }
  }
  return report;
}

SamplingWeights sampling_weights(const ComplexMatrix& a,
                                 const std::vector<ComplexVector>& frame) {
  if (a.rows() != a.cols()) {
    throw DimensionMismatch("sampling weights need a square matrix");
  }
  const Eigen::Index d = a.rows();
  if (frame.empty()) throw Error("sampling weights need a frame");

  // Parseval check: sum |phi><phi| = 1 on the space.
  ComplexMatrix frame_op = ComplexMatrix::Zero(d, d);
  for (const ComplexVector& phi : frame) {
    if (phi.size() != d) {
      throw DimensionMismatch("frame vector dimension does not match A");
    }
    frame_op += phi * phi.adjoint();
  }
  if (operator_norm(frame_op - ComplexMatrix::Identity(d, d)) > 1e-10) {
    throw Error("frame is not Parseval within 1e-10");
  }

  Eigen::JacobiSVD<ComplexMatrix> svd(a);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(d - 1);
  if (smin <= smax * 1e-12 || smax == 0.0) {
    throw Singular("matrix is singular to working precision");
  }

  SamplingWeights out;
  double sum = 0.0;
  for (const ComplexVector& phi : frame) {
    ComplexVector dir = a.adjoint() * phi;
    const double sq = dir.squaredNorm();
    out.directions.push_back(std::move(dir));
    out.direction_sq_norms.push_back(sq);
    sum += sq;
  }
  // Sandwich 1/||A^{-1}||^2 < sum < infinity; the sum is finite by
  // construction, the lower end must be strict.
  if (!(smin * smin < sum * (1.0 - 1e-12))) {
    throw Hp0Violated("weight normalization does not dominate 1/||A^{-1}||^2");
  }
  out.weight_sum = sum;
  out.certified_c = (smin * smin) / sum;

  std::vector<Projection> atoms;
  std::vector<double> weights;
  for (std::size_t k = 0; k < frame.size(); ++k) {
    atoms.push_back(rank1_projection(out.directions[k], true));
    weights.push_back(out.direction_sq_norms[k] / sum);
  }
  out.law = RandomProjectionLaw::create(std::move(atoms), std::move(weights));
  return out;
}

RandomSolveResult solve_random(const ComplexMatrix& a, const ComplexVector& y,
                               const std::vector<ComplexVector>& frame,
                               std::size_t steps, std::uint64_t seed,
                               std::optional<ComplexVector> x0) {
  if (y.size() != a.rows()) {
    throw DimensionMismatch("right-hand side does not match the matrix");
  }
  SamplingWeights sw = sampling_weights(a, frame);
  RandomSolveResult out;
  out.x_direct = a.colPivHouseholderQr().solve(y);
  out.x = x0 ? *x0 : ComplexVector::Zero(a.cols());
  if (out.x.size() != a.cols()) {
    throw DimensionMismatch("start vector does not match the matrix");
  }
  out.errors.reserve(steps + 1);
  out.errors.push_back((out.x - out.x_direct).norm());

  Philox rng(seed, 0);
  for (std::size_t n = 1; n <= steps; ++n) {
    const std::size_t k = (n == 1) ? 0 : rng.next_index(sw.law.cdf);
    const ComplexVector& dir = sw.directions[k];
    const Complex rhs = frame[k].dot(y);
    out.x += ((rhs - dir.dot(out.x)) / sw.direction_sq_norms[k]) * dir;
    out.errors.push_back((out.x - out.x_direct).norm());
  }
  return out;
}

}  // namespace kf
