#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace kf {

/// Affine iterated function system tau_b(x) = M^{-1}(x + b) with digit set
/// {b} and selection weights p_b.  M must be expansive (every eigenvalue
/// outside the closed unit disc) and contracting in operator norm on the
/// inverse, ||M^{-1}|| < 1.  Weights are nonnegative and sum to 1; zero
/// weights are legal so degenerate sampling laws can be expressed, but the
/// digit set itself always has at least two elements.
struct IfsSystem {
  std::string name;
  Eigen::MatrixXd expansion;             // M
  std::vector<Eigen::VectorXd> digits;   // B
  std::vector<double> weights;           // p_b

  // Derived at construction.
  Eigen::MatrixXd inverse;     // M^{-1}
  Eigen::MatrixXd inverse_t;   // M^{-T}
  double contraction = 0.0;    // ||M^{-1}||
  double attractor_radius = 0.0;
  std::vector<double> cdf;
  bool diagonal_expansion = false;
  Eigen::VectorXd diag_scale;  // diagonal of M when diagonal_expansion

  static IfsSystem create(std::string name, Eigen::MatrixXd expansion,
                          std::vector<Eigen::VectorXd> digits,
                          std::vector<double> weights);

  /// Built-ins: "sierpinski-gasket", "sierpinski-carpet", "eiffel",
  /// "product-lebesgue-times-cantor", "lebesgue-1d", "bernoulli-2-3".
  static IfsSystem builtin(const std::string& name);

  static IfsSystem from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;

  Eigen::Index dim() const { return expansion.rows(); }
  std::size_t alphabet() const { return digits.size(); }

  /// tau_b(x) = M^{-1}(x + b).
  Eigen::VectorXd map(std::size_t b, const Eigen::VectorXd& x) const;
};

/// Finite address sum x = sum_{k<=|word|} M^{-k} b_{word[k]}, with the tail
/// bound ||M^{-1}||^|word| * attractor_radius on the distance to any infinite
/// extension of the word.
struct AddressResult {
  Eigen::VectorXd point;
  double tail_bound = 0.0;
};

AddressResult address_point(const IfsSystem& sys,
                            std::span<const std::size_t> word);

/// Monte Carlo sample of the invariant measure.  Every point draws its own
/// digit word of length `burn_in` through an independent generator stream
/// (derived from the master seed and the point index), so samples are i.i.d.
/// and the positional truncation error is bounded by contraction^burn_in *
/// attractor_radius.  The leading `logged_depth` digits of each word are kept
/// so digit statistics and slice reconstructions stay exact.
struct PointCloud {
  Eigen::MatrixXd points;  // one point per row
  std::vector<std::uint8_t> words;
  std::size_t logged_depth = 0;
  std::size_t burn_in = 0;
  std::uint64_t seed = 0;

  std::size_t size() const { return std::size_t(points.rows()); }
  const std::uint8_t* word(std::size_t i) const {
    return words.data() + i * logged_depth;
  }
};

PointCloud chaos_sample(const IfsSystem& sys, std::size_t n_points,
                        std::uint64_t seed, std::size_t burn_in = 64,
                        std::size_t logged_depth = 16, int workers = 1);

/// Self-similarity test of one moment: compares mean f(X) with
/// sum_b p_b mean f(tau_b X) over a shared sample.  The two sides are equal
/// in expectation; `band` is three standard errors of the paired difference.
struct InvarianceResult {
  std::complex<double> lhs{0.0, 0.0};
  std::complex<double> rhs{0.0, 0.0};
  double defect = 0.0;
  double band = 0.0;
  bool pass = false;
};

InvarianceResult invariance_check(
    const IfsSystem& sys,
    const std::function<std::complex<double>(const Eigen::VectorXd&)>& f,
    const PointCloud& cloud);

/// One factor of the Fourier product: m(lambda) = sum_b p_b e^{2 pi i
/// lambda . M^{-1} b}.
std::complex<double> fourier_mask(const IfsSystem& sys,
                                  const Eigen::VectorXd& freq);

/// Fourier transform F(lambda) = integral of e^{2 pi i lambda . x} by the
/// telescoped product of masks F(lambda) = m(lambda) F(M^{-T} lambda),
/// truncated once the rescaled frequency drops below `tol` in the max norm.
/// The dropped tail factors are each within 2 pi ||frequency|| *
/// attractor_radius of 1; `tail_bound` reports that bound at the cut.
struct FourierValue {
  std::complex<double> value{0.0, 0.0};
  double tail_bound = 0.0;
  int factors = 0;
};

FourierValue fourier_eval(const IfsSystem& sys, const Eigen::VectorXd& freq,
                          double tol = 1e-3);

/// Digit frequencies of the first two coordinates for integer pure-scaling
/// systems (M = c * identity).  x_freq(k, v) estimates P(eps_{k+1} = v) from
/// the logged words; `joint` and `conditional` pool all levels up to k_max.
/// forbidden_pairs counts digit pairs that lie outside the digit set, which
/// the sampler can never emit.
struct DigitStatistics {
  std::size_t samples = 0;
  int k_max = 0;
  int base = 0;
  Eigen::MatrixXd x_freq;
  Eigen::MatrixXd y_freq;
  Eigen::MatrixXd joint;
  Eigen::MatrixXd conditional;
  std::size_t forbidden_pairs = 0;
};

DigitStatistics digit_statistics(const IfsSystem& sys, std::size_t n_points,
                                 std::uint64_t seed, int k_max = 12,
                                 int workers = 1);

/// Row-stochastic matrix; construction validates rows (NotStochastic).
struct TransitionMatrix {
  Eigen::MatrixXd t;

  static TransitionMatrix create(Eigen::MatrixXd t);
};

/// Conditional digit chain P(second-coordinate digit = b | first = a) of an
/// integer pure-scaling system in dimension >= 2.
TransitionMatrix digit_transition(const IfsSystem& sys);

/// Distribution of the digit in one coordinate.
Eigen::RowVectorXd digit_marginal(const IfsSystem& sys, int coord = 0);

/// ||v T - v||_inf of a candidate left fixed vector.
double perron_frobenius_defect(const TransitionMatrix& t,
                               const Eigen::RowVectorXd& v);

/// Left stationary vector by power iteration from the uniform start.
Eigen::RowVectorXd stationary_vector(const TransitionMatrix& t,
                                     int iterations = 20000);

/// Hellinger affinity rho = sum_b sqrt(p_b q_b) of two weight vectors on one
/// digit set.  The induced infinite product measures are equivalent when
/// rho = 1 (p = q) and mutually singular when rho < 1.
struct KakutaniReport {
  double affinity = 0.0;
  bool mutually_singular = false;
};

KakutaniReport kakutani_affinity(const std::vector<double>& p,
                                 const std::vector<double>& q);

/// Conditional sampling of the second coordinate given the digits of the
/// first, using the digit chain of the system: for each level k the second
/// digit is drawn from the row of digit_transition selected by x_digits[k].
/// Returns n_samples values y = sum_k eta_k c^{-k}.
std::vector<double> sample_slice(const IfsSystem& sys,
                                 std::span<const int> x_digits,
                                 std::size_t n_samples, std::uint64_t seed);

/// Planar geometry of the Sierpinski gasket prefractal at a given depth:
/// removed_area is the partial sum (1/2) sum_{j<=depth} 3^{j-1}/4^j of the
/// deleted-triangle areas (limit 1/2), box_dimension the least-squares
/// box-counting slope over dyadic scales 2^{-3} .. 2^{-depth} on the
/// depth-level prefractal point set.
struct GeometryReport {
  int depth = 0;
  double removed_area = 0.0;
  double box_dimension = 0.0;
  std::vector<std::size_t> box_counts;  // per scale s = 3..depth
};

GeometryReport geometry_report(const IfsSystem& sys, int depth);

/// Evidence report for the digit-chain totality heuristic: the
/// first-coordinate digit distribution v (the left fixed vector of the digit
/// chain in the stationary examples), whether v is constant, the chain T
/// itself with the defect ||vT - v||_inf, the power-iteration stationary
/// vector of T, and a numerical totality residual of the exponential family
/// supplied by the caller (NaN when no callback is given).  Both sides are
/// reported; no equivalence is asserted.
struct ConjectureReport {
  Eigen::RowVectorXd marginal;
  bool marginal_constant = false;
  Eigen::MatrixXd transition;
  double stationarity_defect = 0.0;
  Eigen::RowVectorXd power_stationary;
  double totality_residual = 0.0;
};

ConjectureReport conjecture_probe(
    const IfsSystem& sys,
    const std::function<double(const IfsSystem&)>& totality_residual = nullptr);

}  // namespace kf
