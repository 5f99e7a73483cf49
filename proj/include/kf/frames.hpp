#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "kf/ifs.hpp"
#include "kf/linalg.hpp"

namespace kf {

/// Orderings of the multi-index lattice used as window prefixes. Results can
/// depend on the order, so it is carried along with every window.
enum class Enumeration { Diagonal, SquareShell, Lexicographic, OneDNatural };

Enumeration enumeration_from_string(const std::string& s);
std::string to_string(Enumeration order);

/// First `size` multi-indices of N_0^dim in the given order.
///   Diagonal: by coordinate sum, ties lexicographic.
///   SquareShell: by max coordinate, ties lexicographic.
///   Lexicographic: row-major over the smallest cube holding `size` points.
///   OneDNatural: 0, 1, 2, ... (dim must be 1).
std::vector<Eigen::VectorXi> make_index_set(Eigen::Index dim,
                                            Enumeration order,
                                            std::size_t size);

/// Finite Gram matrix of the exponentials e_n(x) = exp(i 2 pi n.x) in
/// L2(mu): G[m][n] = <e_m, e_n> = F(n - m) with F the transform of mu.
/// Inner products are conjugate linear in the first argument.
struct GramWindow {
  std::vector<Eigen::VectorXi> index_set;
  ComplexMatrix g;
  std::string system_name;
  Enumeration order = Enumeration::Diagonal;
  double tol = 0.0;

  std::size_t size() const { return index_set.size(); }

  /// Validates the invariants: Hermitian within 1e-10, unit diagonal,
  /// smallest eigenvalue >= -1e-8.
  static GramWindow from_parts(std::vector<Eigen::VectorXi> index_set,
                               ComplexMatrix g, std::string system_name,
                               Enumeration order, double tol);
};

/// Fills the window by evaluating the measure transform at integer
/// frequency differences. Entries parallelize over the upper triangle;
/// the lower is the exact conjugate mirror.
GramWindow gram_window(const IfsSystem& sys, Enumeration order,
                       std::size_t size, double tol = 1e-10, int workers = 1);

/// Dual-function coefficients: g_n = sum_{j<=n} c[n][j] e_j with c unit
/// lower triangular, from the recursion g_n = e_n - sum_{j<n} G[j][n] g_j.
struct CoefficientDual {
  ComplexMatrix c;
};

CoefficientDual kaczmarz_duals_L2mu(const GramWindow& g);

/// Expansion coefficients <g_n, f> for f = sum_k f_coeffs[k] e_k, all
/// inner products read from the window: a = conj(C) (G f).
ComplexVector dual_coefficients(const GramWindow& g,
                                const CoefficientDual& duals,
                                const ComplexVector& f_coeffs);

/// Squared norm <f, f> = f* G f (clamped to be nonnegative).
double window_sq_norm(const GramWindow& g, const ComplexVector& f_coeffs);

/// Relative Parseval defect | sum |a_n|^2 - |f|^2 | / |f|^2 from a
/// precomputed coefficient sequence; 0 for f = 0 by convention.
double defect_from_coeffs(const GramWindow& g, const ComplexVector& a,
                          const ComplexVector& f_coeffs);

double parseval_defect_L2mu(const GramWindow& g, const CoefficientDual& duals,
                            const ComplexVector& f_coeffs);

/// Taylor coefficients of the induced power series: the sequence <g_n, f>.
/// Same computation as dual_coefficients; the squared l2 norm of the
/// truncation is the Parseval sum, so its defect matches
/// parseval_defect_L2mu bit for bit.
ComplexVector cauchy_coeffs(const GramWindow& g, const CoefficientDual& duals,
                            const ComplexVector& f_coeffs);

/// Horner evaluation of sum_n coeffs[n] z^n.
Complex power_series_eval(const ComplexVector& coeffs, Complex z);

/// Parseval defect at every prefix of the window: defects[k] is the defect
/// of the first k+1 dual functions against f. Non-increasing in k.
std::vector<double> defect_prefix_curve(const GramWindow& g,
                                        const CoefficientDual& duals,
                                        const ComplexVector& f_coeffs);

/// Gram column of an arbitrary integer frequency against the window:
/// cross[m] = <e_m, e_kappa> = F(kappa - m). kappa may lie outside the
/// window (negative coordinates included).
ComplexVector cross_gram(const IfsSystem& sys, const GramWindow& g,
                         const Eigen::VectorXi& kappa, double tol = 1e-10);

/// Parseval defect of the unit-norm probe e_kappa against the window duals,
/// using a precomputed cross-Gram column.
double probe_defect(const GramWindow& g, const CoefficientDual& duals,
                    const ComplexVector& cross);

/// Worst probe defect over the negative coordinate frequencies
/// kappa = -unit vector. A floor bounded away from zero certifies that the
/// nonnegative-lattice exponentials miss part of L2(mu); for total systems
/// the value decays as the window grows.
double totality_residual(const IfsSystem& sys, Enumeration order,
                         std::size_t size, double tol = 1e-10);

/// Explicit vectors realizing the window geometry: columns v_n of the
/// returned (size x size) matrix satisfy <v_m, v_n> = G[m][n] up to
/// eigendecomposition rounding. Bridges the window to the projection
/// engine, which wants honest vectors.
ComplexMatrix embedding_vectors(const GramWindow& g);

/// Monte-Carlo composition of the marginal and slice transforms for a 2D
/// measure whose digit pairs are independent across levels: the x digits
/// follow the first-coordinate marginal and each y digit follows the
/// transition row of its x digit. coeffs[n1][n2] estimates the doubly
/// indexed expansion coefficient of F; the squared l2 norm approximates
/// |F|^2 exactly when the exponential family is total.
struct TensorIsometryResult {
  ComplexMatrix coeffs;
  double coeff_sq_norm = 0.0;
  double f_sq_norm = 0.0;  // Monte-Carlo |F|^2 with its batch
  double f_sq_se = 0.0;    // standard error
  double ratio = 0.0;      // coeff_sq_norm / f_sq_norm
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

/// F given by exponential coefficients on the w1 x w2 window.
TensorIsometryResult tensor_isometry_2d(const IfsSystem& sys, std::size_t w1,
                                        std::size_t w2,
                                        const ComplexMatrix& f_coeffs,
                                        std::size_t n_samples,
                                        std::uint64_t seed,
                                        double slice_tol = 1e-9,
                                        double budget_rel_tol = 0.05,
                                        int workers = 1);

/// F = e_kappa for an arbitrary integer frequency pair (out-of-window
/// probes included).
TensorIsometryResult tensor_isometry_2d(const IfsSystem& sys, std::size_t w1,
                                        std::size_t w2,
                                        const Eigen::Vector2i& f_freq,
                                        std::size_t n_samples,
                                        std::uint64_t seed,
                                        double slice_tol = 1e-9,
                                        double budget_rel_tol = 0.05,
                                        int workers = 1);

}  // namespace kf
