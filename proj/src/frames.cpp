#include "kf/frames.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "kf/errors.hpp"
#include "kf/parallel.hpp"
#include "kf/rng.hpp"

namespace kf {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Unit lower-triangular rows of the dual recursion
/// g_n = e_n - sum_{j<n} G[j][n] g_j, read off a (possibly per-sample) Gram.
ComplexMatrix monic_dual_rows(const ComplexMatrix& g) {
  const Eigen::Index n = g.rows();
  ComplexMatrix c = ComplexMatrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    c(k, k) = Complex(1.0, 0.0);
    for (Eigen::Index j = 0; j < k; ++j) {
      c.row(k) -= g(j, k) * c.row(j);
    }
  }
  return c;
}

std::vector<double> cumulative(const Eigen::RowVectorXd& w) {
  std::vector<double> cdf(std::size_t(w.size()));
  double acc = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    acc += w(i);
    cdf[std::size_t(i)] = acc;
  }
  cdf.back() = 1.0;
  return cdf;
}

}  // namespace

Enumeration enumeration_from_string(const std::string& s) {
  if (s == "diagonal") return Enumeration::Diagonal;
  if (s == "square-shell") return Enumeration::SquareShell;
  if (s == "lexicographic") return Enumeration::Lexicographic;
  if (s == "1d-natural") return Enumeration::OneDNatural;
  throw InvalidDescriptor("unknown enumeration: " + s);
}

std::string to_string(Enumeration order) {
  switch (order) {
    case Enumeration::Diagonal: return "diagonal";
    case Enumeration::SquareShell: return "square-shell";
    case Enumeration::Lexicographic: return "lexicographic";
    case Enumeration::OneDNatural: return "1d-natural";
  }
  return "unknown";
}

std::vector<Eigen::VectorXi> make_index_set(Eigen::Index dim,
                                            Enumeration order,
                                            std::size_t size) {
  if (dim < 1) throw InvalidDescriptor("index dimension must be positive");
  if (size < 1) throw InvalidDescriptor("window size must be positive");
  std::vector<Eigen::VectorXi> out;
  out.reserve(size);

  if (order == Enumeration::OneDNatural) {
    if (dim != 1) {
      throw InvalidDescriptor("1d-natural enumeration needs dimension 1");
    }
    for (std::size_t n = 0; n < size; ++n) {
      Eigen::VectorXi v(1);
      v(0) = int(n);
      out.push_back(v);
    }
    return out;
  }

  if (order == Enumeration::Lexicographic) {
    const int side = int(std::ceil(std::pow(double(size), 1.0 / double(dim))));
    Eigen::VectorXi v = Eigen::VectorXi::Zero(dim);
    while (out.size() < size) {
      out.push_back(v);
      Eigen::Index i = dim - 1;
      while (i >= 0 && ++v(i) == side) {
        v(i) = 0;
        --i;
      }
      if (i < 0) break;
    }
    if (out.size() < size) throw Error("lexicographic window enumeration underfilled");
    return out;
  }

  // Diagonal and SquareShell: grow one level at a time, ties lexicographic.
  auto level_of = [&](const Eigen::VectorXi& v) {
    return order == Enumeration::Diagonal ? v.sum() : v.maxCoeff();
  };
  for (int level = 0; out.size() < size; ++level) {
    std::vector<Eigen::VectorXi> shell;
    Eigen::VectorXi v = Eigen::VectorXi::Zero(dim);
    // Enumerate [0, level]^dim lexicographically, keep the requested level.
    while (true) {
      if (level_of(v) == level) shell.push_back(v);
      Eigen::Index i = dim - 1;
      while (i >= 0 && ++v(i) > level) {
        v(i) = 0;
        --i;
      }
      if (i < 0) break;
    }
    for (const auto& idx : shell) {
      if (out.size() == size) break;
      out.push_back(idx);
    }
  }
  return out;
}

GramWindow GramWindow::from_parts(std::vector<Eigen::VectorXi> index_set,
                                  ComplexMatrix g, std::string system_name,
                                  Enumeration order, double tol) {
  const Eigen::Index n = g.rows();
  if (g.cols() != n || std::size_t(n) != index_set.size() || n == 0) {
    throw InvalidDescriptor("gram window shape mismatch");
  }
  if ((g - g.adjoint()).cwiseAbs().maxCoeff() > 1e-10) {
    throw InvalidDescriptor("gram window is not Hermitian");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(g(i, i) - Complex(1.0, 0.0)) > 1e-10) {
      throw InvalidDescriptor("gram window diagonal must be 1");
    }
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(g);
  if (eig.eigenvalues().minCoeff() < -1e-8) {
    throw InvalidDescriptor(
        "gram window not positive semidefinite; truncation too coarse");
  }
  GramWindow out;
  out.index_set = std::move(index_set);
  out.g = std::move(g);
  out.system_name = std::move(system_name);
  out.order = order;
  out.tol = tol;
  return out;
}

GramWindow gram_window(const IfsSystem& sys, Enumeration order,
                       std::size_t size, double tol, int workers) {
  auto index_set = make_index_set(sys.dim(), order, size);
  const Eigen::Index n = Eigen::Index(size);
  ComplexMatrix g(n, n);

  // Upper triangle (m <= n) as a flat list; the lower is the conjugate.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> cells;
  cells.reserve(std::size_t(n) * std::size_t(n + 1) / 2);
  for (Eigen::Index m = 0; m < n; ++m) {
    for (Eigen::Index k = m; k < n; ++k) cells.emplace_back(m, k);
  }
  parallel_chunks(cells.size(), workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto [m, k] = cells[i];
      const Eigen::VectorXd freq =
          (index_set[std::size_t(k)] - index_set[std::size_t(m)]).cast<double>();
      g(m, k) = fourier_eval(sys, freq, tol).value;
    }
  });
  for (Eigen::Index m = 0; m < n; ++m) {
    for (Eigen::Index k = m + 1; k < n; ++k) g(k, m) = std::conj(g(m, k));
  }
  return GramWindow::from_parts(std::move(index_set), std::move(g), sys.name,
                                order, tol);
}

CoefficientDual kaczmarz_duals_L2mu(const GramWindow& g) {
  CoefficientDual out;
  out.c = monic_dual_rows(g.g);
  return out;
}

ComplexVector dual_coefficients(const GramWindow& g,
                                const CoefficientDual& duals,
                                const ComplexVector& f_coeffs) {
  if (f_coeffs.size() != g.g.rows()) {
    throw LengthMismatch("coefficient vector does not match the window");
  }
  return duals.c.conjugate() * (g.g * f_coeffs);
}

double window_sq_norm(const GramWindow& g, const ComplexVector& f_coeffs) {
  if (f_coeffs.size() != g.g.rows()) {
    throw LengthMismatch("coefficient vector does not match the window");
  }
  const Complex v = f_coeffs.dot(g.g * f_coeffs);
  return std::max(0.0, v.real());
}

double defect_from_coeffs(const GramWindow& g, const ComplexVector& a,
                          const ComplexVector& f_coeffs) {
  const double fsq = window_sq_norm(g, f_coeffs);
  if (fsq == 0.0) return 0.0;
  return std::abs(a.squaredNorm() - fsq) / fsq;
}

double parseval_defect_L2mu(const GramWindow& g, const CoefficientDual& duals,
                            const ComplexVector& f_coeffs) {
  return defect_from_coeffs(g, dual_coefficients(g, duals, f_coeffs), f_coeffs);
}

ComplexVector cauchy_coeffs(const GramWindow& g, const CoefficientDual& duals,
                            const ComplexVector& f_coeffs) {
  return dual_coefficients(g, duals, f_coeffs);
}

Complex power_series_eval(const ComplexVector& coeffs, Complex z) {
  Complex acc(0.0, 0.0);
  for (Eigen::Index n = coeffs.size(); n-- > 0;) {
    acc = acc * z + coeffs(n);
  }
  return acc;
}

std::vector<double> defect_prefix_curve(const GramWindow& g,
                                        const CoefficientDual& duals,
                                        const ComplexVector& f_coeffs) {
  const ComplexVector a = dual_coefficients(g, duals, f_coeffs);
  const double fsq = window_sq_norm(g, f_coeffs);
  std::vector<double> out(std::size_t(a.size()), 0.0);
  if (fsq == 0.0) return out;
  double acc = 0.0;
  for (Eigen::Index n = 0; n < a.size(); ++n) {
    acc += std::norm(a(n));
    out[std::size_t(n)] = std::abs(acc - fsq) / fsq;
  }
  return out;
}

ComplexVector cross_gram(const IfsSystem& sys, const GramWindow& g,
                         const Eigen::VectorXi& kappa, double tol) {
  if (kappa.size() != sys.dim()) {
    throw DimensionMismatch("probe frequency dimension mismatch");
  }
  ComplexVector cross(g.g.rows());
  for (Eigen::Index m = 0; m < g.g.rows(); ++m) {
    const Eigen::VectorXd freq =
        (kappa - g.index_set[std::size_t(m)]).cast<double>();
    cross(m) = fourier_eval(sys, freq, tol).value;
  }
  return cross;
}

double probe_defect(const GramWindow& g, const CoefficientDual& duals,
                    const ComplexVector& cross) {
  if (cross.size() != g.g.rows()) {
    throw LengthMismatch("cross-gram column does not match the window");
  }
  // <g_n, e_kappa> = sum_j conj(c[n][j]) <e_j, e_kappa>; |e_kappa| = 1.
  const ComplexVector a = duals.c.conjugate() * cross;
  return std::abs(a.squaredNorm() - 1.0);
}

double totality_residual(const IfsSystem& sys, Enumeration order,
                         std::size_t size, double tol) {
  const GramWindow g = gram_window(sys, order, size, tol);
  const CoefficientDual duals = kaczmarz_duals_L2mu(g);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < sys.dim(); ++i) {
    Eigen::VectorXi kappa = Eigen::VectorXi::Zero(sys.dim());
    kappa(i) = -1;
    worst = std::max(worst, probe_defect(g, duals, cross_gram(sys, g, kappa, tol)));
  }
  return worst;
}

ComplexMatrix embedding_vectors(const GramWindow& g) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(g.g);
  Eigen::VectorXd lam = eig.eigenvalues().cwiseMax(0.0);
  return lam.cwiseSqrt().asDiagonal() * eig.eigenvectors().adjoint();
}

namespace {

struct TensorTarget {
  const ComplexMatrix* coeffs = nullptr;  // w1 x w2 when set
  Eigen::Vector2i freq = Eigen::Vector2i::Zero();
};

TensorIsometryResult tensor_isometry_impl(const IfsSystem& sys,
                                          std::size_t w1, std::size_t w2,
                                          const TensorTarget& target,
                                          std::size_t n_samples,
                                          std::uint64_t seed, double slice_tol,
                                          double budget_rel_tol, int workers) {
  if (sys.dim() != 2) {
    throw InvalidDescriptor("tensor isometry is defined for planar systems");
  }
  if (w1 < 1 || w2 < 1) throw Error("window sides must be positive");
  if (n_samples < 16) throw Error("sample budget too small");
  if (slice_tol <= 0.0) throw Error("slice truncation tolerance must be positive");

  const Eigen::Index n1 = Eigen::Index(w1);
  const Eigen::Index n2 = Eigen::Index(w2);

  // Digit machinery: x digits are i.i.d. with the first-coordinate marginal,
  // y digits follow the transition row of the matching x digit.
  const TransitionMatrix chain = digit_transition(sys);
  const Eigen::RowVectorXd marginal = digit_marginal(sys, 0);
  const int base = int(chain.t.rows());
  const std::vector<double> marg_cdf = cumulative(marginal);
  std::vector<std::vector<double>> row_cdf(static_cast<std::size_t>(base));
  for (int a = 0; a < base; ++a) {
    row_cdf[std::size_t(a)] = cumulative(Eigen::RowVectorXd(chain.t.row(a)));
  }

  // Marginal measure as a 1D system for the outer transform.
  std::vector<Eigen::VectorXd> mdigits;
  std::vector<double> mweights;
  for (int b = 0; b < base; ++b) {
    Eigen::VectorXd v(1);
    v << double(b);
    mdigits.push_back(v);
    mweights.push_back(marginal(b));
  }
  Eigen::MatrixXd mexp(1, 1);
  mexp << double(base);
  const IfsSystem marginal_sys = IfsSystem::create(
      sys.name + "-x-marginal", mexp, mdigits, mweights);
  const GramWindow gx = gram_window(marginal_sys, Enumeration::OneDNatural, w1,
                                    std::min(slice_tol, 1e-9));
  const CoefficientDual cx = kaczmarz_duals_L2mu(gx);

  if (target.coeffs != nullptr &&
      (target.coeffs->rows() != n1 || target.coeffs->cols() != n2)) {
    throw DimensionMismatch("coefficient array must match the window sides");
  }
  if (target.coeffs == nullptr && target.freq(1) > int(w2) - 1 + 64) {
    throw Error("probe frequency too far above the slice window");
  }

  // Slice transform values needed per sample: Toeplitz offsets for the
  // slice Gram plus the target column offsets.
  const int kappa2 = target.coeffs ? 0 : target.freq(1);
  int tmax = int(w2) - 1;
  for (Eigen::Index j = 0; j < n2; ++j) {
    tmax = std::max(tmax, std::abs(kappa2 - int(j)));
  }
  const std::size_t kDigits = 48;

  const std::size_t chunk = 8192;
  const std::size_t n_chunks = (n_samples + chunk - 1) / chunk;
  constexpr std::size_t kBatches = 8;
  std::vector<ComplexMatrix> m_part(n_chunks, ComplexMatrix::Zero(n1, n2));
  // |F|^2 partials split by sample index mod kBatches, so the batch means
  // for the standard error are independent of the chunk grid.
  std::vector<std::array<double, kBatches>> fsq_part(
      n_chunks, std::array<double, kBatches>{});
  std::vector<std::array<std::size_t, kBatches>> cnt_part(
      n_chunks, std::array<std::size_t, kBatches>{});

  parallel_chunks(n_samples, workers, [&](std::size_t begin, std::size_t end) {
    const std::size_t id = begin / chunk;
    std::vector<std::size_t> eps(kDigits), eta(kDigits);
    ComplexVector sigma(tmax + 1);  // slice transform at 0..tmax
    ComplexMatrix gslice(n2, n2);
    ComplexVector s(n2), fvec(n2);
    ComplexVector px(n1), py;
    if (target.coeffs) py.resize(n2);
    auto sigma_at = [&](int t) {
      return t >= 0 ? sigma(t) : std::conj(sigma(-t));
    };
    for (std::size_t i = begin; i < end; ++i) {
      Philox rng(seed, i);
      double x = 0.0, y = 0.0, scale = 1.0;
      for (std::size_t k = 0; k < kDigits; ++k) {
        eps[k] = rng.next_index(marg_cdf);
        eta[k] = rng.next_index(row_cdf[eps[k]]);
        scale /= double(base);
        x += scale * double(eps[k]);
        y += scale * double(eta[k]);
      }

      // Slice transform at integer offsets: product over digit levels of
      // phi_a(u) = sum_b T[a][b] exp(i 2 pi u b), u = t / base^k.
      sigma(0) = Complex(1.0, 0.0);
      for (int t = 1; t <= tmax; ++t) {
        Complex acc(1.0, 0.0);
        double u = double(t);
        for (std::size_t k = 0; k < kDigits; ++k) {
          u /= double(base);
          if (u < slice_tol) break;
          Complex factor(0.0, 0.0);
          for (int b = 0; b < base; ++b) {
            const double w = chain.t(int(eps[k]), b);
            if (w == 0.0) continue;
            const double phase = kTwoPi * u * double(b);
            factor += w * Complex(std::cos(phase), std::sin(phase));
          }
          acc *= factor;
        }
        sigma(t) = acc;
      }
      for (Eigen::Index mm = 0; mm < n2; ++mm) {
        for (Eigen::Index nn = 0; nn < n2; ++nn) {
          gslice(mm, nn) = sigma_at(int(nn - mm));
        }
      }
      const ComplexMatrix cslice = monic_dual_rows(gslice);

      for (Eigen::Index j = 0; j < n1; ++j) {
        const double phase = kTwoPi * double(j) * x;
        px(j) = Complex(std::cos(phase), std::sin(phase));
      }

      Complex fxy(0.0, 0.0);
      if (target.coeffs) {
        for (Eigen::Index j = 0; j < n2; ++j) {
          const double phase = kTwoPi * double(j) * y;
          py(j) = Complex(std::cos(phase), std::sin(phase));
        }
        fvec = target.coeffs->transpose() * px;  // fvec[j2] = sum_j1 Fc(j1,j2) px[j1]
        s = gslice * fvec;
        fxy = fvec.cwiseProduct(py).sum();
      } else {
        const double xphase = kTwoPi * double(target.freq(0)) * x;
        const Complex ex(std::cos(xphase), std::sin(xphase));
        for (Eigen::Index j = 0; j < n2; ++j) {
          s(j) = ex * sigma_at(kappa2 - int(j));
        }
        const double yphase = kTwoPi * double(target.freq(1)) * y;
        fxy = ex * Complex(std::cos(yphase), std::sin(yphase));
      }

      const ComplexVector h = cslice.conjugate() * s;
      m_part[id].noalias() += px.conjugate() * h.transpose();
      fsq_part[id][i % kBatches] += std::norm(fxy);
      ++cnt_part[id][i % kBatches];
    }
  }, chunk);

  ComplexMatrix m = ComplexMatrix::Zero(Eigen::Index(w1), Eigen::Index(w2));
  double bsum[kBatches] = {0}, bcnt[kBatches] = {0};
  for (std::size_t id = 0; id < n_chunks; ++id) {
    m += m_part[id];
    for (std::size_t b = 0; b < kBatches; ++b) {
      bsum[b] += fsq_part[id][b];
      bcnt[b] += double(cnt_part[id][b]);
    }
  }
  m /= double(n_samples);
  double fsq_sum = 0.0;
  for (std::size_t b = 0; b < kBatches; ++b) fsq_sum += bsum[b];
  const double fsq = fsq_sum / double(n_samples);
  double se = 0.0;
  std::size_t used = 0;
  for (std::size_t b = 0; b < kBatches; ++b) {
    if (bcnt[b] == 0.0) continue;
    const double mb = bsum[b] / bcnt[b];
    se += (mb - fsq) * (mb - fsq);
    ++used;
  }
  se = used > 1 ? std::sqrt(se / double(used * (used - 1))) : 0.0;

  if (fsq <= 0.0) throw Error("target function has zero Monte-Carlo norm");
  if (se > budget_rel_tol * fsq) {
    throw QuadratureBudgetExceeded(
        "slice quadrature too noisy at the configured sample count");
  }

  TensorIsometryResult out;
  out.coeffs = cx.c.conjugate() * m;
  out.coeff_sq_norm = out.coeffs.squaredNorm();
  out.f_sq_norm = fsq;
  out.f_sq_se = se;
  out.ratio = out.coeff_sq_norm / fsq;
  out.samples = n_samples;
  out.seed = seed;
  return out;
}

}  // namespace

TensorIsometryResult tensor_isometry_2d(const IfsSystem& sys, std::size_t w1,
                                        std::size_t w2,
                                        const ComplexMatrix& f_coeffs,
                                        std::size_t n_samples,
                                        std::uint64_t seed, double slice_tol,
                                        double budget_rel_tol, int workers) {
  TensorTarget target;
  target.coeffs = &f_coeffs;
  return tensor_isometry_impl(sys, w1, w2, target, n_samples, seed, slice_tol,
                              budget_rel_tol, workers);
}

TensorIsometryResult tensor_isometry_2d(const IfsSystem& sys, std::size_t w1,
                                        std::size_t w2,
                                        const Eigen::Vector2i& f_freq,
                                        std::size_t n_samples,
                                        std::uint64_t seed, double slice_tol,
                                        double budget_rel_tol, int workers) {
  TensorTarget target;
  target.freq = f_freq;
  return tensor_isometry_impl(sys, w1, w2, target, n_samples, seed, slice_tol,
                              budget_rel_tol, workers);
}

}  // namespace kf
