// Acceptance suite: thirteen numbered criteria covering the projection
// products, the randomized solver, the invariant-measure machinery, and the
// exponential frames.  Each criterion prints one PASS/FAIL line with its
// measured values; the process exits with the number of failed criteria.
//
// Every stochastic criterion runs at a fixed master seed, so a PASS here is
// reproducible bit for bit (criterion 13 checks exactly that).

#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "kf/frames.hpp"
#include "kf/ifs.hpp"
#include "kf/io.hpp"
#include "kf/kaczmarz.hpp"
#include "kf/linalg.hpp"
#include "kf/projection_system.hpp"
#include "kf/random_kaczmarz.hpp"
#include "kf/rng.hpp"

using kf::Complex;
using kf::ComplexMatrix;
using kf::ComplexVector;

namespace {

int g_failed = 0;

void criterion(int id, const std::string& name, bool pass,
               const std::string& detail) {
  if (!pass) ++g_failed;
  std::printf("%s  %2d  %-34s %s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
}

std::string fmt(double v) { return kf::io::format_double(v); }

ComplexMatrix oblique_matrix() {
  ComplexMatrix a(2, 2);
  a << std::cos(M_PI / 3.0), std::sin(M_PI / 3.0), std::cos(0.1),
      std::sin(0.1);
  return a;
}

std::vector<ComplexVector> standard_frame(Eigen::Index dim) {
  std::vector<ComplexVector> frame;
  for (Eigen::Index k = 0; k < dim; ++k) {
    ComplexVector e = ComplexVector::Zero(dim);
    e(k) = 1.0;
    frame.push_back(e);
  }
  return frame;
}

// --------------------------------------------------------------------------
// 1 + 2: operator identities and dual consistency over one seeded panel of
// 50 rank-1 systems, dims 2..16, horizons up to 32.

void criteria_identities() {
  double d1 = 0.0, d2 = 0.0;       // identity residuals
  double q_rep = 0.0;              // ||Q_n - |e_n><g_n||
  double q_tel = 0.0;              // ||Q_n - (T_{n-1} - T_n)||
  for (int s = 0; s < 50; ++s) {
    const Eigen::Index dim = 2 + (s % 15);
    const std::size_t n_max = std::size_t(8 + (s % 25));
    kf::Philox rng(3100 + std::uint64_t(s), 0);
    std::vector<ComplexVector> es;
    for (std::size_t k = 0; k <= n_max; ++k) {
      es.push_back(kf::random_unit_vector(rng, dim));
    }
    const kf::ProjectionSystem sys =
        kf::ProjectionSystem::rank_one_list(es, false);

    const kf::IdentityReport rep = kf::verify_identities(sys, n_max);
    d1 = std::max(d1, rep.max_delta1);
    d2 = std::max(d2, rep.max_delta2);

    const kf::KaczmarzTrajectory traj =
        kf::run_products(sys, n_max, kf::probe_panel(dim, 0, 0), true);
    const kf::DualSequence duals = kf::dual_sequence(es);
    const ComplexMatrix eye = ComplexMatrix::Identity(dim, dim);
    for (std::size_t n = 0; n <= n_max; ++n) {
      const ComplexMatrix outer = es[n] * duals.g[n].adjoint();
      q_rep = std::max(q_rep, kf::operator_norm(traj.q_ops[n] - outer));
      const ComplexMatrix& prev = n == 0 ? eye : traj.t_ops[n - 1];
      q_tel = std::max(
          q_tel, kf::operator_norm(traj.q_ops[n] - (prev - traj.t_ops[n])));
    }
  }
  criterion(1, "product identities", d1 <= 1e-11 && d2 <= 1e-11,
            "max_delta1=" + fmt(d1) + " max_delta2=" + fmt(d2) +
                " (tol 1e-11)");
  criterion(2, "dual consistency", q_rep <= 1e-10 && q_tel <= 1e-11,
            "max||Q-e g*||=" + fmt(q_rep) + " (tol 1e-10), telescoping=" +
                fmt(q_tel) + " (tol 1e-11)");
}

// --------------------------------------------------------------------------
// 3: cyclic row-action solve of the two-row 2x2 system, with the per-step
// right-triangle identity.

void criterion_cyclic_solve() {
  const ComplexMatrix a = oblique_matrix();
  ComplexVector y(2);
  y << 1.0, 2.0;
  const ComplexVector x_star = a.colPivHouseholderQr().solve(y);

  ComplexVector x = ComplexVector::Zero(2);
  double orth_max = 0.0;
  for (std::size_t sweep = 0; sweep < 500; ++sweep) {
    for (Eigen::Index r = 0; r < 2; ++r) {
      const ComplexVector row = a.row(r).conjugate().transpose();
      const ComplexVector x_next = kf::classical_step(x, row, y(r));
      const double prev = (x - x_star).squaredNorm();
      const double step = (x - x_next).squaredNorm();
      const double next = (x_next - x_star).squaredNorm();
      orth_max = std::max(orth_max, std::abs(prev - step - next));
      x = x_next;
    }
  }
  const double err = (x - x_star).norm();
  criterion(3, "cyclic two-row solve", err < 1e-8 && orth_max <= 1e-10,
            "error after 500 sweeps=" + fmt(err) +
                " (tol 1e-8), orthogonality defect=" + fmt(orth_max) +
                " (tol 1e-10)");
}

// --------------------------------------------------------------------------
// 4: mean-energy decay under three random projection laws, against the
// envelope with the exact eigen-solve constant.

void criterion_random_decay() {
  std::vector<std::pair<std::string, kf::RandomProjectionLaw>> laws;
  {
    ComplexVector u(2), v(2);
    u << 1.0, 0.0;
    v << std::cos(M_PI / 3.0), std::sin(M_PI / 3.0);
    laws.emplace_back("angle-pi/3",
                      kf::RandomProjectionLaw::create(
                          {kf::Projection::rank_one(u),
                           kf::Projection::rank_one(v)},
                          {0.5, 0.5}));
  }
  {
    ComplexMatrix a = ComplexMatrix::Zero(2, 2);
    a(0, 0) = 1.0;
    a(1, 1) = 2.0;
    laws.emplace_back("row-sampling-diag(1,2)",
                      kf::sampling_weights(a, standard_frame(2)).law);
  }
  laws.emplace_back("row-sampling-two-row",
                    kf::sampling_weights(oblique_matrix(), standard_frame(2)).law);

  // Generic probes: an axis probe makes the frozen first step sit exactly on
  // the envelope with zero CI width, where the comparison degenerates to a
  // last-ulp rounding coin flip.
  std::vector<ComplexVector> probes(2, ComplexVector(2));
  probes[0] << 0.6, 0.8;
  probes[1] << Complex(0.3, 0.4), Complex(-0.5, 0.1);

  bool pass = true;
  std::string detail;
  for (std::size_t i = 0; i < laws.size(); ++i) {
    const kf::DecayReport rep =
        kf::run_random_products(laws[i].second, 50, 2000, 977 + i, probes, 1);
    pass = pass && rep.pass;
    if (!detail.empty()) detail += ", ";
    detail += laws[i].first + ": C=" + fmt(rep.c_value) +
              " ratio_max=" + fmt(rep.envelope_ratio_max) +
              (rep.pass ? " ok" : " VIOLATED");
  }
  criterion(4, "randomized decay envelopes", pass, detail);
}

// --------------------------------------------------------------------------
// 5: Monte-Carlo self-similarity of five moments on three planar systems.

void criterion_invariance() {
  const std::vector<std::function<Complex(const Eigen::VectorXd&)>> panel{
      [](const Eigen::VectorXd& x) { return Complex(x(0), 0.0); },
      [](const Eigen::VectorXd& x) { return Complex(x(1), 0.0); },
      [](const Eigen::VectorXd& x) {
        return Complex(x(0) * x(0) + x(1) * x(1), 0.0);
      },
      [](const Eigen::VectorXd& x) {
        return std::exp(Complex(0.0, 2.0 * M_PI * x(0)));
      },
      [](const Eigen::VectorXd& x) {
        return std::exp(Complex(0.0, 2.0 * M_PI * (x(0) + x(1))));
      }};
  bool pass = true;
  double worst_margin = 0.0;  // defect / band, worst case
  for (const char* name :
       {"sierpinski-gasket", "sierpinski-carpet", "eiffel"}) {
    const kf::IfsSystem sys = kf::IfsSystem::builtin(name);
    const kf::PointCloud cloud = kf::chaos_sample(sys, 1000000, 29, 64, 4, 1);
    for (const auto& f : panel) {
      const kf::InvarianceResult r = kf::invariance_check(sys, f, cloud);
      pass = pass && r.pass;
      if (r.band > 0.0) {
        worst_margin = std::max(worst_margin, r.defect / r.band);
      }
    }
  }
  criterion(5, "measure self-similarity", pass,
            "3 systems x 5 moments at 1e6 points, worst defect/band=" +
                fmt(worst_margin) + " (<= 1 required)");
}

// --------------------------------------------------------------------------
// 6: transform telescoping on the 7x7 frequency window, and product formula
// against the sampled transform.

void criterion_fourier() {
  const kf::IfsSystem sys = kf::IfsSystem::builtin("sierpinski-gasket");
  Complex table[7][7];
  double tele = 0.0;
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 7; ++j) {
      Eigen::VectorXd lam(2);
      lam << double(i), double(j);
      const kf::FourierValue v = kf::fourier_eval(sys, lam, 1e-12);
      table[i][j] = v.value;
      const Complex m = kf::fourier_mask(sys, lam);
      const kf::FourierValue inner =
          kf::fourier_eval(sys, sys.inverse_t * lam, 1e-12);
      tele = std::max(tele, std::abs(v.value - m * inner.value));
    }
  }

  const std::size_t n_points = 100000;
  const kf::PointCloud cloud = kf::chaos_sample(sys, n_points, 37, 64, 1, 1);
  const double bound = 3.0 / std::sqrt(double(n_points));
  double mc_worst = 0.0;
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 7; ++j) {
      Complex est(0.0, 0.0);
      for (std::size_t p = 0; p < cloud.size(); ++p) {
        const double phase = 2.0 * M_PI *
                             (double(i) * cloud.points(Eigen::Index(p), 0) +
                              double(j) * cloud.points(Eigen::Index(p), 1));
        est += Complex(std::cos(phase), std::sin(phase));
      }
      est /= double(n_points);
      mc_worst = std::max(mc_worst, std::abs(est - table[i][j]));
    }
  }
  criterion(6, "transform scaling + sampling", tele <= 1e-10 &&
                                                   mc_worst <= bound,
            "telescope residual=" + fmt(tele) +
                " (tol 1e-10), MC deviation=" + fmt(mc_worst) + " (bound " +
                fmt(bound) + ")");
}

// --------------------------------------------------------------------------
// 7: digit frequencies and the hard conditional exclusion at one million
// samples.

void criterion_digits() {
  const kf::IfsSystem sys = kf::IfsSystem::builtin("sierpinski-gasket");
  const std::size_t n = 1000000;
  const kf::DigitStatistics st = kf::digit_statistics(sys, n, 41, 12, 1);
  const double p = 2.0 / 3.0;
  const double band = 3.0 * std::sqrt(p * (1.0 - p) / double(n));
  double worst = 0.0;
  for (int k = 0; k < st.k_max; ++k) {
    worst = std::max(worst, std::abs(st.x_freq(k, 0) - p));
    worst = std::max(worst, std::abs(st.y_freq(k, 0) - p));
  }
  const bool freq_ok = worst <= band;
  const bool cond_ok = st.forbidden_pairs == 0 &&
                       st.conditional(1, 0) == 1.0 &&
                       st.conditional(1, 1) == 0.0;
  criterion(7, "digit statistics", freq_ok && cond_ok,
            "max |freq-2/3|=" + fmt(worst) + " (band " + fmt(band) +
                "), forbidden pairs=" + std::to_string(st.forbidden_pairs) +
                ", P(y=0|x=1)=" + fmt(st.conditional(1, 0)));
}

// --------------------------------------------------------------------------
// 8: left fixed vectors of the digit chains, power iteration and closed form.

void criterion_stationary() {
  bool pass = true;
  std::string detail;
  const std::vector<std::pair<std::string, Eigen::RowVectorXd>> cases = [] {
    Eigen::RowVectorXd vg(2), ve(2);
    vg << 2.0 / 3.0, 1.0 / 3.0;
    ve << 3.0 / 4.0, 1.0 / 4.0;
    return std::vector<std::pair<std::string, Eigen::RowVectorXd>>{
        {"sierpinski-gasket", vg}, {"eiffel", ve}};
  }();
  for (const auto& [name, v_exact] : cases) {
    const kf::IfsSystem sys = kf::IfsSystem::builtin(name);
    const kf::TransitionMatrix t = kf::digit_transition(sys);
    const Eigen::RowVectorXd v = kf::stationary_vector(t);
    const double d_power = kf::perron_frobenius_defect(t, v);
    const double d_exact = kf::perron_frobenius_defect(t, v_exact);
    pass = pass && d_power <= 1e-14 && d_exact <= 1e-14;
    if (!detail.empty()) detail += ", ";
    detail += name + ": defect=" + fmt(std::max(d_power, d_exact));
  }
  criterion(8, "stationary digit laws", pass, detail + " (tol 1e-14)");
}

// --------------------------------------------------------------------------
// 9: Hellinger affinity value and both dichotomy verdicts.

void criterion_affinity() {
  const kf::KakutaniReport r =
      kf::kakutani_affinity({2.0 / 3.0, 1.0 / 3.0}, {0.5, 0.5});
  const double oracle =
      std::sqrt((2.0 / 3.0) * 0.5) + std::sqrt((1.0 / 3.0) * 0.5);
  const kf::KakutaniReport eq = kf::kakutani_affinity({0.5, 0.5}, {0.5, 0.5});
  const bool pass = std::abs(r.affinity - 0.98560) <= 1e-5 &&
                    std::abs(r.affinity - oracle) <= 1e-12 &&
                    r.mutually_singular && !eq.mutually_singular &&
                    eq.affinity == 1.0;
  criterion(9, "product-measure dichotomy", pass,
            "affinity=" + fmt(r.affinity) + " vs oracle " + fmt(oracle) +
                ", verdicts " +
                (r.mutually_singular ? "mutually-singular" : "equivalent") +
                "/" + (eq.mutually_singular ? "mutually-singular"
                                            : "equivalent"));
}

// --------------------------------------------------------------------------
// 10: prefractal geometry.  The removed-area half is demanded to 1e-6 at
// depth 20; the partial sum there is still (1/2)(3/4)^20 away from the
// limit, so this half fails by construction and the line reports the exact
// shortfall.  The box-counting slope passes on its stated band.

void criterion_geometry() {
  const kf::IfsSystem sys = kf::IfsSystem::builtin("sierpinski-gasket");
  const kf::GeometryReport rep = kf::geometry_report(sys, 20);
  const double gap = std::abs(rep.removed_area - 0.5);
  const bool area_ok = gap <= 1e-6;
  const bool dim_ok = std::abs(rep.box_dimension - 1.585) <= 0.05;
  criterion(10, "prefractal geometry", area_ok && dim_ok,
            "removed-area gap at depth 20=" + fmt(gap) +
                " (tol 1e-6), box dimension=" + fmt(rep.box_dimension) +
                " (1.585 +- 0.05)");
  if (!area_ok) {
    // Closed form: the depth-d partial sum misses 1/2 by (1/2)(3/4)^d, which
    // is 1.59e-3 at d = 20 and first drops below 1e-6 at d = 46.
    std::printf("          note: gap(d) = (1/2)(3/4)^d; gap(20)=%s, first "
                "depth with gap <= 1e-6 is 46 (gap(46)=%s)\n",
                fmt(0.5 * std::pow(0.75, 20)).c_str(),
                fmt(0.5 * std::pow(0.75, 46)).c_str());
  }
}

// --------------------------------------------------------------------------
// 11: exponential frames.  The Lebesgue window reproduces exactly; the
// singular Bernoulli measure drives the out-of-cone probe defect strictly
// down as the window grows; the power-series coefficients agree with the
// expansion coefficients bit for bit.

void criterion_frames_positive() {
  const kf::IfsSystem leb = kf::IfsSystem::builtin("lebesgue-1d");
  const kf::GramWindow gl =
      kf::gram_window(leb, kf::Enumeration::OneDNatural, 16);
  const kf::CoefficientDual dl = kf::kaczmarz_duals_L2mu(gl);
  double leb_defect = 0.0;
  {
    ComplexVector f = ComplexVector::Zero(16);
    f(0) = 1.0;
    leb_defect = std::max(leb_defect, kf::parseval_defect_L2mu(gl, dl, f));
    f.setZero();
    f(5) = 1.0;
    leb_defect = std::max(leb_defect, kf::parseval_defect_L2mu(gl, dl, f));
    for (Eigen::Index k = 0; k < 16; ++k) {
      f(k) = Complex(1.0 / double(k + 1), 0.3 / double(k + 2));
    }
    leb_defect = std::max(leb_defect, kf::parseval_defect_L2mu(gl, dl, f));
  }

  const kf::IfsSystem bern = kf::IfsSystem::builtin("bernoulli-2-3");
  Eigen::VectorXi kappa(1);
  kappa << -1;
  std::vector<double> seq;
  for (std::size_t w : {16ul, 32ul, 64ul, 128ul, 256ul}) {
    const kf::GramWindow gw =
        kf::gram_window(bern, kf::Enumeration::OneDNatural, w);
    const kf::CoefficientDual dw = kf::kaczmarz_duals_L2mu(gw);
    const ComplexVector cross = kf::cross_gram(bern, gw, kappa);
    seq.push_back(kf::probe_defect(gw, dw, cross));
  }
  bool strict = true;
  for (std::size_t i = 1; i < seq.size(); ++i) {
    strict = strict && seq[i] < seq[i - 1];
  }

  const kf::GramWindow g64 =
      kf::gram_window(bern, kf::Enumeration::OneDNatural, 64);
  const kf::CoefficientDual d64 = kf::kaczmarz_duals_L2mu(g64);
  ComplexVector f3 = ComplexVector::Zero(64);
  f3(3) = 1.0;
  const ComplexVector a_dual = kf::dual_coefficients(g64, d64, f3);
  const ComplexVector a_cauchy = kf::cauchy_coeffs(g64, d64, f3);
  const bool coeff_bits = (a_dual.array() == a_cauchy.array()).all();
  const bool defect_bits = kf::parseval_defect_L2mu(g64, d64, f3) ==
                           kf::defect_from_coeffs(g64, a_cauchy, f3);

  std::string seq_str;
  for (double v : seq) {
    if (!seq_str.empty()) seq_str += " > ";
    seq_str += fmt(v).substr(0, 7);
  }
  criterion(11, "frame expansion in L2(mu)",
            leb_defect <= 1e-12 && strict && coeff_bits && defect_bits,
            "Lebesgue defect=" + fmt(leb_defect) +
                ", probe defects " + seq_str +
                (strict ? " (strictly decreasing)" : " (NOT decreasing)") +
                ", coefficient paths bit-identical=" +
                (coeff_bits && defect_bits ? "yes" : "no"));
}

// --------------------------------------------------------------------------
// 12: the product measure keeps an out-of-cone defect floor at every window.

void criterion_frames_negative() {
  const kf::IfsSystem prod =
      kf::IfsSystem::builtin("product-lebesgue-times-cantor");
  double floor = 1.0;
  bool above = true;
  for (std::size_t w : {16ul, 36ul, 64ul, 100ul, 144ul}) {
    const double r = kf::totality_residual(prod, kf::Enumeration::Diagonal, w);
    floor = std::min(floor, r);
    above = above && r > 0.1;
  }
  criterion(12, "product-measure defect floor", above,
            "min probe defect over windows {16..144}=" + fmt(floor) +
                " (must stay > 0.1)");
}

// --------------------------------------------------------------------------
// 13: every randomized component reproduces bit-exactly across worker counts
// and the KF_WORKERS override.

void criterion_determinism() {
  const kf::IfsSystem gasket = kf::IfsSystem::builtin("sierpinski-gasket");
  bool det = true;

  const kf::PointCloud c1 = kf::chaos_sample(gasket, 200000, 4, 64, 8, 1);
  const kf::PointCloud c3 = kf::chaos_sample(gasket, 200000, 4, 64, 8, 3);
  det = det && (c1.points.array() == c3.points.array()).all() &&
        c1.words == c3.words;
  setenv("KF_WORKERS", "2", 1);
  const kf::PointCloud ce = kf::chaos_sample(gasket, 200000, 4, 64, 8, 1);
  unsetenv("KF_WORKERS");
  det = det && (c1.points.array() == ce.points.array()).all();

  const kf::RandomProjectionLaw law =
      kf::sampling_weights(oblique_matrix(), standard_frame(2)).law;
  const auto probes = kf::probe_panel(2, 1, 9);
  const kf::DecayReport r1 = kf::run_random_products(law, 50, 500, 13, probes, 1);
  const kf::DecayReport r3 = kf::run_random_products(law, 50, 500, 13, probes, 3);
  det = det && r1.mean_energy == r3.mean_energy && r1.ci_half == r3.ci_half;

  const kf::DigitStatistics s1 = kf::digit_statistics(gasket, 200000, 41, 12, 1);
  const kf::DigitStatistics s3 = kf::digit_statistics(gasket, 200000, 41, 12, 3);
  det = det && (s1.x_freq.array() == s3.x_freq.array()).all() &&
        (s1.joint.array() == s3.joint.array()).all();

  const Eigen::Vector2i kappa(1, 0);
  const kf::TensorIsometryResult t1 =
      kf::tensor_isometry_2d(gasket, 5, 5, kappa, 30000, 83, 1e-9, 0.05, 1);
  const kf::TensorIsometryResult t3 =
      kf::tensor_isometry_2d(gasket, 5, 5, kappa, 30000, 83, 1e-9, 0.05, 3);
  det = det && (t1.coeffs.array() == t3.coeffs.array()).all() &&
        t1.f_sq_norm == t3.f_sq_norm && t1.ratio == t3.ratio;

  const kf::IfsSystem bern = kf::IfsSystem::builtin("bernoulli-2-3");
  const kf::GramWindow g1 =
      kf::gram_window(bern, kf::Enumeration::OneDNatural, 64, 1e-10, 1);
  const kf::GramWindow g3 =
      kf::gram_window(bern, kf::Enumeration::OneDNatural, 64, 1e-10, 3);
  det = det && (g1.g.array() == g3.g.array()).all();

  criterion(13, "worker-count determinism", det,
            det ? "chaos, decay, digits, tensor, gram all bit-identical "
                  "for workers 1/3 and KF_WORKERS=2"
                : "bitwise mismatch between worker counts");
}

}  // namespace

int main() {
  criteria_identities();
  criterion_cyclic_solve();
  criterion_random_decay();
  criterion_invariance();
  criterion_fourier();
  criterion_digits();
  criterion_stationary();
  criterion_affinity();
  criterion_geometry();
  criterion_frames_positive();
  criterion_frames_negative();
  criterion_determinism();
  std::printf("%d of 13 criteria failed\n", g_failed);
  return g_failed;
}
