#include "kf/kaczmarz.hpp"

#include "kf/errors.hpp"

namespace kf {

ComplexVector classical_step(const ComplexVector& x_prev,
                             const ComplexVector& a_row, Complex b_val) {
  if (x_prev.size() != a_row.size()) {
    throw DimensionMismatch("row and iterate dimensions differ");
  }
  const double sq = a_row.squaredNorm();
  if (sq < kZeroTol * kZeroTol) {
    throw ZeroVector("classical step needs a nonzero row");
  }
  const Complex defect = b_val - a_row.dot(x_prev);
  return x_prev + (defect / sq) * a_row;
}

KaczmarzTrajectory run_products(const ProjectionSystem& sys, std::size_t n_max,
                                const std::vector<ComplexVector>& probes,
                                bool store_operators) {
  const Eigen::Index d = sys.dim();
  KaczmarzTrajectory traj;
  traj.probes = probes;
  traj.t_norms.assign(probes.size(), {});
  std::vector<ComplexVector> state = probes;
  for (ComplexVector& v : state) {
    if (v.size() != d) {
      throw DimensionMismatch("probe dimension does not match the system");
    }
  }

  ComplexMatrix t_prev;
  if (store_operators) {
    t_prev = ComplexMatrix::Identity(d, d);
    traj.t_ops.reserve(n_max + 1);
    traj.q_ops.reserve(n_max + 1);
  }

  for (std::size_t n = 0; n <= n_max; ++n) {
    const Projection p = sys.at(n);
    for (std::size_t i = 0; i < state.size(); ++i) {
      state[i] -= p.apply(state[i]);
      traj.t_norms[i].push_back(state[i].norm());
    }
    if (store_operators) {
      const ComplexMatrix pm = p.matrix();
      traj.q_ops.push_back(pm * t_prev);
      t_prev -= traj.q_ops.back();
      traj.t_ops.push_back(t_prev);
    }
  }
  return traj;
}

IdentityReport verify_identities(const ProjectionSystem& sys,
                                 std::size_t n_max) {
  const Eigen::Index d = sys.dim();
  const ComplexMatrix id = ComplexMatrix::Identity(d, d);
  KaczmarzTrajectory traj = run_products(sys, n_max, {}, true);

  IdentityReport report;
  report.delta1.reserve(n_max + 1);
  report.delta2.reserve(n_max + 1);
  ComplexMatrix sum_qq = ComplexMatrix::Zero(d, d);
  ComplexMatrix sum_q = ComplexMatrix::Zero(d, d);
  for (std::size_t n = 0; n <= n_max; ++n) {
    const ComplexMatrix& t = traj.t_ops[n];
    const ComplexMatrix& q = traj.q_ops[n];
    sum_qq += q.adjoint() * q;
    sum_q += q;
    const double d1 = operator_norm(id - t.adjoint() * t - sum_qq);
    const double d2 = operator_norm(id - t - sum_q);
    report.delta1.push_back(d1);
    report.delta2.push_back(d2);
    report.max_delta1 = std::max(report.max_delta1, d1);
    report.max_delta2 = std::max(report.max_delta2, d2);
  }
  return report;
}

DualSequence dual_sequence(const std::vector<ComplexVector>& es) {
  if (es.empty()) throw Error("dual sequence needs at least one vector");
  const Eigen::Index d = es.front().size();
  DualSequence duals;
  duals.g.reserve(es.size());
  for (std::size_t n = 0; n < es.size(); ++n) {
    if (es[n].size() != d) {
      throw DimensionMismatch("vectors of a dual sequence must share a dimension");
    }
    if (std::abs(es[n].norm() - 1.0) > kUnitTol) {
      throw NotNormalized("dual sequence needs unit vectors");
    }
    ComplexVector g = es[n];
    for (std::size_t j = 0; j < n; ++j) {
      g -= es[j].dot(es[n]) * duals.g[j];
    }
    duals.g.push_back(std::move(g));
  }
  return duals;
}

EffectivenessReport effectiveness_test(const ProjectionSystem& sys,
                                       std::size_t horizon, int random_probes,
                                       double tol, std::uint64_t seed) {
  if (horizon == 0) throw Error("effectiveness horizon must be positive");
  const std::vector<ComplexVector> panel =
      probe_panel(sys.dim(), random_probes, seed);
  KaczmarzTrajectory traj = run_products(sys, horizon - 1, panel, false);
  EffectivenessReport report;
  report.horizon = horizon;
  report.tol = tol;
  report.probe_count = panel.size();
  for (const auto& norms : traj.t_norms) {
    report.residual = std::max(report.residual, norms.back());
  }
  report.effective = report.residual <= tol;
  return report;
}

ComplexVector reconstruct(const ComplexVector& x, const DualSequence& duals,
                          const std::vector<ComplexVector>& es) {
  if (duals.g.size() != es.size()) {
    throw LengthMismatch("dual sequence and vector list differ in length");
  }
  ComplexVector out = ComplexVector::Zero(x.size());
  for (std::size_t j = 0; j < es.size(); ++j) {
    if (duals.g[j].size() != x.size() || es[j].size() != x.size()) {
      throw DimensionMismatch("reconstruction dimensions differ");
    }
    out += duals.g[j].dot(x) * es[j];
  }
  return out;
}

ParsevalReport parseval_check(const DualSequence& duals, int random_probes,
                              double tol, std::uint64_t seed) {
  if (duals.g.empty()) throw Error("parseval check needs a dual sequence");
  const Eigen::Index d = duals.g.front().size();
  const std::vector<ComplexVector> panel = probe_panel(d, random_probes, seed);
  ParsevalReport report;
  report.tol = tol;
  report.probe_count = panel.size();
  for (const ComplexVector& x : panel) {
    double sum = 0.0;
    for (const ComplexVector& g : duals.g) sum += std::norm(g.dot(x));
    const double nx = x.squaredNorm();
    report.max_defect = std::max(report.max_defect, std::abs(sum - nx) / nx);
  }
  report.pass = report.max_defect <= tol;
  return report;
}

DilationReport dilation_check(const ProjectionSystem& sys, std::size_t n_max) {
  const Eigen::Index d = sys.dim();
  KaczmarzTrajectory traj = run_products(sys, n_max, {}, true);
  const std::size_t count = traj.q_ops.size();

  ComplexMatrix v(Eigen::Index(count) * d, d);
  for (std::size_t j = 0; j < count; ++j) {
    v.block(Eigen::Index(j) * d, 0, d, d) = traj.q_ops[j];
  }

  DilationReport report;
  ComplexMatrix sum_qq = ComplexMatrix::Zero(d, d);
  for (std::size_t j = 0; j < count; ++j) {
    const ComplexMatrix& q = traj.q_ops[j];
    sum_qq += q.adjoint() * q;
    // V* E_j V extracts the j-th block row, so the factorization residual is
    // pure bookkeeping; it is still measured, not assumed.
    const ComplexMatrix vej = v.block(Eigen::Index(j) * d, 0, d, d);
    report.max_factorization_residual =
        std::max(report.max_factorization_residual,
                 operator_norm(q.adjoint() * q - vej.adjoint() * vej));
  }
  const ComplexMatrix id = ComplexMatrix::Identity(d, d);
  report.isometry_defect = operator_norm(v.adjoint() * v - id);
  report.parseval_operator_defect = operator_norm(id - sum_qq);
  return report;
}

}  // namespace kf
