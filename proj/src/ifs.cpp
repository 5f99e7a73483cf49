#include "kf/ifs.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <json.hpp>

#include "kf/errors.hpp"
#include "kf/parallel.hpp"
#include "kf/rng.hpp"

namespace kf {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

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

/// Integer pure-scaling data (M = c * identity, integer digit coordinates in
/// [0, c)); several digit-level operations only make sense there.
struct ScalingData {
  int base = 0;
  std::vector<std::array<int, 3>> coords;  // first up-to-3 coordinates
};

ScalingData integer_scaling(const IfsSystem& sys) {
  ScalingData out;
  if (!sys.diagonal_expansion) {
    throw InvalidDescriptor("digit machinery needs a diagonal scaling matrix");
  }
  const double c = sys.diag_scale(0);
  for (Eigen::Index i = 0; i < sys.dim(); ++i) {
    if (std::abs(sys.diag_scale(i) - c) > 1e-12) {
      throw InvalidDescriptor("digit machinery needs a pure scaling matrix");
    }
  }
  const int base = int(std::lround(c));
  if (std::abs(c - base) > 1e-12 || base < 2) {
    throw InvalidDescriptor("digit machinery needs an integer scale >= 2");
  }
  out.base = base;
  for (const Eigen::VectorXd& b : sys.digits) {
    std::array<int, 3> cc{0, 0, 0};
    for (Eigen::Index i = 0; i < std::min<Eigen::Index>(3, sys.dim()); ++i) {
      const int v = int(std::lround(b(i)));
      if (std::abs(b(i) - v) > 1e-12 || v < 0 || v >= base) {
        throw InvalidDescriptor("digit coordinates must be integers in [0, base)");
      }
      cc[std::size_t(i)] = v;
    }
    out.coords.push_back(cc);
  }
  return out;
}

bool is_gasket(const IfsSystem& sys) {
  if (sys.dim() != 2 || sys.alphabet() != 3) return false;
  if (!sys.diagonal_expansion) return false;
  if (std::abs(sys.diag_scale(0) - 2.0) > 1e-12 ||
      std::abs(sys.diag_scale(1) - 2.0) > 1e-12) return false;
  auto has = [&](double x, double y) {
    for (const auto& b : sys.digits) {
      if (std::abs(b(0) - x) < 1e-12 && std::abs(b(1) - y) < 1e-12) return true;
    }
    return false;
  };
  return has(0, 0) && has(1, 0) && has(0, 1);
}

}  // namespace

IfsSystem IfsSystem::create(std::string name, Eigen::MatrixXd expansion,
                            std::vector<Eigen::VectorXd> digits,
                            std::vector<double> weights) {
  if (expansion.rows() != expansion.cols() || expansion.rows() == 0) {
    throw InvalidDescriptor("expansion matrix must be square");
  }
  if (digits.size() < 2) {
    throw InvalidDescriptor("digit set needs at least two elements");
  }
  if (digits.size() != weights.size()) {
    throw InvalidDescriptor("digit and weight counts differ");
  }
  const Eigen::Index d = expansion.rows();
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw InvalidDescriptor("weights must be nonnegative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw InvalidDescriptor("weights must sum to 1");
  }
  for (const Eigen::VectorXd& b : digits) {
    if (b.size() != d) throw InvalidDescriptor("digit dimension mismatch");
  }

  Eigen::EigenSolver<Eigen::MatrixXd> eig(expansion);
  for (Eigen::Index i = 0; i < d; ++i) {
    if (std::abs(eig.eigenvalues()(i)) <= 1.0) {
      throw InvalidDescriptor("expansion matrix must have all eigenvalues outside the unit circle");
    }
  }

  IfsSystem sys;
  sys.name = std::move(name);
  sys.expansion = std::move(expansion);
  sys.digits = std::move(digits);
  sys.weights = std::move(weights);
  sys.inverse = sys.expansion.inverse();
  sys.inverse_t = sys.inverse.transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.inverse);
  sys.contraction = svd.singularValues()(0);
  if (sys.contraction >= 1.0) {
    throw InvalidDescriptor("maps are not contractions in operator norm");
  }
  double max_step = 0.0;
  for (const Eigen::VectorXd& b : sys.digits) {
    max_step = std::max(max_step, (sys.inverse * b).norm());
  }
  sys.attractor_radius = max_step / (1.0 - sys.contraction);
  sys.cdf = cumulative(sys.weights);
  sys.diagonal_expansion = sys.expansion.isDiagonal(1e-14);
  if (sys.diagonal_expansion) sys.diag_scale = sys.expansion.diagonal();
  return sys;
}

IfsSystem IfsSystem::builtin(const std::string& name) {
  auto vec2 = [](double x, double y) {
    Eigen::VectorXd v(2);
    v << x, y;
    return v;
  };
  auto vec3 = [](double x, double y, double z) {
    Eigen::VectorXd v(3);
    v << x, y, z;
    return v;
  };
  auto vec1 = [](double x) {
    Eigen::VectorXd v(1);
    v << x;
    return v;
  };
  if (name == "sierpinski-gasket") {
    return create(name, 2.0 * Eigen::MatrixXd::Identity(2, 2),
                  {vec2(0, 0), vec2(1, 0), vec2(0, 1)},
                  {1.0 / 3, 1.0 / 3, 1.0 / 3});
  }
  if (name == "sierpinski-carpet") {
    std::vector<Eigen::VectorXd> digits;
    std::vector<double> weights;
    for (int y = 0; y < 3; ++y) {
      for (int x = 0; x < 3; ++x) {
        if (x == 1 && y == 1) continue;
        digits.push_back(vec2(x, y));
        weights.push_back(1.0 / 8);
      }
    }
    return create(name, 3.0 * Eigen::MatrixXd::Identity(2, 2), digits, weights);
  }
  if (name == "eiffel") {
    return create(name, 2.0 * Eigen::MatrixXd::Identity(3, 3),
                  {vec3(0, 0, 0), vec3(1, 0, 0), vec3(0, 1, 0), vec3(0, 0, 1)},
                  {0.25, 0.25, 0.25, 0.25});
  }
  if (name == "product-lebesgue-times-cantor") {
    // Lebesgue in x (uniform binary digit) times the singular Bernoulli
    // measure with digit law (2/3, 1/3) in y; digit pairs are independent.
    return create(name, 2.0 * Eigen::MatrixXd::Identity(2, 2),
                  {vec2(0, 0), vec2(1, 0), vec2(0, 1), vec2(1, 1)},
                  {1.0 / 3, 1.0 / 3, 1.0 / 6, 1.0 / 6});
  }
  if (name == "lebesgue-1d") {
    return create(name, 2.0 * Eigen::MatrixXd::Identity(1, 1),
                  {vec1(0), vec1(1)}, {0.5, 0.5});
  }
  if (name == "bernoulli-2-3") {
    return create(name, 2.0 * Eigen::MatrixXd::Identity(1, 1),
                  {vec1(0), vec1(1)}, {2.0 / 3, 1.0 / 3});
  }
  throw InvalidDescriptor("unknown built-in system: " + name);
}

IfsSystem IfsSystem::from_json(const nlohmann::json& doc) {
  try {
    const int d = doc.at("dim").get<int>();
    if (d <= 0) throw InvalidDescriptor("dim must be positive");
    Eigen::MatrixXd m(d, d);
    const auto& rows = doc.at("expansion");
    if (int(rows.size()) != d) throw InvalidDescriptor("expansion row count");
    for (int i = 0; i < d; ++i) {
      if (int(rows[i].size()) != d) throw InvalidDescriptor("expansion row size");
      for (int j = 0; j < d; ++j) m(i, j) = rows[i][j].get<double>();
    }
    std::vector<Eigen::VectorXd> digits;
    for (const auto& row : doc.at("digits")) {
      if (int(row.size()) != d) throw InvalidDescriptor("digit size");
      Eigen::VectorXd b(d);
      for (int j = 0; j < d; ++j) b(j) = row[j].get<double>();
      digits.push_back(b);
    }
    std::vector<double> weights = doc.at("weights").get<std::vector<double>>();
    std::string name = doc.value("name", std::string("custom"));
    return create(std::move(name), std::move(m), std::move(digits),
                  std::move(weights));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidDescriptor(std::string("malformed system descriptor: ") + e.what());
  }
}

nlohmann::json IfsSystem::to_json() const {
  nlohmann::json doc;
  doc["name"] = name;
  doc["dim"] = dim();
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < dim(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < dim(); ++j) row.push_back(expansion(i, j));
    rows.push_back(row);
  }
  doc["expansion"] = rows;
  auto ds = nlohmann::json::array();
  for (const auto& b : digits) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < dim(); ++j) row.push_back(b(j));
    ds.push_back(row);
  }
  doc["digits"] = ds;
  doc["weights"] = weights;
  return doc;
}

Eigen::VectorXd IfsSystem::map(std::size_t b, const Eigen::VectorXd& x) const {
  if (b >= digits.size()) throw InvalidDescriptor("digit index out of range");
  if (diagonal_expansion) {
    return (x + digits[b]).cwiseQuotient(diag_scale);
  }
  return inverse * (x + digits[b]);
}

AddressResult address_point(const IfsSystem& sys,
                            std::span<const std::size_t> word) {
  AddressResult out;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(sys.dim());
  for (std::size_t k = word.size(); k-- > 0;) {
    if (word[k] >= sys.alphabet()) {
      throw InvalidDescriptor("address word digit out of range");
    }
    x = sys.map(word[k], x);
  }
  out.point = std::move(x);
  out.tail_bound =
      std::pow(sys.contraction, double(word.size())) * sys.attractor_radius;
  return out;
}

PointCloud chaos_sample(const IfsSystem& sys, std::size_t n_points,
                        std::uint64_t seed, std::size_t burn_in,
                        std::size_t logged_depth, int workers) {
  if (burn_in == 0) throw InvalidDescriptor("burn_in must be positive");
  logged_depth = std::min(logged_depth, burn_in);
  PointCloud cloud;
  cloud.points.resize(Eigen::Index(n_points), sys.dim());
  cloud.words.assign(n_points * logged_depth, 0);
  cloud.logged_depth = logged_depth;
  cloud.burn_in = burn_in;
  cloud.seed = seed;

  const bool fast = sys.diagonal_expansion;
  parallel_chunks(n_points, workers, [&](std::size_t begin, std::size_t end) {
    std::vector<std::uint8_t> word(burn_in);
    Eigen::VectorXd x(sys.dim());
    for (std::size_t i = begin; i < end; ++i) {
      Philox rng(seed, i);
      for (std::size_t k = 0; k < burn_in; ++k) {
        word[k] = std::uint8_t(rng.next_index(sys.cdf));
      }
      x.setZero();
      // Horner sum over the word: x = M^{-1}(b_{w_1} + M^{-1}(b_{w_2} + ...)).
      if (fast) {
        for (std::size_t k = burn_in; k-- > 0;) {
          x = (x + sys.digits[word[k]]).cwiseQuotient(sys.diag_scale);
        }
      } else {
        for (std::size_t k = burn_in; k-- > 0;) {
          x = sys.inverse * (x + sys.digits[word[k]]);
        }
      }
      cloud.points.row(Eigen::Index(i)) = x.transpose();
      std::copy(word.begin(), word.begin() + std::ptrdiff_t(logged_depth),
                cloud.words.begin() + std::ptrdiff_t(i * logged_depth));
    }
  });
  return cloud;
}

InvarianceResult invariance_check(
    const IfsSystem& sys,
    const std::function<std::complex<double>(const Eigen::VectorXd&)>& f,
    const PointCloud& cloud) {
  const std::size_t n = cloud.size();
  if (n < 2) throw InvalidDescriptor("invariance check needs at least two points");
  std::vector<std::complex<double>> fx(n), pushed(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::VectorXd x = cloud.points.row(Eigen::Index(i)).transpose();
    fx[i] = f(x);
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t b = 0; b < sys.alphabet(); ++b) {
      if (sys.weights[b] == 0.0) continue;
      acc += sys.weights[b] * f(sys.map(b, x));
    }
    pushed[i] = acc;
  }
  InvarianceResult out;
  out.lhs = pairwise_sum(fx) / double(n);
  out.rhs = pairwise_sum(pushed) / double(n);
  std::vector<double> dev(n);
  const std::complex<double> mean_diff = out.lhs - out.rhs;
  for (std::size_t i = 0; i < n; ++i) {
    dev[i] = std::norm(fx[i] - pushed[i] - mean_diff);
  }
  const double var = pairwise_sum(dev) / double(n - 1);
  out.defect = std::abs(mean_diff);
  out.band = 3.0 * std::sqrt(var / double(n));
  out.pass = out.defect <= out.band;
  return out;
}

std::complex<double> fourier_mask(const IfsSystem& sys,
                                  const Eigen::VectorXd& freq) {
  std::complex<double> acc(0.0, 0.0);
  for (std::size_t b = 0; b < sys.alphabet(); ++b) {
    const double phase = kTwoPi * freq.dot(sys.inverse * sys.digits[b]);
    acc += sys.weights[b] * std::complex<double>(std::cos(phase), std::sin(phase));
  }
  return acc;
}

FourierValue fourier_eval(const IfsSystem& sys, const Eigen::VectorXd& freq,
                          double tol) {
  if (freq.size() != sys.dim()) {
    throw DimensionMismatch("frequency dimension does not match the system");
  }
  if (tol <= 0.0) throw InvalidDescriptor("truncation tolerance must be positive");
  FourierValue out;
  out.value = 1.0;
  Eigen::VectorXd cur = freq;
  int guard = 0;
  while (cur.lpNorm<Eigen::Infinity>() >= tol) {
    out.value *= fourier_mask(sys, cur);
    cur = sys.inverse_t * cur;
    if (++guard > 100000) throw Error("fourier product failed to contract");
  }
  out.factors = guard;
  out.tail_bound = std::abs(out.value) * kTwoPi * cur.norm() * sys.attractor_radius;
  return out;
}

DigitStatistics digit_statistics(const IfsSystem& sys, std::size_t n_points,
                                 std::uint64_t seed, int k_max, int workers) {
  if (sys.dim() < 2) {
    throw InvalidDescriptor("digit statistics need at least two coordinates");
  }
  if (k_max < 1) throw InvalidDescriptor("k_max must be positive");
  const ScalingData sc = integer_scaling(sys);
  const std::size_t depth = std::size_t(k_max);
  const PointCloud cloud =
      chaos_sample(sys, n_points, seed, std::max<std::size_t>(64, depth),
                   depth, workers);

  DigitStatistics stats;
  stats.samples = n_points;
  stats.k_max = k_max;
  stats.base = sc.base;
  stats.x_freq = Eigen::MatrixXd::Zero(k_max, sc.base);
  stats.y_freq = Eigen::MatrixXd::Zero(k_max, sc.base);
  stats.joint = Eigen::MatrixXd::Zero(sc.base, sc.base);

  // Digit pairs allowed by the digit set; anything else is a violation.
  Eigen::MatrixXd allowed = Eigen::MatrixXd::Zero(sc.base, sc.base);
  for (const auto& cc : sc.coords) allowed(cc[0], cc[1]) = 1.0;

  for (std::size_t i = 0; i < n_points; ++i) {
    const std::uint8_t* w = cloud.word(i);
    for (int k = 0; k < k_max; ++k) {
      const auto& cc = sc.coords[w[k]];
      stats.x_freq(k, cc[0]) += 1.0;
      stats.y_freq(k, cc[1]) += 1.0;
      stats.joint(cc[0], cc[1]) += 1.0;
      if (allowed(cc[0], cc[1]) == 0.0) ++stats.forbidden_pairs;
    }
  }
  stats.x_freq /= double(n_points);
  stats.y_freq /= double(n_points);
  stats.conditional = Eigen::MatrixXd::Zero(sc.base, sc.base);
  for (int a = 0; a < sc.base; ++a) {
    const double row = stats.joint.row(a).sum();
    if (row > 0.0) stats.conditional.row(a) = stats.joint.row(a) / row;
  }
  stats.joint /= double(n_points) * double(k_max);
  return stats;
}

TransitionMatrix TransitionMatrix::create(Eigen::MatrixXd t) {
  if (t.rows() != t.cols() || t.rows() == 0) {
    throw NotStochastic("transition matrix must be square");
  }
  for (Eigen::Index i = 0; i < t.rows(); ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < t.cols(); ++j) {
      if (t(i, j) < -1e-15) throw NotStochastic("negative transition entry");
      row += t(i, j);
    }
    if (std::abs(row - 1.0) > 1e-12) {
      throw NotStochastic("transition rows must sum to 1");
    }
  }
  TransitionMatrix out;
  out.t = std::move(t);
  return out;
}

TransitionMatrix digit_transition(const IfsSystem& sys) {
  if (sys.dim() < 2) {
    throw InvalidDescriptor("digit chain needs at least two coordinates");
  }
  const ScalingData sc = integer_scaling(sys);
  Eigen::MatrixXd joint = Eigen::MatrixXd::Zero(sc.base, sc.base);
  for (std::size_t b = 0; b < sys.alphabet(); ++b) {
    joint(sc.coords[b][0], sc.coords[b][1]) += sys.weights[b];
  }
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(sc.base, sc.base);
  for (int a = 0; a < sc.base; ++a) {
    const double row = joint.row(a).sum();
    if (row <= 0.0) {
      throw NotStochastic("a first-coordinate digit value carries no mass");
    }
    t.row(a) = joint.row(a) / row;
  }
  return TransitionMatrix::create(std::move(t));
}

Eigen::RowVectorXd digit_marginal(const IfsSystem& sys, int coord) {
  const ScalingData sc = integer_scaling(sys);
  if (coord < 0 || coord >= std::min<int>(3, int(sys.dim()))) {
    throw InvalidDescriptor("marginal coordinate out of range");
  }
  Eigen::RowVectorXd v = Eigen::RowVectorXd::Zero(sc.base);
  for (std::size_t b = 0; b < sys.alphabet(); ++b) {
    v(sc.coords[b][std::size_t(coord)]) += sys.weights[b];
  }
  return v;
}

double perron_frobenius_defect(const TransitionMatrix& t,
                               const Eigen::RowVectorXd& v) {
  if (v.size() != t.t.rows()) {
    throw DimensionMismatch("fixed-vector dimension does not match the chain");
  }
  return (v * t.t - v).lpNorm<Eigen::Infinity>();
}

Eigen::RowVectorXd stationary_vector(const TransitionMatrix& t,
                                     int iterations) {
  const Eigen::Index n = t.t.rows();
  Eigen::RowVectorXd v = Eigen::RowVectorXd::Constant(n, 1.0 / double(n));
  for (int i = 0; i < iterations; ++i) {
    Eigen::RowVectorXd next = v * t.t;
    next /= next.sum();
    if ((next - v).lpNorm<Eigen::Infinity>() < 1e-15) return next;
    v = next;
  }
  return v;
}

KakutaniReport kakutani_affinity(const std::vector<double>& p,
                                 const std::vector<double>& q) {
  if (p.size() != q.size()) {
    throw LengthMismatch("weight vectors differ in length");
  }
  if (p.empty()) throw InvalidDescriptor("weight vectors must be nonempty");
  double sp = 0.0, sq = 0.0, rho = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0.0 || q[i] < 0.0) {
      throw InvalidDescriptor("weights must be nonnegative");
    }
    sp += p[i];
    sq += q[i];
    rho += std::sqrt(p[i] * q[i]);
  }
  if (std::abs(sp - 1.0) > 1e-9 || std::abs(sq - 1.0) > 1e-9) {
    throw InvalidDescriptor("weights must sum to 1");
  }
  KakutaniReport out;
  out.affinity = rho;
  // rho = 1 forces p = q (equality in Cauchy-Schwarz); otherwise the product
  // measures separate.
  out.mutually_singular = rho < 1.0 - 1e-12;
  return out;
}

std::vector<double> sample_slice(const IfsSystem& sys,
                                 std::span<const int> x_digits,
                                 std::size_t n_samples, std::uint64_t seed) {
  const ScalingData sc = integer_scaling(sys);
  const TransitionMatrix chain = digit_transition(sys);
  std::vector<std::vector<double>> row_cdf(std::size_t(sc.base));
  for (int a = 0; a < sc.base; ++a) {
    std::vector<double> w(std::size_t(sc.base));
    for (int b = 0; b < sc.base; ++b) w[std::size_t(b)] = chain.t(a, b);
    row_cdf[std::size_t(a)] = cumulative(w);
  }
  for (int d : x_digits) {
    if (d < 0 || d >= sc.base) throw InvalidDescriptor("x digit out of range");
  }
  std::vector<double> ys;
  ys.reserve(n_samples);
  const double inv_base = 1.0 / double(sc.base);
  for (std::size_t s = 0; s < n_samples; ++s) {
    Philox rng(seed, s);
    double y = 0.0, scale = 1.0;
    for (int d : x_digits) {
      scale *= inv_base;
      y += scale * double(rng.next_index(row_cdf[std::size_t(d)]));
    }
    ys.push_back(y);
  }
  return ys;
}

GeometryReport geometry_report(const IfsSystem& sys, int depth) {
  if (!is_gasket(sys)) {
    throw InvalidDescriptor("geometry report is defined for the Sierpinski gasket");
  }
  if (depth < 1) throw InvalidDescriptor("depth must be positive");

  GeometryReport out;
  out.depth = depth;
  // Areas of the triangles deleted at each subdivision level, relative to the
  // unit right triangle of area 1/2: level j removes 3^{j-1} triangles of
  // area (1/2) 4^{-j}.
  double term = 1.0 / 8.0;
  for (int j = 1; j <= depth; ++j) {
    out.removed_area += term;
    term *= 0.75;
  }

  // Box counting on the level-L prefractal (all 3^L address points); the
  // enumeration is capped so the point count stays moderate while still
  // covering every requested dyadic scale up to 2^{-12}.
  const int level = std::min(depth, 12);
  std::vector<Eigen::Vector2d> pts{Eigen::Vector2d::Zero()};
  for (int l = 0; l < level; ++l) {
    std::vector<Eigen::Vector2d> next;
    next.reserve(pts.size() * 3);
    for (const auto& p : pts) {
      for (std::size_t b = 0; b < 3; ++b) {
        next.emplace_back(0.5 * (p + sys.digits[b]));
      }
    }
    pts.swap(next);
  }

  std::vector<double> log_counts, scales;
  for (int s = 3; s <= level; ++s) {
    const double factor = double(1u << s);
    std::vector<std::uint32_t> cells;
    cells.reserve(pts.size());
    for (const auto& p : pts) {
      const std::uint32_t ix = std::uint32_t(
          std::min(factor - 1.0, std::floor(p.x() * factor)));
      const std::uint32_t iy = std::uint32_t(
          std::min(factor - 1.0, std::floor(p.y() * factor)));
      cells.push_back((ix << 16) | iy);
    }
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
    out.box_counts.push_back(cells.size());
    log_counts.push_back(std::log2(double(cells.size())));
    scales.push_back(double(s));
  }
  if (scales.size() < 2) {
    throw InvalidDescriptor("depth too small for a box-dimension fit (need depth >= 4)");
  }
  const double n = double(scales.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < scales.size(); ++i) {
    sx += scales[i];
    sy += log_counts[i];
    sxx += scales[i] * scales[i];
    sxy += scales[i] * log_counts[i];
  }
  out.box_dimension = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return out;
}

ConjectureReport conjecture_probe(
    const IfsSystem& sys,
    const std::function<double(const IfsSystem&)>& totality_residual) {
  ConjectureReport out;
  out.marginal = digit_marginal(sys, 0);
  const double lo = out.marginal.minCoeff();
  const double hi = out.marginal.maxCoeff();
  out.marginal_constant = (hi - lo) <= 1e-12;
  const TransitionMatrix chain = digit_transition(sys);
  out.transition = chain.t;
  out.stationarity_defect = perron_frobenius_defect(chain, out.marginal);
  out.power_stationary = stationary_vector(chain);
  out.totality_residual = totality_residual
                              ? totality_residual(sys)
                              : std::numeric_limits<double>::quiet_NaN();
  return out;
}

}  // namespace kf
