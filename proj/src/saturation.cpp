#include "bo/saturation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "bo/error.hpp"
#include "bo/spectral.hpp"

namespace bo::saturation {

namespace {

constexpr double kRankTolerance = 1e-8;
constexpr double kDegreeTolerance = 1e-10;
constexpr double kOverflowTolerance = 1e-12;
constexpr double kSingularCut = 1e-10;

int coord_degree(const Eigen::VectorXd& v) {
  for (Eigen::Index i = v.size() - 1; i >= 0; --i) {
    if (std::abs(v(i)) > kDegreeTolerance) return static_cast<int>(i / 2) + 1;
  }
  return 0;
}

// Orthonormal columns spanning the columns of g with singular values > tol.
Eigen::MatrixXd range_basis(const Eigen::MatrixXd& g, double tol) {
  if (g.cols() == 0) return Eigen::MatrixXd(g.rows(), 0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(g, Eigen::ComputeThinU);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()(i) > tol) ++rank;
  }
  return svd.matrixU().leftCols(rank);
}

// Right null space of m (columns of V with negligible singular values).
Eigen::MatrixXd null_space(const Eigen::MatrixXd& m, double tol) {
  const Eigen::Index n = m.cols();
  if (m.rows() == 0) return Eigen::MatrixXd::Identity(n, n);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()(i) > tol) ++rank;
  }
  return svd.matrixV().rightCols(n - rank);
}

// Re-orders an orthonormal basis so its leading columns span S ∩ T_m for each m.
Eigen::MatrixXd filtration_basis(const Eigen::MatrixXd& q, int K) {
  const Eigen::Index rows = q.rows();
  Eigen::MatrixXd out(rows, 0);
  for (int m = 1; m <= K && out.cols() < q.cols(); ++m) {
    const Eigen::Index high = rows - 2 * m;
    const Eigen::MatrixXd inside = q * null_space(q.bottomRows(high), kRankTolerance);
    Eigen::MatrixXd fresh = inside - out * (out.transpose() * inside);
    Eigen::MatrixXd added = range_basis(fresh, 0.5);
    if (added.cols() == 0) continue;
    // Clear round-off above mode m so degrees are exact, then restore orthonormality.
    added.bottomRows(high).setZero();
    added -= out * (out.transpose() * added);
    added = Eigen::HouseholderQR<Eigen::MatrixXd>(added).householderQ() * Eigen::MatrixXd::Identity(rows, added.cols());
    Eigen::MatrixXd next(rows, out.cols() + added.cols());
    next << out, added;
    out = std::move(next);
  }
  return out;
}

SpectralField drift_wide(const SpectralField& f, const SpectralField& g, const TorusGrid& wide) {
  return bilinear_drift(f.resampled(wide), g.resampled(wide));
}

}  // namespace

Eigen::VectorXd to_trig(const SpectralField& f) {
  const int K = f.cutoff();
  Eigen::VectorXd v(2 * K);
  for (int k = 1; k <= K; ++k) {
    v(2 * (k - 1)) = 2.0 * f[k].real();
    v(2 * (k - 1) + 1) = -2.0 * f[k].imag();
  }
  return v;
}

SpectralField from_trig(const TorusGrid& grid, const Eigen::VectorXd& coords) {
  const int K = grid.mode_cutoff();
  if (coords.size() != 2 * K) throw Error(ErrorKind::InvalidArgument, "trig coordinate size mismatch");
  SpectralField f(grid);
  for (int k = 1; k <= K; ++k) {
    const Complex c(0.5 * coords(2 * (k - 1)), -0.5 * coords(2 * (k - 1) + 1));
    f[k] = c;
    f[-k] = std::conj(c);
  }
  return f;
}

ModeSpan::ModeSpan(TorusGrid grid, Eigen::MatrixXd basis, int level)
    : grid_(grid), basis_(std::move(basis)), level_(level) {
  if (basis_.rows() != 2 * grid_.mode_cutoff()) {
    throw Error(ErrorKind::InvalidArgument, "basis rows must equal 2K");
  }
  for (Eigen::Index a = 0; a < basis_.cols(); ++a) degrees_.push_back(coord_degree(basis_.col(a)));
}

ModeSpan ModeSpan::level_zero(const TorusGrid& grid) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(2 * grid.mode_cutoff(), 2);
  b(0, 0) = 1.0;
  b(1, 1) = 1.0;
  return ModeSpan(grid, std::move(b), 0);
}

ModeSpan ModeSpan::from_generators(const TorusGrid& grid, const Eigen::MatrixXd& generators, int level) {
  Eigen::MatrixXd normalized(generators.rows(), 0);
  std::vector<Eigen::VectorXd> cols;
  for (Eigen::Index c = 0; c < generators.cols(); ++c) {
    const double n = generators.col(c).norm();
    if (n > kOverflowTolerance) cols.push_back(generators.col(c) / n);
  }
  normalized.resize(generators.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) normalized.col(static_cast<Eigen::Index>(c)) = cols[c];
  const Eigen::MatrixXd q = range_basis(normalized, kRankTolerance);
  return ModeSpan(grid, filtration_basis(q, grid.mode_cutoff()), level);
}

SpectralField ModeSpan::basis_field(int a) const { return from_trig(grid_, basis_.col(a)); }

int ModeSpan::degree(int a) const { return degrees_[static_cast<std::size_t>(a)]; }

Eigen::VectorXd ModeSpan::project(const Eigen::VectorXd& coords) const {
  return basis_ * (basis_.transpose() * coords);
}

SpectralField ModeSpan::project(const SpectralField& f) const {
  return from_trig(grid_, project(to_trig(f)));
}

double ModeSpan::residual(const Eigen::VectorXd& coords) const { return (coords - project(coords)).norm(); }

bool ModeSpan::contains(const SpectralField& f, double tol) const {
  if (std::abs(f.mean()) > tol) return false;
  const Eigen::VectorXd v = to_trig(f);
  return residual(v) <= tol * std::max(1.0, v.norm());
}

int ModeSpan::modes_covered(double tol) const {
  const int K = cutoff();
  for (int m = 1; m <= K; ++m) {
    for (int part = 0; part < 2; ++part) {
      Eigen::VectorXd unit = Eigen::VectorXd::Zero(2 * K);
      unit(2 * (m - 1) + part) = 1.0;
      if (residual(unit) > tol) return m - 1;
    }
  }
  return K;
}

SpectralField bilinear_drift(const SpectralField& f, const SpectralField& g) {
  return 0.5 * spectral::derivative(spectral::dealiased_product(f, g));
}

std::vector<std::pair<int, int>> admissible_pairs(const ModeSpan& span) {
  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < span.dim(); ++a) {
    for (int b = a; b < span.dim(); ++b) {
      if (span.degree(a) + span.degree(b) <= span.cutoff()) pairs.emplace_back(a, b);
    }
  }
  return pairs;
}

ModeSpan ladder_step(const ModeSpan& span, OverflowPolicy policy) {
  const TorusGrid& grid = span.grid();
  const int K = grid.mode_cutoff();
  const TorusGrid wide(2 * K);
  std::vector<Eigen::VectorXd> gens;
  for (int a = 0; a < span.dim(); ++a) gens.push_back(span.basis().col(a));

  std::vector<std::pair<int, int>> pairs;
  if (policy == OverflowPolicy::Restrict) {
    pairs = admissible_pairs(span);
  } else {
    for (int a = 0; a < span.dim(); ++a) {
      for (int b = a; b < span.dim(); ++b) pairs.emplace_back(a, b);
    }
  }
  for (const auto& [a, b] : pairs) {
    const SpectralField d = drift_wide(span.basis_field(a), span.basis_field(b), wide);
    for (int k = K + 1; k <= 2 * K; ++k) {
      if (std::abs(d[k]) > kOverflowTolerance) {
        throw Error(ErrorKind::CutoffOverflow,
                    "drift of basis pair (" + std::to_string(a) + ", " + std::to_string(b) +
                        ") reaches mode " + std::to_string(k) + " > K = " + std::to_string(K));
      }
    }
    gens.push_back(to_trig(d.resampled(grid)));
  }
  Eigen::MatrixXd g(2 * K, static_cast<Eigen::Index>(gens.size()));
  for (std::size_t c = 0; c < gens.size(); ++c) g.col(static_cast<Eigen::Index>(c)) = gens[c];
  return ModeSpan::from_generators(grid, g, span.level() + 1);
}

std::vector<CertificateRow> saturation_certificate(int K, int j_max) {
  if (K < 2) throw Error(ErrorKind::InvalidArgument, "saturation certificate needs K >= 2");
  if (j_max < 0) throw Error(ErrorKind::InvalidArgument, "j_max must be >= 0");
  const TorusGrid grid(K);
  ModeSpan span = ModeSpan::level_zero(grid);
  std::vector<CertificateRow> rows{{0, span.dim(), span.modes_covered()}};
  while (span.level() < j_max && rows.back().modes_covered < K) {
    ModeSpan next = ladder_step(span, OverflowPolicy::Restrict);
    rows.push_back({next.level(), next.dim(), next.modes_covered()});
    if (next.dim() == span.dim()) break;
    span = std::move(next);
  }
  return rows;
}

bool fully_covered(const std::vector<CertificateRow>& rows, int K) {
  return std::any_of(rows.begin(), rows.end(), [K](const CertificateRow& r) { return r.modes_covered >= K; });
}

std::vector<ModeSpan> build_ladder(const TorusGrid& grid, int j_max) {
  std::vector<ModeSpan> ladder{ModeSpan::level_zero(grid)};
  while (ladder.back().modes_covered() < grid.mode_cutoff()) {
    if (ladder.back().level() >= j_max) {
      throw Error(ErrorKind::RecursionLimit, "ladder did not saturate within j_max levels");
    }
    ModeSpan next = ladder_step(ladder.back(), OverflowPolicy::Restrict);
    if (next.dim() == ladder.back().dim()) {
      throw Error(ErrorKind::RecursionLimit, "ladder stabilized before covering every mode");
    }
    ladder.push_back(std::move(next));
  }
  return ladder;
}

SpectralField DirectionDecomposition::reconstruct() const {
  SpectralField sum = eta;
  for (const auto& z : zetas) sum -= spectral::dealiased_product(z, spectral::derivative(z));
  return sum;
}

double DirectionDecomposition::residual() const { return spectral::l2_norm(reconstruct() - target); }

DirectionDecomposition decompose_direction(const SpectralField& target, const ModeSpan& source) {
  if (target.grid() != source.grid()) throw Error(ErrorKind::InvalidArgument, "grid mismatch");
  const TorusGrid& grid = source.grid();
  const double tol = 1e-8 * std::max(1.0, spectral::l2_norm(target));
  if (std::abs(target.mean()) > tol || !target.is_real(tol)) {
    throw Error(ErrorKind::NotInSpan, "target must be real and mean-zero");
  }
  const int d = source.dim();
  const auto pairs = admissible_pairs(source);
  const Eigen::VectorXd t = to_trig(target);
  const Eigen::MatrixXd& basis = source.basis();

  // Quadratic dictionary restricted to the complement of the source span.
  Eigen::MatrixXd dict(t.size(), static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t q = 0; q < pairs.size(); ++q) {
    const auto [a, b] = pairs[q];
    dict.col(static_cast<Eigen::Index>(q)) =
        -to_trig(bilinear_drift(source.basis_field(a), source.basis_field(b)));
  }
  const Eigen::MatrixXd complement = dict - basis * (basis.transpose() * dict);
  const Eigen::VectorXd rhs = t - source.project(t);

  Eigen::VectorXd coef = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pairs.size()));
  if (!pairs.empty()) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(complement, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    Eigen::VectorXd projected = svd.matrixU().transpose() * rhs;
    for (Eigen::Index i = 0; i < sv.size(); ++i) projected(i) = sv(i) > kSingularCut ? projected(i) / sv(i) : 0.0;
    coef = svd.matrixV() * projected;
  }

  // Symmetric coefficient matrix: sum_q coef_q b(e_a, e_b) = B(C).
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t q = 0; q < pairs.size(); ++q) {
    const auto [a, b] = pairs[q];
    if (a == b) {
      C(a, a) += coef(static_cast<Eigen::Index>(q));
    } else {
      C(a, b) += 0.5 * coef(static_cast<Eigen::Index>(q));
      C(b, a) += 0.5 * coef(static_cast<Eigen::Index>(q));
    }
  }

  DirectionDecomposition out;
  out.level = source.level() + 1;
  out.target = target;
  if (d > 0 && C.cwiseAbs().maxCoeff() > 0.0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C);
    const Eigen::VectorXd& mu = eig.eigenvalues();
    const double shift = std::max(0.0, -mu.minCoeff());
    const double scale = std::max(1.0, mu.cwiseAbs().maxCoeff() + shift);
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
      const double weight = mu(i) + shift;
      if (weight <= 1e-14 * scale) continue;
      const Eigen::VectorXd coords = basis * eig.eigenvectors().col(i) * std::sqrt(weight);
      out.zetas.push_back(from_trig(grid, coords));
    }
  }

  SpectralField drift_sum(grid);
  for (const auto& z : out.zetas) drift_sum += spectral::dealiased_product(z, spectral::derivative(z));
  out.eta = source.project(target + drift_sum);

  if (out.residual() > tol) {
    throw Error(ErrorKind::NotInSpan, "target is not in the next ladder level (residual " +
                                          std::to_string(out.residual()) + ")");
  }
  return out;
}

}  // namespace bo::saturation
