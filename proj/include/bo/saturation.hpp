#pragma once

#include <vector>

#include <Eigen/Dense>

#include "bo/field.hpp"

namespace bo::saturation {

/// Coordinates of a real mean-zero field in the trig basis
/// (cos x, sin x, cos 2x, sin 2x, ..., cos Kx, sin Kx).
Eigen::VectorXd to_trig(const SpectralField& f);
SpectralField from_trig(const TorusGrid& grid, const Eigen::VectorXd& coords);

/// A subspace of mean-zero trigonometric polynomials of degree <= K with an
/// orthonormal basis (in trig coordinates) adapted to the degree filtration:
/// the first dim(S ∩ T_m) columns span S ∩ T_m for every m.
class ModeSpan {
 public:
  ModeSpan() = default;
  ModeSpan(TorusGrid grid, Eigen::MatrixXd basis, int level);

  /// span{sin x, cos x}
  static ModeSpan level_zero(const TorusGrid& grid);
  /// Orthonormalized span of the generator columns (rank tolerance 1e-8).
  static ModeSpan from_generators(const TorusGrid& grid, const Eigen::MatrixXd& generators, int level);

  const TorusGrid& grid() const { return grid_; }
  int cutoff() const { return grid_.mode_cutoff(); }
  int level() const { return level_; }
  int dim() const { return static_cast<int>(basis_.cols()); }
  const Eigen::MatrixXd& basis() const { return basis_; }

  SpectralField basis_field(int a) const;
  /// Trig degree of basis column a.
  int degree(int a) const;

  Eigen::VectorXd project(const Eigen::VectorXd& coords) const;
  SpectralField project(const SpectralField& f) const;
  /// ||x - P x|| in trig coordinates.
  double residual(const Eigen::VectorXd& coords) const;
  bool contains(const SpectralField& f, double tol = 1e-8) const;
  /// Largest m such that every sin kx, cos kx with k <= m lies in the span.
  int modes_covered(double tol = 1e-8) const;

 private:
  TorusGrid grid_;
  Eigen::MatrixXd basis_;
  int level_ = 0;
  std::vector<int> degrees_;
};

/// b(f, g) = (1/2) d/dx (f g), computed on the grid of f. b(f, f) = f f_x.
SpectralField bilinear_drift(const SpectralField& f, const SpectralField& g);

enum class OverflowPolicy {
  /// Throw CutoffOverflow when a quadratic generator has modes above K.
  Strict,
  /// Drop generator pairs whose product degree exceeds K.
  Restrict,
};

/// Next level: span of the current basis and b(e_a, e_b) over basis pairs.
ModeSpan ladder_step(const ModeSpan& span, OverflowPolicy policy = OverflowPolicy::Strict);

/// Basis pairs (a, b), a <= b, whose drift stays inside the band.
std::vector<std::pair<int, int>> admissible_pairs(const ModeSpan& span);

struct CertificateRow {
  int level = 0;
  int dim = 0;
  int modes_covered = 0;
};

/// Runs the restricted ladder from level 0 at cutoff K until full coverage,
/// stabilization, or j_max levels.
std::vector<CertificateRow> saturation_certificate(int K, int j_max = 64);
bool fully_covered(const std::vector<CertificateRow>& rows, int K);

/// H_0, ..., H_J with J the first level covering every mode <= K.
std::vector<ModeSpan> build_ladder(const TorusGrid& grid, int j_max = 64);

/// target = eta - sum_i zeta_i d/dx zeta_i with eta and every zeta_i in the
/// source span.
struct DirectionDecomposition {
  int level = 0;
  SpectralField eta;
  std::vector<SpectralField> zetas;
  SpectralField target;

  SpectralField reconstruct() const;
  double residual() const;
};

/// Least squares over {e_a} and {-b(e_a, e_b)} (rank truncation at 1e-10),
/// then diagonalization of the symmetric quadratic coefficient matrix. The
/// matrix is shifted by a multiple of the identity, whose drift vanishes for
/// translation-invariant spans, so every term enters with a minus sign.
/// Throws NotInSpan when the residual exceeds 1e-8 max(1, ||target||).
DirectionDecomposition decompose_direction(const SpectralField& target, const ModeSpan& source);

}  // namespace bo::saturation
