#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bo/field.hpp"
#include "bo/solver.hpp"

namespace bo::random_forcing {

enum class VariateLaw {
  StandardNormal,
  /// Every variate is 0. Only for deterministic harness runs.
  Zero,
};

/// eta_k(t) = sum_j b_j xi_{l,k,j} e_j(t) on each channel l (sin x, cos x),
/// b_j = b0 / j, e_j the orthonormal cosine basis of L2(0, T).
class NoiseModel {
 public:
  NoiseModel(double b0, double period = 1.0, int truncation = 16, VariateLaw law = VariateLaw::StandardNormal);

  double b0() const { return b0_; }
  double period() const { return basis_.period; }
  int truncation() const { return basis_.size; }
  VariateLaw law() const { return law_; }
  const CosineBasis& basis() const { return basis_; }
  const std::vector<double>& amplitudes() const { return amplitudes_; }
  /// sum_{j <= J} b_j^2
  double amplitude_sum_squares() const { return sum_squares_; }
  /// E ||eta||^2 in L2(0, T; L2) = 2 pi sum_j b_j^2.
  double expected_energy() const;
  /// max |G - I| of the basis Gram matrix under midpoint quadrature.
  double gram_error() const { return gram_error_; }

 private:
  double b0_;
  VariateLaw law_;
  CosineBasis basis_;
  std::vector<double> amplitudes_;
  double sum_squares_ = 0.0;
  double gram_error_ = 0.0;
};

/// Standard normal variate addressed by (seed, k, l, j). A ChaCha20 stream
/// keyed by the seed, with nonce (k, l), supplies the uniforms at block
/// position j; Box-Muller turns them into a normal.
double normal_variate(std::uint64_t seed, std::uint64_t k, std::uint32_t l, std::uint32_t j);

/// Deterministic 64-bit seed for sub-stream `index` of `base`.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

/// Noise on period k: channel coefficients c_{l,j} = b_j xi_{l,k,j}.
ForcingInput sample_noise(const NoiseModel& model, std::uint64_t k, std::uint64_t seed);

/// ||eta||^2 in L2(0, T; L2) of a basis-series sample.
double noise_energy(const ForcingInput& noise);

/// u_{k+1} = R_T(u_k, eta_k).
SpectralField markov_step(const SpectralField& u, const NoiseModel& model, std::uint64_t k, std::uint64_t seed,
                          const IntegratorConfig& cfg);

struct ChainStats {
  /// ||u_k||_s for k = 0 .. min(tau, n_periods).
  std::vector<double> norms;
  /// First k with ||u_k||_s > M; empty when never reached.
  std::optional<int> tau;
  /// A non-finite state stopped the chain at this period without the
  /// last finite norm exceeding M.
  std::optional<int> censored_at;
  std::uint64_t seed = 0;
  double s = 1.0;
  double M = 0.0;

  bool hit_by(int n) const { return tau.has_value() && *tau <= n; }
};

ChainStats run_chain(const SpectralField& u0, const NoiseModel& model, int n_periods, double s, double M,
                     std::uint64_t seed, const IntegratorConfig& cfg);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

/// Wilson score interval at z = 1.96.
Interval wilson_interval(int successes, int trials, double z = 1.959963984540054);

struct HittingCurve {
  /// P{tau_M <= n} for n = 1 .. n_periods.
  std::vector<double> probability;
  std::vector<Interval> interval;
  int trials = 0;
  int censored = 0;
};

struct EnsembleResult {
  /// chains[i][t]: initial state i, trial t.
  std::vector<std::vector<ChainStats>> chains;
  std::vector<HittingCurve> curves;
  /// min_i P{tau_M <= 1} over the initial states.
  double p1_min = 0.0;
};

struct EnsembleConfig {
  int n_periods = 20;
  int trials = 100;
  double s = 1.0;
  double M = 1.0;
  std::uint64_t base_seed = 0;
  /// Worker count for the parallel ensemble; 0 uses the OpenMP default.
  int workers = 0;
};

/// Chains only, trials in parallel. Any trial count >= 1.
std::vector<std::vector<ChainStats>> run_ensemble(const std::vector<SpectralField>& initial_states,
                                                  const NoiseModel& model, const EnsembleConfig& ens,
                                                  const IntegratorConfig& cfg);
/// Same chains, one trial after another.
std::vector<std::vector<ChainStats>> run_ensemble_serial(const std::vector<SpectralField>& initial_states,
                                                         const NoiseModel& model, const EnsembleConfig& ens,
                                                         const IntegratorConfig& cfg);

/// Hitting curves and p1 from finished chains; needs at least 30 trials.
EnsembleResult summarize(std::vector<std::vector<ChainStats>> chains, int n_periods);

/// run_ensemble followed by summarize.
EnsembleResult ensemble_hitting(const std::vector<SpectralField>& initial_states, const NoiseModel& model,
                                const EnsembleConfig& ens, const IntegratorConfig& cfg);

/// `count` mean-zero states with modes 1..max_mode and ||u||_s <= radius,
/// radii uniform in [0, radius].
std::vector<SpectralField> sample_ball(const TorusGrid& grid, double s, double radius, int count, int max_mode,
                                       std::uint64_t seed);

}  // namespace bo::random_forcing
