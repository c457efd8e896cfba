#include "bo/random_forcing.hpp"

#include <array>
#include <cmath>
#include <exception>
#include <numbers>

#include <omp.h>
#include <sodium.h>

#include "bo/error.hpp"
#include "bo/spectral.hpp"

namespace bo::random_forcing {

namespace {

void ensure_sodium() {
  static const int status = sodium_init();
  if (status < 0) throw Error(ErrorKind::InvalidArgument, "libsodium failed to initialize");
}

void put_le(unsigned char* out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out[i] = static_cast<unsigned char>(v >> (8 * i));
}

std::uint64_t get_le(const unsigned char* in) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | in[i];
  return v;
}

// Uniform in (0, 1) from the top 53 bits.
double to_open_unit(std::uint64_t x) { return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53; }

}  // namespace

NoiseModel::NoiseModel(double b0, double period, int truncation, VariateLaw law) : b0_(b0), law_(law) {
  if (!(b0 > 0.0) || !std::isfinite(b0)) throw Error(ErrorKind::InvalidArgument, "b0 must be positive");
  if (!(period > 0.0)) throw Error(ErrorKind::InvalidArgument, "noise period must be positive");
  if (truncation < 1) throw Error(ErrorKind::InvalidArgument, "noise truncation must be >= 1");
  basis_ = CosineBasis{period, truncation};
  amplitudes_.resize(static_cast<std::size_t>(truncation));
  for (int j = 1; j <= truncation; ++j) {
    const double b = b0 / j;
    amplitudes_[static_cast<std::size_t>(j - 1)] = b;
    sum_squares_ += b * b;
  }
  // Midpoint quadrature integrates these cosines exactly when it has more
  // nodes than twice the highest frequency.
  const int nodes = 4 * truncation + 8;
  const double h = period / nodes;
  for (int a = 1; a <= truncation; ++a) {
    for (int b = a; b <= truncation; ++b) {
      double g = 0.0;
      for (int m = 0; m < nodes; ++m) {
        const double t = (m + 0.5) * h;
        g += basis_.eval(a, t) * basis_.eval(b, t) * h;
      }
      gram_error_ = std::max(gram_error_, std::abs(g - (a == b ? 1.0 : 0.0)));
    }
  }
  if (gram_error_ > 1e-10) throw Error(ErrorKind::InvalidArgument, "cosine basis failed the Gram check");
}

double NoiseModel::expected_energy() const { return 2.0 * std::numbers::pi * sum_squares_; }

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  ensure_sodium();
  std::array<unsigned char, 24> in{};
  put_le(in.data(), base, 8);
  put_le(in.data() + 8, a, 8);
  put_le(in.data() + 16, b, 8);
  std::array<unsigned char, 8> out{};
  crypto_generichash(out.data(), out.size(), in.data(), in.size(), nullptr, 0);
  return get_le(out.data());
}

double normal_variate(std::uint64_t seed, std::uint64_t k, std::uint32_t l, std::uint32_t j) {
  ensure_sodium();
  std::array<unsigned char, 8> seed_bytes{};
  put_le(seed_bytes.data(), seed, 8);
  std::array<unsigned char, crypto_stream_chacha20_ietf_KEYBYTES> key{};
  crypto_generichash(key.data(), key.size(), seed_bytes.data(), seed_bytes.size(), nullptr, 0);
  std::array<unsigned char, crypto_stream_chacha20_ietf_NONCEBYTES> nonce{};
  put_le(nonce.data(), k, 8);
  put_le(nonce.data() + 8, l, 4);
  std::array<unsigned char, 64> zeros{};
  std::array<unsigned char, 64> block{};
  crypto_stream_chacha20_ietf_xor_ic(block.data(), zeros.data(), block.size(), nonce.data(), j, key.data());
  const double u1 = to_open_unit(get_le(block.data()));
  const double u2 = to_open_unit(get_le(block.data() + 8));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

ForcingInput sample_noise(const NoiseModel& model, std::uint64_t k, std::uint64_t seed) {
  const int J = model.truncation();
  std::vector<double> channel[2];
  for (std::uint32_t l = 0; l < 2; ++l) {
    auto& c = channel[l];
    c.resize(static_cast<std::size_t>(J));
    for (int j = 1; j <= J; ++j) {
      const double xi =
          model.law() == VariateLaw::Zero ? 0.0 : normal_variate(seed, k, l, static_cast<std::uint32_t>(j));
      c[static_cast<std::size_t>(j - 1)] = model.amplitudes()[static_cast<std::size_t>(j - 1)] * xi;
    }
  }
  return ForcingInput::basis_series(model.basis(), std::move(channel[0]), std::move(channel[1]));
}

double noise_energy(const ForcingInput& noise) {
  if (noise.kind() != ForcingInput::Kind::BasisSeries) {
    throw Error(ErrorKind::InvalidArgument, "noise energy needs a basis-series forcing");
  }
  // ||a sin x + b cos x||^2 = pi (a^2 + b^2); the basis is orthonormal in time.
  double sum = 0.0;
  for (double c : noise.sin_channel()) sum += c * c;
  for (double c : noise.cos_channel()) sum += c * c;
  return std::numbers::pi * sum;
}

SpectralField markov_step(const SpectralField& u, const NoiseModel& model, std::uint64_t k, std::uint64_t seed,
                          const IntegratorConfig& cfg) {
  return solver::advance(u, sample_noise(model, k, seed), model.period(), cfg);
}

ChainStats run_chain(const SpectralField& u0, const NoiseModel& model, int n_periods, double s, double M,
                     std::uint64_t seed, const IntegratorConfig& cfg) {
  if (n_periods < 1) throw Error(ErrorKind::InvalidArgument, "n_periods must be >= 1");
  if (!(s > 0.0 && s <= 1.0)) throw Error(ErrorKind::InvalidArgument, "s must lie in (0, 1]");
  ChainStats stats;
  stats.seed = seed;
  stats.s = s;
  stats.M = M;
  SpectralField u = u0;
  stats.norms.push_back(spectral::sobolev_norm(u, s));
  if (stats.norms.back() > M) {
    stats.tau = 0;
    return stats;
  }
  for (int k = 0; k < n_periods; ++k) {
    try {
      u = markov_step(u, model, static_cast<std::uint64_t>(k), seed, cfg);
    } catch (const NonFiniteError& e) {
      const double last = spectral::sobolev_norm(e.partial().final_state(), s);
      if (last > M) {
        stats.tau = k + 1;
      } else {
        stats.censored_at = k + 1;
      }
      return stats;
    }
    stats.norms.push_back(spectral::sobolev_norm(u, s));
    if (stats.norms.back() > M) {
      stats.tau = k + 1;
      return stats;
    }
  }
  return stats;
}

Interval wilson_interval(int successes, int trials, double z) {
  if (trials < 1) throw Error(ErrorKind::InvalidArgument, "Wilson interval needs trials >= 1");
  const double n = trials;
  const double p = successes / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

namespace {

void check_ensemble(const std::vector<SpectralField>& initial_states, const EnsembleConfig& ens) {
  if (initial_states.empty()) throw Error(ErrorKind::InvalidArgument, "need at least one initial state");
  if (ens.trials < 1) throw Error(ErrorKind::InvalidArgument, "trials must be >= 1");
  if (ens.n_periods < 1) throw Error(ErrorKind::InvalidArgument, "n_periods must be >= 1");
}

std::vector<std::vector<ChainStats>> empty_chains(std::size_t states, int trials) {
  return std::vector<std::vector<ChainStats>>(states, std::vector<ChainStats>(static_cast<std::size_t>(trials)));
}

ChainStats trial(const std::vector<SpectralField>& initial_states, const NoiseModel& model,
                 const EnsembleConfig& ens, const IntegratorConfig& cfg, std::size_t i, int t) {
  const std::uint64_t seed = derive_seed(ens.base_seed, i, static_cast<std::uint64_t>(t));
  return run_chain(initial_states[i], model, ens.n_periods, ens.s, ens.M, seed, cfg);
}

}  // namespace

std::vector<std::vector<ChainStats>> run_ensemble(const std::vector<SpectralField>& initial_states,
                                                  const NoiseModel& model, const EnsembleConfig& ens,
                                                  const IntegratorConfig& cfg) {
  check_ensemble(initial_states, ens);
  ensure_sodium();
  auto chains = empty_chains(initial_states.size(), ens.trials);
  const long total = static_cast<long>(initial_states.size()) * ens.trials;
  const int workers = ens.workers > 0 ? ens.workers : omp_get_max_threads();
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (long idx = 0; idx < total; ++idx) {
    const auto i = static_cast<std::size_t>(idx / ens.trials);
    const int t = static_cast<int>(idx % ens.trials);
    try {
      chains[i][static_cast<std::size_t>(t)] = trial(initial_states, model, ens, cfg, i, t);
    } catch (...) {
#pragma omp critical(bo_ensemble_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return chains;
}

std::vector<std::vector<ChainStats>> run_ensemble_serial(const std::vector<SpectralField>& initial_states,
                                                         const NoiseModel& model, const EnsembleConfig& ens,
                                                         const IntegratorConfig& cfg) {
  check_ensemble(initial_states, ens);
  auto chains = empty_chains(initial_states.size(), ens.trials);
  for (std::size_t i = 0; i < initial_states.size(); ++i) {
    for (int t = 0; t < ens.trials; ++t) {
      chains[i][static_cast<std::size_t>(t)] = trial(initial_states, model, ens, cfg, i, t);
    }
  }
  return chains;
}

EnsembleResult summarize(std::vector<std::vector<ChainStats>> chains, int n_periods) {
  if (n_periods < 1) throw Error(ErrorKind::InvalidArgument, "n_periods must be >= 1");
  EnsembleResult result;
  result.p1_min = 1.0;
  for (const auto& runs : chains) {
    const int trials = static_cast<int>(runs.size());
    if (trials < 30) throw Error(ErrorKind::InvalidArgument, "hitting estimates need at least 30 trials");
    HittingCurve curve;
    curve.trials = trials;
    for (const auto& c : runs) curve.censored += c.censored_at.has_value() ? 1 : 0;
    for (int n = 1; n <= n_periods; ++n) {
      int hits = 0;
      for (const auto& c : runs) hits += c.hit_by(n) ? 1 : 0;
      curve.probability.push_back(static_cast<double>(hits) / trials);
      curve.interval.push_back(wilson_interval(hits, trials));
    }
    result.p1_min = std::min(result.p1_min, curve.probability.front());
    result.curves.push_back(std::move(curve));
  }
  result.chains = std::move(chains);
  return result;
}

EnsembleResult ensemble_hitting(const std::vector<SpectralField>& initial_states, const NoiseModel& model,
                                const EnsembleConfig& ens, const IntegratorConfig& cfg) {
  if (ens.trials < 30) throw Error(ErrorKind::InvalidArgument, "hitting estimates need at least 30 trials");
  return summarize(run_ensemble(initial_states, model, ens, cfg), ens.n_periods);
}

std::vector<SpectralField> sample_ball(const TorusGrid& grid, double s, double radius, int count, int max_mode,
                                       std::uint64_t seed) {
  if (count < 0 || max_mode < 1 || !(radius >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "invalid ball sampling request");
  }
  const int top = std::min(max_mode, grid.mode_cutoff());
  std::vector<SpectralField> out;
  for (int i = 0; i < count; ++i) {
    const auto idx = static_cast<std::uint64_t>(i);
    SpectralField f(grid);
    for (int k = 1; k <= top; ++k) {
      const auto j = static_cast<std::uint32_t>(k);
      f += SpectralField::cos_mode(grid, k, normal_variate(seed, idx, 0, j));
      f += SpectralField::sin_mode(grid, k, normal_variate(seed, idx, 1, j));
    }
    const double norm = spectral::sobolev_norm(f, s);
    const double u = 0.5 * std::erfc(-normal_variate(seed, idx, 2, 0) / std::numbers::sqrt2);
    out.push_back(norm > 0.0 ? (radius * u / norm) * f : f);
  }
  return out;
}

}  // namespace bo::random_forcing
