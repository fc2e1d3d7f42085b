#pragma once

#include "sbl/dataio.hpp"
#include "sbl/kernels.hpp"
#include "sbl/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sbl {

// Synthetic Sinc regression problem. 1D: n_points uniformly gridded on
// [x_min, x_max], f(x) = sin(x)/x. 2D: per-axis grid with step grid_step,
// f(x) = sinc(x1) + sinc(x2).
struct SincSpec {
  int dim = 1;
  double sigma = 0.1;  // true noise SD
  int n_points = 200;  // 1D
  double grid_step = 0.3;  // 2D
  double x_min = -10.0, x_max = 10.0;
  std::uint64_t seed = 0;

  static SincSpec one_dim(double sigma, int n_points = 200);
  static SincSpec two_dim(double sigma, double grid_step = 0.3);
};

struct SincData {
  Eigen::MatrixXd X;      // N x dim
  Eigen::VectorXd y;      // noisy observations
  Eigen::VectorXd f_true; // noiseless target
};

[[nodiscard]] double sinc(double x);
[[nodiscard]] SincData gen_sinc(const SincSpec& spec);

// ||y_star - f_true||^2 / N.
[[nodiscard]] double mse_vs_truth(const Eigen::VectorXd& y_star,
                                  const Eigen::VectorXd& f_true);

struct StudyConfig {
  std::vector<PriorRule> methods{PriorRule::BLS};
  std::vector<double> sigmas{0.1};
  int reps = 100;
  SincSpec sinc;  // sigma and seed fields are overridden per cell/rep
  KernelSpec kernel = KernelSpec::linear_spline();
  FitConfig fit;
  // Fix sigma2 = var(y) * 0.1 per dataset instead of estimating it.
  bool fixed_sigma2 = false;
  int n_threads = 0;  // 0: SBL_THREADS env var, else hardware concurrency
};

// One row per (method, sigma): repetition statistics of the number of
// relevance vectors (NOV), training-grid MSE vs the noiseless target, and
// the estimated noise SD.
struct StudyCell {
  PriorRule method = PriorRule::BLS;
  double sigma = 0.0;
  int n_reps = 0;    // successful repetitions included in the statistics
  int n_failed = 0;  // repetitions whose fit raised an error
  double nov_mean = 0.0, nov_sd = 0.0;
  double mse_mean = 0.0, mse_sd = 0.0;
  double sigma_hat_mean = 0.0, sigma_hat_sd = 0.0;
};

struct StudyReport {
  std::vector<StudyCell> cells;  // sigma-major, then method order as given
  bool fixed_sigma2 = false;
};

// One dataset per (rep, sigma) shared by all methods; rep seeds are
// base_seed + rep. Statistics use the N-1 sample SD (0 when n < 2).
// Deterministic for a fixed config regardless of thread count.
[[nodiscard]] StudyReport run_study(const StudyConfig& cfg);

[[nodiscard]] std::string report_csv(const StudyReport& report);
[[nodiscard]] std::string report_markdown(const StudyReport& report);

// Thread-count policy shared by the repetition drivers.
[[nodiscard]] int resolve_threads(int requested, int n_tasks);

// Sparse-truth linear dataset for selection benchmarks: X iid N(0,1),
// k_nonzero coefficients at seeded random positions with magnitude in
// [0.5, 1.5] and random sign, noise variance var(X beta)/snr.
struct SparseLinearSpec {
  int n = 150, d = 200, k_nonzero = 10;
  double snr = 10.0;
  std::uint64_t seed = 0;
};

struct SparseLinearData {
  Dataset data;              // raw scale, names v0..v{d-1}
  std::vector<int> support;  // true nonzero indices, ascending
  Eigen::VectorXd beta;      // length d
  double noise_sd = 0.0;
};

[[nodiscard]] SparseLinearData gen_sparse_linear(const SparseLinearSpec& spec);

}  // namespace sbl
