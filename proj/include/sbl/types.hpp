#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sbl {

// Data-level problems: unreadable files, malformed values, degenerate inputs
// the model cannot be initialized from. CLI exit code 2.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical degeneracy detected mid-computation (failed Cholesky, stale
// posterior denominators, nonpositive variance estimates). CLI exit code 3.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Which prior family drives the per-coordinate updates.
//   BLS  — Laplace prior conditioned on the noise variance (the main method)
//   FRVM — Gaussian prior, fast marginal-likelihood RVM baseline
//   FLAP — Laplace prior not conditioned on the noise variance
enum class PriorRule { BLS, FRVM, FLAP };

[[nodiscard]] const char* to_string(PriorRule rule);
[[nodiscard]] PriorRule prior_rule_from_string(const std::string& name);

// Hyperparameters of the weight/noise hierarchy. tau(i) == 0 means column i
// is pruned; for FRVM the slot stores 1/alpha_i so all three rules share the
// same state layout.
struct HyperState {
  Eigen::VectorXd tau;
  double lambda = 0.0;
  double sigma2 = 1.0;
  double a = 1e-6, b = 1e-6, c = 1e-6, d = 1e-6;

  // Indices with tau > 0, ascending.
  [[nodiscard]] std::vector<int> active() const;
};

struct PosteriorState {
  Eigen::VectorXd mu;             // L
  Eigen::MatrixXd Sigma;          // L x L
  std::vector<int> active_index;  // ascending
  double log_marginal = -std::numeric_limits<double>::infinity();
};

// Exclusion statistics per column. S/Q include the column's own current
// contribution; s/q are the leave-this-column-out versions used by the
// stationary-point formulas. For inactive columns s=S and q=Q.
struct SQCache {
  Eigen::VectorXd S, Q, s, q;
};

struct FitConfig {
  int max_iters = 2000;
  double tol_logml = 1e-6;
  double tol_tau = 1e-4;
  int sigma2_update_period = 5;
  // An upward noise move is deferred while the last applied action gained at
  // least this much or any out-of-model column still clears the inclusion
  // threshold; raising the noise mid-growth starves the basis search.
  double sigma2_raise_tol = 1e-3;
  std::optional<double> fix_sigma2;
  std::int64_t seed = 0;
  // Hyperprior constants; near-zero values give effectively flat priors.
  double a = 1e-6, b = 1e-6, c = 1e-6, d = 1e-6;
  // Record per-action predicted vs realized objective gains (diagnostics).
  bool trace_actions = false;
};

enum class Action { Add, Reestimate, Delete };

[[nodiscard]] const char* to_string(Action action);

struct ActionRecord {
  int iteration = 0;
  int index = -1;
  Action action = Action::Add;
  double predicted_gain = 0.0;  // from the candidate sweep
  double realized_gain = 0.0;   // objective difference at fixed hyperparameters
};

// weights, Sigma and tau_hat are expressed in the caller's column scaling;
// lambda_hat is the Laplace rate over the unit-norm basis the loop runs on.
struct FitResult {
  std::vector<int> relevance_indices;  // ascending original column indices
  Eigen::VectorXd weights;             // posterior means over the relevance set
  Eigen::MatrixXd Sigma;               // posterior covariance over the relevance set
  Eigen::VectorXd tau_hat;             // length M; exact zeros for pruned columns
  double lambda_hat = 0.0;
  double sigma2_hat = 0.0;
  std::vector<double> logml_trace;  // objective after each applied update
  int iterations = 0;
  bool converged = false;
  PriorRule rule = PriorRule::BLS;
  std::vector<ActionRecord> action_trace;  // filled when cfg.trace_actions
};

// Sample variance with the N-1 denominator; 0 for fewer than two values.
[[nodiscard]] double sample_variance(const Eigen::VectorXd& v);

}  // namespace sbl
