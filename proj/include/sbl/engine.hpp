#pragma once

#include "sbl/kernels.hpp"
#include "sbl/types.hpp"

#include <optional>
#include <tuple>
#include <utility>

namespace sbl {

// Empty model: all tau zero, lambda 0, sigma2 = var(y) * 0.1 unless fixed by
// cfg. S and Q are the empty-active-set statistics. Rejects constant y when
// sigma2 would have to be derived from it.
[[nodiscard]] std::tuple<HyperState, PosteriorState, SQCache> init_state(
    const DesignMatrix& phi, const Eigen::VectorXd& y, const FitConfig& cfg);

// Full-inclusion statistics for every column given the current posterior:
//   S_i = phi_i' C^-1 phi_i,  Q_i = phi_i' C^-1 y
// computed through the active-set factorization (C never materialized).
[[nodiscard]] std::pair<Eigen::VectorXd, Eigen::VectorXd> compute_SQ(
    const DesignMatrix& phi, const Eigen::VectorXd& y, const PosteriorState& state,
    double sigma2);

// Leave-one-out statistics from the full-inclusion ones:
//   s = S / (1 - tau * sigma2 * S),  q = Q / (1 - tau * sigma2 * S).
// Throws NumericalError when the denominator is not positive.
[[nodiscard]] std::pair<double, double> little_sq(double S, double Q, double tau_i,
                                                  double sigma2);

// Per-coordinate stationary points of the marginal objective, one per prior
// rule. All return exact 0 below the rule's add/keep threshold.
[[nodiscard]] double bls_tau_stationary(double s, double q, double lambda, double sigma2);
[[nodiscard]] double frvm_tau_stationary(double s, double q);
[[nodiscard]] double flap_tau_stationary(double s, double q, double lambda);

// lambda_hat = 2 (n_params + a - 1) / (sum tau + 2b); keeps prev_lambda when
// the denominator is zero (only happens before the first basis is added).
[[nodiscard]] double update_lambda(const Eigen::VectorXd& tau, int n_params, double a,
                                   double b, double prev_lambda);

// Noise-variance re-estimate for the given rule; recomputes the posterior
// internally so the result depends only on (y, phi, hyper). Floored at
// max(1e-12 * var(y), 1e-30).
[[nodiscard]] double update_sigma2(const Eigen::VectorXd& y, const DesignMatrix& phi,
                                   const HyperState& hyper, PriorRule rule);

// Posterior over the active set (tau > 0) via Cholesky of
// sigma^-2 Phi_A' Phi_A + Lambda_A^-1, Lambda_A = diag(tau * sigma2) for BLS
// and diag(tau) otherwise. log_marginal is refreshed for the given rule.
[[nodiscard]] PosteriorState posterior_refresh(const DesignMatrix& phi,
                                               const Eigen::VectorXd& y,
                                               const HyperState& hyper, PriorRule rule);

// Log joint density of (y, tau, lambda, sigma2) up to the additive constants
// a log b - log G(a) and c log d - log G(c). FRVM keeps only the Gaussian
// evidence part; FLAP adds the lambda terms; BLS adds the noise prior too.
[[nodiscard]] double log_marginal(const DesignMatrix& phi, const Eigen::VectorXd& y,
                                  const HyperState& hyper,
                                  PriorRule rule = PriorRule::BLS);

struct CandidateAction {
  int index = -1;
  Action action = Action::Add;
  double delta = 0.0;    // predicted objective gain
  double tau_new = 0.0;  // stationary value (0 for Delete)
};

// Best single-coordinate action under the current statistics, or nullopt
// when no column qualifies for any action (convergence signal).
[[nodiscard]] std::optional<CandidateAction> select_action(const SQCache& sq,
                                                           const HyperState& hyper,
                                                           PriorRule rule);

// The full active-set loop. Columns are rescaled to unit norm internally so
// one shared Laplace rate regularizes them evenly; weights / Sigma / tau_hat
// come back in the caller's scaling while lambda_hat stays in unit-norm
// units. sigma2 is re-estimated every cfg.sigma2_update_period iterations
// (unless fixed): downward moves apply immediately, upward moves wait until
// the active set is nearly stationary, and the first upward move freezes
// lambda, which is otherwise re-estimated every iteration.
[[nodiscard]] FitResult fit(const DesignMatrix& phi, const Eigen::VectorXd& y,
                            PriorRule rule, const FitConfig& cfg);

}  // namespace sbl
