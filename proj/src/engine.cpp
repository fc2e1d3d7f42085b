#include "sbl/engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sbl {
namespace {

constexpr double kPi = 3.14159265358979323846;
// Below this the closed-form quadratic for tau degenerates; use the
// analytic lambda -> 0 limit instead.
constexpr double kLambdaZeroTol = 1e-12;

// Coupling between the prior scale and the noise: Lambda_i = g * tau_i.
// BLS conditions the weight prior on sigma2; FRVM/FLAP do not.
double prior_coupling(PriorRule rule, double sigma2) {
  return rule == PriorRule::BLS ? sigma2 : 1.0;
}

// Laplace rate entering the per-coordinate objective; FRVM has none.
double effective_lambda(PriorRule rule, double lambda) {
  return rule == PriorRule::FRVM ? 0.0 : lambda;
}

double sigma2_floor(double var_y) { return std::max(1e-12 * var_y, 1e-30); }

// Per-coordinate term of the decomposed objective at prior scale tau, from
// the exclusion statistics (s, q):
//   l(tau) = 0.5 * (-log(1 + g tau s) + q^2 g tau / (1 + g tau s)) - (lam/2) tau
// l(0) = 0, so action gains are direct differences of this term.
double coordinate_gain(double s, double q, double tau, double g, double lambda_eff) {
  if (tau == 0.0) return 0.0;
  const double gts = g * tau * s;
  return 0.5 * (-std::log1p(gts) + q * q * g * tau / (1.0 + gts) - lambda_eff * tau);
}

// argmax over tau >= 0 of coordinate_gain. Zero iff q^2 - s <= lambda/g;
// otherwise the positive root of
//   (lam g^2 s^2) tau^2 + (g^2 s^2 + 2 g s lam) tau + (lam + g(s - q^2)) = 0
// in the cancellation-safe form -2C / (B + sqrt(B^2 - 4AC)).
double tau_stationary_generic(double s, double q, double lambda_eff, double g) {
  if (!(s > 0.0)) throw std::invalid_argument("tau stationary point requires s > 0");
  const double q2 = q * q;
  if (q2 - s <= lambda_eff / g) return 0.0;
  if (lambda_eff < kLambdaZeroTol) return (q2 - s) / (g * s * s);
  const double A = lambda_eff * g * g * s * s;
  const double B = g * g * s * s + 2.0 * g * s * lambda_eff;
  const double C = lambda_eff + g * (s - q2);  // < 0 past the threshold
  const double disc = B * B - 4.0 * A * C;
  return -2.0 * C / (B + std::sqrt(disc));
}

double little_sq_denom(double S, double tau_i, double g) { return 1.0 - tau_i * g * S; }

// Shared posterior machinery over the active set. gram = Phi_A' Phi_A and
// phiA_t_y = Phi_A' y are aligned with `active`.
struct PosteriorCore {
  Eigen::VectorXd mu;
  Eigen::MatrixXd Sigma;
  double logdet_P = 0.0;     // log det of the precision sigma^-2 gram + Lambda^-1
  double resid_quad = 0.0;   // y'y - y'Phi_A mu  ( = sigma2 * y'C^-1 y )
};

PosteriorCore solve_posterior(const Eigen::MatrixXd& gram, const Eigen::VectorXd& phiA_t_y,
                              const Eigen::VectorXd& tau_active, double sigma2, double g,
                              double yty, const std::vector<int>& active) {
  PosteriorCore core;
  const Eigen::Index L = gram.rows();
  if (L == 0) {
    core.mu.resize(0);
    core.Sigma.resize(0, 0);
    core.resid_quad = yty;
    return core;
  }

  Eigen::MatrixXd P = gram / sigma2;
  for (Eigen::Index k = 0; k < L; ++k) P(k, k) += 1.0 / (g * tau_active(k));

  Eigen::LLT<Eigen::MatrixXd> llt(P);
  if (llt.info() != Eigen::Success) {
    // Scan leading minors to report which basis broke positive definiteness.
    for (Eigen::Index k = 1; k <= L; ++k) {
      Eigen::LLT<Eigen::MatrixXd> probe(P.topLeftCorner(k, k));
      if (probe.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << "posterior Cholesky failed at active position " << (k - 1) << " (column "
            << active[static_cast<size_t>(k - 1)] << ")";
        throw NumericalError(msg.str());
      }
    }
    throw NumericalError("posterior Cholesky failed");
  }

  core.Sigma = llt.solve(Eigen::MatrixXd::Identity(L, L));
  core.Sigma = 0.5 * (core.Sigma + core.Sigma.transpose()).eval();
  core.mu = llt.solve(phiA_t_y) / sigma2;
  core.logdet_P = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  core.resid_quad = yty - phiA_t_y.dot(core.mu);
  return core;
}

// -(N/2) log 2pi - (1/2) log|C| - (1/2) y'C^-1 y through the determinant
// identity |C| = sigma^2N * prod(g tau_i) * det(P).
double evidence_term(Eigen::Index N, const Eigen::VectorXd& tau_active, double sigma2,
                     double g, const PosteriorCore& core) {
  double logdet_C = static_cast<double>(N) * std::log(sigma2) + core.logdet_P;
  for (Eigen::Index k = 0; k < tau_active.size(); ++k)
    logdet_C += std::log(g * tau_active(k));
  const double quad = core.resid_quad / sigma2;
  return -0.5 * (static_cast<double>(N) * std::log(2.0 * kPi) + logdet_C + quad);
}

// Objective pieces beyond the evidence; additive constants involving only
// (a, b) and (c, d) are omitted throughout. The rate prior is counted once
// per basis currently in the model (pruned columns leave the model entirely,
// taking their prior factor with them); n_model is that count.
double prior_terms(PriorRule rule, Eigen::Index n_model, double tau_sum,
                   const HyperState& hyper) {
  if (rule == PriorRule::FRVM) return 0.0;
  if (!(hyper.lambda > 0.0))
    return -std::numeric_limits<double>::infinity();  // p(tau | lambda=0) = 0
  double value = static_cast<double>(n_model) * std::log(hyper.lambda / 2.0) -
                 0.5 * hyper.lambda * tau_sum + (hyper.a - 1.0) * std::log(hyper.lambda) -
                 hyper.b * hyper.lambda;
  if (rule == PriorRule::BLS)
    value += -(hyper.c + 1.0) * std::log(hyper.sigma2) - hyper.d / hyper.sigma2;
  return value;
}

struct ActiveView {
  Eigen::MatrixXd gram;       // L x L
  Eigen::VectorXd phiA_t_y;   // L
  Eigen::VectorXd tau_active; // L
};

ActiveView gather_active(const DesignMatrix& phi, const Eigen::VectorXd& y,
                         const Eigen::VectorXd& tau, const std::vector<int>& active) {
  const Eigen::Index L = static_cast<Eigen::Index>(active.size());
  ActiveView view;
  Eigen::MatrixXd cols(phi.rows(), L);
  view.phiA_t_y.resize(L);
  view.tau_active.resize(L);
  for (Eigen::Index k = 0; k < L; ++k) {
    const int j = active[static_cast<size_t>(k)];
    cols.col(k) = phi.values.col(j);
    view.tau_active(k) = tau(j);
  }
  view.gram = cols.transpose() * cols;
  view.phiA_t_y = cols.transpose() * y;
  return view;
}

void validate_fit_inputs(const DesignMatrix& phi, const Eigen::VectorXd& y) {
  if (phi.rows() != y.size())
    throw std::invalid_argument("design matrix rows and y length differ");
  if (y.size() < 2) throw DataError("need at least 2 observations");
  if (!y.allFinite()) throw DataError("non-finite response value");
  if (!phi.values.allFinite()) throw DataError("non-finite design matrix entry");
  if (phi.cols() < 1) throw DataError("design matrix has no columns");
}

double initial_sigma2(const Eigen::VectorXd& y, const FitConfig& cfg) {
  if (cfg.fix_sigma2) {
    if (!(*cfg.fix_sigma2 > 0.0)) throw std::invalid_argument("fix_sigma2 must be positive");
    return *cfg.fix_sigma2;
  }
  const double var_y = sample_variance(y);
  if (var_y <= 0.0) throw DataError("constant response: cannot initialize noise variance");
  return var_y * 0.1;
}

// ---- the fit loop's working state ----

struct Workspace {
  const DesignMatrix& phi;
  const Eigen::VectorXd& y;
  PriorRule rule;
  Eigen::Index N, M;
  double yty = 0.0, var_y = 0.0;
  Eigen::VectorXd col_sqnorm, phi_t_y;  // per-column constants
  std::vector<int> active;              // ascending
  Eigen::VectorXd tau;                  // M
  double lambda = 0.0, sigma2 = 1.0;
  Eigen::MatrixXd basis_phi;  // M x L cache of Phi' Phi_A, columns follow `active`
  PosteriorCore post;
  SQCache sq;
};

double coupling(const Workspace& ws) { return prior_coupling(ws.rule, ws.sigma2); }

Eigen::VectorXd tau_active_of(const Workspace& ws) {
  Eigen::VectorXd t(static_cast<Eigen::Index>(ws.active.size()));
  for (Eigen::Index k = 0; k < t.size(); ++k) t(k) = ws.tau(ws.active[static_cast<size_t>(k)]);
  return t;
}

void refresh_posterior(Workspace& ws) {
  const Eigen::Index L = static_cast<Eigen::Index>(ws.active.size());
  Eigen::MatrixXd gram(L, L);
  Eigen::VectorXd phiA_t_y(L);
  for (Eigen::Index r = 0; r < L; ++r) {
    const int j = ws.active[static_cast<size_t>(r)];
    gram.row(r) = ws.basis_phi.row(j);
    phiA_t_y(r) = ws.phi_t_y(j);
  }
  ws.post = solve_posterior(gram, phiA_t_y, tau_active_of(ws), ws.sigma2, coupling(ws),
                            ws.yty, ws.active);
}

void refresh_sq(Workspace& ws) {
  const double inv2 = 1.0 / ws.sigma2;
  const Eigen::Index L = static_cast<Eigen::Index>(ws.active.size());
  if (L == 0) {
    ws.sq.S = inv2 * ws.col_sqnorm;
    ws.sq.Q = inv2 * ws.phi_t_y;
  } else {
    const Eigen::MatrixXd T = ws.basis_phi * ws.post.Sigma;  // M x L
    ws.sq.S = inv2 * ws.col_sqnorm -
              inv2 * inv2 * (T.cwiseProduct(ws.basis_phi)).rowwise().sum();
    ws.sq.Q = inv2 * (ws.phi_t_y - ws.basis_phi * ws.post.mu);
  }
  const double g = coupling(ws);
  ws.sq.s = ws.sq.S;
  ws.sq.q = ws.sq.Q;
  // Exclusion statistics for in-model columns. The division form
  // s = S / (1 - g tau S) loses all precision once g tau S -> 1 (the
  // well-determined-basis regime), so past the midpoint switch to the exact
  // posterior identities s = 1/Sigma_kk - 1/(g tau) and q = mu_k / Sigma_kk;
  // Sigma_kk = g tau (1 - g tau S) supplies a sign-safe denominator below it.
  for (Eigen::Index k = 0; k < L; ++k) {
    const int j = ws.active[static_cast<size_t>(k)];
    const double gt = g * ws.tau(j);
    const double Skk = ws.post.Sigma(k, k);
    if (!(Skk > 0.0)) {
      std::ostringstream msg;
      msg << "exclusion statistics degenerate for column " << j << " (posterior variance "
          << Skk << "): posterior stale";
      throw NumericalError(msg.str());
    }
    if (Skk < 0.5 * gt) {
      ws.sq.s(j) = 1.0 / Skk - 1.0 / gt;
      ws.sq.q(j) = ws.post.mu(k) / Skk;
    } else {
      const double denom = Skk / gt;  // = 1 - g tau S, computed without cancellation
      ws.sq.s(j) = ws.sq.S(j) / denom;
      ws.sq.q(j) = ws.sq.Q(j) / denom;
    }
  }
}

// Evidence plus the tau penalty; the part of the objective a tau action can
// change. Used for predicted-vs-realized gain checks.
double core_objective(const Workspace& ws) {
  const double lam_eff = effective_lambda(ws.rule, ws.lambda);
  return evidence_term(ws.N, tau_active_of(ws), ws.sigma2, coupling(ws), ws.post) -
         0.5 * lam_eff * ws.tau.sum();
}

double full_objective(const Workspace& ws) {
  HyperState hyper;
  hyper.lambda = ws.lambda;
  hyper.sigma2 = ws.sigma2;
  const double ev = evidence_term(ws.N, tau_active_of(ws), ws.sigma2, coupling(ws), ws.post);
  return ev + prior_terms(ws.rule, static_cast<Eigen::Index>(ws.active.size()), ws.tau.sum(),
                          hyper);
}

void insert_basis(Workspace& ws, int index) {
  const auto pos = std::lower_bound(ws.active.begin(), ws.active.end(), index);
  const Eigen::Index p = pos - ws.active.begin();
  ws.active.insert(pos, index);
  const Eigen::Index L_old = ws.basis_phi.cols();
  Eigen::MatrixXd grown(ws.M, L_old + 1);
  grown.leftCols(p) = ws.basis_phi.leftCols(p);
  grown.col(p) = ws.phi.values.transpose() * ws.phi.values.col(index);
  grown.rightCols(L_old - p) = ws.basis_phi.rightCols(L_old - p);
  ws.basis_phi = std::move(grown);
}

void remove_basis(Workspace& ws, int index) {
  const auto pos = std::lower_bound(ws.active.begin(), ws.active.end(), index);
  const Eigen::Index p = pos - ws.active.begin();
  ws.active.erase(pos);
  const Eigen::Index L_old = ws.basis_phi.cols();
  Eigen::MatrixXd shrunk(ws.M, L_old - 1);
  shrunk.leftCols(p) = ws.basis_phi.leftCols(p);
  shrunk.rightCols(L_old - 1 - p) = ws.basis_phi.rightCols(L_old - 1 - p);
  ws.basis_phi = std::move(shrunk);
}

// BLS: (y'y - y'Phi_A mu + 2d) / (N + 2c + 2). The numerator equals
// y'C~^-1 y + 2d and is invariant to the sigma2 the posterior was built
// with (mu depends on tau only once Lambda = tau sigma2 is substituted).
double sigma2_bls(const Workspace& ws, double c, double d) {
  return (ws.post.resid_quad + 2.0 * d) / (static_cast<double>(ws.N) + 2.0 * c + 2.0);
}

// FRVM/FLAP: ||y - Phi_A mu||^2 / (N - L + sum_i Sigma_ii / tau_i), the
// residual re-estimate of the fast-RVM literature (Lambda = tau here).
double sigma2_residual(const Workspace& ws) {
  const Eigen::Index L = static_cast<Eigen::Index>(ws.active.size());
  Eigen::VectorXd resid = ws.y;
  double correction = 0.0;
  for (Eigen::Index k = 0; k < L; ++k) {
    const int j = ws.active[static_cast<size_t>(k)];
    resid -= ws.post.mu(k) * ws.phi.values.col(j);
    correction += ws.post.Sigma(k, k) / ws.tau(j);
  }
  const double denom = static_cast<double>(ws.N - L) + correction;
  if (denom <= 0.0)
    throw NumericalError("noise variance denominator not positive (N - L + tr correction)");
  const double value = resid.squaredNorm() / denom;
  if (!(value > 0.0)) throw NumericalError("noise variance estimate not positive");
  return value;
}

double lambda_estimate(const Eigen::VectorXd& tau, int n_params, double a, double b,
                       double prev_lambda) {
  const double denom = tau.sum() + 2.0 * b;
  if (denom <= 0.0) return prev_lambda;
  const double value = 2.0 * (static_cast<double>(n_params) + a - 1.0) / denom;
  if (!std::isfinite(value) || value < 0.0)
    throw NumericalError("lambda estimate not finite");
  return value;
}

// An upward noise move is legitimate only once the active set is nearly
// stationary at the current level: the step just applied gained almost
// nothing and no out-of-model column clears the inclusion threshold.
// Raising sigma2 mid-growth shrinks every margin at once and starves the
// basis search into an underfit whose re-estimated noise is biased high.
// Refreshes ws.sq as a side effect (the posterior is already current).
bool noise_raise_allowed(Workspace& ws, double last_gain, double raise_tol) {
  if (last_gain >= raise_tol) return false;
  refresh_sq(ws);
  const double g = coupling(ws);
  const double lam_eff = effective_lambda(ws.rule, ws.lambda);
  for (Eigen::Index i = 0; i < ws.tau.size(); ++i) {
    if (ws.tau(i) > 0.0 || !(ws.sq.s(i) > 0.0)) continue;
    if (tau_stationary_generic(ws.sq.s(i), ws.sq.q(i), lam_eff, g) > 0.0) return false;
  }
  return true;
}

std::optional<CandidateAction> best_candidate(const SQCache& sq, const Eigen::VectorXd& tau,
                                              double lambda, double sigma2, PriorRule rule) {
  const double g = prior_coupling(rule, sigma2);
  const double lam_eff = effective_lambda(rule, lambda);
  std::optional<CandidateAction> best;
  for (Eigen::Index i = 0; i < tau.size(); ++i) {
    const double s = sq.s(i), q = sq.q(i);
    if (!(s > 0.0)) continue;  // zero or degenerate column: never a candidate
    const double tau_cur = tau(i);
    const double tau_new = tau_stationary_generic(s, q, lam_eff, g);
    CandidateAction cand;
    cand.index = static_cast<int>(i);
    cand.tau_new = tau_new;
    if (tau_cur > 0.0) {
      if (tau_new > 0.0) {
        cand.action = Action::Reestimate;
        cand.delta = coordinate_gain(s, q, tau_new, g, lam_eff) -
                     coordinate_gain(s, q, tau_cur, g, lam_eff);
      } else {
        cand.action = Action::Delete;
        cand.delta = -coordinate_gain(s, q, tau_cur, g, lam_eff);
      }
    } else {
      if (tau_new <= 0.0) continue;  // below the add threshold
      cand.action = Action::Add;
      cand.delta = coordinate_gain(s, q, tau_new, g, lam_eff);
    }
    if (!best || cand.delta > best->delta) best = cand;
  }
  return best;
}

}  // namespace

// ---- public operations ----

std::tuple<HyperState, PosteriorState, SQCache> init_state(const DesignMatrix& phi,
                                                           const Eigen::VectorXd& y,
                                                           const FitConfig& cfg) {
  validate_fit_inputs(phi, y);
  HyperState hyper;
  hyper.tau = Eigen::VectorXd::Zero(phi.cols());
  hyper.lambda = 0.0;
  hyper.sigma2 = initial_sigma2(y, cfg);
  hyper.a = cfg.a;
  hyper.b = cfg.b;
  hyper.c = cfg.c;
  hyper.d = cfg.d;

  PosteriorState post;
  post.mu.resize(0);
  post.Sigma.resize(0, 0);
  // Evidence-only value; the lambda-prior terms are -inf at lambda=0 and are
  // picked up by the first posterior_refresh after lambda turns positive.
  PosteriorCore core;
  core.resid_quad = y.squaredNorm();
  post.log_marginal = evidence_term(y.size(), Eigen::VectorXd(), hyper.sigma2,
                                    prior_coupling(PriorRule::BLS, hyper.sigma2), core);

  SQCache sq;
  std::tie(sq.S, sq.Q) = compute_SQ(phi, y, post, hyper.sigma2);
  sq.s = sq.S;
  sq.q = sq.Q;
  return {hyper, post, sq};
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> compute_SQ(const DesignMatrix& phi,
                                                       const Eigen::VectorXd& y,
                                                       const PosteriorState& state,
                                                       double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("compute_SQ: sigma2 must be positive");
  const double inv2 = 1.0 / sigma2;
  const Eigen::Index L = static_cast<Eigen::Index>(state.active_index.size());
  Eigen::VectorXd S, Q;
  if (L == 0) {
    S = inv2 * phi.values.colwise().squaredNorm().transpose();
    Q = inv2 * (phi.values.transpose() * y);
    return {S, Q};
  }
  Eigen::MatrixXd cols(phi.rows(), L);
  for (Eigen::Index k = 0; k < L; ++k)
    cols.col(k) = phi.values.col(state.active_index[static_cast<size_t>(k)]);
  const Eigen::MatrixXd basis = phi.values.transpose() * cols;  // M x L
  const Eigen::VectorXd phiA_t_y = cols.transpose() * y;
  const Eigen::MatrixXd T = basis * state.Sigma;
  S = inv2 * phi.values.colwise().squaredNorm().transpose() -
      inv2 * inv2 * (T.cwiseProduct(basis)).rowwise().sum();
  Q = inv2 * (phi.values.transpose() * y) - inv2 * inv2 * (basis * (state.Sigma * phiA_t_y));
  return {S, Q};
}

std::pair<double, double> little_sq(double S, double Q, double tau_i, double sigma2) {
  const double denom = little_sq_denom(S, tau_i, sigma2);
  if (denom <= 0.0) {
    std::ostringstream msg;
    msg << "little_sq: denominator 1 - tau*sigma2*S = " << denom << " not positive";
    throw NumericalError(msg.str());
  }
  return {S / denom, Q / denom};
}

double bls_tau_stationary(double s, double q, double lambda, double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("bls_tau_stationary: sigma2 must be positive");
  if (lambda < 0.0) throw std::invalid_argument("bls_tau_stationary: lambda must be nonnegative");
  return tau_stationary_generic(s, q, lambda, sigma2);
}

double frvm_tau_stationary(double s, double q) { return tau_stationary_generic(s, q, 0.0, 1.0); }

double flap_tau_stationary(double s, double q, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("flap_tau_stationary: lambda must be nonnegative");
  return tau_stationary_generic(s, q, lambda, 1.0);
}

double update_lambda(const Eigen::VectorXd& tau, int n_params, double a, double b,
                     double prev_lambda) {
  if (n_params < 1) throw std::invalid_argument("update_lambda: n_params must be positive");
  return lambda_estimate(tau, n_params, a, b, prev_lambda);
}

double update_sigma2(const Eigen::VectorXd& y, const DesignMatrix& phi,
                     const HyperState& hyper, PriorRule rule) {
  Workspace ws{phi, y, rule, y.size(), phi.cols()};
  ws.yty = y.squaredNorm();
  ws.var_y = sample_variance(y);
  ws.tau = hyper.tau;
  ws.lambda = hyper.lambda;
  ws.sigma2 = hyper.sigma2;
  ws.active = hyper.active();
  const ActiveView view = gather_active(phi, y, hyper.tau, ws.active);
  ws.post = solve_posterior(view.gram, view.phiA_t_y, view.tau_active, hyper.sigma2,
                            prior_coupling(rule, hyper.sigma2), ws.yty, ws.active);
  double value = rule == PriorRule::BLS ? sigma2_bls(ws, hyper.c, hyper.d)
                                        : sigma2_residual(ws);
  return std::max(value, sigma2_floor(ws.var_y));
}

PosteriorState posterior_refresh(const DesignMatrix& phi, const Eigen::VectorXd& y,
                                 const HyperState& hyper, PriorRule rule) {
  if (!(hyper.sigma2 > 0.0))
    throw std::invalid_argument("posterior_refresh: sigma2 must be positive");
  PosteriorState state;
  state.active_index = hyper.active();
  const ActiveView view = gather_active(phi, y, hyper.tau, state.active_index);
  const double g = prior_coupling(rule, hyper.sigma2);
  const PosteriorCore core = solve_posterior(view.gram, view.phiA_t_y, view.tau_active,
                                             hyper.sigma2, g, y.squaredNorm(),
                                             state.active_index);
  state.mu = core.mu;
  state.Sigma = core.Sigma;
  state.log_marginal =
      evidence_term(y.size(), view.tau_active, hyper.sigma2, g, core) +
      prior_terms(rule, static_cast<Eigen::Index>(state.active_index.size()),
                  hyper.tau.sum(), hyper);
  return state;
}

double log_marginal(const DesignMatrix& phi, const Eigen::VectorXd& y,
                    const HyperState& hyper, PriorRule rule) {
  if (rule != PriorRule::FRVM && !(hyper.lambda > 0.0))
    throw std::invalid_argument("log_marginal: lambda must be positive for this rule");
  const PosteriorState state = posterior_refresh(phi, y, hyper, rule);
  if (!std::isfinite(state.log_marginal))
    throw NumericalError("log_marginal: non-finite value");
  return state.log_marginal;
}

std::optional<CandidateAction> select_action(const SQCache& sq, const HyperState& hyper,
                                             PriorRule rule) {
  return best_candidate(sq, hyper.tau, hyper.lambda, hyper.sigma2, rule);
}

FitResult fit(const DesignMatrix& phi_raw, const Eigen::VectorXd& y, PriorRule rule,
              const FitConfig& cfg) {
  if (cfg.max_iters < 1) throw std::invalid_argument("fit: max_iters must be positive");
  if (!(cfg.tol_logml > 0.0) || !(cfg.tol_tau > 0.0))
    throw std::invalid_argument("fit: tolerances must be positive");
  if (!(cfg.sigma2_raise_tol > 0.0))
    throw std::invalid_argument("fit: sigma2_raise_tol must be positive");
  if (cfg.sigma2_update_period < 1)
    throw std::invalid_argument("fit: sigma2_update_period must be positive");
  validate_fit_inputs(phi_raw, y);

  // One shared Laplace rate cannot regularize columns of wildly different
  // norms evenly, so the loop runs on unit-norm columns and the results are
  // mapped back to the caller's scaling at the end. Zero columns keep scale
  // 1 and are excluded by the s > 0 candidate guard anyway.
  Eigen::VectorXd col_scale = phi_raw.values.colwise().norm().transpose();
  DesignMatrix phi = phi_raw;
  for (Eigen::Index j = 0; j < col_scale.size(); ++j) {
    if (col_scale(j) > 0.0)
      phi.values.col(j) /= col_scale(j);
    else
      col_scale(j) = 1.0;
  }

  Workspace ws{phi, y, rule, y.size(), phi.cols()};
  ws.yty = y.squaredNorm();
  ws.var_y = sample_variance(y);
  ws.tau = Eigen::VectorXd::Zero(ws.M);
  ws.lambda = 0.0;
  ws.sigma2 = initial_sigma2(y, cfg);
  ws.col_sqnorm = phi.values.colwise().squaredNorm().transpose();
  ws.phi_t_y = phi.values.transpose() * y;
  ws.basis_phi.resize(ws.M, 0);
  refresh_posterior(ws);
  refresh_sq(ws);

  FitResult result;
  result.rule = rule;
  result.logml_trace.reserve(static_cast<size_t>(std::min(cfg.max_iters, 4096)));

  bool lambda_frozen = false;

  // Gated noise re-estimate; true when sigma2 actually moved (posterior is
  // refreshed in that case). The first accepted upward move freezes lambda:
  // past that point the two estimates chase each other downward otherwise
  // (a larger sigma2 prunes, pruning shrinks sum tau, lambda rises, the
  // gate tightens, more pruning...).
  const auto noise_update = [&](double last_gain) -> bool {
    double sigma2_new = ws.sigma2;
    try {
      sigma2_new =
          rule == PriorRule::BLS ? sigma2_bls(ws, cfg.c, cfg.d) : sigma2_residual(ws);
    } catch (const NumericalError&) {
      // Degenerate re-estimate: keep the previous noise level.
    }
    sigma2_new = std::max(sigma2_new, sigma2_floor(ws.var_y));
    if (sigma2_new > ws.sigma2 && !noise_raise_allowed(ws, last_gain, cfg.sigma2_raise_tol))
      sigma2_new = ws.sigma2;
    if (std::abs(sigma2_new - ws.sigma2) <= 1e-10 * ws.sigma2) return false;
    if (sigma2_new > ws.sigma2) lambda_frozen = true;
    ws.sigma2 = sigma2_new;
    refresh_posterior(ws);
    return true;
  };

  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    const auto cand = best_candidate(ws.sq, ws.tau, ws.lambda, ws.sigma2, rule);
    bool stationary = !cand;
    if (cand) {
      const double tau_old = ws.tau(cand->index);
      const double span = std::max(tau_old, cand->tau_new);
      const double rel_change = cand->action == Action::Reestimate
                                    ? std::abs(cand->tau_new - tau_old) / span
                                    : 1.0;
      stationary = cand->delta < cfg.tol_logml && rel_change < cfg.tol_tau;
    }
    if (stationary) {
      // tau coordinates are done; converged once the noise coordinate stops
      // moving too. Off-cadence on purpose: stopping between cadences would
      // freeze a noise level the next update was about to change.
      if (cfg.fix_sigma2 || !noise_update(cand ? cand->delta : 0.0)) {
        result.converged = true;
        break;
      }
      result.iterations = iter;
      refresh_sq(ws);
      result.logml_trace.push_back(full_objective(ws));
      continue;
    }

    const double core_before = cfg.trace_actions ? core_objective(ws) : 0.0;

    switch (cand->action) {
      case Action::Add:
        insert_basis(ws, cand->index);
        ws.tau(cand->index) = cand->tau_new;
        break;
      case Action::Reestimate:
        ws.tau(cand->index) = cand->tau_new;
        break;
      case Action::Delete:
        remove_basis(ws, cand->index);
        ws.tau(cand->index) = 0.0;
        break;
    }
    refresh_posterior(ws);
    result.iterations = iter;

    if (cfg.trace_actions) {
      ActionRecord rec;
      rec.iteration = iter;
      rec.index = cand->index;
      rec.action = cand->action;
      rec.predicted_gain = cand->delta;
      rec.realized_gain = core_objective(ws) - core_before;
      result.action_trace.push_back(rec);
    }

    if (!cfg.fix_sigma2 && iter % cfg.sigma2_update_period == 0) noise_update(cand->delta);

    // Same cadence as the noise update. Re-estimating every iteration lets
    // lambda chase each add/delete (the estimate moves with the in-model
    // count), which on small designs turns into a perpetual add/delete
    // cycle; sampling it every few actions lets the set settle in between.
    if (rule != PriorRule::FRVM && !ws.active.empty() && !lambda_frozen &&
        iter % cfg.sigma2_update_period == 0)
      ws.lambda = lambda_estimate(ws.tau, static_cast<int>(ws.active.size()), cfg.a, cfg.b,
                                  ws.lambda);

    refresh_sq(ws);
    result.logml_trace.push_back(full_objective(ws));
  }

  result.relevance_indices = ws.active;
  result.weights = ws.post.mu;
  result.Sigma = ws.post.Sigma;
  result.tau_hat = ws.tau;
  result.lambda_hat = ws.lambda;
  result.sigma2_hat = ws.sigma2;

  // Map back to the caller's column scaling: mu and tau scale with 1/norm
  // and 1/norm^2, the covariance with both indices' norms.
  const Eigen::Index L = static_cast<Eigen::Index>(ws.active.size());
  for (Eigen::Index k = 0; k < L; ++k) {
    const double dk = col_scale(ws.active[static_cast<size_t>(k)]);
    result.weights(k) /= dk;
    for (Eigen::Index l = 0; l < L; ++l)
      result.Sigma(k, l) /= dk * col_scale(ws.active[static_cast<size_t>(l)]);
  }
  for (Eigen::Index j = 0; j < ws.M; ++j)
    result.tau_hat(j) /= col_scale(j) * col_scale(j);
  return result;
}

}  // namespace sbl
