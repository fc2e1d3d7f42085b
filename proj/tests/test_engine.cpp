#include "sbl/engine.hpp"
#include "sbl/kernels.hpp"
#include "sbl/types.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace sbl;
using sbl_test::dense_C;
using sbl_test::random_design;
using sbl_test::vec;

namespace {

DesignMatrix design_from(const Eigen::MatrixXd& values) {
  DesignMatrix phi;
  phi.values = values;
  phi.column_origin.resize(static_cast<size_t>(values.cols()));
  for (int j = 0; j < values.cols(); ++j) phi.column_origin[static_cast<size_t>(j)] = j;
  return phi;
}

double coupling_of(PriorRule rule, double sigma2) {
  return rule == PriorRule::BLS ? sigma2 : 1.0;
}

}  // namespace

TEST_CASE("init_state sets the documented starting point") {
  Eigen::MatrixXd values(2, 2);
  values << 1, 0, 0, 1;
  const DesignMatrix phi = design_from(values);

  FitConfig cfg;
  const auto [hyper, post, sq] = init_state(phi, vec({0.0, 2.0}), cfg);
  CHECK(hyper.sigma2 == doctest::Approx(0.2));  // var((0,2)) = 2, times 0.1
  CHECK(hyper.lambda == 0.0);
  CHECK(hyper.tau.isZero(0.0));
  CHECK(post.active_index.empty());
  CHECK(post.mu.size() == 0);
  // Empty active set: S = phi'phi / sigma2, Q = phi'y / sigma2; s=S, q=Q.
  CHECK(sq.S(0) == doctest::Approx(5.0));
  CHECK(sq.Q(1) == doctest::Approx(10.0));
  CHECK(sq.s(0) == sq.S(0));
  CHECK(sq.q(1) == sq.Q(1));

  CHECK_THROWS_AS((void)init_state(phi, vec({1.0, 1.0}), cfg), DataError);
  FitConfig fixed;
  fixed.fix_sigma2 = 0.5;
  const auto [hyper2, post2, sq2] = init_state(phi, vec({1.0, 1.0}), fixed);
  CHECK(hyper2.sigma2 == 0.5);
}

TEST_CASE("compute_SQ frozen empty-active-set values") {
  Eigen::MatrixXd values(2, 1);
  values << 1, 0;
  const DesignMatrix phi = design_from(values);
  const Eigen::VectorXd y = vec({2.0, 3.0});

  PosteriorState empty;
  const auto [S1, Q1] = compute_SQ(phi, y, empty, 1.0);
  CHECK(S1(0) == doctest::Approx(1.0));
  CHECK(Q1(0) == doctest::Approx(2.0));
  const auto [S4, Q4] = compute_SQ(phi, y, empty, 4.0);
  CHECK(S4(0) == doctest::Approx(0.25));
  CHECK(Q4(0) == doctest::Approx(0.5));
}

TEST_CASE("compute_SQ matches the dense-C oracle with a nonempty active set") {
  std::mt19937_64 gen(211);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    const Eigen::Index n = 3 + static_cast<Eigen::Index>(unif(gen) * 5);  // up to 8
    const Eigen::Index m = 2 + static_cast<Eigen::Index>(unif(gen) * 5);
    const DesignMatrix phi = random_design(gen, n, m);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = 2.0 * unif(gen) - 1.0;
    const double sigma2 = 0.3 + unif(gen);

    for (const PriorRule rule : {PriorRule::BLS, PriorRule::FRVM, PriorRule::FLAP}) {
      HyperState hyper;
      hyper.tau = Eigen::VectorXd::Zero(m);
      hyper.sigma2 = sigma2;
      hyper.lambda = 0.5;
      for (Eigen::Index j = 0; j < m; ++j)
        if (unif(gen) < 0.5) hyper.tau(j) = 0.1 + unif(gen);
      const PosteriorState post = posterior_refresh(phi, y, hyper, rule);
      const auto [S, Q] = compute_SQ(phi, y, post, sigma2);

      const Eigen::MatrixXd C = dense_C(phi, hyper.tau, sigma2, coupling_of(rule, sigma2));
      const Eigen::MatrixXd Cinv = C.inverse();
      for (Eigen::Index j = 0; j < m; ++j) {
        const Eigen::VectorXd col = phi.values.col(j);
        CHECK(S(j) == doctest::Approx(col.dot(Cinv * col)).epsilon(1e-8));
        CHECK(Q(j) == doctest::Approx(col.dot(Cinv * y)).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("posterior_refresh 1x1 frozen example") {
  Eigen::MatrixXd values(2, 1);
  values << 1, 0;
  const DesignMatrix phi = design_from(values);
  HyperState hyper;
  hyper.tau = vec({1.0});
  hyper.sigma2 = 1.0;
  hyper.lambda = 1.0;
  const PosteriorState post = posterior_refresh(phi, vec({2.0, 0.0}), hyper, PriorRule::BLS);
  REQUIRE(post.active_index == std::vector<int>{0});
  CHECK(post.Sigma(0, 0) == doctest::Approx(0.5));
  CHECK(post.mu(0) == doctest::Approx(1.0));
}

TEST_CASE("posterior mean approaches OLS as tau grows") {
  std::mt19937_64 gen(223);
  const DesignMatrix phi = random_design(gen, 12, 3);
  Eigen::VectorXd y(12);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = normal(gen);

  HyperState hyper;
  hyper.tau = vec({1e8, 1e8, 1e8});
  hyper.sigma2 = 1.0;
  hyper.lambda = 1.0;
  const PosteriorState post = posterior_refresh(phi, y, hyper, PriorRule::BLS);
  const Eigen::VectorXd ols =
      (phi.values.transpose() * phi.values).ldlt().solve(phi.values.transpose() * y);
  for (Eigen::Index k = 0; k < 3; ++k)
    CHECK(post.mu(k) == doctest::Approx(ols(k)).epsilon(1e-4));
}

TEST_CASE("posterior matches the dense Woodbury complement") {
  std::mt19937_64 gen(227);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int t = 0; t < 40; ++t) {
    const Eigen::Index n = 4 + static_cast<Eigen::Index>(unif(gen) * 4);
    const Eigen::Index m = 3;
    const DesignMatrix phi = random_design(gen, n, m);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = 2.0 * unif(gen) - 1.0;
    const double sigma2 = 0.4 + unif(gen);

    for (const PriorRule rule : {PriorRule::BLS, PriorRule::FLAP}) {
      HyperState hyper;
      hyper.tau = vec({0.3 + unif(gen), 0.0, 0.2 + unif(gen)});
      hyper.sigma2 = sigma2;
      hyper.lambda = 0.7;
      const PosteriorState post = posterior_refresh(phi, y, hyper, rule);
      REQUIRE(post.active_index == std::vector<int>{0, 2});

      // Dense route: Sigma = Lambda - Lambda Phi' C^-1 Phi Lambda,
      //              mu = Lambda Phi' C^-1 y.
      const double g = coupling_of(rule, sigma2);
      Eigen::MatrixXd cols(n, 2);
      cols.col(0) = phi.values.col(0);
      cols.col(1) = phi.values.col(2);
      Eigen::MatrixXd Lambda = Eigen::MatrixXd::Zero(2, 2);
      Lambda(0, 0) = g * hyper.tau(0);
      Lambda(1, 1) = g * hyper.tau(2);
      const Eigen::MatrixXd C = dense_C(phi, hyper.tau, sigma2, g);
      const Eigen::MatrixXd Cinv = C.inverse();
      const Eigen::MatrixXd Sigma_dense =
          Lambda - Lambda * cols.transpose() * Cinv * cols * Lambda;
      const Eigen::VectorXd mu_dense = Lambda * cols.transpose() * Cinv * y;
      CHECK((post.Sigma - Sigma_dense).cwiseAbs().maxCoeff() < 1e-8);
      CHECK((post.mu - mu_dense).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("log_marginal frozen single-point example") {
  Eigen::MatrixXd values(1, 1);
  values << 1.0;
  const DesignMatrix phi = design_from(values);
  HyperState hyper;
  hyper.tau = vec({0.0});
  hyper.sigma2 = 1.0;
  hyper.lambda = 1.0;
  hyper.a = hyper.b = hyper.c = hyper.d = 0.0;
  // Empty active model: the rate prior counts no columns and every hyper
  // term vanishes at lambda = sigma2 = 1, leaving -(1/2) log 2pi.
  CHECK(log_marginal(phi, vec({0.0}), hyper, PriorRule::BLS) ==
        doctest::Approx(-0.9189385332046727).epsilon(1e-12));
}

TEST_CASE("adding a basis with tau=0 leaves log_marginal unchanged") {
  std::mt19937_64 gen(229);
  const DesignMatrix phi = random_design(gen, 6, 4);
  Eigen::VectorXd y(6);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = normal(gen);

  HyperState hyper;
  hyper.tau = vec({0.5, 0.0, 0.0, 0.0});
  hyper.sigma2 = 0.8;
  hyper.lambda = 1.3;
  const double before = log_marginal(phi, y, hyper, PriorRule::BLS);

  // A wider design holding one extra all-zero-tau column: same active model.
  Eigen::MatrixXd wider(6, 5);
  wider.leftCols(4) = phi.values;
  wider.col(4) = phi.values.col(1);
  HyperState hyper2 = hyper;
  hyper2.tau = vec({0.5, 0.0, 0.0, 0.0, 0.0});
  // The rate prior counts in-model columns only, so the value is identical.
  const double after = log_marginal(design_from(wider), y, hyper2, PriorRule::BLS);
  CHECK(after == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("log_marginal matches a dense-C evaluation") {
  std::mt19937_64 gen(233);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int t = 0; t < 40; ++t) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(unif(gen) * 4);  // up to 6
    const Eigen::Index m = 3;
    const DesignMatrix phi = random_design(gen, n, m);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = 2.0 * unif(gen) - 1.0;

    HyperState hyper;
    hyper.tau = vec({0.4 + unif(gen), 0.0, 0.1 + unif(gen)});
    hyper.sigma2 = 0.5 + unif(gen);
    hyper.lambda = 0.2 + unif(gen);
    hyper.a = hyper.b = hyper.c = hyper.d = 1e-6;

    for (const PriorRule rule : {PriorRule::BLS, PriorRule::FRVM, PriorRule::FLAP}) {
      const double via_engine = rule == PriorRule::FRVM
                                    ? posterior_refresh(phi, y, hyper, rule).log_marginal
                                    : log_marginal(phi, y, hyper, rule);

      const double g = coupling_of(rule, hyper.sigma2);
      const Eigen::MatrixXd C = dense_C(phi, hyper.tau, hyper.sigma2, g);
      const double quad = y.dot(C.inverse() * y);
      const double logdet = std::log(C.determinant());
      const double n_model = static_cast<double>((hyper.tau.array() > 0.0).count());
      double expected = -0.5 * (static_cast<double>(n) * std::log(2.0 * M_PI) + logdet + quad);
      if (rule != PriorRule::FRVM) {
        expected += n_model * std::log(hyper.lambda / 2.0) -
                    0.5 * hyper.lambda * hyper.tau.sum() +
                    (hyper.a - 1.0) * std::log(hyper.lambda) - hyper.b * hyper.lambda;
      }
      if (rule == PriorRule::BLS)
        expected += -(hyper.c + 1.0) * std::log(hyper.sigma2) - hyper.d / hyper.sigma2;
      CHECK(via_engine == doctest::Approx(expected).epsilon(1e-8));
    }
  }
}

TEST_CASE("update_sigma2 frozen values") {
  Eigen::MatrixXd values(2, 1);
  values << 1, 0;
  const DesignMatrix phi = design_from(values);

  HyperState hyper;
  hyper.tau = vec({0.0});
  hyper.sigma2 = 1.0;
  hyper.c = hyper.d = 0.0;
  // Empty active set: (y'y + 0) / (N + 0 + 2) = 2/4
  CHECK(update_sigma2(vec({1.0, 1.0}), phi, hyper, PriorRule::BLS) == doctest::Approx(0.5));

  hyper.c = hyper.d = 1e-6;
  CHECK(update_sigma2(vec({1.0, 1.0}), phi, hyper, PriorRule::BLS) ==
        doctest::Approx(0.5).epsilon(1e-6));

  // Zero response with d=0 hits the absolute floor.
  hyper.c = hyper.d = 0.0;
  const double floored = update_sigma2(vec({0.0, 0.0}), phi, hyper, PriorRule::BLS);
  CHECK(floored > 0.0);
  CHECK(floored <= 1e-30);
}

TEST_CASE("update_sigma2 for the residual rules matches the hand formula") {
  std::mt19937_64 gen(239);
  const DesignMatrix phi = random_design(gen, 10, 3);
  Eigen::VectorXd y(10);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = normal(gen);

  HyperState hyper;
  hyper.tau = vec({0.7, 0.0, 0.4});
  hyper.sigma2 = 0.6;
  hyper.lambda = 0.9;
  const PosteriorState post = posterior_refresh(phi, y, hyper, PriorRule::FRVM);
  Eigen::MatrixXd cols(10, 2);
  cols.col(0) = phi.values.col(0);
  cols.col(1) = phi.values.col(2);
  const double resid = (y - cols * post.mu).squaredNorm();
  const double denom =
      10.0 - 2.0 + post.Sigma(0, 0) / hyper.tau(0) + post.Sigma(1, 1) / hyper.tau(2);
  CHECK(update_sigma2(y, phi, hyper, PriorRule::FRVM) ==
        doctest::Approx(resid / denom).epsilon(1e-12));
}

TEST_CASE("select_action prefers the larger q^2 - s candidate") {
  HyperState hyper;
  hyper.tau = vec({0.0, 0.0});
  hyper.sigma2 = 1.0;
  hyper.lambda = 1.0;
  SQCache sq;
  sq.S = vec({1.0, 1.0});
  sq.Q = vec({2.0, 3.0});
  sq.s = sq.S;
  sq.q = sq.Q;
  const auto cand = select_action(sq, hyper, PriorRule::BLS);
  REQUIRE(cand.has_value());
  CHECK(cand->index == 1);
  CHECK(cand->action == Action::Add);
  CHECK(cand->delta > 0.0);
}

TEST_CASE("select_action signals convergence when nothing qualifies") {
  HyperState hyper;
  hyper.tau = vec({0.0, 0.0});
  hyper.sigma2 = 1.0;
  hyper.lambda = 1.0;
  SQCache sq;
  sq.S = vec({1.0, 1.0});
  sq.Q = vec({1.1, 0.5});  // q^2 - s <= lambda/sigma2 for both
  sq.s = sq.S;
  sq.q = sq.Q;
  CHECK(!select_action(sq, hyper, PriorRule::BLS).has_value());
}

TEST_CASE("select_action re-estimate at the stationary value has zero gain") {
  HyperState hyper;
  hyper.sigma2 = 1.0;
  hyper.lambda = 1.0;
  const double tau_star = bls_tau_stationary(1.0, 2.0, 1.0, 1.0);
  hyper.tau = vec({tau_star});
  SQCache sq;
  sq.S = vec({0.9});  // S value is irrelevant once s,q are supplied directly
  sq.Q = vec({1.8});
  sq.s = vec({1.0});
  sq.q = vec({2.0});
  const auto cand = select_action(sq, hyper, PriorRule::BLS);
  REQUIRE(cand.has_value());
  CHECK(cand->action == Action::Reestimate);
  CHECK(cand->delta == doctest::Approx(0.0).epsilon(1e-12));
}
