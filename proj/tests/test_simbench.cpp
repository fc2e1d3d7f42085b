#include "sbl/simbench.hpp"
#include "sbl/types.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>

using namespace sbl;

TEST_CASE("sinc frozen values") {
  CHECK(sinc(0.0) == 1.0);
  CHECK(sinc(M_PI) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  CHECK(sinc(1.0) == doctest::Approx(std::sin(1.0)).epsilon(1e-15));
  CHECK(sinc(-2.5) == sinc(2.5));
  CHECK(sinc(1e-13) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("1D sinc grid shape and noiseless limit") {
  SincSpec spec = SincSpec::one_dim(0.0);
  spec.seed = 5;
  const SincData data = gen_sinc(spec);
  REQUIRE(data.X.rows() == 200);
  REQUIRE(data.X.cols() == 1);
  CHECK(data.X(0, 0) == doctest::Approx(-10.0));
  CHECK(data.X(199, 0) == doctest::Approx(10.0));
  // Uniform spacing.
  const double step = data.X(1, 0) - data.X(0, 0);
  CHECK(data.X(101, 0) - data.X(100, 0) == doctest::Approx(step).epsilon(1e-12));
  // sigma = 0: observations equal the target.
  CHECK((data.y - data.f_true).cwiseAbs().maxCoeff() == 0.0);
  for (Eigen::Index i = 0; i < data.X.rows(); ++i)
    CHECK(data.f_true(i) == doctest::Approx(sinc(data.X(i, 0))).epsilon(1e-15));
}

TEST_CASE("2D sinc grid covers the square with additive structure") {
  SincSpec spec = SincSpec::two_dim(0.1);
  spec.seed = 7;
  const SincData data = gen_sinc(spec);
  // [-5, 5] with step 0.3 gives 34 points per axis.
  REQUIRE(data.X.rows() == 34 * 34);
  REQUIRE(data.X.cols() == 2);
  CHECK(data.X(0, 0) == doctest::Approx(-5.0));
  CHECK(data.X(0, 1) == doctest::Approx(-5.0));
  for (Eigen::Index i = 0; i < data.X.rows(); i += 97)
    CHECK(data.f_true(i) ==
          doctest::Approx(sinc(data.X(i, 0)) + sinc(data.X(i, 1))).epsilon(1e-15));
  // Noise with the requested scale actually lands on y.
  const double noise_sd = std::sqrt((data.y - data.f_true).squaredNorm() / data.y.size());
  CHECK(noise_sd == doctest::Approx(0.1).epsilon(0.15));
}

TEST_CASE("gen_sinc is deterministic in the seed and varies with it") {
  SincSpec spec = SincSpec::one_dim(0.2);
  spec.seed = 11;
  const SincData a = gen_sinc(spec);
  const SincData b = gen_sinc(spec);
  CHECK(a.y == b.y);
  spec.seed = 12;
  const SincData c = gen_sinc(spec);
  CHECK((a.y - c.y).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("mse_vs_truth is a plain mean squared difference") {
  Eigen::VectorXd a(2), b(2);
  a << 1.0, 2.0;
  b << 0.0, 4.0;
  CHECK(mse_vs_truth(a, b) == doctest::Approx(2.5));
  CHECK_THROWS_AS((void)mse_vs_truth(a, Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST_CASE("resolve_threads clamps to the task count and honors the env cap") {
  CHECK(resolve_threads(4, 2) == 2);
  CHECK(resolve_threads(1, 100) == 1);
  CHECK(resolve_threads(3, 100) == 3);
  ::setenv("SBL_THREADS", "2", 1);
  CHECK(resolve_threads(0, 100) == 2);
  CHECK(resolve_threads(8, 100) == 2);  // env also caps explicit requests
  ::unsetenv("SBL_THREADS");
  CHECK(resolve_threads(0, 1) == 1);
}

TEST_CASE("a tiny study produces sane cells") {
  StudyConfig cfg;
  cfg.methods = {PriorRule::BLS, PriorRule::FRVM};
  cfg.sigmas = {0.05, 0.2};
  cfg.reps = 2;
  cfg.sinc = SincSpec::one_dim(0.0, 40);
  cfg.sinc.seed = 100;
  cfg.n_threads = 1;

  const StudyReport report = run_study(cfg);
  REQUIRE(report.cells.size() == 4);
  // sigma-major ordering, methods in the given order inside each sigma.
  CHECK(report.cells[0].sigma == 0.05);
  CHECK(report.cells[0].method == PriorRule::BLS);
  CHECK(report.cells[1].method == PriorRule::FRVM);
  CHECK(report.cells[2].sigma == 0.2);
  for (const StudyCell& cell : report.cells) {
    CHECK(cell.n_reps == 2);
    CHECK(cell.n_failed == 0);
    CHECK(cell.nov_mean > 0.0);
    CHECK(cell.mse_mean >= 0.0);
    CHECK(cell.mse_mean < 0.1);
    CHECK(cell.sigma_hat_mean > 0.0);
  }
  // More noise, worse fit against the clean target.
  CHECK(report.cells[2].mse_mean > report.cells[0].mse_mean);
}

TEST_CASE("study results do not depend on the thread count") {
  StudyConfig cfg;
  cfg.methods = {PriorRule::BLS};
  cfg.sigmas = {0.1};
  cfg.reps = 3;
  cfg.sinc = SincSpec::one_dim(0.0, 30);
  cfg.sinc.seed = 42;

  cfg.n_threads = 1;
  const std::string serial = report_csv(run_study(cfg));
  cfg.n_threads = 3;
  const std::string parallel = report_csv(run_study(cfg));
  CHECK(serial == parallel);
}

TEST_CASE("single repetition reports zero spread") {
  StudyConfig cfg;
  cfg.methods = {PriorRule::BLS};
  cfg.sigmas = {0.1};
  cfg.reps = 1;
  cfg.sinc = SincSpec::one_dim(0.0, 30);
  cfg.sinc.seed = 9;
  cfg.n_threads = 1;
  const StudyReport report = run_study(cfg);
  REQUIRE(report.cells.size() == 1);
  CHECK(report.cells[0].nov_sd == 0.0);
  CHECK(report.cells[0].mse_sd == 0.0);
}

TEST_CASE("report serializations carry every cell") {
  StudyConfig cfg;
  cfg.methods = {PriorRule::BLS};
  cfg.sigmas = {0.1};
  cfg.reps = 1;
  cfg.sinc = SincSpec::one_dim(0.0, 25);
  cfg.n_threads = 1;
  const StudyReport report = run_study(cfg);
  const std::string csv = report_csv(report);
  CHECK(csv.find("method") != std::string::npos);
  CHECK(csv.find("bls") != std::string::npos);
  const std::string md = report_markdown(report);
  CHECK(md.find("|") != std::string::npos);
  CHECK(md.find("0.1") != std::string::npos);
}

TEST_CASE("sparse linear generator honors its spec") {
  SparseLinearSpec spec;
  spec.n = 50;
  spec.d = 80;
  spec.k_nonzero = 5;
  spec.seed = 3;
  const SparseLinearData data = gen_sparse_linear(spec);
  REQUIRE(data.data.X.rows() == 50);
  REQUIRE(data.data.X.cols() == 80);
  REQUIRE(data.support.size() == 5);
  CHECK(std::is_sorted(data.support.begin(), data.support.end()));
  int nonzero = 0;
  for (Eigen::Index j = 0; j < data.beta.size(); ++j) {
    if (data.beta(j) != 0.0) {
      ++nonzero;
      CHECK(std::abs(data.beta(j)) >= 0.5);
      CHECK(std::abs(data.beta(j)) <= 1.5);
      const bool in_support =
          std::find(data.support.begin(), data.support.end(), static_cast<int>(j)) !=
          data.support.end();
      CHECK(in_support);
    }
  }
  CHECK(nonzero == 5);
  CHECK(data.noise_sd > 0.0);
  CHECK(data.data.names.size() == 80);
  CHECK(data.data.names[0] == "v0");

  // Same seed, same data; the SNR roughly matches.
  const SparseLinearData again = gen_sparse_linear(spec);
  CHECK(data.data.y == again.data.y);
  const Eigen::VectorXd signal = data.data.X * data.beta;
  const Eigen::VectorXd resid = data.data.y - signal;
  const double snr_hat = signal.squaredNorm() / resid.squaredNorm();
  CHECK(snr_hat == doctest::Approx(10.0).epsilon(0.6));
}
