#include "sbl/simbench.hpp"

#include "sbl/engine.hpp"
#include "sbl/predict.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <random>
#include <sstream>
#include <thread>

namespace sbl {
namespace {

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  return mean / static_cast<double>(v.size());
}

// One repetition's measurements for one method; empty optional = fit failed.
struct RepOutcome {
  double nov = 0.0;
  double mse = 0.0;
  double sigma_hat = 0.0;
};

std::string format_stat(double mean, double sd) {
  std::ostringstream out;
  out << std::setprecision(4) << mean << " (" << std::setprecision(3) << sd << ")";
  return out.str();
}

void run_tasks_parallel(int n_threads, int n_tasks, const std::function<void(int)>& task) {
  if (n_threads <= 1) {
    for (int t = 0; t < n_tasks; ++t) task(t);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(n_threads));
  for (int w = 0; w < n_threads; ++w) {
    pool.emplace_back([&] {
      for (int t = next.fetch_add(1); t < n_tasks; t = next.fetch_add(1)) task(t);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

SincSpec SincSpec::one_dim(double sigma, int n_points) {
  SincSpec spec;
  spec.dim = 1;
  spec.sigma = sigma;
  spec.n_points = n_points;
  spec.x_min = -10.0;
  spec.x_max = 10.0;
  return spec;
}

SincSpec SincSpec::two_dim(double sigma, double grid_step) {
  SincSpec spec;
  spec.dim = 2;
  spec.sigma = sigma;
  spec.grid_step = grid_step;
  spec.x_min = -5.0;
  spec.x_max = 5.0;
  return spec;
}

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  return std::sin(x) / x;
}

SincData gen_sinc(const SincSpec& spec) {
  if (spec.dim != 1 && spec.dim != 2)
    throw std::invalid_argument("gen_sinc: dim must be 1 or 2");
  if (spec.sigma < 0.0) throw std::invalid_argument("gen_sinc: sigma must be nonnegative");
  if (!(spec.x_max > spec.x_min)) throw std::invalid_argument("gen_sinc: empty range");

  SincData data;
  if (spec.dim == 1) {
    if (spec.n_points < 2) throw std::invalid_argument("gen_sinc: need at least 2 points");
    const Eigen::Index n = spec.n_points;
    data.X.resize(n, 1);
    data.f_true.resize(n);
    const double step = (spec.x_max - spec.x_min) / static_cast<double>(n - 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x = spec.x_min + step * static_cast<double>(i);
      data.X(i, 0) = x;
      data.f_true(i) = sinc(x);
    }
  } else {
    if (!(spec.grid_step > 0.0)) throw std::invalid_argument("gen_sinc: grid_step must be positive");
    std::vector<double> axis;
    for (double x = spec.x_min; x <= spec.x_max + 1e-9; x += spec.grid_step)
      axis.push_back(x);
    const Eigen::Index m = static_cast<Eigen::Index>(axis.size());
    data.X.resize(m * m, 2);
    data.f_true.resize(m * m);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) {
        const Eigen::Index r = i * m + j;
        data.X(r, 0) = axis[static_cast<size_t>(i)];
        data.X(r, 1) = axis[static_cast<size_t>(j)];
        data.f_true(r) = sinc(axis[static_cast<size_t>(i)]) + sinc(axis[static_cast<size_t>(j)]);
      }
    }
  }

  data.y = data.f_true;
  if (spec.sigma > 0.0) {
    std::mt19937_64 gen(spec.seed);
    std::normal_distribution<double> noise(0.0, spec.sigma);
    for (Eigen::Index i = 0; i < data.y.size(); ++i) data.y(i) += noise(gen);
  }
  return data;
}

double mse_vs_truth(const Eigen::VectorXd& y_star, const Eigen::VectorXd& f_true) {
  if (y_star.size() != f_true.size())
    throw std::invalid_argument("mse_vs_truth: length mismatch");
  if (y_star.size() == 0) throw std::invalid_argument("mse_vs_truth: empty vectors");
  return (y_star - f_true).squaredNorm() / static_cast<double>(y_star.size());
}

int resolve_threads(int requested, int n_tasks) {
  int threads = requested;
  if (threads <= 0) {
    if (const char* env = std::getenv("SBL_THREADS")) {
      threads = std::atoi(env);
    }
  }
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads <= 0) threads = 1;
  if (const char* env = std::getenv("SBL_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) threads = std::min(threads, cap);
  }
  return std::max(1, std::min(threads, std::max(1, n_tasks)));
}

StudyReport run_study(const StudyConfig& cfg) {
  if (cfg.reps < 1) throw std::invalid_argument("run_study: reps must be positive");
  if (cfg.methods.empty()) throw std::invalid_argument("run_study: no methods given");
  if (cfg.sigmas.empty()) throw std::invalid_argument("run_study: no sigmas given");

  const int n_sigmas = static_cast<int>(cfg.sigmas.size());
  const int n_methods = static_cast<int>(cfg.methods.size());
  const int n_tasks = n_sigmas * cfg.reps;

  // results[sigma][method][rep]; slot-indexed so thread order cannot change
  // the aggregation.
  std::vector<std::vector<std::vector<std::optional<RepOutcome>>>> results(
      static_cast<size_t>(n_sigmas),
      std::vector<std::vector<std::optional<RepOutcome>>>(
          static_cast<size_t>(n_methods),
          std::vector<std::optional<RepOutcome>>(static_cast<size_t>(cfg.reps))));

  const auto task = [&](int t) {
    const int si = t / cfg.reps;
    const int rep = t % cfg.reps;

    SincSpec ds_spec = cfg.sinc;
    ds_spec.sigma = cfg.sigmas[static_cast<size_t>(si)];
    ds_spec.seed = cfg.sinc.seed + static_cast<std::uint64_t>(rep);
    SincData data;
    DesignMatrix design;
    try {
      data = gen_sinc(ds_spec);
      design = build_design(cfg.kernel, data.X);
    } catch (const std::exception&) {
      return;  // all methods recorded as failed for this rep
    }

    FitConfig fit_cfg = cfg.fit;
    if (cfg.fixed_sigma2) fit_cfg.fix_sigma2 = sample_variance(data.y) * 0.1;

    for (int mi = 0; mi < n_methods; ++mi) {
      try {
        const FitResult fit_res =
            fit(design, data.y, cfg.methods[static_cast<size_t>(mi)], fit_cfg);
        const auto preds = predict_batch(fit_res, cfg.kernel, data.X, data.X);
        Eigen::VectorXd means(static_cast<Eigen::Index>(preds.size()));
        for (Eigen::Index i = 0; i < means.size(); ++i)
          means(i) = preds[static_cast<size_t>(i)].mean;
        RepOutcome outcome;
        outcome.nov = static_cast<double>(fit_res.relevance_indices.size());
        outcome.mse = mse_vs_truth(means, data.f_true);
        outcome.sigma_hat = std::sqrt(fit_res.sigma2_hat);
        results[static_cast<size_t>(si)][static_cast<size_t>(mi)]
               [static_cast<size_t>(rep)] = outcome;
      } catch (const std::exception&) {
        // failed rep: slot stays empty
      }
    }
  };

  run_tasks_parallel(resolve_threads(cfg.n_threads, n_tasks), n_tasks, task);

  StudyReport report;
  report.fixed_sigma2 = cfg.fixed_sigma2;
  for (int si = 0; si < n_sigmas; ++si) {
    for (int mi = 0; mi < n_methods; ++mi) {
      StudyCell cell;
      cell.method = cfg.methods[static_cast<size_t>(mi)];
      cell.sigma = cfg.sigmas[static_cast<size_t>(si)];
      std::vector<double> nov, mse, sig;
      for (int rep = 0; rep < cfg.reps; ++rep) {
        const auto& slot =
            results[static_cast<size_t>(si)][static_cast<size_t>(mi)][static_cast<size_t>(rep)];
        if (!slot) {
          ++cell.n_failed;
          continue;
        }
        nov.push_back(slot->nov);
        mse.push_back(slot->mse);
        sig.push_back(slot->sigma_hat);
      }
      cell.n_reps = static_cast<int>(nov.size());
      cell.nov_mean = mean_of(nov);
      cell.nov_sd = sample_sd(nov);
      cell.mse_mean = mean_of(mse);
      cell.mse_sd = sample_sd(mse);
      cell.sigma_hat_mean = mean_of(sig);
      cell.sigma_hat_sd = sample_sd(sig);
      report.cells.push_back(cell);
    }
  }
  return report;
}

std::string report_csv(const StudyReport& report) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "method,sigma,n_reps,n_failed,nov_mean,nov_sd,mse_mean,mse_sd,"
         "sigma_hat_mean,sigma_hat_sd\n";
  for (const auto& cell : report.cells) {
    out << to_string(cell.method) << ',' << cell.sigma << ',' << cell.n_reps << ','
        << cell.n_failed << ',' << cell.nov_mean << ',' << cell.nov_sd << ','
        << cell.mse_mean << ',' << cell.mse_sd << ',' << cell.sigma_hat_mean << ','
        << cell.sigma_hat_sd << '\n';
  }
  return out.str();
}

std::string report_markdown(const StudyReport& report) {
  // Collect method order and sigma order as they appear.
  std::vector<PriorRule> methods;
  std::vector<double> sigmas;
  for (const auto& cell : report.cells) {
    if (std::find(methods.begin(), methods.end(), cell.method) == methods.end())
      methods.push_back(cell.method);
    if (std::find(sigmas.begin(), sigmas.end(), cell.sigma) == sigmas.end())
      sigmas.push_back(cell.sigma);
  }
  const auto find_cell = [&](double sigma, PriorRule method) -> const StudyCell* {
    for (const auto& cell : report.cells)
      if (cell.sigma == sigma && cell.method == method) return &cell;
    return nullptr;
  };

  std::ostringstream out;
  out << "| sigma |";
  for (const auto m : methods) out << " NOV " << to_string(m) << " (SD) |";
  for (const auto m : methods) out << " MSE " << to_string(m) << " (SD) |";
  if (!report.fixed_sigma2)
    for (const auto m : methods) out << " sigma_hat " << to_string(m) << " (SD) |";
  out << "\n|---|";
  const size_t groups = methods.size() * (report.fixed_sigma2 ? 2 : 3);
  for (size_t k = 0; k < groups; ++k) out << "---|";
  out << "\n";
  for (const double sigma : sigmas) {
    out << "| " << std::setprecision(4) << sigma << " |";
    for (const auto m : methods) {
      const auto* cell = find_cell(sigma, m);
      out << ' ' << (cell ? format_stat(cell->nov_mean, cell->nov_sd) : "-") << " |";
    }
    for (const auto m : methods) {
      const auto* cell = find_cell(sigma, m);
      out << ' ' << (cell ? format_stat(cell->mse_mean, cell->mse_sd) : "-") << " |";
    }
    if (!report.fixed_sigma2) {
      for (const auto m : methods) {
        const auto* cell = find_cell(sigma, m);
        out << ' ' << (cell ? format_stat(cell->sigma_hat_mean, cell->sigma_hat_sd) : "-")
            << " |";
      }
    }
    out << "\n";
  }
  return out.str();
}

SparseLinearData gen_sparse_linear(const SparseLinearSpec& spec) {
  if (spec.n < 3 || spec.d < 1) throw std::invalid_argument("gen_sparse_linear: bad sizes");
  if (spec.k_nonzero < 1 || spec.k_nonzero > spec.d)
    throw std::invalid_argument("gen_sparse_linear: bad support size");
  if (!(spec.snr > 0.0)) throw std::invalid_argument("gen_sparse_linear: snr must be positive");

  std::mt19937_64 gen(spec.seed);
  std::normal_distribution<double> standard_normal(0.0, 1.0);

  SparseLinearData out;
  out.data.X.resize(spec.n, spec.d);
  for (Eigen::Index i = 0; i < out.data.X.rows(); ++i)
    for (Eigen::Index j = 0; j < out.data.X.cols(); ++j)
      out.data.X(i, j) = standard_normal(gen);

  std::vector<int> order(static_cast<size_t>(spec.d));
  for (int j = 0; j < spec.d; ++j) order[static_cast<size_t>(j)] = j;
  std::shuffle(order.begin(), order.end(), gen);
  out.support.assign(order.begin(), order.begin() + spec.k_nonzero);
  std::sort(out.support.begin(), out.support.end());

  std::uniform_real_distribution<double> magnitude(0.5, 1.5);
  std::bernoulli_distribution sign(0.5);
  out.beta = Eigen::VectorXd::Zero(spec.d);
  for (const int j : out.support) out.beta(j) = (sign(gen) ? 1.0 : -1.0) * magnitude(gen);

  const Eigen::VectorXd signal = out.data.X * out.beta;
  out.noise_sd = std::sqrt(sample_variance(signal) / spec.snr);
  out.data.y = signal;
  std::normal_distribution<double> noise(0.0, out.noise_sd);
  for (Eigen::Index i = 0; i < out.data.y.size(); ++i) out.data.y(i) += noise(gen);

  out.data.names.reserve(static_cast<size_t>(spec.d));
  for (int j = 0; j < spec.d; ++j) out.data.names.push_back("v" + std::to_string(j));
  out.data.response_name = "y";
  return out;
}

}  // namespace sbl
