#include "sbl/select.hpp"

#include "sbl/engine.hpp"
#include "sbl/kernels.hpp"
#include "sbl/predict.hpp"
#include "sbl/simbench.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <iomanip>
#include <optional>
#include <sstream>
#include <thread>

namespace sbl {
namespace {

struct RepOutcome {
  double mse = 0.0;
  double nvar = 0.0;
};

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  return mean / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mean = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

SelectReport run_select_study(const Dataset& raw, const SelectConfig& cfg) {
  if (cfg.reps < 1) throw std::invalid_argument("run_select_study: reps must be positive");
  if (cfg.methods.empty()) throw std::invalid_argument("run_select_study: no methods given");

  const int n_methods = static_cast<int>(cfg.methods.size());
  std::vector<std::vector<std::optional<RepOutcome>>> results(
      static_cast<size_t>(n_methods),
      std::vector<std::optional<RepOutcome>>(static_cast<size_t>(cfg.reps)));

  const KernelSpec identity = KernelSpec::identity();
  const Eigen::MatrixXd no_train_inputs;

  const auto task = [&](int rep) {
    Dataset train, test;
    try {
      std::tie(train, test) =
          train_test_split(raw, cfg.train_frac, cfg.seed + static_cast<std::uint64_t>(rep));
    } catch (const std::exception&) {
      return;
    }
    DesignMatrix design;
    try {
      design = build_design(identity, train.X);
    } catch (const std::exception&) {
      return;
    }
    for (int mi = 0; mi < n_methods; ++mi) {
      try {
        const FitResult fit_res =
            fit(design, train.y, cfg.methods[static_cast<size_t>(mi)], cfg.fit);
        // Test rows are already on the training split's standardized scale,
        // so the centred-response residuals are the raw-scale residuals.
        const auto preds = predict_batch(fit_res, identity, no_train_inputs, test.X);
        double ss = 0.0;
        for (Eigen::Index i = 0; i < test.X.rows(); ++i) {
          const double resid = preds[static_cast<size_t>(i)].mean - test.y(i);
          ss += resid * resid;
        }
        RepOutcome outcome;
        outcome.mse = ss / static_cast<double>(test.X.rows());
        outcome.nvar = static_cast<double>(fit_res.relevance_indices.size());
        results[static_cast<size_t>(mi)][static_cast<size_t>(rep)] = outcome;
      } catch (const std::exception&) {
        // failed rep for this method
      }
    }
  };

  const int n_threads = resolve_threads(cfg.n_threads, cfg.reps);
  if (n_threads <= 1) {
    for (int rep = 0; rep < cfg.reps; ++rep) task(rep);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < n_threads; ++w)
      pool.emplace_back([&] {
        for (int t = next.fetch_add(1); t < cfg.reps; t = next.fetch_add(1)) task(t);
      });
    for (auto& th : pool) th.join();
  }

  SelectReport report;
  for (int mi = 0; mi < n_methods; ++mi) {
    SelectCell cell;
    cell.method = cfg.methods[static_cast<size_t>(mi)];
    std::vector<double> mse, nvar;
    for (int rep = 0; rep < cfg.reps; ++rep) {
      const auto& slot = results[static_cast<size_t>(mi)][static_cast<size_t>(rep)];
      if (!slot) {
        ++cell.n_failed;
        continue;
      }
      mse.push_back(slot->mse);
      nvar.push_back(slot->nvar);
    }
    cell.n_reps = static_cast<int>(mse.size());
    cell.mse_mean = mean_of(mse);
    cell.mse_sd = sample_sd(mse);
    cell.nvar_mean = mean_of(nvar);
    cell.nvar_sd = sample_sd(nvar);
    report.rows.push_back(cell);
  }
  return report;
}

std::string select_csv(const SelectReport& report) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "method,n_reps,n_failed,test_mse_mean,test_mse_sd,n_selected_mean,n_selected_sd\n";
  for (const auto& row : report.rows) {
    out << to_string(row.method) << ',' << row.n_reps << ',' << row.n_failed << ','
        << row.mse_mean << ',' << row.mse_sd << ',' << row.nvar_mean << ',' << row.nvar_sd
        << '\n';
  }
  return out.str();
}

std::string select_markdown(const SelectReport& report) {
  std::ostringstream out;
  out << "| method | test MSE (SD) | selected variables (SD) | reps | failed |\n";
  out << "|---|---|---|---|---|\n";
  for (const auto& row : report.rows) {
    out << "| " << to_string(row.method) << " | " << std::setprecision(6) << row.mse_mean
        << " (" << std::setprecision(4) << row.mse_sd << ") | " << std::setprecision(4)
        << row.nvar_mean << " (" << std::setprecision(3) << row.nvar_sd << ") | "
        << row.n_reps << " | " << row.n_failed << " |\n";
  }
  return out.str();
}

}  // namespace sbl
