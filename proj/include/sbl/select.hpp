#pragma once

#include "sbl/dataio.hpp"
#include "sbl/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sbl {

// Repeated-split variable-selection study: per repetition, split, fit each
// method on the standardized training split (identity design), evaluate
// test MSE on the raw response scale and count selected variables.
struct SelectConfig {
  std::vector<PriorRule> methods{PriorRule::BLS};
  int reps = 100;
  double train_frac = 0.8;
  std::uint64_t seed = 0;
  FitConfig fit;
  int n_threads = 0;
};

struct SelectCell {
  PriorRule method = PriorRule::BLS;
  int n_reps = 0;
  int n_failed = 0;
  double mse_mean = 0.0, mse_sd = 0.0;
  double nvar_mean = 0.0, nvar_sd = 0.0;
};

struct SelectReport {
  std::vector<SelectCell> rows;
};

[[nodiscard]] SelectReport run_select_study(const Dataset& raw, const SelectConfig& cfg);

[[nodiscard]] std::string select_csv(const SelectReport& report);
[[nodiscard]] std::string select_markdown(const SelectReport& report);

}  // namespace sbl
