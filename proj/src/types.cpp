#include "sbl/types.hpp"

namespace sbl {

const char* to_string(PriorRule rule) {
  switch (rule) {
    case PriorRule::BLS: return "bls";
    case PriorRule::FRVM: return "frvm";
    case PriorRule::FLAP: return "flap";
  }
  return "?";
}

PriorRule prior_rule_from_string(const std::string& name) {
  if (name == "bls") return PriorRule::BLS;
  if (name == "frvm") return PriorRule::FRVM;
  if (name == "flap") return PriorRule::FLAP;
  throw std::invalid_argument("unknown method '" + name + "' (expected bls, frvm or flap)");
}

const char* to_string(Action action) {
  switch (action) {
    case Action::Add: return "add";
    case Action::Reestimate: return "reestimate";
    case Action::Delete: return "delete";
  }
  return "?";
}

std::vector<int> HyperState::active() const {
  std::vector<int> idx;
  for (int i = 0; i < tau.size(); ++i)
    if (tau(i) > 0.0) idx.push_back(i);
  return idx;
}

double sample_variance(const Eigen::VectorXd& v) {
  const Eigen::Index n = v.size();
  if (n < 2) return 0.0;
  const double mean = v.mean();
  return (v.array() - mean).square().sum() / static_cast<double>(n - 1);
}

}  // namespace sbl
