#include "modcs/signal_model.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "modcs/errors.hpp"
#include "modcs/random.hpp"

namespace modcs {

namespace {

std::vector<std::int8_t> DrawSigns(std::size_t count, CounterRng& rng) {
  std::vector<std::int8_t> signs(count);
  for (auto& s : signs) s = (rng() >> 63) ? 1 : -1;
  return signs;
}

// Applies a transition given the complete cohort assignment for the new time.
SignalModelState ApplyTransition(const SignalModelState& prev,
                                 const ModelParams& params,
                                 std::vector<Support> increasing,
                                 std::vector<Support> decreasing,
                                 const std::vector<std::int8_t>& addition_signs) {
  SignalModelState next;
  next.t = prev.t + 1;
  next.level = prev.level;
  next.sign = prev.sign;
  for (int j = 1; j <= params.d; ++j) {
    for (int i : increasing[j]) ++next.level[i];
  }
  for (int j = 0; j < params.d; ++j) {
    for (int i : decreasing[j]) --next.level[i];
  }
  const Support& added = increasing[1];
  for (std::size_t k = 0; k < added.size(); ++k) {
    next.sign[added[k]] = addition_signs.empty() ? 1 : addition_signs[k];
  }
  for (int i : decreasing[0]) next.sign[i] = 0;
  next.increasing = std::move(increasing);
  next.decreasing = std::move(decreasing);
  return next;
}

}  // namespace

void ModelParams::Validate() const {
  std::ostringstream err;
  if (m <= 0) err << "m must be positive; ";
  if (sa < 1) err << "Sa must be >= 1; ";
  if (d < 1) err << "d must be >= 1; ";
  if (!(r > 0.0) || !std::isfinite(r)) err << "r must be positive and finite; ";
  if (s0 > m) err << "S0 must not exceed m; ";
  // Levels 1..d-1 hold 2Sa coordinates each and the stable level must supply
  // Sa decreasing coordinates while also receiving Sa new arrivals.
  if (d >= 1 && sa >= 1 && s0 < (2 * d - 1) * sa) {
    err << "S0 must be at least (2d-1)Sa; ";
  }
  if (s0 + sa > m) err << "S0 + Sa must not exceed m; ";
  const std::string msg = err.str();
  if (!msg.empty()) throw ConfigurationError("ModelParams: " + msg);
}

double ModelPower(const ModelParams& p) {
  const double big_m = p.StableMagnitude();
  double sum = 0.0;
  for (int j = 1; j < p.d; ++j) sum += static_cast<double>(j) * j * p.r * p.r;
  return (p.s0 - (2 * p.d - 2) * p.sa) * big_m * big_m + 2.0 * p.sa * sum;
}

Support SignalModelState::support() const {
  Support s;
  for (int i = 0; i < m(); ++i) {
    if (level[i] > 0) s.push_back(i);
  }
  return s;
}

Support SignalModelState::AtLevel(int j) const {
  Support s;
  for (int i = 0; i < m(); ++i) {
    if (level[i] == j) s.push_back(i);
  }
  return s;
}

Eigen::VectorXd SignalModelState::Values(double r) const {
  Eigen::VectorXd x(m());
  for (int i = 0; i < m(); ++i) x[i] = sign[i] * level[i] * r;
  return x;
}

double SignalModelState::Power(double r) const { return Values(r).squaredNorm(); }

SparseSignal SparseSignal::FromValues(Eigen::VectorXd v) {
  SparseSignal s;
  s.support = NonzeroSupport(v);
  s.values = std::move(v);
  return s;
}

SignalModelState InitState(const ModelParams& params) {
  params.Validate();
  const int m = params.m, d = params.d, sa = params.sa;

  std::vector<int> all(m);
  std::iota(all.begin(), all.end(), 0);
  CounterRng support_rng(params.seed, 0, StreamTag::kInitialSupport);
  const Support support = SampleWithoutReplacement(all, params.s0, support_rng);

  // Random order of the support decides which coordinates sit at which level.
  CounterRng cohort_rng(params.seed, 0, StreamTag::kInitialCohorts);
  std::vector<int> order = support;
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[cohort_rng.Below(i)]);
  }

  SignalModelState state;
  state.t = 0;
  state.level.assign(m, 0);
  state.sign.assign(m, 0);
  state.increasing.assign(d + 1, {});
  state.decreasing.assign(d, {});

  std::size_t pos = 0;
  for (int j = 1; j < d; ++j) {
    Support rising(order.begin() + pos, order.begin() + pos + sa);
    Support falling(order.begin() + pos + sa, order.begin() + pos + 2 * sa);
    pos += 2 * sa;
    for (int i : rising) state.level[i] = j;
    for (int i : falling) state.level[i] = j;
    state.increasing[j] = Normalize(std::move(rising));
    state.decreasing[j] = Normalize(std::move(falling));
  }
  Support stable(order.begin() + pos, order.end());
  stable = Normalize(std::move(stable));
  for (int i : stable) state.level[i] = d;
  // Sa of the stable coordinates are taken to have just arrived at M.
  state.increasing[d] = SampleWithoutReplacement(stable, sa, cohort_rng);
  // R_0 is fictional history: Sa coordinates outside N_0 that just left.
  state.decreasing[0] =
      SampleWithoutReplacement(Complement(support, m), sa, cohort_rng);

  CounterRng sign_rng(params.seed, 0, StreamTag::kInitialSigns);
  const auto signs = DrawSigns(support.size(), sign_rng);
  for (std::size_t k = 0; k < support.size(); ++k) state.sign[support[k]] = signs[k];
  return state;
}

SignalModelState StepWithChoices(const SignalModelState& state,
                                 const ModelParams& params,
                                 const StepChoices& choices) {
  const int d = params.d, sa = params.sa;
  const Support support = state.support();
  const Support additions = Normalize(choices.additions);
  const Support start_dec = Normalize(choices.start_decreasing);
  if (static_cast<int>(additions.size()) != sa ||
      !Intersection(additions, support).empty()) {
    throw ArgumentError("StepWithChoices: additions must be Sa indices outside the support");
  }
  if (static_cast<int>(start_dec.size()) != sa ||
      !IsSubset(start_dec, state.AtLevel(d))) {
    throw ArgumentError("StepWithChoices: decreasing set must be Sa stable indices");
  }
  if (!choices.addition_signs.empty() &&
      static_cast<int>(choices.addition_signs.size()) != sa) {
    throw ArgumentError("StepWithChoices: addition_signs must be empty or of size Sa");
  }

  std::vector<Support> inc(d + 1), dec(d);
  inc[1] = additions;
  for (int j = 2; j <= d; ++j) inc[j] = state.increasing[j - 1];
  for (int j = 0; j <= d - 2; ++j) dec[j] = state.decreasing[j + 1];
  dec[d - 1] = start_dec;
  return ApplyTransition(state, params, std::move(inc), std::move(dec),
                         choices.addition_signs);
}

SignalModelState Step(const SignalModelState& state, const ModelParams& params) {
  const int d = params.d, sa = params.sa, m = params.m;
  const int t = state.t + 1;
  const Support support = state.support();

  CounterRng add_rng(params.seed, t, StreamTag::kAdditions);
  CounterRng dec_rng(params.seed, t, StreamTag::kDecreases);
  CounterRng sign_rng(params.seed, t, StreamTag::kSigns);

  StepChoices choices;
  choices.additions = SampleWithoutReplacement(Complement(support, m), sa, add_rng);
  choices.start_decreasing = SampleWithoutReplacement(state.AtLevel(d), sa, dec_rng);
  choices.addition_signs = DrawSigns(sa, sign_rng);

  if (params.generator == Generator::kGen1) {
    return StepWithChoices(state, params, choices);
  }

  // Gen2: each intermediate level splits its 2Sa members at random.
  CounterRng shuffle_rng(params.seed, t, StreamTag::kCohortShuffle);
  std::vector<Support> inc(d + 1), dec(d);
  inc[1] = choices.additions;
  for (int j = 1; j <= d - 1; ++j) {
    const Support members = state.AtLevel(j);
    Support up = SampleWithoutReplacement(members, sa, shuffle_rng);
    dec[j - 1] = Difference(members, up);
    inc[j + 1] = std::move(up);
  }
  dec[d - 1] = choices.start_decreasing;
  return ApplyTransition(state, params, std::move(inc), std::move(dec),
                         choices.addition_signs);
}

CohortSets GetCohortSets(const SignalModelState& state, const ModelParams& params,
                         int j) {
  if (j < 1 || j > params.d) {
    throw ArgumentError("GetCohortSets: level index must satisfy 1 <= j <= d");
  }
  CohortSets sets;
  sets.added = state.increasing[1];
  sets.removed = state.decreasing[0];
  sets.increasing = state.increasing[j];
  sets.decreasing = state.decreasing[j - 1];
  for (int i = 0; i < state.m(); ++i) {
    if (state.level[i] > 0 && state.level[i] < j) sets.small.push_back(i);
  }
  return sets;
}

void CheckStateInvariants(const SignalModelState& state, const ModelParams& params) {
  auto fail = [&](const std::string& what) {
    throw std::logic_error("state t=" + std::to_string(state.t) + ": " + what);
  };
  const int d = params.d, sa = params.sa;
  if (state.m() != params.m || static_cast<int>(state.sign.size()) != params.m) {
    fail("dimension mismatch");
  }
  for (int i = 0; i < state.m(); ++i) {
    if (state.level[i] < 0 || state.level[i] > d) fail("level out of range");
    if ((state.sign[i] == 0) != (state.level[i] == 0)) fail("sign/magnitude mismatch");
  }
  if (static_cast<int>(state.support().size()) != params.s0) fail("|N_t| != S0");
  for (int j = 1; j < d; ++j) {
    if (static_cast<int>(state.AtLevel(j).size()) != 2 * sa) {
      fail("level " + std::to_string(j) + " does not hold 2Sa coordinates");
    }
  }
  if (static_cast<int>(state.increasing.size()) != d + 1 ||
      static_cast<int>(state.decreasing.size()) != d) {
    fail("cohort table shape");
  }
  for (int j = 1; j <= d; ++j) {
    if (static_cast<int>(state.increasing[j].size()) != sa) fail("|I_t(j)| != Sa");
    for (int i : state.increasing[j]) {
      if (state.level[i] != j) fail("I_t(j) member not at level j");
    }
  }
  for (int j = 0; j < d; ++j) {
    if (static_cast<int>(state.decreasing[j].size()) != sa) fail("|D_t(j)| != Sa");
    for (int i : state.decreasing[j]) {
      if (state.level[i] != j) fail("D_t(j) member not at level j");
    }
  }
  const double power = state.Power(params.r);
  const double expected = ModelPower(params);
  if (std::abs(power - expected) > 1e-12 * std::max(1.0, expected)) {
    fail("signal power differs from closed form");
  }
}

}  // namespace modcs
