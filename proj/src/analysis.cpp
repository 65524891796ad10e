#include "modcs/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <iomanip>
#include <limits>
#include <sstream>
#include <thread>

#include "modcs/errors.hpp"
#include "modcs/random.hpp"

namespace modcs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kSqrt2 = std::sqrt(2.0);

// C1 / C2 with +inf outside their domain, for use inside monotone bounds.
double C1OrInf(double delta) {
  return delta < kSqrt2 - 1.0 ? C1(std::max(0.0, delta)) : kInf;
}
double C2OrInf(double delta) {
  return delta < kSqrt2 - 1.0 ? C2(std::max(0.0, delta)) : kInf;
}

std::string Num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "n/a";
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

// lhs < rhs where lhs may be a lower bound on the true quantity.
Condition Below(const std::string& id, const std::string& lhs_name, Bounded lhs, double rhs,
                bool strict = true) {
  Condition c;
  c.id = id;
  c.requirement = lhs_name + (strict ? " < " : " <= ") + Num(rhs);
  c.lhs = lhs.value;
  c.rhs = rhs;
  const bool ok = strict ? lhs.value < rhs : lhs.value <= rhs;
  if (!ok) {
    c.status = Status::kFails;
  } else if (lhs.exact) {
    c.status = Status::kHolds;
  } else {
    c.status = Status::kUndetermined;
    c.note = "sampled lower bound only";
  }
  if (!ok && !lhs.exact) c.note = "sampled lower bound already violates";
  return c;
}

Condition RateCondition(double r, Bounded g) {
  Condition c;
  c.id = "increase_rate";
  c.requirement = "r >= " + Num(g.value);
  c.lhs = r;
  c.rhs = g.value;
  if (r < g.value) {
    c.status = Status::kFails;
    if (!g.exact) c.note = "threshold computed from sampled lower bounds";
  } else {
    c.status = g.exact ? Status::kHolds : Status::kUndetermined;
    if (!g.exact) c.note = "threshold computed from sampled lower bounds";
  }
  return c;
}

Condition FalseAdditions(const BoundInputs& in, int allowed) {
  Condition c;
  c.id = "false_additions";
  c.requirement = "false additions per step <= " + std::to_string(allowed);
  c.rhs = allowed;
  if (in.measured_false_additions) {
    c.lhs = *in.measured_false_additions;
    c.status = c.lhs <= allowed ? Status::kHolds : Status::kFails;
    c.note = "measured on pilot trajectories";
  } else {
    c.lhs = std::numeric_limits<double>::quiet_NaN();
    c.status = Status::kUndetermined;
    c.note = "not measured; supply a pilot count";
  }
  return c;
}

Condition Initial(const BoundInputs& in) {
  if (in.init_mode == InitMode::kOracle) {
    Condition c;
    c.id = "initial";
    c.requirement = "initial support errors within the stable bounds";
    c.status = Status::kHolds;
    c.note = "oracle initial support";
    return c;
  }
  if (in.delta_initial) {
    Condition c = Below("initial", "delta_" + std::to_string(2 * in.s0) + "(A0)",
                        *in.delta_initial, kRipHalfGap);
    c.note = (c.note.empty() ? "" : c.note + "; ") + "sufficient check on A0";
    return c;
  }
  Condition c;
  c.id = "initial";
  c.requirement = "delta_" + std::to_string(2 * in.s0) + "(A0) < " + Num(kRipHalfGap);
  c.lhs = std::numeric_limits<double>::quiet_NaN();
  c.rhs = kRipHalfGap;
  c.status = Status::kUndetermined;
  c.note = "A0 constant not supplied";
  return c;
}

Condition SupportRatio(int sa, int s0, int k1) {
  Condition c;
  c.id = "change_ratio";
  c.lhs = sa;
  c.rhs = static_cast<double>(s0) / (3.0 * k1);
  c.requirement = "Sa <= " + Num(c.rhs);
  // Integer comparison avoids rounding at the boundary.
  c.status = 3 * k1 * sa <= s0 ? Status::kHolds : Status::kFails;
  return c;
}

std::string DeltaName(int s) { return "delta_" + std::to_string(s); }
std::string ThetaName(int s1, int s2) {
  return "theta_" + std::to_string(s1) + "," + std::to_string(s2);
}

Bounded ThetaOrZero(const ConstantProvider& p, int s1, int s2) {
  if (s1 <= 0 || s2 <= 0) return {0.0, true};
  return p.Theta(s1, s2);
}

void ValidateInputs(const BoundInputs& in) {
  if (in.s0 < 1 || in.sa < 1) throw ArgumentError("bound inputs: S0 and Sa must be >= 1");
  if (in.epsilon < 0.0 || in.r <= 0.0 || in.alpha_add < 0.0) {
    throw ArgumentError("bound inputs: require eps >= 0, r > 0, alpha_add >= 0");
  }
  if (in.zeta <= 0.0) throw ArgumentError("bound inputs: zeta must be positive");
}

}  // namespace

double C1(double delta) {
  if (!(delta >= 0.0) || delta >= kSqrt2 - 1.0) {
    throw BoundUndefinedError("C1 requires 0 <= delta < sqrt(2) - 1");
  }
  return 4.0 * std::sqrt(1.0 + delta) / (1.0 - (kSqrt2 + 1.0) * delta);
}

double C2(double delta) {
  if (!(delta >= 0.0) || delta >= kSqrt2 - 1.0) {
    throw BoundUndefinedError("C2 requires 0 <= delta < sqrt(2) - 1");
  }
  return 2.0 * (1.0 + (kSqrt2 - 1.0) * delta) / (1.0 - (kSqrt2 + 1.0) * delta);
}

BoundConstants ComputeBoundConstants(double delta, int t_size, int delta_size) {
  if (t_size < 0 || delta_size < 0) throw ArgumentError("set sizes must be nonnegative");
  BoundConstants b;
  b.delta = delta;
  b.c1 = C1(delta);
  b.c2 = C2(delta);
  if (delta_size == 0) {
    b.c_prime = b.c1;
    b.c_dprime = 0.0;
  } else {
    const double ratio = std::sqrt(static_cast<double>(t_size) / delta_size);
    b.c_prime = b.c1 + kSqrt2 * b.c2 * ratio;
    b.c_dprime = 2.0 * b.c2 * ratio;
  }
  return b;
}

double ModCSErrorBound(int n_size, int delta_size, int delta_e_size, double delta,
                       double epsilon) {
  if (n_size < 0 || delta_size < 0 || delta_e_size < 0 || epsilon < 0.0) {
    throw ArgumentError("ModCSErrorBound: negative input");
  }
  if (3 * delta_size > n_size) {
    throw BoundUndefinedError("ModCSErrorBound: requires |Delta| <= |N| / 3");
  }
  return C1(delta) * epsilon;
}

double ModCSErrorBoundSharp(int n_size, int delta_size, int delta_e_size, double delta,
                            double theta, double epsilon) {
  if (n_size < 0 || delta_size < 0 || delta_e_size < 0 || epsilon < 0.0 || delta < 0.0 ||
      theta < 0.0) {
    throw ArgumentError("ModCSErrorBoundSharp: negative input");
  }
  if (3 * delta_size > n_size) {
    throw BoundUndefinedError("ModCSErrorBoundSharp: requires |Delta| <= |N| / 3");
  }
  const double den = 1.0 - delta - kSqrt2 * theta;
  if (den <= 0.0) {
    throw BoundUndefinedError("ModCSErrorBoundSharp: requires delta + sqrt(2) theta < 1");
  }
  return 4.0 * std::sqrt(1.0 + delta) / den * epsilon;
}

MatrixConstantProvider::MatrixConstantProvider(Eigen::MatrixXd a, RocOptions opts)
    : a_(std::move(a)), opts_(opts) {}

Bounded MatrixConstantProvider::Delta(int s) const {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find({s, 0});
    if (it != cache_.end()) return it->second;
  }
  const RicRocEstimate e = Ric(a_, s, opts_);
  const Bounded b{e.value, e.IsExact()};
  std::lock_guard<std::mutex> lock(mu_);
  cache_[{s, 0}] = b;
  return b;
}

Bounded MatrixConstantProvider::Theta(int s1, int s2) const {
  if (s1 > s2) std::swap(s1, s2);  // symmetric in its arguments
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find({-s1, s2});
    if (it != cache_.end()) return it->second;
  }
  const RicRocEstimate e = Roc(a_, s1, s2, opts_);
  const Bounded b{e.value, e.IsExact()};
  std::lock_guard<std::mutex> lock(mu_);
  cache_[{-s1, s2}] = b;
  return b;
}

FunctionConstantProvider::FunctionConstantProvider(std::function<double(int)> delta,
                                                   std::function<double(int, int)> theta,
                                                   bool exact)
    : delta_(std::move(delta)), theta_(std::move(theta)), exact_(exact) {}

Bounded FunctionConstantProvider::Delta(int s) const { return {delta_(s), exact_}; }
Bounded FunctionConstantProvider::Theta(int s1, int s2) const {
  return {theta_(s1, s2), exact_};
}

std::string StatusName(Status s) {
  switch (s) {
    case Status::kHolds:
      return "holds";
    case Status::kFails:
      return "fails";
    case Status::kUndetermined:
      return "undetermined";
  }
  return "?";
}

std::string ResultName(ResultKind k) {
  switch (k) {
    case ResultKind::kModCS:
      return "modcs";
    case ResultKind::kAddLSDel:
      return "addlsdel";
    case ResultKind::kAddLSDelSpread:
      return "addlsdel-spread";
    case ResultKind::kAddLSDelGeneral:
      return "addlsdel-general";
    case ResultKind::kLSCS:
      return "lscs";
  }
  return "?";
}

ResultKind ParseResult(const std::string& name) {
  std::string key = name;
  for (char& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (ResultKind k : {ResultKind::kModCS, ResultKind::kAddLSDel, ResultKind::kAddLSDelSpread,
                       ResultKind::kAddLSDelGeneral, ResultKind::kLSCS}) {
    if (ResultName(k) == key) return k;
  }
  throw ConfigurationError("unknown stability result '" + name +
                           "' (modcs, addlsdel, addlsdel-spread, addlsdel-general, lscs)");
}

bool ConditionReport::AllHold() const {
  return std::all_of(conditions.begin(), conditions.end(),
                     [](const Condition& c) { return c.status == Status::kHolds; });
}

bool ConditionReport::AnyFails() const {
  return std::any_of(conditions.begin(), conditions.end(),
                     [](const Condition& c) { return c.status == Status::kFails; });
}

const Condition* ConditionReport::Find(const std::string& id) const {
  for (const auto& c : conditions) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

ConditionReport CheckModCS(const BoundInputs& in, const ConstantProvider& p) {
  ValidateInputs(in);
  ConditionReport rep;
  rep.kind = ResultKind::kModCS;
  rep.inputs = in;
  const double alpha = kModCSErrorFactor * in.epsilon;
  const double g = (alpha + kModCSErrorFactor * in.epsilon) / 2.0;
  rep.constants["alpha"] = alpha;
  rep.constants["G"] = g;

  const int s_rip = in.s0 + 3 * in.sa;
  rep.conditions.push_back(Below("rip_support", DeltaName(s_rip), p.Delta(s_rip), kRipHalfGap));
  rep.conditions.push_back(SupportRatio(in.sa, in.s0, 2));
  rep.conditions.push_back(RateCondition(in.r, {g, true}));
  rep.conditions.push_back(Initial(in));

  rep.implied_bounds["misses"] = 2.0 * in.sa;
  rep.implied_bounds["extras"] = 0.0;
  rep.implied_bounds["support_size"] = in.s0;
  rep.implied_bounds["modcs_error"] = kModCSErrorFactor * in.epsilon;
  return rep;
}

ConditionReport CheckAddLSDel(const BoundInputs& in, const ConstantProvider& p) {
  ValidateInputs(in);
  ConditionReport rep;
  rep.kind = ResultKind::kAddLSDel;
  rep.inputs = in;
  const double rsa = std::sqrt(static_cast<double>(in.sa));
  const Bounded theta = p.Theta(in.s0 + 2 * in.sa, in.sa);
  const double den = 1.0 - 2.0 * rsa * theta.value;
  const double g1 = (in.alpha_add + kModCSErrorFactor * in.epsilon) / 2.0;
  const double g2 = den > 0.0 ? kSqrt2 * in.epsilon / den : kInf;
  rep.constants["alpha_del"] = kSqrt2 * in.epsilon + 2.0 * rsa * theta.value * in.r;
  rep.constants["G1"] = g1;
  rep.constants["G2"] = g2;

  const int s_rip = in.s0 + 3 * in.sa;
  rep.conditions.push_back(FalseAdditions(in, in.sa));
  rep.conditions.push_back(Below("rip_support", DeltaName(s_rip), p.Delta(s_rip), kRipHalfGap));
  rep.conditions.push_back(SupportRatio(in.sa, in.s0, 2));
  rep.conditions.push_back(Below("roc_deletion", ThetaName(in.s0 + 2 * in.sa, in.sa), theta,
                                 1.0 / (4.0 * rsa)));
  rep.conditions.push_back(RateCondition(in.r, {std::max(g1, g2), theta.exact}));
  rep.conditions.push_back(Initial(in));

  const double theta_err = ThetaOrZero(p, in.s0, 2 * in.sa).value;
  rep.implied_bounds["misses"] = 2.0 * in.sa;
  rep.implied_bounds["extras"] = 0.0;
  rep.implied_bounds["support_size"] = in.s0;
  rep.implied_bounds["add_support_size"] = in.s0 + 2.0 * in.sa;
  rep.implied_bounds["final_error"] =
      kSqrt2 * in.epsilon + (2.0 * theta_err + 1.0) * std::sqrt(2.0 * in.sa) * in.r;
  rep.implied_bounds["modcs_error"] = kModCSErrorFactor * in.epsilon;
  return rep;
}

ConditionReport CheckAddLSDelSpread(const BoundInputs& in, const ConstantProvider& p) {
  ValidateInputs(in);
  ConditionReport rep;
  rep.kind = ResultKind::kAddLSDelSpread;
  rep.inputs = in;
  const double rsa = std::sqrt(static_cast<double>(in.sa));
  const double z = in.zeta;
  const Bounded theta = p.Theta(in.s0 + 2 * in.sa, in.sa);
  const double den = 1.0 - 2.0 * theta.value * z;
  const double g1 = (in.alpha_add + kModCSErrorFactor * in.epsilon) / 2.0;
  const double g2 = den > 0.0 ? kSqrt2 * z * in.epsilon / (rsa * den) : kInf;
  rep.constants["alpha_del"] =
      std::sqrt(2.0 / in.sa) * z * in.epsilon + 2.0 * theta.value * z * in.r;
  rep.constants["G1"] = g1;
  rep.constants["G2"] = g2;
  rep.constants["f"] = in.sa;

  const int s_rip = in.s0 + 3 * in.sa;
  const int s_half = in.s0 + 2 * in.sa;
  rep.conditions.push_back(FalseAdditions(in, in.sa));
  rep.conditions.push_back(Below("rip_support", DeltaName(s_rip), p.Delta(s_rip), kRipHalfGap));
  rep.conditions.push_back(SupportRatio(in.sa, in.s0, 2));
  Condition half = Below("rip_half", DeltaName(s_half), p.Delta(s_half), 0.5);
  rep.conditions.push_back(half);
  rep.conditions.push_back(
      Below("roc_deletion", ThetaName(in.s0 + 2 * in.sa, in.sa), theta, 1.0 / (4.0 * z)));
  rep.conditions.push_back(RateCondition(in.r, {std::max(g1, g2), theta.exact}));
  rep.conditions.push_back(Initial(in));

  const double theta_err = ThetaOrZero(p, in.s0, 2 * in.sa).value;
  rep.implied_bounds["misses"] = 2.0 * in.sa;
  rep.implied_bounds["extras"] = 0.0;
  rep.implied_bounds["support_size"] = in.s0;
  rep.implied_bounds["add_support_size"] = in.s0 + 2.0 * in.sa;
  rep.implied_bounds["final_error"] =
      kSqrt2 * in.epsilon + (2.0 * theta_err + 1.0) * std::sqrt(2.0 * in.sa) * in.r;
  rep.implied_bounds["modcs_error"] = kModCSErrorFactor * in.epsilon;
  return rep;
}

ConditionReport CheckAddLSDelGeneral(const BoundInputs& in, const ConstantProvider& p) {
  ValidateInputs(in);
  if (in.d0 < 1 || in.d0 > in.d) {
    throw ArgumentError("d0 must satisfy 1 <= d0 <= d");
  }
  ConditionReport rep;
  rep.kind = ResultKind::kAddLSDelGeneral;
  rep.inputs = in;
  const int d0 = in.d0;
  const int f = in.f.value_or(in.sa);
  if (f < 0) throw ArgumentError("f must be nonnegative");
  const int k1 = std::max(1, 2 * d0 - 2);
  const int k2 = std::max(0, 2 * d0 - 3);
  double k3sq = 0.0;
  for (int j = 1; j <= d0 - 1; ++j) k3sq += j * j;
  for (int j = 1; j <= d0 - 2; ++j) k3sq += j * j;
  const double k3 = std::sqrt(k3sq);
  const double rsa = std::sqrt(static_cast<double>(in.sa));
  const double z = in.zeta;

  const Bounded theta = ThetaOrZero(p, in.s0 + in.sa + f, k2 * in.sa);
  const double den = d0 - 4.0 * k3 * theta.value * z;
  const double g1 = (in.alpha_add + kModCSErrorFactor * in.epsilon) / d0;
  const double g2 = den > 0.0 ? 2.0 * kSqrt2 * z * in.epsilon / (rsa * den) : kInf;
  rep.constants["k1"] = k1;
  rep.constants["k2"] = k2;
  rep.constants["k3"] = k3;
  rep.constants["alpha_del"] =
      std::sqrt(2.0 / in.sa) * z * in.epsilon + 2.0 * k3 * theta.value * z * in.r;
  rep.constants["G1"] = g1;
  rep.constants["G2"] = g2;
  rep.constants["f"] = f;

  const int s_rip = in.s0 + in.sa * (1 + k1);
  const int s_half = in.s0 + in.sa + f;
  rep.conditions.push_back(FalseAdditions(in, f));
  rep.conditions.push_back(Below("rip_support", DeltaName(s_rip), p.Delta(s_rip), kRipHalfGap));
  rep.conditions.push_back(SupportRatio(in.sa, in.s0, k1));
  rep.conditions.push_back(Below("rip_half", DeltaName(s_half), p.Delta(s_half), 0.5));
  const double theta_rhs = k3 > 0.0 ? d0 / (8.0 * k3 * z) : kInf;
  rep.conditions.push_back(
      Below("roc_deletion", ThetaName(s_half, k2 * in.sa), theta, theta_rhs));
  rep.conditions.push_back(RateCondition(in.r, {std::max(g1, g2), theta.exact}));
  rep.conditions.push_back(Initial(in));

  double level_sq = 0.0;
  for (int j = 1; j <= d0 - 1; ++j) level_sq += j * j;
  const double theta_err = ThetaOrZero(p, in.s0, (2 * d0 - 2) * in.sa).value;
  rep.implied_bounds["misses"] = (2.0 * d0 - 2.0) * in.sa;
  rep.implied_bounds["extras"] = 0.0;
  rep.implied_bounds["support_size"] = in.s0;
  rep.implied_bounds["add_support_size"] = in.s0 + in.sa + f;
  rep.implied_bounds["final_error"] =
      kSqrt2 * in.epsilon + (2.0 * theta_err + 1.0) * std::sqrt(2.0 * in.sa * level_sq) * in.r;
  rep.implied_bounds["modcs_error"] = kModCSErrorFactor * in.epsilon;
  return rep;
}

ConditionReport CheckLSCS(const BoundInputs& in, const ConstantProvider& p) {
  ValidateInputs(in);
  ConditionReport rep;
  rep.kind = ResultKind::kLSCS;
  rep.inputs = in;
  const double rsa = std::sqrt(static_cast<double>(in.sa));
  const Bounded theta_del = p.Theta(in.s0 + 2 * in.sa, in.sa);
  const double den2 = 1.0 - 2.0 * rsa * theta_del.value;
  const double g2 = den2 > 0.0 ? kSqrt2 * in.epsilon / den2 : kInf;

  // Explicit scan over |Delta|: C' and C'' are not monotone in |Delta|.
  double worst_coupling = 0.0;
  double g1 = 0.0;
  double error_bound = 0.0;
  bool exact = theta_del.exact;
  int worst_delta = 1;
  for (int k = 1; k <= 2 * in.sa; ++k) {
    const Bounded dk = p.Delta(2 * k);
    const Bounded tk = p.Theta(in.s0, k);
    exact = exact && dk.exact && tk.exact;
    const double ratio = std::sqrt(static_cast<double>(in.s0) / k);
    const double c1 = C1OrInf(dk.value);
    const double c2 = C2OrInf(dk.value);
    const double cp = c1 + kSqrt2 * c2 * ratio;
    const double cpp = 2.0 * c2 * ratio;
    const double coupling = tk.value * cpp;
    if (coupling > worst_coupling || k == 1) {
      worst_coupling = coupling;
      worst_delta = k;
    }
    const double den = 2.0 - 3.0 * tk.value * rsa * cpp;
    g1 = std::max(g1, den > 0.0 ? (in.alpha_add + cp * in.epsilon) / den : kInf);
    error_bound = std::max(error_bound, cp * in.epsilon +
                                            (coupling + 1.0) * std::sqrt(2.0 * in.sa) * in.r);
  }
  rep.constants["alpha_del"] = kSqrt2 * in.epsilon + 2.0 * rsa * theta_del.value * in.r;
  rep.constants["G1"] = g1;
  rep.constants["G2"] = g2;
  rep.constants["worst_coupling_delta_size"] = worst_delta;

  const int s_half = in.s0 + 2 * in.sa;
  rep.conditions.push_back(FalseAdditions(in, in.sa));
  rep.conditions.push_back(
      Below("rip_residual", DeltaName(4 * in.sa), p.Delta(4 * in.sa), kRipHalfGap));
  rep.conditions.push_back(Below("rip_half", DeltaName(s_half), p.Delta(s_half), 0.5));
  bool coupling_exact = true;
  for (int k = 1; k <= 2 * in.sa; ++k) {
    coupling_exact = coupling_exact && p.Delta(2 * k).exact && p.Theta(in.s0, k).exact;
  }
  rep.conditions.push_back(Below("roc_residual",
                                 "max_k theta_" + std::to_string(in.s0) + ",k C''(k)",
                                 {worst_coupling, coupling_exact}, 1.0 / (3.0 * rsa)));
  rep.conditions.push_back(Below("roc_deletion", ThetaName(in.s0 + 2 * in.sa, in.sa),
                                 theta_del, 1.0 / (4.0 * rsa)));
  rep.conditions.push_back(RateCondition(in.r, {std::max(g1, g2), exact}));
  rep.conditions.push_back(Initial(in));

  rep.implied_bounds["misses"] = 2.0 * in.sa;
  rep.implied_bounds["extras"] = 0.0;
  rep.implied_bounds["support_size"] = in.s0;
  rep.implied_bounds["cs_residual_error"] = error_bound;
  return rep;
}

ConditionReport CheckResult(ResultKind kind, const BoundInputs& in, const ConstantProvider& p) {
  switch (kind) {
    case ResultKind::kModCS:
      return CheckModCS(in, p);
    case ResultKind::kAddLSDel:
      return CheckAddLSDel(in, p);
    case ResultKind::kAddLSDelSpread:
      return CheckAddLSDelSpread(in, p);
    case ResultKind::kAddLSDelGeneral:
      return CheckAddLSDelGeneral(in, p);
    case ResultKind::kLSCS:
      return CheckLSCS(in, p);
  }
  throw std::logic_error("CheckResult: unknown kind");
}

std::string FormatReportText(const ConditionReport& r) {
  std::ostringstream out;
  const BoundInputs& in = r.inputs;
  out << "stability conditions: " << ResultName(r.kind) << '\n';
  out << "inputs: S0=" << in.s0 << " Sa=" << in.sa << " r=" << Num(in.r) << " d=" << in.d
      << " eps=" << Num(in.epsilon) << " alpha_add=" << Num(in.alpha_add);
  if (r.kind == ResultKind::kAddLSDelGeneral) out << " d0=" << in.d0;
  if (r.kind == ResultKind::kAddLSDelSpread || r.kind == ResultKind::kAddLSDelGeneral) {
    out << " zeta=" << Num(in.zeta);
  }
  out << "\n\nconstants:\n";
  for (const auto& [k, v] : r.constants) out << "  " << std::left << std::setw(28) << k << Num(v) << '\n';

  std::size_t w_id = 2, w_req = 11;
  for (const auto& c : r.conditions) {
    w_id = std::max(w_id, c.id.size());
    w_req = std::max(w_req, c.requirement.size());
  }
  out << "\nconditions:\n";
  out << "  " << std::left << std::setw(w_id + 2) << "id" << std::setw(w_req + 2) << "requirement"
      << std::setw(14) << "lhs" << std::setw(14) << "rhs" << std::setw(14) << "status" << "note\n";
  for (const auto& c : r.conditions) {
    out << "  " << std::left << std::setw(w_id + 2) << c.id << std::setw(w_req + 2)
        << c.requirement << std::setw(14) << Num(c.lhs) << std::setw(14) << Num(c.rhs)
        << std::setw(14) << StatusName(c.status) << c.note << '\n';
  }
  out << "\nimplied bounds (if all conditions hold):\n";
  for (const auto& [k, v] : r.implied_bounds) out << "  " << std::left << std::setw(28) << k << Num(v) << '\n';
  return out.str();
}

std::string FormatReportCsv(const ConditionReport& r) {
  std::ostringstream out;
  out << "# schema: modcs-conditions v1; result=" << ResultName(r.kind) << '\n';
  out << "id,requirement,lhs,rhs,status,note\n";
  for (const auto& c : r.conditions) {
    out << c.id << ",\"" << c.requirement << "\"," << Num(c.lhs) << ',' << Num(c.rhs) << ','
        << StatusName(c.status) << ",\"" << c.note << "\"\n";
  }
  return out.str();
}

double SpreadRatio(const Eigen::VectorXd& e, int sa) {
  const double norm = e.norm();
  if (norm == 0.0) return 0.0;
  return e.cwiseAbs().maxCoeff() * std::sqrt(static_cast<double>(sa)) / norm;
}

int ZetaDefaultMeasurements(int m, int s0) {
  return static_cast<int>(std::ceil(0.3861 * s0 * std::log2(static_cast<double>(m))));
}

ZetaResult EstimateZeta(const ZetaParams& p) {
  if (p.trials < 1 || p.horizon < 1) throw ConfigurationError("EstimateZeta: trials, horizon >= 1");
  ZetaResult res;
  res.n = p.n > 0 ? p.n : ZetaDefaultMeasurements(p.m, p.s0);
  const SensingSystem sys =
      MakeGaussianSystem(res.n, p.m, std::nullopt, NoiseSpec::Uniform(p.c),
                         DeriveKey(p.seed, static_cast<std::uint64_t>(StreamTag::kMatrix)));
  const SequenceRunner runner(sys);
  ModelParams model;
  model.m = p.m;
  model.s0 = p.s0;
  model.sa = p.sa;
  model.r = p.r;
  model.d = p.d;
  RecoveryConfig cfg;
  cfg.algorithm = Algorithm::kModCSAddLSDel;
  cfg.alpha_add = p.c / 2.0;
  cfg.alpha_del = p.r / 2.0;
  cfg.epsilon = p.epsilon.value_or(p.c * std::sqrt(res.n / 3.0));

  struct Partial {
    double zeta = 0.0;
    std::uint64_t samples = 0;
    int failed = 0;
  };
  std::vector<Partial> partial(p.trials);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int k = next++; k < p.trials; k = next++) {
      Partial& out = partial[k];
      const std::uint64_t trial_seed =
          DeriveKey(p.seed, static_cast<std::uint64_t>(StreamTag::kTrial), k);
      runner.Run(model, cfg, p.horizon, trial_seed,
                 [&](const RecoveryStep& s, const SparseSignal& truth) {
                   if (s.failed) {
                     ++out.failed;
                     return;
                   }
                   Eigen::VectorXd e(s.t_add.size());
                   for (std::size_t i = 0; i < s.t_add.size(); ++i) {
                     e[i] = truth.values[s.t_add[i]] - s.x_hat_add[s.t_add[i]];
                   }
                   if (e.size() == 0 || e.norm() == 0.0) return;
                   ++out.samples;
                   out.zeta = std::max(out.zeta, SpreadRatio(e, p.sa));
                 });
    }
  };
  const int threads = std::max(
      1, std::min(p.trials, p.threads > 0 ? p.threads
                                          : static_cast<int>(std::thread::hardware_concurrency())));
  std::vector<std::thread> pool;
  for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& part : partial) {
    res.zeta = std::max(res.zeta, part.zeta);
    res.samples += part.samples;
    res.failed_steps += part.failed;
  }
  return res;
}

int MeasureFalseAdditions(const SequenceRunner& runner, const ModelParams& model,
                          const RecoveryConfig& cfg, int trials, int horizon,
                          std::uint64_t seed) {
  int worst = 0;
  for (int k = 0; k < trials; ++k) {
    runner.Run(model, cfg, horizon,
               DeriveKey(seed, static_cast<std::uint64_t>(StreamTag::kTrial), k),
               [&](const RecoveryStep& s, const SparseSignal& truth) {
                 const Support added = Difference(s.t_add, s.t_prev);
                 worst = std::max(worst, static_cast<int>(Difference(added, truth.support).size()));
               });
  }
  return worst;
}

bool LemmaRecord::AnyViolation() const {
  return std::any_of(checks.begin(), checks.end(),
                     [](const LemmaCheck& c) { return c.applicable && !c.satisfied; });
}

LemmaRecord VerifyLemmaConditions(const RecoveryStep& step, const SparseSignal& truth,
                                  Algorithm algorithm, const LemmaContext& ctx) {
  LemmaRecord rec;
  if (step.failed) return rec;
  const Eigen::VectorXd& x = truth.values;
  const Support& n = truth.support;
  const Support& t = step.t_prev;
  const Support miss = Difference(n, t);
  const Support extra = Difference(t, n);
  const bool uses_add = algorithm == Algorithm::kModCSAddLSDel || algorithm == Algorithm::kLSCS;
  const Support& detected = uses_add ? step.t_add : step.n_hat;
  const double thr = uses_add ? ctx.alpha_add : ctx.alpha;
  const double raw_err = (x - step.x_hat_raw).norm();

  auto all_detected = [&](const Support& candidates, double level) {
    for (int i : candidates) {
      if (std::abs(x[i]) > level && !Contains(detected, i)) return false;
    }
    return true;
  };

  {
    // Any true coefficient above threshold + estimation error is detected.
    LemmaCheck c;
    c.lemma = "threshold_detection";
    c.applicable = true;
    c.satisfied = all_detected(n, thr + raw_err);
    c.detail = "level " + Num(thr + raw_err);
    rec.checks.push_back(c);
  }
  if (algorithm == Algorithm::kModCS) {
    LemmaCheck c;
    c.lemma = "threshold_deletion";
    c.applicable = ctx.alpha >= raw_err;
    c.satisfied = !c.applicable || Intersection(step.n_hat, Complement(n, x.size())).empty();
    rec.checks.push_back(c);
  }
  if (ctx.provider == nullptr) return rec;

  if (algorithm == Algorithm::kModCS || algorithm == Algorithm::kModCSAddLSDel) {
    LemmaCheck c;
    c.lemma = "detection";
    const int s = static_cast<int>(n.size() + miss.size() + extra.size());
    const Bounded delta = s <= x.size() ? ctx.provider->Delta(s) : Bounded{kInf, true};
    c.applicable = delta.exact && delta.value < kRipHalfGap && 3 * miss.size() <= n.size();
    if (c.applicable) {
      const bool bound_ok = raw_err <= kModCSErrorFactor * ctx.epsilon * (1.0 + 1e-9);
      const bool detect_ok = all_detected(miss, thr + kModCSErrorFactor * ctx.epsilon);
      c.satisfied = bound_ok && detect_ok;
      c.detail = "error " + Num(raw_err) + " vs " + Num(kModCSErrorFactor * ctx.epsilon);
    }
    rec.checks.push_back(c);
  }

  if (uses_add) {
    const Support miss_add = Difference(n, step.t_add);
    const Support extra_add = Difference(step.t_add, n);
    double x_miss = 0.0;
    for (int i : miss_add) x_miss += x[i] * x[i];
    x_miss = std::sqrt(x_miss);
    const int st = static_cast<int>(step.t_add.size());
    const Bounded delta = st > 0 ? ctx.provider->Delta(st) : Bounded{0.0, true};
    const Bounded theta = ThetaOrZero(*ctx.provider, st, static_cast<int>(miss_add.size()));
    const bool hyp = delta.exact && theta.exact && delta.value < 0.5;
    const double ls_err = kSqrt2 * ctx.epsilon + 2.0 * theta.value * x_miss;

    LemmaCheck keep;
    keep.lemma = "no_false_deletion";
    keep.applicable = hyp;
    if (hyp) {
      const double level = ctx.alpha_del + ls_err;
      keep.satisfied = true;
      for (int i : step.t_add) {
        if (std::abs(x[i]) > level && !Contains(step.n_hat, i)) keep.satisfied = false;
      }
      keep.detail = "level " + Num(level);
    }
    rec.checks.push_back(keep);

    LemmaCheck del;
    del.lemma = "deletion";
    del.applicable = hyp && ctx.alpha_del >= ls_err;
    del.satisfied = !del.applicable || Intersection(step.n_hat, extra_add).empty();
    rec.checks.push_back(del);
  }
  return rec;
}

}  // namespace modcs
