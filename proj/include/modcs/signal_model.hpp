#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <vector>

#include "modcs/support.hpp"

namespace modcs {

enum class Generator { kGen1, kGen2 };

// Parameters of the slowly varying sparse signal model: at every step Sa
// coefficients enter at magnitude r, ramp up by r per step to the stable
// magnitude M = d*r, and Sa stable coefficients ramp down to zero.
struct ModelParams {
  int m = 200;         // ambient dimension
  int s0 = 20;         // support size
  int sa = 2;          // additions (and removals) per step
  double r = 1.0;      // magnitude increment
  int d = 3;           // number of magnitude levels; M = d * r
  Generator generator = Generator::kGen1;
  std::uint64_t seed = 0;

  double StableMagnitude() const { return d * r; }
  // Throws ConfigurationError when the model cannot be realized.
  void Validate() const;
};

// Full model state. Magnitudes are stored as integer levels so that
// |x_i| = level_i * r holds exactly.
struct SignalModelState {
  int t = 0;
  std::vector<int> level;          // 0..d per coordinate
  std::vector<std::int8_t> sign;   // -1, 0, +1; zero iff level is zero
  // increasing[j], 1 <= j <= d: coordinates that went from level j-1 to j at t.
  // Entry 0 is unused and kept empty.
  std::vector<Support> increasing;
  // decreasing[j], 0 <= j <= d-1: coordinates that went from j+1 to j at t.
  std::vector<Support> decreasing;

  int m() const { return static_cast<int>(level.size()); }
  Support support() const;
  Eigen::VectorXd Values(double r) const;
  double Power(double r) const;
  // Coordinates with level exactly j.
  Support AtLevel(int j) const;
};

struct SparseSignal {
  Eigen::VectorXd values;
  Support support;  // exactly the nonzero positions

  static SparseSignal FromValues(Eigen::VectorXd v);
};

// The random draws that drive one Gen1 transition.
struct StepChoices {
  Support additions;         // A_t, drawn from the complement of N_{t-1}
  Support start_decreasing;  // D_t(d-1), drawn from the stable set
  // Signs for the additions in ascending index order; empty means +1.
  std::vector<std::int8_t> addition_signs;
};

struct CohortSets {
  Support added;       // A_t = I_t(1)
  Support removed;     // R_t = D_t(0)
  Support increasing;  // I_t(j)
  Support decreasing;  // D_t(j-1)
  Support small;       // S_t(j) = {i : 0 < |x_i| < j r}
};

SignalModelState InitState(const ModelParams& params);

// Advances one time unit using the configured generator and randomness keyed
// by (params.seed, t).
SignalModelState Step(const SignalModelState& state, const ModelParams& params);

// Gen1 transition with explicit random draws; throws ArgumentError if the
// draws are inconsistent with the state.
SignalModelState StepWithChoices(const SignalModelState& state,
                                 const ModelParams& params,
                                 const StepChoices& choices);

// Throws ArgumentError unless 1 <= j <= d.
CohortSets GetCohortSets(const SignalModelState& state, const ModelParams& params,
                         int j);

// Closed-form signal power (S0 - (2d-2)Sa) M^2 + 2 Sa sum_{j<d} (j r)^2.
double ModelPower(const ModelParams& params);

// Throws std::logic_error describing the first violated state invariant.
void CheckStateInvariants(const SignalModelState& state, const ModelParams& params);

}  // namespace modcs
