#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gerl/tape.hpp"

namespace gerl {

struct GradCheckOptions {
  double step = 1e-5;
  // Coordinates sampled per parameter; parameters at or below this size are checked exhaustively.
  std::size_t coords_per_parameter = 24;
  // Denominator floor, so coordinates with vanishing gradient are compared absolutely.
  double floor = 1e-4;
  std::uint64_t seed = 17;
};

struct GroupError {
  std::string parameter;
  std::size_t coordinates = 0;
  double max_relative_error = 0.0;  // NaN when any comparison involved a NaN
  double max_abs_gradient = 0.0;
};

struct GradCheckReport {
  std::vector<GroupError> groups;
  double worst = 0.0;

  bool passed(double tolerance) const;
};

// Builds a scalar loss on the given tape from the current parameter values.
// Must be deterministic.
template <typename T>
using LossBuilder = std::function<Var<T>(Tape<T>&)>;

// Compares reverse-mode gradients with central differences
// (f(x+h) - f(x-h)) / 2h on sampled coordinates of every parameter.
// Relative error is |analytic - numeric| / max(|analytic|, |numeric|, floor).
// Frozen padding rows are skipped. Parameter values are restored afterwards and
// gradients are left zeroed.
template <typename T>
GradCheckReport finite_difference_check(ParameterSet<T>& params, const LossBuilder<T>& loss,
                                        const GradCheckOptions& options = {});

double relative_error(double analytic, double numeric, double floor);

}  // namespace gerl
