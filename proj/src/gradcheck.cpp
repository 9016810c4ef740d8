#include "gerl/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace gerl {

double relative_error(double analytic, double numeric, double floor) {
  if (std::isnan(analytic) || std::isnan(numeric)) return std::numeric_limits<double>::quiet_NaN();
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

bool GradCheckReport::passed(double tolerance) const {
  if (std::isnan(worst)) return false;
  return worst <= tolerance;
}

template <typename T>
GradCheckReport finite_difference_check(ParameterSet<T>& params, const LossBuilder<T>& loss,
                                        const GradCheckOptions& options) {
  params.zero_grad();
  {
    Tape<T> tape;
    tape.backward(loss(tape));
  }

  auto evaluate = [&]() -> double {
    Tape<T> tape;
    return static_cast<double>(loss(tape).value()[0]);
  };

  GradCheckReport report;
  std::mt19937_64 rng(options.seed);
  for (auto& p : params) {
    GroupError group;
    group.parameter = p->name();

    const std::size_t first = p->frozen_prefix();
    std::vector<std::size_t> coords(p->size() - first);
    std::iota(coords.begin(), coords.end(), first);
    if (coords.size() > options.coords_per_parameter) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(options.coords_per_parameter);
    }

    for (std::size_t c : coords) {
      T& x = p->value()[c];
      const T saved = x;
      x = saved + static_cast<T>(options.step);
      const double up = evaluate();
      x = saved - static_cast<T>(options.step);
      const double down = evaluate();
      x = saved;
      const double numeric = (up - down) / (2.0 * options.step);
      const double analytic = static_cast<double>(p->grad()[c]);
      const double err = relative_error(analytic, numeric, options.floor);
      if (std::isnan(err)) {
        group.max_relative_error = err;
      } else if (!std::isnan(group.max_relative_error)) {
        group.max_relative_error = std::max(group.max_relative_error, err);
      }
      group.max_abs_gradient = std::max(group.max_abs_gradient, std::abs(analytic));
      ++group.coordinates;
    }
    if (std::isnan(group.max_relative_error)) {
      report.worst = group.max_relative_error;
    } else if (!std::isnan(report.worst)) {
      report.worst = std::max(report.worst, group.max_relative_error);
    }
    report.groups.push_back(group);
  }
  params.zero_grad();
  return report;
}

template GradCheckReport finite_difference_check(ParameterSet<float>&, const LossBuilder<float>&,
                                                 const GradCheckOptions&);
template GradCheckReport finite_difference_check(ParameterSet<double>&, const LossBuilder<double>&,
                                                 const GradCheckOptions&);

}  // namespace gerl
