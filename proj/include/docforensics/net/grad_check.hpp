#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace docforensics::net {

struct LayerGradCheck {
  double max_rel_error = 0.0;
  int checked = 0;  // number of scalar entries compared
  bool skipped = false;
  std::string note;
};

struct GradCheckReport {
  std::map<std::string, LayerGradCheck> layers;
  double tolerance = 1e-4;
  bool passed() const;
};

inline constexpr double kFiniteDifferenceStep = 1e-5;

/// Central differences vs analytic gradients in double precision for conv,
/// SE, self-correlation, percentile pooling, NetVLAD and the FC head. Inputs
/// are resampled until they are away from ReLU kinks and percentile ties.
/// Also runs percentile pooling on deliberately tied input; that entry is
/// reported as skipped ("tie — subgradient, skipped").
GradCheckReport grad_check_all(std::uint64_t seed);

/// Relative error used by the checks: |a - n| / max(|a|, |n|, 1e-6).
double relative_error(double analytic, double numeric);

}  // namespace docforensics::net
