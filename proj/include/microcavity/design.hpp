#pragma once

#include <optional>
#include <vector>

#include "microcavity/coupling.hpp"

namespace microcavity::design {

inline constexpr double kDefaultFinesseCap = 1e5;

struct DesignSpace {
  double finesse_min = 100.0;
  double finesse_max = kDefaultFinesseCap;
  double radius_min_um = 20.0;
  double radius_max_um = 200.0;
  int order_min = 3;
  int order_max = 9;
  double wavelength_nm = 780.0;
  coupling::EmitterModel emitter = coupling::default_dbt_emitter();
  int grid_points = 32;  // per continuous axis
  double finesse_cap = kDefaultFinesseCap;
};

void validate(const DesignSpace& space);

struct DesignPoint {
  double finesse = 0.0;
  double radius_um = 0.0;
  int order = 0;
};

/// Full factor breakdown of one cavity design.
struct DesignResult {
  DesignPoint point;
  double wavelength_nm = 0.0;
  double alpha0 = 0.0;
  double length_um = 0.0;
  double q_factor = 0.0;
  double waist_um = 0.0;
  double mode_volume_um3 = 0.0;
  double mode_volume_lambda3 = 0.0;
  double far_field_half_angle_rad = 0.0;
  coupling::PurcellReport purcell;  // spectral overlap fixed at 1 for the 0-0 line
  double zero_phonon_enhancement = 0.0;  // 1 + effective enhancement
  double branching_ratio = 0.0;
  double stability_margin_um = 0.0;       // r1 - L
  std::optional<double> target_slack;     // branching - target when a target applies
};

/// Narrow-line regime: the 0-0 line sits fully inside the cavity line, the
/// Stokes bands are unmodified. Throws ValidationError for L >= r1.
DesignResult evaluate_design(double finesse, double radius_um, int order, double wavelength_nm,
                             const coupling::EmitterModel& emitter);

enum class Objective { max_branching, min_finesse_for_target };

struct TracePoint {
  DesignPoint point;
  double branching_ratio = 0.0;
};

struct OptimizationResult {
  bool feasible = true;
  DesignResult best;                  // best-achieved point when infeasible
  double best_achieved_branching = 0.0;
  std::vector<TracePoint> trace;      // every grid evaluation, in scan order
  std::vector<TracePoint> pareto;     // non-dominated (lower finesse, higher branching)
  int evaluations = 0;
};

/// Coarse grid over (finesse [log-spaced], radius, every integer order)
/// followed by golden-section refinement along each continuous axis.
/// Deterministic; ties break on lexicographic (F, r1, m).
OptimizationResult optimize_design(const DesignSpace& space, Objective objective,
                                   std::optional<double> target = std::nullopt);

}  // namespace microcavity::design
