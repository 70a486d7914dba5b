#include "microcavity/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "microcavity/errors.hpp"

namespace microcavity::design {
namespace {

constexpr const char* kModule = "design-opt";
constexpr double kInvGolden = 0.6180339887498949;

bool lex_less(const DesignPoint& a, const DesignPoint& b) {
  return std::tie(a.finesse, a.radius_um, a.order) < std::tie(b.finesse, b.radius_um, b.order);
}

std::vector<double> axis(double lo, double hi, int n, bool logarithmic) {
  if (lo == hi || n == 1) return {lo};
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double f = static_cast<double>(i) / (n - 1);
    v[static_cast<std::size_t>(i)] =
        logarithmic ? std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo)))
                    : lo + f * (hi - lo);
  }
  v.front() = lo;
  v.back() = hi;
  return v;
}

// Golden-section maximization of f on [a, b]; the endpoints are candidates too.
template <class F>
std::pair<double, double> golden_max(F&& f, double a, double b) {
  double best_x = a, best_v = f(a);
  if (const double vb = f(b); vb > best_v) {
    best_x = b;
    best_v = vb;
  }
  double x1 = b - kInvGolden * (b - a), x2 = a + kInvGolden * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 100 && (b - a) > 1e-12 * (std::abs(a) + std::abs(b)); ++it) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvGolden * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvGolden * (b - a);
      f2 = f(x2);
    }
  }
  for (auto [x, v] : {std::pair{x1, f1}, std::pair{x2, f2}}) {
    if (v > best_v) {
      best_x = x;
      best_v = v;
    }
  }
  return {best_x, best_v};
}

std::pair<double, double> neighbours(const std::vector<double>& grid, std::size_t i) {
  return {grid[i == 0 ? 0 : i - 1], grid[std::min(i + 1, grid.size() - 1)]};
}

std::vector<TracePoint> pareto_front(std::vector<TracePoint> trace) {
  std::sort(trace.begin(), trace.end(), [](const TracePoint& a, const TracePoint& b) {
    if (a.point.finesse != b.point.finesse) return a.point.finesse < b.point.finesse;
    if (a.branching_ratio != b.branching_ratio) return a.branching_ratio > b.branching_ratio;
    return lex_less(a.point, b.point);
  });
  std::vector<TracePoint> front;
  double best = -1.0;
  for (const auto& t : trace) {
    if (t.branching_ratio > best) {
      front.push_back(t);
      best = t.branching_ratio;
    }
  }
  return front;
}

struct Evaluator {
  const DesignSpace& space;
  int count = 0;

  double branching(double finesse, double radius, int order) {
    ++count;
    return evaluate_design(finesse, radius, order, space.wavelength_nm, space.emitter)
        .branching_ratio;
  }
};

OptimizationResult maximize(const DesignSpace& space, Evaluator& eval) {
  const auto fs = axis(space.finesse_min, space.finesse_max, space.grid_points, true);
  const auto rs = axis(space.radius_min_um, space.radius_max_um, space.grid_points, false);

  OptimizationResult out;
  DesignPoint best{};
  double best_b = -1.0;
  std::size_t best_i = 0, best_j = 0;
  for (int m = space.order_min; m <= space.order_max; ++m) {
    for (std::size_t i = 0; i < fs.size(); ++i) {
      for (std::size_t j = 0; j < rs.size(); ++j) {
        const DesignPoint p{fs[i], rs[j], m};
        const double b = eval.branching(p.finesse, p.radius_um, m);
        out.trace.push_back({p, b});
        if (b > best_b || (b == best_b && lex_less(p, best))) {
          best = p;
          best_b = b;
          best_i = i;
          best_j = j;
        }
      }
    }
  }

  if (fs.size() > 1) {
    const auto [lo, hi] = neighbours(fs, best_i);
    auto f = [&](double log_f) { return eval.branching(std::exp(log_f), best.radius_um, best.order); };
    const auto [x, v] = golden_max(f, std::log(lo), std::log(hi));
    const double fx = std::clamp(std::exp(x), space.finesse_min, space.finesse_max);
    if (v > best_b) {
      best.finesse = fx;
      best_b = eval.branching(fx, best.radius_um, best.order);
    }
  }
  if (rs.size() > 1) {
    const auto [lo, hi] = neighbours(rs, best_j);
    auto f = [&](double r) { return eval.branching(best.finesse, r, best.order); };
    const auto [x, v] = golden_max(f, lo, hi);
    if (v > best_b) {
      best.radius_um = x;
      best_b = v;
    }
  }

  out.best = evaluate_design(best.finesse, best.radius_um, best.order, space.wavelength_nm,
                             space.emitter);
  out.best_achieved_branching = out.best.branching_ratio;
  return out;
}

// Smallest finesse in the space reaching `target` at (r, m); +inf if none.
double min_finesse_at(const DesignSpace& space, Evaluator& eval, double radius, int order,
                      double target) {
  if (eval.branching(space.finesse_max, radius, order) < target) {
    return std::numeric_limits<double>::infinity();
  }
  if (eval.branching(space.finesse_min, radius, order) >= target) return space.finesse_min;
  double lo = space.finesse_min, hi = space.finesse_max;
  for (int it = 0; it < 200 && hi / lo - 1.0 > 1e-13; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (eval.branching(mid, radius, order) >= target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

OptimizationResult minimize_finesse(const DesignSpace& space, Evaluator& eval, double target) {
  const auto rs = axis(space.radius_min_um, space.radius_max_um, space.grid_points, false);

  OptimizationResult out;
  DesignPoint best{std::numeric_limits<double>::infinity(), 0.0, 0};
  std::size_t best_j = 0;
  for (int m = space.order_min; m <= space.order_max; ++m) {
    for (std::size_t j = 0; j < rs.size(); ++j) {
      const double f = min_finesse_at(space, eval, rs[j], m, target);
      const DesignPoint p{std::isfinite(f) ? f : space.finesse_max, rs[j], m};
      out.trace.push_back({p, eval.branching(p.finesse, p.radius_um, m)});
      if (!std::isfinite(f)) continue;
      if (lex_less(p, best)) {
        best = p;
        best_j = j;
      }
    }
  }

  if (!std::isfinite(best.finesse)) {
    out = maximize(space, eval);
    out.feasible = false;
    out.best.target_slack = out.best.branching_ratio - target;
    return out;
  }

  if (rs.size() > 1) {
    const auto [lo, hi] = neighbours(rs, best_j);
    auto f = [&](double r) { return -min_finesse_at(space, eval, r, best.order, target); };
    const auto [x, v] = golden_max(f, lo, hi);
    if (-v < best.finesse) {
      best.radius_um = x;
      best.finesse = -v;
    }
  }

  out.best = evaluate_design(best.finesse, best.radius_um, best.order, space.wavelength_nm,
                             space.emitter);
  out.best.target_slack = out.best.branching_ratio - target;
  out.best_achieved_branching = out.best.branching_ratio;
  return out;
}

}  // namespace

void validate(const DesignSpace& space) {
  coupling::validate(space.emitter);
  detail::require(space.finesse_min > 0.0 && space.finesse_min <= space.finesse_max, kModule,
                  "finesse range must be positive and non-empty");
  detail::require(space.finesse_max <= space.finesse_cap, kModule,
                  "finesse range exceeds the finesse cap");
  detail::require(space.radius_min_um > 0.0 && space.radius_min_um <= space.radius_max_um,
                  kModule, "radius range must be positive and non-empty");
  detail::require(space.order_min >= 1 && space.order_min <= space.order_max, kModule,
                  "order range must be non-empty and start at >= 1");
  detail::require(space.wavelength_nm > 0.0, kModule, "wavelength must be positive");
  detail::require(space.grid_points >= 1, kModule, "grid needs at least one point per axis");
  detail::require(cavity::resonance_length_um(space.order_max, space.wavelength_nm) <
                      space.radius_min_um,
                  kModule, "unstable plano-concave geometry: need 0 < L < r1 across the space");
}

DesignResult evaluate_design(double finesse, double radius_um, int order, double wavelength_nm,
                             const coupling::EmitterModel& emitter) {
  coupling::validate(emitter);
  DesignResult r;
  r.point = {finesse, radius_um, order};
  r.wavelength_nm = wavelength_nm;
  r.alpha0 = emitter.zpl_weight();
  r.length_um = cavity::resonance_length_um(order, wavelength_nm);
  cavity::check_stable(r.length_um, radius_um);
  r.q_factor = cavity::quality_factor(finesse, order);
  r.waist_um = cavity::gaussian_waist(r.length_um, radius_um, wavelength_nm).waist_um;
  const auto volume = cavity::mode_volume(r.waist_um, r.length_um, wavelength_nm);
  r.mode_volume_um3 = volume.volume_um3;
  r.mode_volume_lambda3 = volume.volume_lambda3;
  r.far_field_half_angle_rad = coupling::far_field_half_angle(r.waist_um, wavelength_nm);
  r.purcell = coupling::purcell_report(r.q_factor, r.mode_volume_lambda3, r.waist_um,
                                       wavelength_nm, 1.0, r.alpha0);
  r.zero_phonon_enhancement =
      coupling::zero_phonon_rate_enhancement(r.purcell.effective_enhancement);
  r.branching_ratio = r.purcell.branching_ratio_after;
  r.stability_margin_um = radius_um - r.length_um;
  return r;
}

OptimizationResult optimize_design(const DesignSpace& space, Objective objective,
                                   std::optional<double> target) {
  validate(space);
  Evaluator eval{space};
  OptimizationResult out;
  if (objective == Objective::max_branching) {
    out = maximize(space, eval);
    if (target) {
      out.best.target_slack = out.best.branching_ratio - *target;
      out.feasible = out.best.branching_ratio >= *target;
    }
  } else {
    detail::require(target.has_value(), kModule, "min_finesse_for_target needs a target");
    detail::require(*target > 0.0 && *target < 1.0, kModule, "target must lie in (0, 1)");
    out = minimize_finesse(space, eval, *target);
  }
  out.pareto = pareto_front(out.trace);
  out.evaluations = eval.count;
  return out;
}

}  // namespace microcavity::design
