#include "wtd/billiard.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "wtd/error.hpp"
#include "wtd/parallel.hpp"
#include "wtd/rng.hpp"
#include "wtd/stats.hpp"

namespace wtd::billiard {

WindTreeParams validate_params(double a, double b) {
  if (!(a > 0.0 && a < 1.0) || !(b > 0.0 && b < 1.0)) {
    throw Error(ErrorKind::OutOfDomain, "obstacle sizes must lie in (0,1), got a=" +
                                            std::to_string(a) + " b=" + std::to_string(b));
  }
  return WindTreeParams{a, b};
}

const char* to_string(Heading h) {
  switch (h) {
    case Heading::PP: return "PP";
    case Heading::PM: return "PM";
    case Heading::MP: return "MP";
    case Heading::MM: return "MM";
  }
  return "?";
}

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::VerticalWall: return "VerticalWall";
    case EventKind::HorizontalWall: return "HorizontalWall";
    case EventKind::CellCrossing: return "CellCrossing";
    case EventKind::Corner: return "Corner";
  }
  return "?";
}

std::array<double, 2> BilliardState::velocity() const {
  return {sign_x(dir) * std::cos(theta), sign_y(dir) * std::sin(theta)};
}

std::array<double, 2> BilliardState::position() const {
  return {static_cast<double>(cell[0]) + frac[0], static_cast<double>(cell[1]) + frac[1]};
}

bool inside_obstacle(const std::array<double, 2>& frac, const WindTreeParams& params,
                     double tolerance) {
  const double hx = 0.5 * params.a - tolerance;
  const double hy = 0.5 * params.b - tolerance;
  return std::abs(frac[0] - 0.5) < hx && std::abs(frac[1] - 0.5) < hy;
}

namespace {

struct Geometry {
  double x0, x1, y0, y1;
  bool reflections;
  double corner_eps;
  double min_dt;

  Geometry(const WindTreeParams& p, const FlowOptions& o)
      : x0(0.5 - 0.5 * p.a),
        x1(0.5 + 0.5 * p.a),
        y0(0.5 - 0.5 * p.b),
        y1(0.5 + 0.5 * p.b),
        reflections(o.reflections),
        corner_eps(o.corner_tolerance),
        min_dt(o.min_event_time) {}
};

// Mutable hot-loop state; theta lives outside as (c, s).
struct Ray {
  std::int64_t m, n;
  double fx, fy;
  int sx, sy;
};

struct Step {
  double dt;
  EventKind kind;
  bool cross_x;
  bool cross_y;
};

struct Direction {
  double c, s, inv_c, inv_s;
  explicit Direction(double theta)
      : c(std::cos(theta)), s(std::sin(theta)), inv_c(1.0 / c), inv_s(1.0 / s) {}
};

inline Step find_event(const Geometry& g, const Ray& r, const Direction& d) {
  const double tx = (r.sx > 0 ? 1.0 - r.fx : r.fx) * d.inv_c;
  const double ty = (r.sy > 0 ? 1.0 - r.fy : r.fy) * d.inv_s;
  Step st;
  if (std::abs(tx - ty) <= g.min_dt) {
    st = {std::min(tx, ty), EventKind::CellCrossing, true, true};
  } else if (tx < ty) {
    st = {tx, EventKind::CellCrossing, true, false};
  } else {
    st = {ty, EventKind::CellCrossing, false, true};
  }
  if (!g.reflections) return st;

  const double eps = g.corner_eps;
  if (r.sx > 0 ? r.fx < g.x0 : r.fx > g.x1) {
    const double tv = (r.sx > 0 ? g.x0 - r.fx : r.fx - g.x1) * d.inv_c;
    if (tv < st.dt) {
      const double y = r.fy + r.sy * d.s * tv;
      if (y > g.y0 - eps && y < g.y1 + eps) {
        const bool corner = y < g.y0 + eps || y > g.y1 - eps;
        st = {tv, corner ? EventKind::Corner : EventKind::VerticalWall, false, false};
      }
    }
  }
  if (r.sy > 0 ? r.fy < g.y0 : r.fy > g.y1) {
    const double th = (r.sy > 0 ? g.y0 - r.fy : r.fy - g.y1) * d.inv_s;
    if (th < st.dt) {
      const double x = r.fx + r.sx * d.c * th;
      if (x > g.x0 - eps && x < g.x1 + eps) {
        const bool corner = x < g.x0 + eps || x > g.x1 - eps;
        st = {th, corner ? EventKind::Corner : EventKind::HorizontalWall, false, false};
      }
    }
  }
  return st;
}

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

inline void apply_step(const Geometry& g, Ray& r, const Direction& d, const Step& st) {
  r.fx += r.sx * d.c * st.dt;
  r.fy += r.sy * d.s * st.dt;
  switch (st.kind) {
    case EventKind::CellCrossing:
      if (st.cross_x) {
        r.m += r.sx;
        r.fx = r.sx > 0 ? 0.0 : 1.0;
      }
      if (st.cross_y) {
        r.n += r.sy;
        r.fy = r.sy > 0 ? 0.0 : 1.0;
      }
      break;
    case EventKind::VerticalWall:
      r.fx = r.sx > 0 ? g.x0 : g.x1;
      r.sx = -r.sx;
      break;
    case EventKind::HorizontalWall:
      r.fy = r.sy > 0 ? g.y0 : g.y1;
      r.sy = -r.sy;
      break;
    case EventKind::Corner:
      break;
  }
  r.fx = clamp01(r.fx);
  r.fy = clamp01(r.fy);
}

Ray to_ray(const BilliardState& s) {
  return Ray{s.cell[0], s.cell[1], s.frac[0], s.frac[1], sign_x(s.dir), sign_y(s.dir)};
}

BilliardState to_state(const Ray& r, double theta, double t) {
  BilliardState s;
  s.cell = {r.m, r.n};
  s.frac = {r.fx, r.fy};
  s.dir = make_heading(r.sx, r.sy);
  s.theta = theta;
  s.t = t;
  return s;
}

void check_state(const BilliardState& s, const WindTreeParams& p, const FlowOptions& o) {
  if (!(s.theta > 0.0 && s.theta < std::numbers::pi / 2)) {
    throw Error(ErrorKind::OutOfDomain, "theta must lie in (0, pi/2)");
  }
  for (double f : s.frac) {
    if (!(f >= 0.0 && f <= 1.0)) throw Error(ErrorKind::OutOfDomain, "cell coordinates outside [0,1]");
  }
  if (o.reflections && inside_obstacle(s.frac, p, 1e-12)) {
    throw Error(ErrorKind::OutOfDomain, "state lies inside an obstacle");
  }
}

[[noreturn]] void singular(const Ray& r, double t) {
  throw Error(ErrorKind::SingularTrajectory,
              "corner hit at t=" + std::to_string(t) + " in cell (" + std::to_string(r.m) + "," +
                  std::to_string(r.n) + ")");
}

[[noreturn]] void degenerate(double dt, double t) {
  throw Error(ErrorKind::NumericalDegeneracy,
              "event time " + std::to_string(dt) + " below threshold at t=" + std::to_string(t));
}

}  // namespace

CollisionEvent next_event(const BilliardState& state, const WindTreeParams& params,
                          const FlowOptions& options) {
  check_state(state, params, options);
  const Geometry g(params, options);
  const Direction d(state.theta);
  Ray r = to_ray(state);
  const Step st = find_event(g, r, d);
  if (st.dt < g.min_dt) degenerate(st.dt, state.t);
  apply_step(g, r, d, st);
  return CollisionEvent{st.dt, st.kind, to_state(r, state.theta, state.t + st.dt)};
}

BilliardState flow_for(const BilliardState& start, const WindTreeParams& params, double duration,
                       const FlowOptions& options, std::uint64_t* events) {
  check_state(start, params, options);
  const Geometry g(params, options);
  const Direction d(start.theta);
  Ray r = to_ray(start);
  double t = start.t;
  const double t_end = start.t + duration;
  std::uint64_t count = 0;
  for (;;) {
    const Step st = find_event(g, r, d);
    if (t + st.dt >= t_end) {
      const double tau = t_end - t;
      r.fx = clamp01(r.fx + r.sx * d.c * tau);
      r.fy = clamp01(r.fy + r.sy * d.s * tau);
      break;
    }
    if (st.kind == EventKind::Corner) singular(r, t + st.dt);
    if (st.dt < g.min_dt) degenerate(st.dt, t);
    apply_step(g, r, d, st);
    t += st.dt;
    ++count;
  }
  if (events != nullptr) *events = count;
  return to_state(r, start.theta, t_end);
}

double segment_distance_integral(double u, double h, double dt) {
  // With z = u + s the integrand is sqrt(z^2 + h^2); the antiderivative is
  // (z r + h^2 asinh(z/h)) / 2. Both differences are rewritten so that no
  // large terms cancel when the segment is short compared to the distance.
  const double z1 = u, z2 = u + dt;
  const double h2 = h * h;
  const double r1 = std::sqrt(z1 * z1 + h2);
  const double r2 = std::sqrt(z2 * z2 + h2);
  const double rsum = r1 + r2;
  if (rsum == 0.0) return 0.0;
  const double dr = dt * (z1 + z2) / rsum;  // r2 - r1
  const double zr = z2 * dr + r1 * dt;      // z2 r2 - z1 r1
  double asinh_diff = 0.0;
  if (h2 > 0.0) {
    if (z1 >= 0.0) {
      asinh_diff = std::log1p((dt + dr) / (z1 + r1));
    } else if (z2 <= 0.0) {
      asinh_diff = std::log1p((dt - dr) / (r2 - z2));
    } else {
      asinh_diff = std::asinh(z2 / h) - std::asinh(z1 / h);
    }
  }
  return 0.5 * (zr + h2 * asinh_diff);
}

TrajectoryStats advance(const BilliardState& start, const WindTreeParams& params, double t_max,
                        const AdvanceOptions& options) {
  if (!(t_max > 0.0)) throw Error(ErrorKind::OutOfDomain, "t_max must be positive");
  check_state(start, params, options.flow);
  if (!(options.grid.t0 > 0.0) || !(options.grid.ratio > 1.0)) {
    throw Error(ErrorKind::Config, "sampling grid needs t0 > 0 and ratio > 1");
  }
  const Geometry g(params, options.flow);
  const Direction d(start.theta);
  std::uint64_t budget = options.event_budget;
  if (budget == 0) {
    const double per_time = 4.0 / (1.0 - std::max(params.a, params.b)) + 4.0;
    budget = static_cast<std::uint64_t>(per_time * t_max) + 1000000;
  }

  TrajectoryStats stats;
  stats.samples.reserve(static_cast<std::size_t>(
      std::max(0.0, std::log(t_max / options.grid.t0) / std::log(options.grid.ratio))) + 2);

  Ray r = to_ray(start);
  const std::int64_t m0 = r.m, n0 = r.n;
  const double fx0 = r.fx, fy0 = r.fy;
  double t = 0.0;
  long double integral = 0.0L;
  double d_max = 0.0;
  double d_now = 0.0;
  std::int64_t crossings = 0;
  double cycle_sum = 0.0;
  int grid_index = 0;
  double next_sample = options.grid.t0;

  auto record = [&](double ts, double d_at, double partial) {
    const double dm = std::max(d_max, d_at);
    const double avg = static_cast<double>((integral + partial) / ts);
    stats.samples.push_back(TrajectorySample{ts, d_at, dm, avg, crossings, cycle_sum});
  };

  for (;;) {
    const Step st = find_event(g, r, d);
    const double vx = r.sx * d.c, vy = r.sy * d.s;
    const double rx = static_cast<double>(r.m - m0) + (r.fx - fx0);
    const double ry = static_cast<double>(r.n - n0) + (r.fy - fy0);
    const double u = rx * vx + ry * vy;
    const double h = std::abs(rx * vy - ry * vx);
    const double seg_end = t + st.dt;

    while (next_sample <= t_max && next_sample <= seg_end) {
      const double tau = next_sample - t;
      const double z = u + tau;
      record(next_sample, std::sqrt(z * z + h * h), segment_distance_integral(u, h, tau));
      next_sample = options.grid.t0 * std::pow(options.grid.ratio, ++grid_index);
    }
    if (seg_end >= t_max) {
      const double tau = t_max - t;
      const double z = u + tau;
      const double d_end = std::sqrt(z * z + h * h);
      if (stats.samples.empty() || stats.samples.back().t < t_max) {
        record(t_max, d_end, segment_distance_integral(u, h, tau));
      }
      r.fx = clamp01(r.fx + vx * tau);
      r.fy = clamp01(r.fy + vy * tau);
      break;
    }
    if (st.kind == EventKind::Corner) singular(r, seg_end);
    if (st.dt < g.min_dt) degenerate(st.dt, seg_end);
    if (stats.events >= budget) {
      throw Error(ErrorKind::Timeout, "event budget of " + std::to_string(budget) + " exhausted");
    }

    integral += segment_distance_integral(u, h, st.dt);
    const double z = u + st.dt;
    d_now = std::sqrt(z * z + h * h);
    d_max = std::max(d_max, d_now);
    apply_step(g, r, d, st);
    if (st.kind == EventKind::CellCrossing) {
      ++crossings;
      cycle_sum += static_cast<double>(std::max(std::abs(r.m - m0), std::abs(r.n - n0)));
    }
    t = seg_end;
    ++stats.events;
  }
  stats.final_state = to_state(r, start.theta, start.t + t_max);
  return stats;
}

BilliardState random_start(const WindTreeParams& params, std::uint64_t seed, std::uint64_t index,
                           int attempt, bool reflections) {
  CounterRng rng(seed, (index << 8) | static_cast<std::uint64_t>(attempt & 0xff));
  BilliardState s;
  s.theta = 0.5 * std::numbers::pi * rng.uniform_open();
  do {
    s.frac = {rng.uniform(), rng.uniform()};
  } while (reflections && inside_obstacle(s.frac, params, -1e-9));
  s.dir = Heading::PP;
  return s;
}

namespace {

double loglog_slope(const std::vector<TrajectorySample>& samples, FitWindow w,
                    double TrajectorySample::*field) {
  std::vector<double> x, y;
  for (const auto& s : samples) {
    const double v = s.*field;
    if (s.t >= w.lo * (1 - 1e-12) && s.t <= w.hi * (1 + 1e-12) && v > 0.0) {
      x.push_back(std::log(s.t));
      y.push_back(std::log(v));
    }
  }
  return stats::least_squares(x, y).slope;
}

}  // namespace

DiffusionEstimate estimate_diffusion_exponents(const WindTreeParams& params, int n_directions,
                                               double t_max, std::uint64_t seed, FitWindow window,
                                               const EstimateOptions& options) {
  validate_params(params.a, params.b);
  if (n_directions < 1) throw Error(ErrorKind::Config, "n_directions must be >= 1");
  if (window.lo < 10.0 * options.advance.grid.t0 || window.hi > t_max * (1 + 1e-12) ||
      !(window.lo < window.hi)) {
    throw Error(ErrorKind::Config, "fit window must satisfy 10*t0 <= lo < hi <= t_max");
  }

  DiffusionEstimate est;
  est.directions.resize(static_cast<std::size_t>(n_directions));
  const unsigned threads = options.threads > 0 ? options.threads : worker_count();
  parallel_for(est.directions.size(), threads, [&](std::size_t i) {
    DirectionResult& out = est.directions[i];
    for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
      const BilliardState start =
          random_start(params, seed, i, attempt, options.advance.flow.reflections);
      out.theta = start.theta;
      out.start_frac = start.frac;
      out.attempts = attempt + 1;
      try {
        TrajectoryStats run = advance(start, params, t_max, options.advance);
        out.events = run.events;
        out.max_slope = loglog_slope(run.samples, window, &TrajectorySample::d_max);
        out.avg_slope = loglog_slope(run.samples, window, &TrajectorySample::avg_d);
        out.completed = true;
        if (options.keep_samples) out.samples = std::move(run.samples);
        return;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::SingularTrajectory &&
            e.kind() != ErrorKind::NumericalDegeneracy) {
          throw;
        }
      }
    }
  });

  std::vector<double> max_slopes, avg_slopes;
  for (const auto& dir : est.directions) {
    est.resampled += dir.attempts - 1;
    if (!dir.completed) {
      ++est.resampled;  // the final failed attempt
      continue;
    }
    ++est.completed;
    max_slopes.push_back(dir.max_slope);
    avg_slopes.push_back(dir.avg_slope);
  }
  if (2 * est.completed < n_directions) {
    throw Error(ErrorKind::InsufficientData,
                std::to_string(est.completed) + " of " + std::to_string(n_directions) +
                    " directions completed");
  }
  est.max_exp = stats::median(max_slopes);
  est.avg_exp = stats::median(avg_slopes);
  est.max_stderr = stats::bootstrap_median_stderr(max_slopes, options.bootstrap_resamples, seed);
  est.avg_stderr = stats::bootstrap_median_stderr(avg_slopes, options.bootstrap_resamples, seed + 1);
  return est;
}

}  // namespace wtd::billiard
