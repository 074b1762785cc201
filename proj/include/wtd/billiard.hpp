#pragma once

// Event-driven simulation of the Z^2-periodic wind-tree billiard.
//
// The plane is tiled by unit cells [m, m+1) x [n, n+1); every cell carries one
// open rectangular obstacle of width a and height b centred at (m+1/2, n+1/2).
// A point is stored as its integer cell plus cell-local coordinates, so the
// cell displacement from the start is exactly the lattice (monodromy) vector
// of the orbit. The speed is 1 and the velocity is (+-cos theta, +-sin theta)
// with the sign pattern held in a four-valued heading tag, so reflections on
// the axis-parallel obstacle sides never touch theta.

#include <array>
#include <cstdint>
#include <vector>

namespace wtd::billiard {

struct WindTreeParams {
  double a = 0.5;
  double b = 0.5;
};

/// Accepts (a, b) in the open square (0,1)^2; throws OutOfDomain otherwise.
WindTreeParams validate_params(double a, double b);

enum class Heading : std::uint8_t { PP, PM, MP, MM };

constexpr int sign_x(Heading h) { return (h == Heading::PP || h == Heading::PM) ? 1 : -1; }
constexpr int sign_y(Heading h) { return (h == Heading::PP || h == Heading::MP) ? 1 : -1; }
constexpr Heading make_heading(int sx, int sy) {
  return sx > 0 ? (sy > 0 ? Heading::PP : Heading::PM) : (sy > 0 ? Heading::MP : Heading::MM);
}
constexpr Heading flip_x(Heading h) { return make_heading(-sign_x(h), sign_y(h)); }
constexpr Heading flip_y(Heading h) { return make_heading(sign_x(h), -sign_y(h)); }
constexpr Heading reversed(Heading h) { return make_heading(-sign_x(h), -sign_y(h)); }

const char* to_string(Heading h);

struct BilliardState {
  std::array<std::int64_t, 2> cell{0, 0};
  /// Cell-local coordinates in [0,1]^2. A coordinate equals 1 only right after
  /// entering the cell through its right/top edge.
  std::array<double, 2> frac{0.0, 0.0};
  Heading dir = Heading::PP;
  double theta = 0.0;  // in (0, pi/2)
  double t = 0.0;

  std::array<double, 2> velocity() const;
  /// Planar position (cell + frac).
  std::array<double, 2> position() const;
};

enum class EventKind { VerticalWall, HorizontalWall, CellCrossing, Corner };

const char* to_string(EventKind k);

struct CollisionEvent {
  double dt = 0.0;
  EventKind kind = EventKind::CellCrossing;
  BilliardState new_state;
};

struct FlowOptions {
  double corner_tolerance = 1e-12;
  double min_event_time = 1e-13;
  /// false gives free straight-line motion through the lattice (control runs).
  bool reflections = true;
};

/// True if `frac` lies in the open obstacle rectangle shrunk by `tolerance`.
bool inside_obstacle(const std::array<double, 2>& frac, const WindTreeParams& params,
                     double tolerance = 0.0);

/// Next collision or cell crossing of the ray leaving `state`. A ray that hits
/// an obstacle corner (within corner_tolerance) yields kind == Corner with the
/// state placed at the corner and the heading unchanged. Throws
/// NumericalDegeneracy when the event time is below min_event_time and
/// OutOfDomain for an invalid state.
CollisionEvent next_event(const BilliardState& state, const WindTreeParams& params,
                          const FlowOptions& options = {});

/// Flows for exactly `duration` time units. Throws SingularTrajectory on a
/// corner hit. `events`, if given, receives the number of events applied.
BilliardState flow_for(const BilliardState& start, const WindTreeParams& params, double duration,
                       const FlowOptions& options = {}, std::uint64_t* events = nullptr);

struct SamplingGrid {
  double t0 = 1.0;
  double ratio = 1.05;
};

struct TrajectorySample {
  double t = 0.0;
  double d_now = 0.0;   // Euclidean distance from the start point
  double d_max = 0.0;   // running maximum of d over [0, t]
  double avg_d = 0.0;   // (1/t) * integral of d over [0, t]
  /// Cell-boundary crossings so far and the running sum over crossings k of
  /// the sup-norm of the cell displacement at crossing k: the return-cycle sum
  /// for the cross-section made of cell edges, with the Z^2 cell displacement
  /// as the cocycle.
  std::int64_t crossings = 0;
  double cycle_sum = 0.0;
};

struct TrajectoryStats {
  std::vector<TrajectorySample> samples;
  std::uint64_t events = 0;
  BilliardState final_state;
};

struct AdvanceOptions {
  FlowOptions flow;
  SamplingGrid grid;
  /// Maximum number of events; 0 picks a bound proportional to t_max.
  std::uint64_t event_budget = 0;
};

/// Runs the flow from `start` for t_max time units, recording samples on the
/// grid t0 * ratio^j (plus a final sample at t_max). The distance integral is
/// accumulated segment by segment with the closed-form antiderivative of
/// sqrt((t + u)^2 + h^2). Throws SingularTrajectory, NumericalDegeneracy or
/// Timeout.
TrajectoryStats advance(const BilliardState& start, const WindTreeParams& params, double t_max,
                        const AdvanceOptions& options = {});

/// Exact integral of |r + s v| for s in [0, dt], where |v| = 1, u = <r, v>
/// and h = |r x v|.
double segment_distance_integral(double u, double h, double dt);

struct FitWindow {
  double lo = 1e4;
  double hi = 1e7;
};

struct DirectionResult {
  double theta = 0.0;
  std::array<double, 2> start_frac{};
  double max_slope = 0.0;
  double avg_slope = 0.0;
  std::uint64_t events = 0;
  int attempts = 0;
  bool completed = false;
  std::vector<TrajectorySample> samples;
};

struct DiffusionEstimate {
  double max_exp = 0.0;
  double max_stderr = 0.0;
  double avg_exp = 0.0;
  double avg_stderr = 0.0;
  int completed = 0;
  int resampled = 0;  // singular or degenerate attempts that were redrawn
  std::vector<DirectionResult> directions;
};

struct EstimateOptions {
  AdvanceOptions advance;
  unsigned threads = 0;  // 0: WTD_THREADS or hardware concurrency
  int max_attempts = 8;
  int bootstrap_resamples = 200;
  bool keep_samples = false;
};

/// Uniformly random start (outside the obstacle of cell (0,0)) and direction
/// in (0, pi/2) for direction `index`, attempt `attempt`, under `seed`.
BilliardState random_start(const WindTreeParams& params, std::uint64_t seed, std::uint64_t index,
                           int attempt, bool reflections = true);

/// Median over `n_directions` seeded directions of the log-log slopes of
/// d_max and avg_d against t inside `window`, with bootstrap standard errors.
/// Singular directions are redrawn. Throws InsufficientData if fewer than
/// half the directions complete.
DiffusionEstimate estimate_diffusion_exponents(const WindTreeParams& params, int n_directions,
                                               double t_max, std::uint64_t seed, FitWindow window,
                                               const EstimateOptions& options = {});

}  // namespace wtd::billiard
