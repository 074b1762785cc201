#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "wtd/billiard.hpp"
#include "wtd/error.hpp"
#include "wtd/rational.hpp"
#include "wtd/rng.hpp"

using namespace wtd;
using namespace wtd::billiard;

namespace {

constexpr double kPi = std::numbers::pi;

BilliardState make_state(double fx, double fy, Heading dir, double theta) {
  BilliardState s;
  s.frac = {fx, fy};
  s.dir = dir;
  s.theta = theta;
  return s;
}

// Time-stepping oracle: walks the ray with a coarse step to bracket the first
// exit from the free region of the cell, then re-walks the bracket with
// dt = 1e-7. Returns the event time and kind.
struct StepOracle {
  double dt;
  EventKind kind;
};

StepOracle step_oracle(const BilliardState& s, const WindTreeParams& p) {
  const double vx = sign_x(s.dir) * std::cos(s.theta);
  const double vy = sign_y(s.dir) * std::sin(s.theta);
  auto at = [&](double t) { return std::array<double, 2>{s.frac[0] + vx * t, s.frac[1] + vy * t}; };
  auto outside_cell = [](const std::array<double, 2>& q) {
    return q[0] < 0.0 || q[0] > 1.0 || q[1] < 0.0 || q[1] > 1.0;
  };
  auto in_obstacle = [&](const std::array<double, 2>& q) {
    return std::abs(q[0] - 0.5) <= 0.5 * p.a && std::abs(q[1] - 0.5) <= 0.5 * p.b;
  };
  auto blocked = [&](double t) {
    const auto q = at(t);
    return outside_cell(q) || in_obstacle(q);
  };
  const double coarse = 1e-4, fine = 1e-7;
  double lo = 0.0;
  while (!blocked(lo + coarse)) lo += coarse;
  double t = lo;
  while (!blocked(t + fine)) t += fine;
  const double hit = t + fine;
  const auto before = at(t), after = at(hit);
  if (outside_cell(after)) return {hit, EventKind::CellCrossing};
  const bool was_left_right = std::abs(before[0] - 0.5) > 0.5 * p.a;
  return {hit, was_left_right ? EventKind::VerticalWall : EventKind::HorizontalWall};
}

// Exact enumeration of the 45-degree billiard on the square table with
// a = b = 1/2. Positions are exact rationals; velocities are (+-1, +-1) in
// unit time per unit coordinate, so the cell-local state space reachable from
// a rational start is finite and the orbit either hits a corner or repeats.
struct DiagonalOutcome {
  bool singular = false;
  std::int64_t max_cell_displacement = 0;  // over one period, sup norm
  std::array<std::int64_t, 2> period_shift{0, 0};
};

DiagonalOutcome diagonal_oracle(Rational fx, Rational fy, int sx, int sy) {
  const Rational lo(1, 4), hi(3, 4);
  std::int64_t m = 0, n = 0;
  DiagonalOutcome out;
  std::map<std::string, std::array<std::int64_t, 2>> seen;
  for (int step = 0; step < 100000; ++step) {
    const std::string key = to_string(fx) + "|" + to_string(fy) + "|" + std::to_string(sx) +
                            std::to_string(sy);
    if (auto it = seen.find(key); it != seen.end()) {
      out.period_shift = {m - it->second[0], n - it->second[1]};
      return out;
    }
    seen[key] = {m, n};
    out.max_cell_displacement = std::max({out.max_cell_displacement, std::abs(m), std::abs(n)});

    Rational tx = sx > 0 ? Rational(1) - fx : fx;
    Rational ty = sy > 0 ? Rational(1) - fy : fy;
    Rational best = std::min(tx, ty);
    int kind = 0;  // 0 crossing, 1 vertical wall, 2 horizontal wall
    if (sx > 0 ? fx < lo : fx > hi) {
      const Rational tv = sx > 0 ? lo - fx : fx - hi;
      const Rational y = fy + sy * tv;
      if (tv <= best && y >= lo && y <= hi) {
        if (y == lo || y == hi) {
          out.singular = true;
          return out;
        }
        best = tv;
        kind = 1;
      }
    }
    if (sy > 0 ? fy < lo : fy > hi) {
      const Rational th = sy > 0 ? lo - fy : fy - hi;
      const Rational x = fx + sx * th;
      if (th <= best && x >= lo && x <= hi) {
        if (x == lo || x == hi) {
          out.singular = true;
          return out;
        }
        best = th;
        kind = 2;
      }
    }
    fx += sx * best;
    fy += sy * best;
    if (kind == 1) {
      sx = -sx;
    } else if (kind == 2) {
      sy = -sy;
    } else {
      if (fx == 1 && sx > 0) { fx = 0; ++m; }
      else if (fx == 0 && sx < 0) { fx = 1; --m; }
      if (fy == 1 && sy > 0) { fy = 0; ++n; }
      else if (fy == 0 && sy < 0) { fy = 1; --n; }
    }
  }
  FAIL("diagonal oracle did not close up");
  return out;
}

double simpson(double u, double h, double dt) {
  const int n = 20000;
  const double step = dt / n;
  auto f = [&](double s) { return std::sqrt((u + s) * (u + s) + h * h); };
  double acc = f(0.0) + f(dt);
  for (int i = 1; i < n; ++i) acc += f(i * step) * (i % 2 ? 4.0 : 2.0);
  return acc * step / 3.0;
}

double distance(const BilliardState& a, const BilliardState& b) {
  const auto pa = a.position(), pb = b.position();
  return std::hypot(pa[0] - pb[0], pa[1] - pb[1]);
}

}  // namespace

TEST_SUITE("billiard") {

TEST_CASE("validate_params accepts the open unit square only") {
  CHECK_NOTHROW(validate_params(0.5, 0.5));
  CHECK_NOTHROW(validate_params(0.25, 0.9));
  for (auto [a, b] : std::vector<std::pair<double, double>>{
           {1.0, 0.5}, {0.0, 0.5}, {0.5, 1.0}, {0.5, -0.1}, {1.5, 0.5}, {NAN, 0.5}}) {
    try {
      validate_params(a, b);
      FAIL("accepted invalid parameters");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::OutOfDomain);
    }
  }
}

TEST_CASE("next_event hits the left obstacle wall") {
  const WindTreeParams p{0.5, 0.5};
  const auto s = make_state(0.1, 0.5, Heading::PP, kPi / 4);
  const auto ev = next_event(s, p);
  const auto oracle = step_oracle(s, p);
  CHECK(ev.kind == EventKind::VerticalWall);
  CHECK(oracle.kind == EventKind::VerticalWall);
  CHECK(std::abs(ev.dt - oracle.dt) < 1e-6);
  CHECK(ev.dt == doctest::Approx(0.15 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(ev.new_state.frac[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(ev.new_state.frac[1] == doctest::Approx(0.65).epsilon(1e-12));
  CHECK(ev.new_state.dir == Heading::MP);
  CHECK(ev.new_state.theta == s.theta);
}

TEST_CASE("next_event crosses the bottom cell edge") {
  const WindTreeParams p{0.5, 0.5};
  const auto s = make_state(0.1, 0.05, Heading::PM, kPi / 4);
  const auto ev = next_event(s, p);
  const auto oracle = step_oracle(s, p);
  CHECK(ev.kind == EventKind::CellCrossing);
  CHECK(oracle.kind == EventKind::CellCrossing);
  CHECK(std::abs(ev.dt - oracle.dt) < 1e-6);
  CHECK(ev.dt == doctest::Approx(0.05 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(ev.new_state.cell[0] == 0);
  CHECK(ev.new_state.cell[1] == -1);
  CHECK(ev.new_state.frac[1] == 1.0);
  CHECK(ev.new_state.dir == Heading::PM);
}

TEST_CASE("next_event agrees with the time-stepping oracle on random rays") {
  CounterRng rng(2024, 1);
  for (int i = 0; i < 40; ++i) {
    const WindTreeParams p{rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)};
    BilliardState s;
    do {
      s.frac = {rng.uniform(), rng.uniform()};
    } while (inside_obstacle(s.frac, p, -1e-3));
    s.dir = static_cast<Heading>(rng.below(4));
    s.theta = rng.uniform(0.2, kPi / 2 - 0.2);
    const auto ev = next_event(s, p);
    if (ev.kind == EventKind::Corner) continue;
    const auto oracle = step_oracle(s, p);
    CHECK(ev.kind == oracle.kind);
    CHECK(std::abs(ev.dt - oracle.dt) < 1e-6);
  }
}

TEST_CASE("a ray aimed at an obstacle corner is singular") {
  const WindTreeParams p{0.5, 0.5};
  const double delta = 0.1;
  const auto s = make_state(0.25 - delta, 0.25 - delta, Heading::PP, kPi / 4);
  CHECK(next_event(s, p).kind == EventKind::Corner);
  try {
    flow_for(s, p, 1.0);
    FAIL("corner hit not reported");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingularTrajectory);
  }
  try {
    advance(s, p, 10.0);
    FAIL("corner hit not reported");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingularTrajectory);
  }
}

TEST_CASE("invalid states are rejected") {
  const WindTreeParams p{0.5, 0.5};
  CHECK_THROWS_AS(next_event(make_state(0.5, 0.5, Heading::PP, 0.3), p), Error);
  CHECK_THROWS_AS(next_event(make_state(0.1, 0.1, Heading::PP, 0.0), p), Error);
  CHECK_THROWS_AS(next_event(make_state(1.5, 0.1, Heading::PP, 0.3), p), Error);
  CHECK_THROWS_AS(advance(make_state(0.1, 0.1, Heading::PP, 0.3), p, 0.0), Error);
}

TEST_CASE("diagonal rays on the symmetric table are singular or periodic and bounded") {
  const WindTreeParams p{0.5, 0.5};
  int singular = 0, periodic = 0;
  for (int num : {1, 2, 3, 5, 7, 9, 11, 13, 15}) {
    for (bool anti : {false, true}) {
      for (Heading dir : {Heading::PP, Heading::PM}) {
        const Rational u(num, 16);
        const Rational fy = anti ? Rational(1) - u : u;
        if (std::abs(to_double(u) - 0.5) < 0.25 && std::abs(to_double(fy) - 0.5) < 0.25) continue;
        const auto oracle = diagonal_oracle(u, fy, sign_x(dir), sign_y(dir));
        const auto s = make_state(to_double(u), to_double(fy), dir, kPi / 4);
        if (oracle.singular) {
          ++singular;
          CHECK_THROWS_AS(flow_for(s, p, 100.0), Error);
          continue;
        }
        REQUIRE(oracle.period_shift == std::array<std::int64_t, 2>{0, 0});
        ++periodic;
        const auto stats = advance(s, p, 1e3);
        const double bound = static_cast<double>(oracle.max_cell_displacement) * std::sqrt(2.0) + 2.0;
        CHECK(stats.samples.back().d_max <= bound);
      }
    }
  }
  CHECK(singular > 0);
  CHECK(periodic > 0);
}

TEST_CASE("closed-form segment integral matches quadrature") {
  CounterRng rng(7, 3);
  for (int i = 0; i < 200; ++i) {
    const double u = rng.uniform(-50.0, 50.0);
    const double h = i % 10 == 0 ? 0.0 : rng.uniform(0.0, 20.0);
    const double dt = rng.uniform(1e-3, 3.0);
    const double exact = segment_distance_integral(u, h, dt);
    CHECK(exact == doctest::Approx(simpson(u, h, dt)).epsilon(1e-9));
  }
  CHECK(segment_distance_integral(0.0, 0.0, 2.0) == doctest::Approx(2.0));
  CHECK(segment_distance_integral(1e6, 1.0, 1e-3) == doctest::Approx(1e3 + 5e-7).epsilon(1e-12));
}

TEST_CASE("a vanishing horizon gives vanishing distances") {
  const WindTreeParams p{0.5, 0.5};
  const auto s = make_state(0.1, 0.1, Heading::PP, 0.4);
  const double t = 1e-9;
  AdvanceOptions opt;
  opt.grid.t0 = 1e-12;
  const auto stats = advance(s, p, t, opt);
  REQUIRE(!stats.samples.empty());
  CHECK(stats.samples.back().d_max <= t * (1 + 1e-9));
  CHECK(stats.samples.back().avg_d <= t * (1 + 1e-9));
  CHECK(stats.events == 0);
}

TEST_CASE("heading tags, angle and obstacle avoidance hold over a million events") {
  const WindTreeParams p{0.5, 0.5};
  BilliardState s = random_start(p, 11, 0, 0);
  const double theta = s.theta;
  std::uint64_t events = 0;
  int attempt = 0;
  while (events < 1000000) {
    const auto ev = next_event(s, p);
    if (ev.kind == EventKind::Corner) {
      s = random_start(p, 11, 0, ++attempt);
      continue;
    }
    const auto& n = ev.new_state;
    REQUIRE(n.theta == s.theta);
    REQUIRE(ev.dt > 0.0);
    switch (ev.kind) {
      case EventKind::VerticalWall: REQUIRE(n.dir == flip_x(s.dir)); break;
      case EventKind::HorizontalWall: REQUIRE(n.dir == flip_y(s.dir)); break;
      case EventKind::CellCrossing: {
        REQUIRE(n.dir == s.dir);
        const auto dm = n.cell[0] - s.cell[0], dn = n.cell[1] - s.cell[1];
        REQUIRE(std::abs(dm) + std::abs(dn) >= 1);
        REQUIRE(std::abs(dm) <= 1);
        REQUIRE(std::abs(dn) <= 1);
        break;
      }
      case EventKind::Corner: break;
    }
    REQUIRE(!inside_obstacle(n.frac, p, 1e-12));
    REQUIRE(n.frac[0] >= 0.0);
    REQUIRE(n.frac[0] <= 1.0);
    REQUIRE(n.frac[1] >= 0.0);
    REQUIRE(n.frac[1] <= 1.0);
    const auto v = n.velocity();
    REQUIRE(std::abs(v[0] * v[0] + v[1] * v[1] - 1.0) < 4e-16);
    s = n;
    ++events;
  }
  CHECK(attempt == 0);
  CHECK(s.theta == theta);
}

TEST_CASE("the flow is time reversible") {
  for (auto [a, b] : std::vector<std::pair<double, double>>{{0.5, 0.5}, {0.25, 0.9}}) {
    const WindTreeParams p{a, b};
    for (std::uint64_t i = 0; i < 6; ++i) {
      const auto start = random_start(p, 5, i, 0);
      for (double t : {10.0, 1e3, 1e4}) {
        std::uint64_t forward = 0, backward = 0;
        BilliardState end = flow_for(start, p, t, {}, &forward);
        end.dir = reversed(end.dir);
        BilliardState back = flow_for(end, p, t, {}, &backward);
        const double err = distance(back, start);
        CHECK(err <= 1e-6 * static_cast<double>(std::max<std::uint64_t>(forward, 1)));
        CHECK(back.dir == reversed(start.dir));
      }
    }
  }
}

TEST_CASE("sampled distances are Lipschitz, monotone and comparable to the lattice distance") {
  for (auto [a, b] : std::vector<std::pair<double, double>>{{0.5, 0.5}, {0.25, 0.9}}) {
    const WindTreeParams p{a, b};
    const auto start = random_start(p, 3, 1, 0);
    const auto stats = advance(start, p, 2e4);
    REQUIRE(stats.samples.size() > 100);
    BilliardState cur = start;
    double prev_t = 0.0, prev_d = 0.0, prev_max = 0.0;
    for (const auto& s : stats.samples) {
      CHECK(std::abs(s.d_now - prev_d) <= (s.t - prev_t) * (1 + 1e-9) + 1e-9);
      CHECK(s.d_max >= prev_max);
      CHECK(s.d_max >= s.d_now - 1e-12);
      CHECK(s.avg_d <= s.d_max + 1e-12);
      cur = flow_for(cur, p, s.t - cur.t);
      const double d = distance(cur, start);
      CHECK(std::abs(d - s.d_now) < 1e-6);
      const double l1 = static_cast<double>(std::abs(cur.cell[0] - start.cell[0]) +
                                            std::abs(cur.cell[1] - start.cell[1]));
      CHECK(l1 - 2.0 <= d * std::sqrt(2.0) + 1e-9);
      CHECK(d <= l1 + 2.0);
      prev_t = s.t;
      prev_d = s.d_now;
      prev_max = s.d_max;
    }
  }
}

TEST_CASE("free motion diffuses ballistically") {
  const WindTreeParams p{0.5, 0.5};
  EstimateOptions opt;
  opt.advance.flow.reflections = false;
  const auto est = estimate_diffusion_exponents(p, 8, 1e5, 3, FitWindow{1e3, 1e5}, opt);
  CHECK(est.completed == 8);
  CHECK(std::abs(est.max_exp - 1.0) <= 1e-3);
  CHECK(std::abs(est.avg_exp - 1.0) <= 1e-3);
}

TEST_CASE("direction estimates do not depend on the thread count") {
  const WindTreeParams p{0.25, 0.9};
  EstimateOptions one, many;
  one.threads = 1;
  many.threads = 4;
  const auto a = estimate_diffusion_exponents(p, 6, 2e4, 9, FitWindow{100, 2e4}, one);
  const auto b = estimate_diffusion_exponents(p, 6, 2e4, 9, FitWindow{100, 2e4}, many);
  CHECK(a.max_exp == b.max_exp);
  CHECK(a.avg_exp == b.avg_exp);
  CHECK(a.max_stderr == b.max_stderr);
  for (std::size_t i = 0; i < a.directions.size(); ++i) {
    CHECK(a.directions[i].theta == b.directions[i].theta);
    CHECK(a.directions[i].events == b.directions[i].events);
  }
}

TEST_CASE("invalid fit windows are configuration errors") {
  const WindTreeParams p{0.5, 0.5};
  try {
    estimate_diffusion_exponents(p, 2, 1e3, 1, FitWindow{5, 1e3});
    FAIL("accepted a window below 10 t0");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
  }
  CHECK_THROWS_AS(estimate_diffusion_exponents(p, 2, 1e3, 1, FitWindow{10, 1e4}), Error);
}

TEST_CASE("most random directions grow with slope near two thirds" * doctest::timeout(900)) {
  const WindTreeParams p{0.5, 0.5};
  const auto est = estimate_diffusion_exponents(p, 64, 1e6, 1, FitWindow{1e4, 1e6});
  int inside = 0;
  for (const auto& d : est.directions) {
    if (d.completed && d.max_slope >= 0.5 && d.max_slope <= 0.8) ++inside;
  }
  MESSAGE("directions with max slope in [0.5, 0.8]: " << inside << " of 64");
  CHECK(inside >= 52);
}

}  // TEST_SUITE
