#include "wtd/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "wtd/analysis.hpp"
#include "wtd/billiard.hpp"
#include "wtd/error.hpp"
#include "wtd/iet.hpp"
#include "wtd/iet_io.hpp"
#include "wtd/rational.hpp"
#include "wtd/renorm.hpp"
#include "wtd/rng.hpp"
#include "wtd/stats.hpp"

#ifndef WTD_VERSION
#define WTD_VERSION "0.0.0"
#endif

namespace wtd::cli {

using nlohmann::ordered_json;

std::string version() { return WTD_VERSION; }

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorKind::Config, what); }

// Shortest round-trip representation, so outputs are byte-identical across runs.
std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::pair<double, double> parse_range(const std::string& text, const char* flag) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) config_error(std::string(flag) + " expects lo:hi");
  double lo = 0.0, hi = 0.0;
  try {
    lo = std::stod(text.substr(0, colon));
    hi = std::stod(text.substr(colon + 1));
  } catch (const std::exception&) {
    config_error(std::string(flag) + " expects numbers lo:hi");
  }
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
    config_error(std::string(flag) + " needs lo < hi");
  }
  return {lo, hi};
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) config_error("cannot write " + path);
  return out;
}

void write_json(const std::string& path, const ordered_json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

using Clock = std::chrono::steady_clock;

void write_manifest(const std::string& artifact, const std::string& subcommand,
                    const ordered_json& config, Clock::time_point started) {
  ordered_json m;
  m["subcommand"] = subcommand;
  m["artifact"] = artifact;
  m["version"] = version();
  m["config"] = config;
  m["wall_time_seconds"] = std::chrono::duration<double>(Clock::now() - started).count();
  write_json(artifact + ".manifest.json", m);
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateConfig {
  double a = 0.5;
  double b = 0.5;
  std::optional<double> theta;
  int n_directions = 1;
  double t_max = 1e6;
  std::uint64_t seed = 1;
  bool free = false;
  std::string out;
};

void add_simulate(CLI::App& app, SimulateConfig& c) {
  app.add_option("--a", c.a, "obstacle width a in (0,1)")->capture_default_str();
  app.add_option("--b", c.b, "obstacle height b in (0,1)")->capture_default_str();
  auto* theta = app.add_option("--theta", c.theta, "direction angle in (0, pi/2); random if omitted");
  app.add_option("--n-directions", c.n_directions,
                 "number of seeded random directions; the CSV holds the pointwise median")
      ->capture_default_str()
      ->excludes(theta);
  app.add_option("--t-max", c.t_max, "final time")->capture_default_str();
  app.add_option("--seed", c.seed, "seed for starting points and directions")->capture_default_str();
  app.add_flag("--free", c.free, "disable reflections (ballistic control)");
  app.add_option("--out", c.out, "output CSV with columns t,d_now,d_max,avg_d")->required();
}

ordered_json echo(const SimulateConfig& c) {
  ordered_json j;
  j["a"] = c.a;
  j["b"] = c.b;
  j["theta"] = c.theta ? ordered_json(*c.theta) : ordered_json(nullptr);
  j["n_directions"] = c.n_directions;
  j["t_max"] = c.t_max;
  j["seed"] = c.seed;
  j["free"] = c.free;
  j["out"] = c.out;
  return j;
}

int run_simulate(const SimulateConfig& c) {
  const auto started = Clock::now();
  const billiard::WindTreeParams params = billiard::validate_params(c.a, c.b);
  if (!(c.t_max > 10.0) || !std::isfinite(c.t_max)) config_error("--t-max must exceed 10");
  if (c.n_directions < 1) config_error("--n-directions must be >= 1");
  billiard::AdvanceOptions advance;
  advance.flow.reflections = !c.free;

  std::vector<billiard::TrajectorySample> rows;
  if (c.n_directions == 1) {
    billiard::BilliardState start = billiard::random_start(params, c.seed, 0, 0, !c.free);
    if (c.theta) {
      if (!(*c.theta > 0.0 && *c.theta < std::acos(0.0))) {
        throw Error(ErrorKind::OutOfDomain, "--theta must lie in (0, pi/2)");
      }
      start.theta = *c.theta;
    }
    rows = billiard::advance(start, params, c.t_max, advance).samples;
  } else {
    billiard::EstimateOptions opts;
    opts.advance = advance;
    opts.keep_samples = true;
    const auto est = billiard::estimate_diffusion_exponents(params, c.n_directions, c.t_max, c.seed,
                                                            {10.0, c.t_max}, opts);
    const std::vector<billiard::TrajectorySample>* first = nullptr;
    for (const auto& d : est.directions) {
      if (d.completed) {
        first = &d.samples;
        break;
      }
    }
    for (std::size_t i = 0; i < first->size(); ++i) {
      std::vector<double> now, mx, avg;
      for (const auto& d : est.directions) {
        if (!d.completed) continue;
        now.push_back(d.samples[i].d_now);
        mx.push_back(d.samples[i].d_max);
        avg.push_back(d.samples[i].avg_d);
      }
      billiard::TrajectorySample s = (*first)[i];
      s.d_now = stats::median(now);
      s.d_max = stats::median(mx);
      s.avg_d = stats::median(avg);
      rows.push_back(s);
    }
  }
  {
    auto out = open_out(c.out);
    out << "t,d_now,d_max,avg_d\n";
    for (const auto& s : rows) {
      out << fmt(s.t) << ',' << fmt(s.d_now) << ',' << fmt(s.d_max) << ',' << fmt(s.avg_d) << '\n';
    }
  }
  write_manifest(c.out, "simulate", echo(c), started);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// iet-run

struct IetRunConfig {
  std::string def;
  std::string x = "0";
  std::uint64_t n = 1000000;
  std::uint64_t stride = 0;
  bool exact = false;
  std::string out;
};

void add_iet_run(CLI::App& app, IetRunConfig& c) {
  app.add_option("--def", c.def, "interval exchange definition (JSON)")->required();
  app.add_option("--x", c.x, "starting point, decimal or p/q")->capture_default_str();
  app.add_option("--n", c.n, "number of returns")->capture_default_str();
  app.add_option("--stride", c.stride,
                 "write every stride-th cycle; 0 writes a geometric grid of n (ratio 1.05)")
      ->capture_default_str();
  app.add_flag("--exact", c.exact, "iterate with exact rational arithmetic");
  app.add_option("--out", c.out, "output CSV")->required();
}

ordered_json echo(const IetRunConfig& c, const iet::IetDefinition& def) {
  ordered_json j;
  j["def"] = c.def;
  j["definition_hash"] = def.hash;
  j["x"] = c.x;
  j["n"] = c.n;
  j["stride"] = c.stride;
  j["exact"] = c.exact;
  j["out"] = c.out;
  return j;
}

template <class T>
void write_cycles(const iet::Iet<T>& map, const iet::Cocycle& f, T x, const IetRunConfig& c,
                  std::ostream& out) {
  out << 'n';
  for (const auto& name : map.names()) out << ",count_" << name;
  for (std::size_t i = 0; i < f.dim(); ++i) out << ",pairing_" << i;
  out << ",cycle_sum\n";
  const auto grid = analysis::integer_grid(1.0, 1.05, c.n);
  std::size_t next = 0;
  iet::ReturnCycleStream<T> stream(map, f, std::move(x));
  analysis::CycleSumAccumulator sums({});
  while (stream.n() < c.n) {
    if (!stream.next()) {
      throw Error(ErrorKind::SingularTrajectory,
                  "orbit hits a cut point at step " + std::to_string(*stream.singular_at()));
    }
    sums.push(stream.pairing_sup());
    const std::uint64_t n = stream.n();
    bool emit;
    if (c.stride > 0) {
      emit = n % c.stride == 0 || n == c.n;
    } else {
      emit = next < grid.size() && grid[next] == n;
      if (emit) ++next;
    }
    if (!emit) continue;
    out << n;
    for (auto v : stream.counts()) out << ',' << v;
    for (auto v : stream.pairing()) out << ',' << v;
    out << ',' << sums.exact_sum().str() << '\n';
  }
}

int run_iet_run(const IetRunConfig& c) {
  const auto started = Clock::now();
  const iet::IetDefinition def = iet::load_definition(c.def);
  if (!def.lengths) config_error("iet-run needs lengths in the definition");
  if (c.n < 1) config_error("--n must be >= 1");
  const iet::Cocycle f = def.cocycle ? *def.cocycle : iet::Cocycle::constant(def.names.size(), 1);
  const Rational x = parse_rational(c.x);
  {
    auto out = open_out(c.out);
    if (c.exact) {
      write_cycles(def.exact(), f, x, c, out);
    } else {
      write_cycles(def.approx(), f, to_double(x), c, out);
    }
  }
  write_manifest(c.out, "iet-run", echo(c, def), started);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// lyapunov

struct LyapunovConfig {
  std::string def;
  std::uint64_t steps = 20000;
  std::uint64_t seed = 1;
  std::string out;
};

void add_lyapunov(CLI::App& app, LyapunovConfig& c) {
  app.add_option("--def", c.def, "interval exchange definition with a cocycle (JSON)")->required();
  app.add_option("--steps", c.steps, "Zorich steps")->capture_default_str();
  app.add_option("--seed", c.seed, "seed for random lengths when the definition has none")
      ->capture_default_str();
  app.add_option("--out", c.out, "output JSON")->required();
}

int run_lyapunov(const LyapunovConfig& c) {
  const auto started = Clock::now();
  const iet::IetDefinition def = iet::load_definition(c.def);
  if (!def.cocycle) config_error("lyapunov needs a cocycle in the definition");
  if (c.steps < 4) config_error("--steps must be >= 4");
  std::vector<double> lengths;
  if (def.lengths) {
    lengths = def.approx().lengths();
  } else {
    CounterRng rng(c.seed, 0x1a9);
    lengths = iet::random_lengths(def.names.size(), rng);
  }
  const iet::Iet<double> map = def.with_lengths(lengths);
  renorm::LyapunovOptions opts;
  opts.steps = c.steps;
  const renorm::LyapunovResult r = renorm::lyapunov_ratio(map, *def.cocycle, opts);

  ordered_json j;
  j["lambda_f"] = r.lambda_f;
  j["lambda_f_stderr"] = r.lambda_f_stderr;
  j["component_ratio"] = r.component_ratio;
  j["projected"] = r.projected;
  j["lambda_top"] = r.lambda_top;
  j["lambda_top_stderr"] = r.lambda_top_stderr;
  j["ratio"] = r.ratio;
  j["stderr"] = r.ratio_stderr;
  j["mean_log_increment"] = r.mean_log_increment;
  j["zorich_steps"] = r.zorich_steps;
  j["rauzy_steps"] = r.rauzy_steps;
  j["lengths"] = lengths;
  j["seed"] = c.seed;
  j["definition_hash"] = def.hash;
  j["log_scale"] = r.log_scale;
  write_json(c.out, j);

  ordered_json cfg;
  cfg["def"] = c.def;
  cfg["definition_hash"] = def.hash;
  cfg["steps"] = c.steps;
  cfg["seed"] = c.seed;
  cfg["out"] = c.out;
  write_manifest(c.out, "lyapunov", cfg, started);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// fit

struct FitConfig {
  std::string in;
  std::string kind = "cyclesum";
  std::string window;
  std::string column;
  std::uint64_t seed = 0;
  std::string out;
};

void add_fit(CLI::App& app, FitConfig& c) {
  app.add_option("--in", c.in, "input CSV (header row; first column is the abscissa)")->required();
  app.add_option("--kind", c.kind, "series kind: cyclesum, avg, max, pairing or normalized")
      ->capture_default_str();
  app.add_option("--window", c.window, "fit window lo:hi (default: last two decades)");
  app.add_option("--column", c.column,
                 "value column (default: cycle_sum, avg_d, d_max, pairing_0 by kind)");
  app.add_option("--seed", c.seed, "bootstrap seed")->capture_default_str();
  app.add_option("--out", c.out, "output JSON")->required();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    cells.push_back(cell);
  }
  return cells;
}

std::string default_column(analysis::SeriesKind kind) {
  switch (kind) {
    case analysis::SeriesKind::CycleSum: return "cycle_sum";
    case analysis::SeriesKind::AvgDistance: return "avg_d";
    case analysis::SeriesKind::MaxDistance: return "d_max";
    case analysis::SeriesKind::PairingAbs: return "pairing_0";
    case analysis::SeriesKind::NormalizedCycleSum: return "normalized";
  }
  return "";
}

analysis::DiffusionSeries read_series(const std::string& path, analysis::SeriesKind kind,
                                      const std::string& column) {
  std::ifstream in(path);
  if (!in) config_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) config_error(path + " is empty");
  const auto header = split_csv(line);
  std::size_t col = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == column) col = i;
  }
  if (col == header.size()) config_error("column '" + column + "' not found in " + path);
  if (col == 0) config_error("the value column must differ from the abscissa column");
  analysis::DiffusionSeries series(kind);
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      config_error(path + ": row " + std::to_string(row) + " has the wrong number of cells");
    }
    double x = 0.0, v = 0.0;
    try {
      x = std::stod(cells[0]);
      v = std::stod(cells[col]);
    } catch (const std::exception&) {
      config_error(path + ": row " + std::to_string(row) + " is not numeric");
    }
    if (kind == analysis::SeriesKind::PairingAbs) v = std::abs(v);
    series.push(x, v);
  }
  return series;
}

int run_fit(const FitConfig& c) {
  const auto started = Clock::now();
  const analysis::SeriesKind kind = analysis::parse_kind(c.kind);
  const std::string column = c.column.empty() ? default_column(kind) : c.column;
  const analysis::DiffusionSeries series = read_series(c.in, kind, column);
  analysis::FitOptions opts;
  opts.seed = c.seed;
  if (!c.window.empty()) opts.window = parse_range(c.window, "--window");
  const analysis::ExponentFit fit = analysis::fit_exponent(series, opts);

  ordered_json j;
  j["slope"] = fit.slope;
  j["exponent"] = fit.exponent;
  j["stderr"] = fit.stderr_;
  j["r2"] = fit.r2;
  j["intercept"] = fit.intercept;
  j["window"] = {fit.lo, fit.hi};
  j["points"] = fit.points;
  j["seed"] = fit.seed;
  j["kind"] = std::string(analysis::to_string(kind));
  j["column"] = column;
  write_json(c.out, j);

  ordered_json cfg;
  cfg["in"] = c.in;
  cfg["kind"] = c.kind;
  cfg["window"] = c.window;
  cfg["column"] = column;
  cfg["seed"] = c.seed;
  cfg["out"] = c.out;
  write_manifest(c.out, "fit", cfg, started);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// reproduce

struct ReproduceConfig {
  double a = 0.5;
  double b = 0.5;
  double t_max = 1e7;
  int n_directions = 64;
  std::uint64_t seed = 1;
  std::string window;
  std::string band = "0.5:0.8";
  bool free = false;
  std::string out = "exponents.json";
};

void add_reproduce(CLI::App& app, ReproduceConfig& c) {
  app.add_option("--a", c.a, "obstacle width a in (0,1)")->capture_default_str();
  app.add_option("--b", c.b, "obstacle height b in (0,1)")->capture_default_str();
  app.add_option("--t-max", c.t_max, "final time")->capture_default_str();
  app.add_option("--n-directions", c.n_directions, "number of seeded random directions")
      ->capture_default_str();
  app.add_option("--seed", c.seed, "seed")->capture_default_str();
  app.add_option("--window", c.window, "fit window lo:hi (default: max(10, t_max/1000):t_max)");
  app.add_option("--band", c.band, "pass band for both median exponents")->capture_default_str();
  app.add_flag("--free", c.free, "disable reflections (ballistic control)");
  app.add_option("--out", c.out, "output JSON")->capture_default_str();
}

int run_reproduce(const ReproduceConfig& c) {
  const auto started = Clock::now();
  const billiard::WindTreeParams params = billiard::validate_params(c.a, c.b);
  if (!(c.t_max >= 1e3) || !std::isfinite(c.t_max)) config_error("--t-max must be >= 1000");
  if (c.n_directions < 1) config_error("--n-directions must be >= 1");
  const auto [lo, hi] = c.window.empty() ? std::pair{std::max(10.0, c.t_max / 1000.0), c.t_max}
                                         : parse_range(c.window, "--window");
  const auto [band_lo, band_hi] = parse_range(c.band, "--band");
  billiard::EstimateOptions opts;
  opts.advance.flow.reflections = !c.free;
  const auto est =
      billiard::estimate_diffusion_exponents(params, c.n_directions, c.t_max, c.seed, {lo, hi}, opts);
  const bool pass = est.max_exp >= band_lo && est.max_exp <= band_hi && est.avg_exp >= band_lo &&
                    est.avg_exp <= band_hi;

  ordered_json j;
  j["max_exp"] = est.max_exp;
  j["max_stderr"] = est.max_stderr;
  j["avg_exp"] = est.avg_exp;
  j["avg_stderr"] = est.avg_stderr;
  j["gap"] = std::abs(est.max_exp - est.avg_exp);
  j["band"] = {band_lo, band_hi};
  j["pass"] = pass;
  j["a"] = c.a;
  j["b"] = c.b;
  j["t_max"] = c.t_max;
  j["window"] = {lo, hi};
  j["n_directions"] = c.n_directions;
  j["completed"] = est.completed;
  j["resampled"] = est.resampled;
  j["seed"] = c.seed;
  j["free"] = c.free;
  ordered_json dirs = ordered_json::array();
  for (const auto& d : est.directions) {
    ordered_json e;
    e["theta"] = d.theta;
    e["start"] = {d.start_frac[0], d.start_frac[1]};
    e["completed"] = d.completed;
    e["attempts"] = d.attempts;
    e["events"] = d.events;
    e["max_slope"] = d.max_slope;
    e["avg_slope"] = d.avg_slope;
    dirs.push_back(e);
  }
  j["directions"] = dirs;
  write_json(c.out, j);

  ordered_json cfg;
  cfg["a"] = c.a;
  cfg["b"] = c.b;
  cfg["t_max"] = c.t_max;
  cfg["n_directions"] = c.n_directions;
  cfg["seed"] = c.seed;
  cfg["window"] = {lo, hi};
  cfg["band"] = {band_lo, band_hi};
  cfg["free"] = c.free;
  cfg["out"] = c.out;
  write_manifest(c.out, "reproduce", cfg, started);
  return kExitOk;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InsufficientData: return kExitInsufficientData;
    case ErrorKind::Timeout: return kExitInternal;
    default: return kExitConfig;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Wind-tree billiard and interval exchange diffusion toolkit", "wtd"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);

  SimulateConfig sim;
  IetRunConfig iet_run;
  LyapunovConfig lyap;
  FitConfig fit;
  ReproduceConfig repro;
  add_simulate(*app.add_subcommand("simulate", "simulate wind-tree trajectories, write a CSV"), sim);
  add_iet_run(*app.add_subcommand("iet-run", "stream return cycles of an interval exchange"),
              iet_run);
  add_lyapunov(*app.add_subcommand("lyapunov", "Lyapunov exponent of a cocycle under Zorich steps"),
               lyap);
  add_fit(*app.add_subcommand("fit", "log-log exponent fit of a series CSV"), fit);
  add_reproduce(*app.add_subcommand("reproduce", "median diffusion exponents over directions"),
                repro);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "simulate") return run_simulate(sim);
    if (name == "iet-run") return run_iet_run(iet_run);
    if (name == "lyapunov") return run_lyapunov(lyap);
    if (name == "fit") return run_fit(fit);
    if (name == "reproduce") return run_reproduce(repro);
    err << "unknown subcommand " << name << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    err << "wtd: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "wtd: internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace wtd::cli
