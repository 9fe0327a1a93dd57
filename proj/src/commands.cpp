#include "collapse_box/commands.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "collapse_box/io.hpp"
#include "collapse_box/parallel.hpp"

namespace cbox {
namespace {

namespace fs = std::filesystem;

constexpr std::size_t kDefaultSweepPoints = 101;

struct Settings {
  std::uint64_t seed;
  std::uint64_t replicas;
  double alpha;
  unsigned workers;
};

Settings resolve(const RunManifest& m, const ScenarioFile& s) {
  Settings out{m.seed.value_or(s.seed.value_or(kDefaultSeed)), m.replicas.value_or(s.replicas.value_or(kDefaultReplicas)),
               m.alpha.value_or(kDefaultAlpha), m.workers};
  if (out.replicas < 1) throw Error(ErrorCode::InvalidConfig, "N must be >= 1");
  if (!(out.alpha > 0.0 && out.alpha < 1.0)) throw Error(ErrorCode::InvalidConfig, "alpha must lie in (0, 1)");
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::IoError, "cannot create output directory " + dir.string());
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  os << contents;
  if (!os) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::vector<double> witness_grid(const RunManifest& m, const ScenarioFile& s, const CollapseFamily& f) {
  std::vector<double> grid;
  if (m.grid) {
    grid = parse_grid(*m.grid);
  } else if (s.grid) {
    grid = *s.grid;
  } else {
    const double top = f.max_duration() > 0.0 ? f.max_duration() : 1.0;
    for (std::size_t i = 0; i < kDefaultSweepPoints; ++i)
      grid.push_back(top * static_cast<double>(i) / static_cast<double>(kDefaultSweepPoints - 1));
  }
  if (grid.empty()) throw Error(ErrorCode::EmptyGrid, "witness grid is empty");
  return grid;
}

WitnessOptions witness_options(const Settings& st) {
  WitnessOptions o;
  o.sim.replicas = st.replicas;
  o.sim.seed = st.seed;
  o.sim.workers = st.workers;
  o.alpha = st.alpha;
  return o;
}

// Runs `body`, mapping library errors onto exit codes.
template <class Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

// --- witness ---------------------------------------------------------------

constexpr double kPeakTieTolerance = 1e-12;

struct WitnessSummary {
  std::vector<WitnessReport> reports;
  std::size_t argmax = 0;
  double capacity = 0.0;
  Verdict verdict = Verdict::non_signaling;
  std::optional<WitnessReport> window;
};

WitnessSummary run_witness(const ScenarioFile& s, const Settings& st, const std::vector<double>& grid) {
  const TwoBoxScenario scenario(make_family(s.family));
  WitnessSummary sum;
  const WitnessOptions opts = witness_options(st);
  sum.reports = witness_sweep(scenario, grid, opts);
  double peak = 0.0;
  for (const auto& r : sum.reports) {
    peak = std::max(peak, r.tv_analytic);
    if (r.verdict == Verdict::signaling) sum.verdict = Verdict::signaling;
  }
  // Plateaus are common (step families); report the middle of the tied points.
  std::vector<std::size_t> ties;
  for (std::size_t i = 0; i < sum.reports.size(); ++i)
    if (sum.reports[i].tv_analytic >= peak - kPeakTieTolerance) ties.push_back(i);
  sum.argmax = ties[(ties.size() - 1) / 2];
  const auto& best = sum.reports[sum.argmax];
  sum.capacity = channel_capacity(InducedChannel(best.analytic_reference, best.analytic_probe));
  if (s.window) {
    sum.window = window_witness(scenario, *s.window, opts);
    if (sum.window->verdict == Verdict::signaling) sum.verdict = Verdict::signaling;
  }
  return sum;
}

std::string witness_summary_line(const WitnessSummary& sum) {
  const auto& best = sum.reports[sum.argmax];
  std::ostringstream os;
  os << "max TV " << fmt_sci(best.tv_analytic) << " at s=" << fmt_num(best.elapsed) << ", capacity "
     << fmt_sci(sum.capacity) << " bits, verdict: " << to_string(sum.verdict);
  return os.str();
}

// --- simulate --------------------------------------------------------------

struct SimulationOutcome {
  EmpiricalDist empirical{std::vector<std::uint64_t>{0}};
  Distribution analytic;
  GofReport gof;
  std::string target;
  std::string notes;
};

SimulationOutcome run_simulation(const ScenarioFile& s, const Settings& st) {
  const CollapseFamily family = make_family(s.family);
  SimConfig cfg;
  cfg.replicas = st.replicas;
  cfg.seed = st.seed;
  cfg.workers = st.workers;

  SimulationOutcome out;
  std::optional<EmpiricalDist> reference;
  SimConfig ref_cfg = cfg;
  ref_cfg.stream = cfg.stream + 1;
  std::ostringstream notes;

  switch (s.layout) {
    case Layout::single:
      out.empirical = simulate_single(family, s.p0, s.probe_elapsed, cfg);
      out.analytic = marginal_at(family, s.p0, s.probe_elapsed);
      if (s.target == "mc") reference = simulate_single(family, s.p0, s.probe_elapsed, ref_cfg);
      break;
    case Layout::twobox: {
      if (!s.schedule) throw Error(ErrorCode::ParseError, "twobox layout needs a 'schedule' block");
      const TwoBoxScenario scenario(family);
      out.empirical = simulate_twobox(scenario, *s.schedule, cfg);
      out.analytic = bob_marginal(scenario, s.schedule->x, s.schedule->elapsed());
      if (s.target == "mc") reference = simulate_twobox(scenario, *s.schedule, ref_cfg);
      break;
    }
    case Layout::window: {
      const TwoBoxScenario scenario(family);
      const int x = s.schedule ? s.schedule->x : 1;
      out.empirical = simulate_window(scenario, *s.window, cfg, x);
      out.analytic = window_marginal(scenario, *s.window, x);
      const Distribution operational = operational_window_marginal(scenario, *s.window, x);
      const Distribution empirical = make_distribution(out.empirical.frequencies(), 1e-9);
      notes << "window formula vs simulation semantics: tv(formula, operational) = "
            << fmt_num(tv_distance(out.analytic, operational))
            << ", tv(formula, empirical) = " << fmt_num(tv_distance(out.analytic, empirical))
            << ", tv(operational, empirical) = " << fmt_num(tv_distance(operational, empirical)) << "\n";
      if (s.target == "mc") reference = simulate_window(scenario, *s.window, ref_cfg, x);
      break;
    }
  }

  out.target = s.target;
  if (s.target == "mc") {
    out.gof = homogeneity_test(out.empirical, *reference, st.alpha);
  } else {
    out.gof = gof_test(out.empirical, s.target == "prior" ? s.p0 : out.analytic, st.alpha);
  }
  out.notes = notes.str();
  return out;
}

std::string gof_text(const SimulationOutcome& o, const ScenarioFile& s, double alpha) {
  std::ostringstream os;
  os << "layout=" << to_string(s.layout) << " target=" << o.target
     << " method=" << (o.target == "mc" ? std::string("homogeneity") : std::string(to_string(o.gof.method)))
     << " statistic=" << fmt_num(o.gof.statistic) << " dof=" << o.gof.dof << " p_value=" << fmt_num(o.gof.p_value)
     << " alpha=" << fmt_num(alpha) << " reject=" << (o.gof.reject ? "yes" : "no") << "\n";
  os << "tv(analytic, empirical) = "
     << fmt_num(tv_distance(o.analytic, make_distribution(o.empirical.frequencies(), 1e-9))) << "\n";
  os << o.notes;
  return os.str();
}

// --- sweep -----------------------------------------------------------------

struct Axis {
  std::string param;
  std::optional<std::size_t> outcome;
  std::vector<double> values;
};

std::vector<Axis> sweep_axes(const json& sweep) {
  std::vector<Axis> axes;
  const json& list = sweep.at("axes");
  if (!list.is_array() || list.empty()) throw Error(ErrorCode::ParseError, "sweep.axes must be a non-empty array");
  for (const auto& a : list) {
    Axis ax;
    ax.param = a.at("param").get<std::string>();
    if (ax.param != "dt" && ax.param != "dt_window" && ax.param != "n" && ax.param != "seed")
      throw Error(ErrorCode::ParseError, "unknown sweep parameter '" + ax.param + "'");
    if (a.contains("outcome")) ax.outcome = a.at("outcome").get<std::size_t>();
    ax.values = grid_from_json(a.at("values"));
    if (ax.values.empty()) throw Error(ErrorCode::EmptyGrid, "sweep axis '" + ax.param + "' has no values");
    axes.push_back(std::move(ax));
  }
  return axes;
}

void apply_axis(ScenarioFile& s, Settings& st, const Axis& ax, double v) {
  if (ax.param == "n") {
    if (v < 1 || v != std::floor(v)) throw Error(ErrorCode::InvalidConfig, "sweep N must be a positive integer");
    st.replicas = static_cast<std::uint64_t>(v);
  } else if (ax.param == "seed") {
    st.seed = static_cast<std::uint64_t>(v);
  } else if (ax.param == "dt_window") {
    if (!s.window) throw Error(ErrorCode::InvalidSpec, "dt_window sweep needs a window block");
    s.window = WindowSpec(v, s.window->density());
  } else {
    FamilySpec& f = s.family;
    const std::size_t n = f.p0.size();
    auto assign = [&](std::vector<double>& target, double value) {
      if (target.size() != n) target.assign(n, value);
      if (ax.outcome) {
        if (*ax.outcome >= n) throw Error(ErrorCode::InvalidSpec, "sweep outcome out of range");
        target[*ax.outcome] = value;
      } else {
        std::fill(target.begin(), target.end(), value);
      }
    };
    switch (f.kind) {
      case FamilyKind::linear:
      case FamilyKind::step:
        assign(f.dt, v);
        break;
      case FamilyKind::exponential:
        if (!(v > 0.0)) throw Error(ErrorCode::InvalidSpec, "exponential durations must be > 0");
        assign(f.rates, -std::log(kExponentialCutoffTail) / v);
        break;
      case FamilyKind::instantaneous:
        if (v != 0.0) throw Error(ErrorCode::InvalidSpec, "instantaneous family has zero durations");
        break;
      case FamilyKind::table:
        throw Error(ErrorCode::InvalidSpec, "dt sweep is not defined for tabulated families");
    }
  }
}

}  // namespace

int cmd_validate(const RunManifest& m, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ScenarioFile s = load_scenario(m.scenario);
    std::vector<std::string> problems;

    std::optional<CollapseFamily> family;
    try {
      family = make_family_unchecked(s.family);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InvalidSpec) throw;
      problems.push_back(e.what());
    }

    if (family) {
      const std::vector<double> grid = m.grid ? parse_grid(*m.grid) : (s.grid ? *s.grid : default_validation_grid(*family));
      const FamilyValidation v = validate_family(*family, grid);
      out << "boundary check (" << grid.size() << " grid points, tolerance " << fmt_num(FamilyValidation::kTolerance)
          << ")\n";
      out << std::left << std::setw(34) << "clause" << std::setw(14) << "worst" << std::setw(12) << "at s"
          << std::setw(8) << "a" << std::setw(8) << "a'" << "status\n";
      for (const auto& c : v.clauses) {
        const bool ok = c.worst <= FamilyValidation::kTolerance;
        out << std::left << std::setw(34) << to_string(c.clause) << std::setw(14) << fmt_sci(c.worst) << std::setw(12)
            << fmt_num(c.elapsed) << std::setw(8) << c.latent << std::setw(8) << c.output << (ok ? "ok" : "VIOLATED")
            << "\n";
        if (!ok) problems.push_back(std::string("boundary clause ") + std::string(to_string(c.clause)) + " violated");
      }
      if (max_abs_difference(family->prior(), s.p0) > 1e-12)
        problems.push_back("family prior differs from scenario p0");
      if (s.window && !(s.window->length() > family->min_duration()))
        problems.push_back("window length must exceed the shortest collapse time");
    }
    if (s.schedule) {
      try {
        validate_schedule(*s.schedule);
      } catch (const Error& e) {
        problems.push_back(e.what());
      }
    }
    if (family) {
      const NonSignalingReport ns = is_nonsignaling(TwoBoxScenario(*family).initial_behavior());
      if (!ns.pass) problems.push_back("pre-collapse behavior signals: " + ns.violating_marginal);
    }

    if (problems.empty()) {
      out << "scenario " << s.id << ": valid\n";
      return kExitPass;
    }
    out << "scenario " << s.id << ": " << problems.size() << " violation(s)\n";
    for (const auto& p : problems) out << "  - " << p << "\n";
    return kExitDetected;
  });
}

int cmd_witness(const RunManifest& m, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ScenarioFile s = load_scenario(m.scenario);
    const Settings st = resolve(m, s);
    const CollapseFamily family = make_family(s.family);
    const auto grid = witness_grid(m, s, family);
    ensure_dir(m.out_dir);

    const WitnessSummary sum = run_witness(s, st, grid);
    std::ostringstream csv;
    write_sweep_csv(csv, {s.hash, st.seed}, sum.reports);
    write_file(m.out_dir / "witness.csv", csv.str());

    std::ostringstream summary;
    summary << witness_summary_line(sum) << "\n";
    if (sum.window) {
      summary << "window: tv_analytic " << fmt_sci(sum.window->tv_analytic) << ", tv_empirical "
              << fmt_sci(sum.window->tv_empirical) << ", pvalue " << fmt_num(sum.window->p_value) << ", verdict: "
              << to_string(sum.window->verdict) << "\n";
    }
    write_file(m.out_dir / "summary.txt", summary.str());
    out << summary.str();
    return sum.verdict == Verdict::signaling ? kExitDetected : kExitPass;
  });
}

int cmd_simulate(const RunManifest& m, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ScenarioFile s = load_scenario(m.scenario);
    const Settings st = resolve(m, s);
    ensure_dir(m.out_dir);
    const SimulationOutcome o = run_simulation(s, st);

    std::ostringstream csv;
    write_empirical_csv(csv, {s.hash, st.seed}, s.id, o.empirical);
    write_file(m.out_dir / "simulate.csv", csv.str());
    const std::string report = gof_text(o, s, st.alpha);
    write_file(m.out_dir / "gof.txt", report);
    out << report;
    return o.gof.reject ? kExitDetected : kExitPass;
  });
}

int cmd_sweep(const RunManifest& m, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ScenarioFile base = load_scenario(m.scenario);
    const Settings base_st = resolve(m, base);
    if (!base.raw.contains("sweep")) throw Error(ErrorCode::ParseError, "scenario has no 'sweep' block");
    const json& sweep = base.raw.at("sweep");
    const std::string command = sweep.value("command", std::string("witness"));
    if (command != "witness" && command != "simulate")
      throw Error(ErrorCode::ParseError, "sweep.command must be witness or simulate");
    std::vector<Axis> axes;
    try {
      axes = sweep_axes(sweep);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, e.what());
    }
    ensure_dir(m.out_dir);

    std::size_t cells = 1;
    for (const auto& ax : axes) cells *= ax.values.size();

    std::vector<std::string> rows(cells);
    std::vector<std::string> failures(cells);
    const unsigned workers = resolve_workers(m.workers);

    parallel_blocks(cells, workers, [&](std::size_t begin, std::size_t end, unsigned) {
      for (std::size_t cell = begin; cell < end; ++cell) {
        try {
          ScenarioFile s = base;
          Settings st = base_st;
          if (cells > 1) st.workers = 1;
          std::ostringstream row;
          row << cell;
          std::size_t rest = cell;
          std::vector<double> picked(axes.size());
          for (std::size_t k = axes.size(); k-- > 0;) {
            picked[k] = axes[k].values[rest % axes[k].values.size()];
            rest /= axes[k].values.size();
          }
          for (std::size_t k = 0; k < axes.size(); ++k) {
            apply_axis(s, st, axes[k], picked[k]);
            row << ',' << fmt_num(picked[k]);
          }
          const CollapseFamily family = make_family(s.family);
          const double dt_min = family.min_duration();
          row << ',' << fmt_num(dt_min) << ',' << fmt_num(family.max_duration()) << ','
              << (s.window ? fmt_num(s.window->length()) : std::string()) << ',' << st.replicas << ',';
          if (s.window) row << fmt_num(theta(*s.window, dt_min)) << ',' << fmt_num(omega(*s.window, dt_min));
          else row << ',';

          if (command == "witness") {
            RunManifest cm = m;
            const auto grid = witness_grid(cm, s, family);
            const WitnessSummary sum = run_witness(s, st, grid);
            const auto& best = sum.reports[sum.argmax];
            row << ',' << fmt_num(best.tv_analytic) << ',' << fmt_num(best.elapsed) << ',' << fmt_num(sum.capacity)
                << ',' << (sum.window ? fmt_num(sum.window->tv_analytic) : std::string()) << ','
                << (sum.window ? fmt_num(sum.window->tv_empirical) : std::string()) << ',' << to_string(sum.verdict);
          } else {
            const SimulationOutcome o = run_simulation(s, st);
            row << ',' << to_string(s.layout) << ','
                << fmt_num(tv_distance(o.analytic, s.p0)) << ','
                << fmt_num(tv_distance(make_distribution(o.empirical.frequencies(), 1e-9), s.p0)) << ','
                << fmt_num(o.gof.statistic) << ',' << fmt_num(o.gof.p_value) << ',' << (o.gof.reject ? "yes" : "no");
          }
          rows[cell] = row.str();
        } catch (const std::exception& e) {
          failures[cell] = e.what();
        }
      }
    });

    std::ostringstream csv;
    write_csv_preamble(csv, {base.hash, base_st.seed});
    csv << "cell";
    for (const auto& ax : axes) csv << ',' << ax.param << (ax.outcome ? "_" + std::to_string(*ax.outcome) : "");
    csv << ",dt_min,dt_max,dt_window,n,theta,omega";
    if (command == "witness") csv << ",max_tv,elapsed_at_max,capacity,window_tv_analytic,window_tv_empirical,verdict\n";
    else csv << ",layout,tv_analytic_vs_prior,tv_empirical_vs_prior,statistic,pvalue,reject\n";

    for (std::size_t cell = 0; cell < cells; ++cell) {
      if (!failures[cell].empty()) {
        write_file(m.out_dir / "sweep.csv", csv.str());
        write_file(m.out_dir / "MANIFEST.partial",
                   "sweep stopped at cell " + std::to_string(cell) + ": " + failures[cell] + "\n");
        err << "error: sweep cell " << cell << ": " << failures[cell] << "\n";
        return kExitFailure;
      }
      csv << rows[cell] << '\n';
    }
    write_file(m.out_dir / "sweep.csv", csv.str());
    out << "sweep: " << cells << " cell(s) written to " << (m.out_dir / "sweep.csv").string() << "\n";
    return kExitPass;
  });
}

int run_command(const RunManifest& m, std::ostream& out, std::ostream& err) {
  if (m.command == "validate") return cmd_validate(m, out, err);
  if (m.command == "witness") return cmd_witness(m, out, err);
  if (m.command == "simulate") return cmd_simulate(m, out, err);
  if (m.command == "sweep") return cmd_sweep(m, out, err);
  err << "error: unknown command '" << m.command << "'\n";
  return kExitFailure;
}

}  // namespace cbox
