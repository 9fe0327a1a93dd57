#pragma once

// JSON ingestion for behaviors, families and scenarios; CSV emission for
// simulation and sweep results.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "collapse_box/behaviors.hpp"
#include "collapse_box/collapse.hpp"
#include "collapse_box/mc.hpp"
#include "collapse_box/scenarios.hpp"
#include "collapse_box/signaling.hpp"

namespace cbox {

using json = nlohmann::json;

std::string_view tool_version() noexcept;

// --- behaviors ---------------------------------------------------------
/// {"alphabets": {"a","b","x","y"}, "table": [x][y][a][b]}
BoxBehavior box_from_json(const json& j);
json box_to_json(const BoxBehavior& box);

// --- families and windows ----------------------------------------------
/// {"kind", "p0", "dt", "rates", "grid": {"times", "values": [a][k][a']}}.
/// `fallback_prior` is used when "p0" is absent.
FamilySpec family_spec_from_json(const json& j, const std::optional<Distribution>& fallback_prior = std::nullopt);
json family_spec_to_json(const FamilySpec& spec);

/// {"dt_window": L, "g": {"kind": "uniform"|"truncated-exponential"|"table", "rate", "times", "values"}}
WindowSpec window_from_json(const json& j);

Schedule schedule_from_json(const json& j);

/// "start:stop:count" (inclusive, evenly spaced) or "v1,v2,...". An empty
/// string yields an empty grid.
std::vector<double> parse_grid(const std::string& spec);
std::vector<double> grid_from_json(const json& j);

enum class Layout { single, twobox, window };
std::string_view to_string(Layout l) noexcept;

struct ScenarioFile {
  std::string id;
  std::string hash;  // FNV-1a of the canonical JSON dump
  json raw;
  Distribution p0;
  FamilySpec family;
  std::optional<WindowSpec> window;
  std::optional<Schedule> schedule;
  double probe_elapsed = 0.0;
  std::optional<std::vector<double>> grid;
  Layout layout = Layout::single;
  std::string target = "analytic";
  std::optional<std::uint64_t> replicas;
  std::optional<std::uint64_t> seed;
};

ScenarioFile scenario_from_json(const json& j);
ScenarioFile load_scenario(const std::filesystem::path& path);

std::string content_hash(const json& j);

// --- CSV ----------------------------------------------------------------
struct CsvMeta {
  std::string scenario_hash;
  std::uint64_t seed = 0;
};

/// "# collapse-box <version> scenario=<hash> seed=<seed>"
void write_csv_preamble(std::ostream& os, const CsvMeta& meta);

/// Formats with 12 significant digits.
std::string fmt_num(double v);
/// Compact scientific form such as 2.100e-1 or 0.000e0.
std::string fmt_sci(double v);

/// Rows (scenario_id, seed, n, outcome, count, freq, ci_lo, ci_hi).
void write_empirical_csv(std::ostream& os, const CsvMeta& meta, const std::string& scenario_id,
                         const EmpiricalDist& e);

/// Rows (elapsed, tv_analytic, tv_empirical, ci_lo, ci_hi, pvalue, verdict).
void write_sweep_csv(std::ostream& os, const CsvMeta& meta, const std::vector<WitnessReport>& reports);

/// Lines of a CSV that are not '#' comments.
std::string csv_data_section(const std::string& contents);

}  // namespace cbox
