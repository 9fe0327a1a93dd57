#include "collapse_box/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#ifndef COLLAPSE_BOX_VERSION
#define COLLAPSE_BOX_VERSION "0.0.0"
#endif

namespace cbox {
namespace {

[[noreturn]] void parse_fail(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

const json& need(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) parse_fail(std::string("missing key '") + key + "'");
  return j.at(key);
}

std::vector<double> number_list(const json& j, const char* what) {
  if (!j.is_array()) parse_fail(std::string(what) + " must be an array");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) parse_fail(std::string(what) + " must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::size_t positive_size(const json& j, const char* key) {
  const json& v = need(j, key);
  if (!v.is_number_integer() || v.get<long long>() <= 0) parse_fail(std::string("alphabet '") + key + "' must be > 0");
  return v.get<std::size_t>();
}

template <class Fn>
auto wrap_json(Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

}  // namespace

std::string_view tool_version() noexcept { return COLLAPSE_BOX_VERSION; }

BoxBehavior box_from_json(const json& j) {
  return wrap_json([&] {
    const json& al = need(j, "alphabets");
    Alphabets d{positive_size(al, "a"), positive_size(al, "b"), positive_size(al, "x"), positive_size(al, "y")};
    const json& t = need(j, "table");
    Eigen::VectorXd flat(static_cast<Eigen::Index>(d.table_size()));
    if (!t.is_array() || t.size() != d.x) parse_fail("table must be indexed [x][y][a][b]");
    for (std::size_t x = 0; x < d.x; ++x) {
      if (!t[x].is_array() || t[x].size() != d.y) parse_fail("table[x] must have |Y| entries");
      for (std::size_t y = 0; y < d.y; ++y) {
        if (!t[x][y].is_array() || t[x][y].size() != d.a) parse_fail("table[x][y] must have |A| entries");
        for (std::size_t a = 0; a < d.a; ++a) {
          const auto row = number_list(t[x][y][a], "table[x][y][a]");
          if (row.size() != d.b) parse_fail("table[x][y][a] must have |B| entries");
          for (std::size_t b = 0; b < d.b; ++b)
            flat(static_cast<Eigen::Index>(((x * d.y + y) * d.a + a) * d.b + b)) = row[b];
        }
      }
    }
    return BoxBehavior(d, std::move(flat));
  });
}

json box_to_json(const BoxBehavior& box) {
  const auto& d = box.dims();
  json table = json::array();
  for (std::size_t x = 0; x < d.x; ++x) {
    json jx = json::array();
    for (std::size_t y = 0; y < d.y; ++y) {
      json jy = json::array();
      for (std::size_t a = 0; a < d.a; ++a) {
        json ja = json::array();
        for (std::size_t b = 0; b < d.b; ++b) ja.push_back(box(a, b, x, y));
        jy.push_back(std::move(ja));
      }
      jx.push_back(std::move(jy));
    }
    table.push_back(std::move(jx));
  }
  return json{{"alphabets", {{"a", d.a}, {"b", d.b}, {"x", d.x}, {"y", d.y}}}, {"table", std::move(table)}};
}

FamilySpec family_spec_from_json(const json& j, const std::optional<Distribution>& fallback_prior) {
  return wrap_json([&] {
    if (!j.is_object()) parse_fail("family must be an object");
    FamilySpec spec;
    spec.kind = family_kind_from_string(need(j, "kind").get<std::string>());
    if (j.contains("p0")) {
      spec.p0 = make_distribution(number_list(j.at("p0"), "p0"));
    } else if (fallback_prior) {
      spec.p0 = *fallback_prior;
    } else {
      parse_fail("family needs a prior 'p0'");
    }
    if (j.contains("dt")) spec.dt = number_list(j.at("dt"), "dt");
    if (j.contains("rates")) spec.rates = number_list(j.at("rates"), "rates");
    if (spec.kind == FamilyKind::table) {
      const json& g = need(j, "grid");
      spec.grid.times = number_list(need(g, "times"), "grid.times");
      const json& values = need(g, "values");
      if (!values.is_array()) parse_fail("grid.values must be indexed [a][k][a']");
      for (const auto& block : values) {
        if (!block.is_array()) parse_fail("grid.values[a] must be an array of rows");
        Eigen::MatrixXd m(static_cast<Eigen::Index>(block.size()), static_cast<Eigen::Index>(spec.p0.size()));
        for (std::size_t k = 0; k < block.size(); ++k) {
          const auto row = number_list(block[k], "grid.values[a][k]");
          if (row.size() != spec.p0.size()) parse_fail("grid rows must have |A| entries");
          for (std::size_t c = 0; c < row.size(); ++c)
            m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) = row[c];
        }
        spec.grid.values.push_back(std::move(m));
      }
    }
    return spec;
  });
}

json family_spec_to_json(const FamilySpec& spec) {
  json j{{"kind", std::string(to_string(spec.kind))}, {"p0", spec.p0.to_vector()}};
  if (!spec.dt.empty()) j["dt"] = spec.dt;
  if (!spec.rates.empty()) j["rates"] = spec.rates;
  if (spec.kind == FamilyKind::table) {
    json values = json::array();
    for (const auto& m : spec.grid.values) {
      json block = json::array();
      for (Eigen::Index k = 0; k < m.rows(); ++k) {
        std::vector<double> row(static_cast<std::size_t>(m.cols()));
        for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(k, c);
        block.push_back(row);
      }
      values.push_back(std::move(block));
    }
    j["grid"] = {{"times", spec.grid.times}, {"values", std::move(values)}};
  }
  return j;
}

WindowSpec window_from_json(const json& j) {
  return wrap_json([&] {
    const double length = need(j, "dt_window").get<double>();
    TimeDensity g = TimeDensity::uniform();
    if (j.contains("g")) {
      const json& gj = j.at("g");
      const std::string kind = need(gj, "kind").get<std::string>();
      if (kind == "uniform") {
        g = TimeDensity::uniform();
      } else if (kind == "truncated-exponential" || kind == "exponential") {
        g = TimeDensity::truncated_exponential(need(gj, "rate").get<double>());
      } else if (kind == "table") {
        g = TimeDensity::table(number_list(need(gj, "times"), "g.times"), number_list(need(gj, "values"), "g.values"));
      } else {
        parse_fail("unknown density kind '" + kind + "'");
      }
    }
    return WindowSpec(length, std::move(g));
  });
}

Schedule schedule_from_json(const json& j) {
  return wrap_json([&] {
    Schedule s;
    s.t_alice = j.value("tA", 0.0);
    s.t_bob = j.value("tB", 0.0);
    s.x = j.value("x", 1);
    return s;
  });
}

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> out;
  if (spec.find_first_not_of(" \t") == std::string::npos) return out;
  auto to_double = [](const std::string& s) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (s.find_first_not_of(" \t", pos) != std::string::npos) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "bad grid number '" + s + "'");
    }
  };
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) parse_fail("range grid must be start:stop:count");
    const double a = to_double(parts[0]), b = to_double(parts[1]);
    const double count = to_double(parts[2]);
    if (count < 1 || count != std::floor(count)) parse_fail("grid count must be a positive integer");
    const auto n = static_cast<std::size_t>(count);
    for (std::size_t i = 0; i < n; ++i)
      out.push_back(n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    return out;
  }
  std::stringstream ss(spec);
  for (std::string p; std::getline(ss, p, ',');) out.push_back(to_double(p));
  return out;
}

std::vector<double> grid_from_json(const json& j) {
  if (j.is_string()) return parse_grid(j.get<std::string>());
  return number_list(j, "grid");
}

std::string_view to_string(Layout l) noexcept {
  switch (l) {
    case Layout::single: return "single";
    case Layout::twobox: return "twobox";
    case Layout::window: return "window";
  }
  return "unknown";
}

std::string content_hash(const json& j) {
  const std::string canon = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ScenarioFile scenario_from_json(const json& j) {
  return wrap_json([&] {
    if (!j.is_object()) parse_fail("scenario must be a JSON object");
    ScenarioFile s;
    s.raw = j;
    s.hash = content_hash(j);
    s.id = j.value("id", s.hash.substr(0, 8));
    std::optional<Distribution> prior;
    if (j.contains("p0")) prior = make_distribution(number_list(j.at("p0"), "p0"));
    s.family = family_spec_from_json(need(j, "family"), prior);
    s.p0 = prior ? *prior : s.family.p0;
    if (j.contains("window")) s.window = window_from_json(j.at("window"));
    if (j.contains("schedule")) s.schedule = schedule_from_json(j.at("schedule"));
    s.probe_elapsed = j.value("probe_elapsed", 0.0);
    if (j.contains("grid")) s.grid = grid_from_json(j.at("grid"));
    if (j.contains("layout")) {
      const std::string l = j.at("layout").get<std::string>();
      if (l == "single") s.layout = Layout::single;
      else if (l == "twobox") s.layout = Layout::twobox;
      else if (l == "window") s.layout = Layout::window;
      else parse_fail("unknown layout '" + l + "'");
    } else {
      s.layout = s.window ? Layout::window : (s.schedule ? Layout::twobox : Layout::single);
    }
    if (s.layout == Layout::window && !s.window) parse_fail("window layout needs a 'window' block");
    s.target = j.value("target", std::string("analytic"));
    if (s.target != "analytic" && s.target != "prior" && s.target != "mc") parse_fail("unknown gof target");
    if (j.contains("n")) s.replicas = j.at("n").get<std::uint64_t>();
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    return s;
  });
}

ScenarioFile load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open scenario file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return scenario_from_json(j);
}

void write_csv_preamble(std::ostream& os, const CsvMeta& meta) {
  os << "# collapse-box " << tool_version() << " scenario=" << meta.scenario_hash << " seed=" << meta.seed << "\n";
}

std::string fmt_num(double v) {
  if (std::isnan(v)) return "nan";
  if (v == 0.0) v = 0.0;  // drop negative zero
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string fmt_sci(double v) {
  if (!std::isfinite(v)) return fmt_num(v);
  if (v == 0.0) return "0.000e0";
  int exponent = static_cast<int>(std::floor(std::log10(std::abs(v))));
  double mantissa = v / std::pow(10.0, exponent);
  if (std::abs(std::round(mantissa * 1000.0)) >= 10000.0) {
    mantissa /= 10.0;
    ++exponent;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3fe%d", mantissa, exponent);
  return buf;
}

void write_empirical_csv(std::ostream& os, const CsvMeta& meta, const std::string& scenario_id,
                         const EmpiricalDist& e) {
  write_csv_preamble(os, meta);
  os << "scenario_id,seed,n,outcome,count,freq,ci_lo,ci_hi\n";
  for (std::size_t i = 0; i < e.size(); ++i) {
    const auto [lo, hi] = e.wilson(i);
    os << scenario_id << ',' << meta.seed << ',' << e.total() << ',' << i << ',' << e.counts()[i] << ','
       << fmt_num(e.frequency(i)) << ',' << fmt_num(lo) << ',' << fmt_num(hi) << '\n';
  }
}

void write_sweep_csv(std::ostream& os, const CsvMeta& meta, const std::vector<WitnessReport>& reports) {
  write_csv_preamble(os, meta);
  os << "elapsed,tv_analytic,tv_empirical,ci_lo,ci_hi,pvalue,verdict\n";
  for (const auto& r : reports) {
    os << fmt_num(r.elapsed) << ',' << fmt_num(r.tv_analytic) << ',' << fmt_num(r.tv_empirical) << ','
       << fmt_num(r.ci_lo) << ',' << fmt_num(r.ci_hi) << ',' << fmt_num(r.p_value) << ',' << to_string(r.verdict)
       << '\n';
  }
}

std::string csv_data_section(const std::string& contents) {
  std::stringstream in(contents);
  std::string out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line[0] == '#') continue;
    out += line;
    out += '\n';
  }
  return out;
}

}  // namespace cbox
